//! Named parameter storage. Entries are either trainable weights or
//! non-trainable state (batch-norm running statistics); both travel through
//! checkpoints.

use super::{Gradients, Matrix, Scalar};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone)]
pub(crate) struct Entry<S> {
    pub name: String,
    pub value: Matrix<S>,
    pub trainable: bool,
}

#[derive(Debug, Clone)]
pub struct ParamStore<S> {
    pub(crate) entries: Vec<Entry<S>>,
    by_name: HashMap<String, ParamId>,
}

impl<S: Scalar> Default for ParamStore<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> ParamStore<S> {
    pub fn new() -> ParamStore<S> {
        ParamStore {
            entries: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, value: Matrix<S>, trainable: bool) -> ParamId {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate parameter name {name:?}"
        );
        let id = ParamId(self.entries.len());
        self.entries.push(Entry {
            name: name.to_string(),
            value,
            trainable,
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Matrix<S> {
        &self.entries[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Matrix<S> {
        &mut self.entries[id.0].value
    }

    pub fn is_trainable(&self, id: ParamId) -> bool {
        self.entries[id.0].trainable
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn trainable_ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.ids().filter(|&id| self.is_trainable(id))
    }

    /// Gradient for `id`, or zeros when the loss never reached it.
    pub fn grad_or_zero(&self, grads: &Gradients<S>, id: ParamId) -> Matrix<S> {
        match grads.get(id) {
            Some(g) => g.clone(),
            None => {
                let (r, c) = self.value(id).shape();
                Matrix::zeros(r, c)
            }
        }
    }

    /// Converts every entry to a different element precision.
    pub fn convert<T: Scalar>(&self) -> ParamStore<T> {
        let mut out = ParamStore::new();
        for entry in &self.entries {
            out.add(&entry.name, entry.value.convert(), entry.trainable);
        }
        out
    }

    /// Total trainable scalar count, for diagnostics.
    pub fn trainable_values(&self) -> usize {
        self.trainable_ids()
            .map(|id| {
                let (r, c) = self.value(id).shape();
                r * c
            })
            .sum()
    }
}
