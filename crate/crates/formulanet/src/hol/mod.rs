//! Front end for a HOL-Light-like formula syntax.
//!
//! Binders are `!` (forall), `?` (exists), `?!` (exists-unique), `@` (choice)
//! and `\` (lambda), written `!x. body`. Infix operators, loosest to
//! tightest: `<=>`, `==>`, `\/`, `/\`, `=`, all right-associative; function
//! application (`f x y`) binds tightest and associates left. The parser
//! records names only; whether a leaf is a variable or a constant is decided
//! later from binding structure.

mod lex;
mod parse;
mod print;

pub use lex::{tokenize, Token, TokenKind};
pub use parse::parse;
pub use print::print;

use std::collections::HashSet;
use std::fmt;

/// Binder lexemes recognized by the lexer and the graph builder.
pub const BINDERS: [&str; 5] = ["!", "?", "?!", "@", "\\"];

/// Infix operators, loosest binding first.
pub const INFIX_OPS: [&str; 5] = ["<=>", "==>", "\\/", "/\\", "="];

/// Head name used when an application head is itself a compound term
/// (e.g. a beta redex `(\x. x) y`); the compound becomes the first child.
pub const APP_SENTINEL: &str = "APP";

/// Parse tree of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Quantifier {
        binder: String,
        var: String,
        body: Box<Ast>,
    },
    Apply {
        head: String,
        args: Vec<Ast>,
    },
    Leaf {
        name: String,
    },
}

impl Ast {
    pub fn leaf(name: &str) -> Ast {
        Ast::Leaf {
            name: name.to_string(),
        }
    }

    pub fn apply(head: &str, args: Vec<Ast>) -> Ast {
        Ast::Apply {
            head: head.to_string(),
            args,
        }
    }

    pub fn quantifier(binder: &str, var: &str, body: Ast) -> Ast {
        Ast::Quantifier {
            binder: binder.to_string(),
            var: var.to_string(),
            body: Box::new(body),
        }
    }

    /// Names occurring outside any enclosing binder for that name, in
    /// first-occurrence order. A name is a variable candidate iff
    /// `is_constant` rejects it; reserved infix operators and the APP
    /// sentinel are always constants.
    pub fn free_variables(&self, is_constant: &dyn Fn(&str) -> bool) -> Vec<String> {
        let mut bound: Vec<&str> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut order: Vec<String> = Vec::new();
        self.collect_free(is_constant, &mut bound, &mut seen, &mut order);
        order
    }

    fn collect_free<'a>(
        &'a self,
        is_constant: &dyn Fn(&str) -> bool,
        bound: &mut Vec<&'a str>,
        seen: &mut HashSet<String>,
        order: &mut Vec<String>,
    ) {
        let visit = |name: &str, seen: &mut HashSet<String>, order: &mut Vec<String>, bound: &[&str]| {
            if INFIX_OPS.contains(&name) || name == APP_SENTINEL {
                return;
            }
            if !bound.contains(&name) && !is_constant(name) && seen.insert(name.to_string()) {
                order.push(name.to_string());
            }
        };
        match self {
            Ast::Leaf { name } => visit(name, seen, order, bound),
            Ast::Apply { head, args } => {
                visit(head, seen, order, bound);
                for arg in args {
                    arg.collect_free(is_constant, bound, seen, order);
                }
            }
            Ast::Quantifier { var, body, .. } => {
                bound.push(var);
                body.collect_free(is_constant, bound, seen, order);
                bound.pop();
            }
        }
    }

    /// Closes the formula under universal quantifiers: one `!` per free
    /// variable, prepended in first-occurrence order. Idempotent.
    pub fn close(&self, is_constant: &dyn Fn(&str) -> bool) -> Ast {
        let free = self.free_variables(is_constant);
        let mut out = self.clone();
        for var in free.into_iter().rev() {
            out = Ast::Quantifier {
                binder: "!".to_string(),
                var,
                body: Box::new(out),
            };
        }
        out
    }

    /// All names appearing in the tree (leaf names, application heads and
    /// binder variables), used when picking fresh names for renaming.
    pub fn all_names(&self, out: &mut HashSet<String>) {
        match self {
            Ast::Leaf { name } => {
                out.insert(name.clone());
            }
            Ast::Apply { head, args } => {
                out.insert(head.clone());
                for arg in args {
                    arg.all_names(out);
                }
            }
            Ast::Quantifier { var, body, .. } => {
                out.insert(var.clone());
                body.all_names(out);
            }
        }
    }
}

/// Strips a leading `|-` turnstile (a dataset artifact, not formula content).
pub fn strip_turnstile(text: &str) -> &str {
    let trimmed = text.trim_start();
    if let Some(rest) = trimmed.strip_prefix("|-") {
        if rest.is_empty() || rest.starts_with(|c: char| c.is_whitespace() || c == '(') {
            return rest;
        }
    }
    trimmed
}

/// Convenience: tokenize + parse in one call.
pub fn parse_text(text: &str) -> Result<Ast, ParseError> {
    parse(&tokenize(strip_turnstile(text))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    IllegalCharacter { pos: usize, ch: char },
    UnbalancedParens { pos: usize },
    DanglingBinder { pos: usize },
    EmptyExpression,
    UnexpectedToken { pos: usize, text: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::IllegalCharacter { pos, ch } => {
                write!(f, "illegal character {ch:?} at byte {pos}")
            }
            ParseError::UnbalancedParens { pos } => {
                write!(f, "unbalanced parentheses at byte {pos}")
            }
            ParseError::DanglingBinder { pos } => {
                write!(f, "binder without variable/dot/body at byte {pos}")
            }
            ParseError::EmptyExpression => write!(f, "empty expression"),
            ParseError::UnexpectedToken { pos, text } => {
                write!(f, "unexpected token {text:?} at byte {pos}")
            }
        }
    }
}

impl std::error::Error for ParseError {}
