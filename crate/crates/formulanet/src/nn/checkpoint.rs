//! Self-describing binary checkpoint container, header `FNETCKPT v1`.
//!
//! Layout after the magic line: a key=value metadata map, the vocabulary
//! token list, the named parameter entries (name, precision, shape, raw
//! little-endian values, trainable flag), and optionally the optimizer state
//! (hyperparameters plus per-parameter squared-gradient accumulators).

use super::{Dtype, Matrix, NnError, ParamStore, RmsProp, Scalar};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

pub const CKPT_MAGIC: &[u8] = b"FNETCKPT v1\n";

#[derive(Debug, Clone)]
pub struct Checkpoint<S> {
    pub params: ParamStore<S>,
    pub vocab: Vec<String>,
    pub meta: BTreeMap<String, String>,
    pub optimizer: Option<RmsProp<S>>,
}

fn write_u32(w: &mut impl Write, v: u32) -> Result<(), NnError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_str(w: &mut impl Write, s: &str) -> Result<(), NnError> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn write_matrix<S: Scalar>(w: &mut impl Write, m: &Matrix<S>) -> Result<(), NnError> {
    w.write_all(&[S::DTYPE.tag()])?;
    write_u32(w, m.rows() as u32)?;
    write_u32(w, m.cols() as u32)?;
    for v in m.values() {
        w.write_all(&v.to_le_bytes_vec())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64, NnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64, NnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_str(r: &mut impl Read) -> Result<String, NnError> {
    let len = read_u32(r)? as usize;
    if len > 1 << 24 {
        return Err(NnError::BadCheckpoint(format!("string length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| NnError::BadCheckpoint(e.to_string()))
}

fn read_matrix<S: Scalar>(r: &mut impl Read) -> Result<Matrix<S>, NnError> {
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let dtype = Dtype::from_tag(tag[0])
        .ok_or_else(|| NnError::BadCheckpoint(format!("dtype tag {}", tag[0])))?;
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let count = rows
        .checked_mul(cols)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| NnError::BadCheckpoint(format!("matrix {rows}x{cols}")))?;
    let width = dtype.byte_width();
    let mut raw = vec![0u8; count * width];
    r.read_exact(&mut raw)?;
    let values: Vec<S> = match dtype {
        d if d == S::DTYPE => raw.chunks_exact(width).map(S::from_le_slice).collect(),
        Dtype::F32 => raw
            .chunks_exact(4)
            .map(|c| S::from_f64(f32::from_le_slice(c) as f64))
            .collect(),
        Dtype::F64 => raw
            .chunks_exact(8)
            .map(|c| S::from_f64(f64::from_le_slice(c)))
            .collect(),
    };
    Matrix::from_vec(rows, cols, values)
}

pub fn write_checkpoint<S: Scalar>(path: &Path, ckpt: &Checkpoint<S>) -> Result<(), NnError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(CKPT_MAGIC)?;

    write_u32(&mut w, ckpt.meta.len() as u32)?;
    for (k, v) in &ckpt.meta {
        write_str(&mut w, k)?;
        write_str(&mut w, v)?;
    }

    write_u32(&mut w, ckpt.vocab.len() as u32)?;
    for token in &ckpt.vocab {
        write_str(&mut w, token)?;
    }

    write_u32(&mut w, ckpt.params.len() as u32)?;
    for id in ckpt.params.ids() {
        write_str(&mut w, ckpt.params.name(id))?;
        w.write_all(&[u8::from(ckpt.params.is_trainable(id))])?;
        write_matrix(&mut w, ckpt.params.value(id))?;
    }

    match &ckpt.optimizer {
        None => w.write_all(&[0u8])?,
        Some(opt) => {
            w.write_all(&[1u8])?;
            w.write_all(&opt.step_count.to_le_bytes())?;
            for hp in [opt.learning_rate, opt.decay_rate, opt.epsilon, opt.weight_decay] {
                w.write_all(&hp.to_le_bytes())?;
            }
            let accs: Vec<_> = opt.accumulators().collect();
            write_u32(&mut w, accs.len() as u32)?;
            for (id, m) in accs {
                write_str(&mut w, ckpt.params.name(id))?;
                write_matrix(&mut w, m)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<S: Scalar>(path: &Path) -> Result<Checkpoint<S>, NnError> {
    let file = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(file);
    let mut magic = vec![0u8; CKPT_MAGIC.len()];
    r.read_exact(&mut magic)?;
    if magic != CKPT_MAGIC {
        return Err(NnError::BadCheckpoint("wrong magic header".to_string()));
    }

    let n_meta = read_u32(&mut r)?;
    let mut meta = BTreeMap::new();
    for _ in 0..n_meta {
        let k = read_str(&mut r)?;
        let v = read_str(&mut r)?;
        meta.insert(k, v);
    }

    let n_vocab = read_u32(&mut r)?;
    let mut vocab = Vec::with_capacity(n_vocab as usize);
    for _ in 0..n_vocab {
        vocab.push(read_str(&mut r)?);
    }

    let n_entries = read_u32(&mut r)?;
    let mut params = ParamStore::new();
    for _ in 0..n_entries {
        let name = read_str(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let value = read_matrix::<S>(&mut r)?;
        params.add(&name, value, flag[0] != 0);
    }

    let mut has_opt = [0u8; 1];
    r.read_exact(&mut has_opt)?;
    let optimizer = if has_opt[0] == 1 {
        let step_count = read_u64(&mut r)?;
        let lr = read_f64(&mut r)?;
        let rho = read_f64(&mut r)?;
        let eps = read_f64(&mut r)?;
        let wd = read_f64(&mut r)?;
        let mut opt = RmsProp::<S>::new(lr, wd);
        opt.decay_rate = rho;
        opt.epsilon = eps;
        opt.step_count = step_count;
        let n_acc = read_u32(&mut r)?;
        for _ in 0..n_acc {
            let name = read_str(&mut r)?;
            let m = read_matrix::<S>(&mut r)?;
            let id = params.id(&name).ok_or_else(|| {
                NnError::BadCheckpoint(format!("accumulator for unknown parameter {name:?}"))
            })?;
            opt.set_accumulator(id, m);
        }
        Some(opt)
    } else {
        None
    };

    Ok(Checkpoint {
        params,
        vocab,
        meta,
        optimizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_checkpoint() -> Checkpoint<f32> {
        let mut params = ParamStore::new();
        params.add("proj", Matrix::from_vec(2, 3, vec![0.1, 0.2, 0.3, -0.1, -0.2, -0.3]).unwrap(), true);
        params.add("bn.mean", Matrix::zeros(1, 3), false);
        let mut meta = BTreeMap::new();
        meta.insert("dim".to_string(), "3".to_string());
        meta.insert("steps".to_string(), "1".to_string());
        let mut opt = RmsProp::new(0.001, 1e-4);
        opt.step_count = 17;
        opt.set_accumulator(params.id("proj").unwrap(), Matrix::filled(2, 3, 0.25));
        Checkpoint {
            params,
            vocab: vec!["VAR".to_string(), "VARFUNC".to_string(), "UNKNOWN".to_string()],
            meta,
            optimizer: Some(opt),
        }
    }

    #[test]
    fn round_trip_bitwise() {
        let dir = std::env::temp_dir().join(format!("fnet-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.ckpt");
        let ckpt = sample_checkpoint();
        write_checkpoint(&path, &ckpt).unwrap();
        let back: Checkpoint<f32> = read_checkpoint(&path).unwrap();
        assert_eq!(back.vocab, ckpt.vocab);
        assert_eq!(back.meta, ckpt.meta);
        assert_eq!(back.params.len(), 2);
        for id in ckpt.params.ids() {
            let name = ckpt.params.name(id);
            let rid = back.params.id(name).unwrap();
            assert_eq!(back.params.value(rid), ckpt.params.value(id), "{name}");
            assert_eq!(back.params.is_trainable(rid), ckpt.params.is_trainable(id));
        }
        let opt = back.optimizer.unwrap();
        assert_eq!(opt.step_count, 17);
        assert_eq!(opt.learning_rate, 0.001);
        assert_eq!(
            opt.accumulators().next().unwrap().1,
            &Matrix::filled(2, 3, 0.25)
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn precision_upconversion_on_read() {
        let dir = std::env::temp_dir().join(format!("fnet-ckpt64-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("b.ckpt");
        write_checkpoint(&path, &sample_checkpoint()).unwrap();
        let as64: Checkpoint<f64> = read_checkpoint(&path).unwrap();
        let id = as64.params.id("proj").unwrap();
        assert!((as64.params.value(id).get(0, 0) - 0.1f32 as f64).abs() < 1e-12);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = std::env::temp_dir().join(format!("fnet-ckptbad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.ckpt");
        std::fs::write(&path, b"NOTACKPT v9\ngarbage").unwrap();
        let err = read_checkpoint::<f32>(&path).unwrap_err();
        assert!(matches!(err, NnError::BadCheckpoint(_)));
        std::fs::remove_dir_all(&dir).ok();
    }
}
