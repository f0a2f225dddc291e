//! Classifier persistence: versioned little-endian records behind the
//! `SVCL` magic. All scalars are stored as `f64`, so `f32` models round-trip
//! exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{LinearModel, LossKind, NaiveBayesModel, NbVariant, TrainedClassifier};
use crate::scalar::{cast, Real};

const MAGIC: &[u8; 4] = b"SVCL";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("bad magic: not a classifier model file")]
    BadMagic,
    #[error("unsupported model version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated or corrupt model file")]
    Corrupt,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.inner.write_all(&[v])
    }
    fn u16(&mut self, v: u16) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn f64s(&mut self, vs: &[f64]) -> std::io::Result<()> {
        self.u32(vs.len() as u32)?;
        for &v in vs {
            self.f64(v)?;
        }
        Ok(())
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u8(&mut self) -> Result<u8, ModelIoError> {
        let mut b = [0u8; 1];
        self.inner.read_exact(&mut b).map_err(|_| ModelIoError::Corrupt)?;
        Ok(b[0])
    }
    fn u16(&mut self) -> Result<u16, ModelIoError> {
        let mut b = [0u8; 2];
        self.inner.read_exact(&mut b).map_err(|_| ModelIoError::Corrupt)?;
        Ok(u16::from_le_bytes(b))
    }
    fn u32(&mut self) -> Result<u32, ModelIoError> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b).map_err(|_| ModelIoError::Corrupt)?;
        Ok(u32::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64, ModelIoError> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b).map_err(|_| ModelIoError::Corrupt)?;
        Ok(f64::from_le_bytes(b))
    }
    fn f64s(&mut self) -> Result<Vec<f64>, ModelIoError> {
        let n = self.u32()? as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }
}

fn loss_tag(kind: LossKind) -> u8 {
    match kind {
        LossKind::Hinge => 0,
        LossKind::Logistic => 1,
        LossKind::Squared => 2,
    }
}

fn loss_from_tag(tag: u8) -> Result<LossKind, ModelIoError> {
    match tag {
        0 => Ok(LossKind::Hinge),
        1 => Ok(LossKind::Logistic),
        2 => Ok(LossKind::Squared),
        _ => Err(ModelIoError::Corrupt),
    }
}

pub fn save_classifier<S: Real>(
    model: &TrainedClassifier<S>,
    path: impl AsRef<Path>,
) -> Result<(), ModelIoError> {
    let mut w = Writer { inner: BufWriter::new(File::create(path)?) };
    w.inner.write_all(MAGIC)?;
    w.u16(VERSION)?;
    match model {
        TrainedClassifier::NaiveBayes(nb) => {
            w.u8(0)?;
            w.u8(match nb.variant {
                NbVariant::Multinomial => 0,
                NbVariant::Bernoulli => 1,
            })?;
            w.f64(nb.alpha)?;
            w.f64(nb.binarize_threshold)?;
            w.f64(nb.class_log_prior[0])?;
            w.f64(nb.class_log_prior[1])?;
            w.f64s(&nb.feature_log_prob[0])?;
            w.f64s(&nb.feature_log_prob[1])?;
            w.f64s(&nb.feature_log_absent[0])?;
            w.f64s(&nb.feature_log_absent[1])?;
        }
        TrainedClassifier::Linear(lin) => {
            w.u8(1)?;
            w.u8(loss_tag(lin.loss_kind))?;
            w.u8(u8::from(lin.converged))?;
            w.f64(lin.l2)?;
            w.f64(lin.bias.to_f64().unwrap_or(0.0))?;
            let weights: Vec<f64> =
                lin.weights.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect();
            w.f64s(&weights)?;
        }
    }
    w.inner.flush()?;
    Ok(())
}

pub fn load_classifier<S: Real>(path: impl AsRef<Path>) -> Result<TrainedClassifier<S>, ModelIoError> {
    let mut r = Reader { inner: BufReader::new(File::open(path)?) };
    let mut magic = [0u8; 4];
    r.inner.read_exact(&mut magic).map_err(|_| ModelIoError::Corrupt)?;
    if &magic != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    match r.u8()? {
        0 => {
            let variant = match r.u8()? {
                0 => NbVariant::Multinomial,
                1 => NbVariant::Bernoulli,
                _ => return Err(ModelIoError::Corrupt),
            };
            let alpha = r.f64()?;
            let binarize_threshold = r.f64()?;
            let prior0 = r.f64()?;
            let prior1 = r.f64()?;
            let lp0 = r.f64s()?;
            let lp1 = r.f64s()?;
            let la0 = r.f64s()?;
            let la1 = r.f64s()?;
            if lp0.len() != lp1.len() {
                return Err(ModelIoError::Corrupt);
            }
            Ok(TrainedClassifier::NaiveBayes(NaiveBayesModel {
                variant,
                alpha,
                binarize_threshold,
                class_log_prior: [prior0, prior1],
                feature_log_prob: [lp0, lp1],
                feature_log_absent: [la0, la1],
            }))
        }
        1 => {
            let loss_kind = loss_from_tag(r.u8()?)?;
            let converged = r.u8()? != 0;
            let l2 = r.f64()?;
            let bias = r.f64()?;
            let weights = r.f64s()?;
            Ok(TrainedClassifier::Linear(LinearModel {
                weights: weights.into_iter().map(cast).collect(),
                bias: cast(bias),
                loss_kind,
                l2,
                converged,
            }))
        }
        _ => Err(ModelIoError::Corrupt),
    }
}
