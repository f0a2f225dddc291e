//! Embedding persistence.
//!
//! Two formats:
//! * text — header line `V dim`, then one `word v1 .. vdim` line per word,
//!   components printed with six significant digits;
//! * binary — magic `SVW2`, little-endian `u32` V and dim, then each word as
//!   a length-prefixed UTF-8 string followed by `dim` IEEE-754 `f32` values.
//!
//! Binary round-trips are bit-exact for `f32` models; text round-trips are
//! within `1e-5` per component. Only the input (word) vectors are persisted.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingError, EmbeddingModel, TrainingConfig, Vocabulary};
use crate::linalg::Mat;
use crate::scalar::{cast, Real};

const MAGIC: &[u8; 4] = b"SVW2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl std::str::FromStr for VectorFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" | "vec" => Ok(VectorFormat::Text),
            "binary" | "bin" => Ok(VectorFormat::Binary),
            other => Err(format!("unknown vector format '{other}' (expected text|binary)")),
        }
    }
}

fn truncated() -> EmbeddingError {
    EmbeddingError::Io(std::io::Error::new(
        std::io::ErrorKind::UnexpectedEof,
        "truncated embedding file",
    ))
}

fn parse_error(line: usize, msg: &str) -> EmbeddingError {
    EmbeddingError::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("line {line}: {msg}"),
    ))
}

impl<S: Real> EmbeddingModel<S> {
    pub fn save(&self, path: impl AsRef<Path>, format: VectorFormat) -> Result<(), EmbeddingError> {
        let mut w = BufWriter::new(File::create(path)?);
        match format {
            VectorFormat::Text => {
                writeln!(w, "{} {}", self.vocab().len(), self.dim())?;
                for i in 0..self.vocab().len() {
                    write!(w, "{}", self.vocab().word(i))?;
                    for &v in self.input_vectors().row(i) {
                        // Six significant digits.
                        write!(w, " {:.5e}", v.to_f64().unwrap_or(0.0))?;
                    }
                    writeln!(w)?;
                }
            }
            VectorFormat::Binary => {
                w.write_all(MAGIC)?;
                w.write_all(&(self.vocab().len() as u32).to_le_bytes())?;
                w.write_all(&(self.dim() as u32).to_le_bytes())?;
                for i in 0..self.vocab().len() {
                    let bytes = self.vocab().word(i).as_bytes();
                    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
                    w.write_all(bytes)?;
                    for &v in self.input_vectors().row(i) {
                        w.write_all(&(v.to_f32().unwrap_or(0.0)).to_le_bytes())?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a model saved by [`save`](Self::save); the format is detected
    /// from the file contents. Output vectors are not persisted, so the
    /// loaded model is suitable for queries and encoding, not for resuming
    /// training.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        load_model(path)
    }
}

/// Loads either format: files starting with the `SVW2` magic are binary,
/// anything else must follow the text layout.
pub fn load_model<S: Real>(path: impl AsRef<Path>) -> Result<EmbeddingModel<S>, EmbeddingError> {
    let mut file = File::open(&path)?;
    let mut head = [0u8; 4];
    let n = file.read(&mut head)?;
    if n == 4 && &head == MAGIC {
        return load_binary(file);
    }
    drop(file);
    load_text(path)
}

fn load_binary<S: Real>(mut file: File) -> Result<EmbeddingModel<S>, EmbeddingError> {
    let mut buf4 = [0u8; 4];
    let mut read_u32 = |f: &mut File| -> Result<u32, EmbeddingError> {
        f.read_exact(&mut buf4).map_err(|_| truncated())?;
        Ok(u32::from_le_bytes(buf4))
    };
    let v = read_u32(&mut file)? as usize;
    let dim = read_u32(&mut file)? as usize;
    let mut reader = BufReader::new(file);
    let mut entries = Vec::with_capacity(v);
    let mut input = Mat::<S>::zeros(v, dim);
    let mut word_buf = Vec::new();
    for i in 0..v {
        let mut len_bytes = [0u8; 4];
        reader.read_exact(&mut len_bytes).map_err(|_| truncated())?;
        let len = u32::from_le_bytes(len_bytes) as usize;
        word_buf.resize(len, 0);
        reader.read_exact(&mut word_buf).map_err(|_| truncated())?;
        let word = String::from_utf8(word_buf.clone()).map_err(|_| {
            EmbeddingError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "word is not valid UTF-8",
            ))
        })?;
        entries.push((word, 0u64));
        let row = input.row_mut(i);
        let mut f32_bytes = [0u8; 4];
        for value in row.iter_mut() {
            reader.read_exact(&mut f32_bytes).map_err(|_| truncated())?;
            *value = cast(f32::from_le_bytes(f32_bytes) as f64);
        }
    }
    let vocab = Vocabulary::from_entries(entries, 0)?;
    let output = Mat::zeros(v, dim);
    let config = TrainingConfig { dim, min_count: 0, ..TrainingConfig::default() };
    Ok(EmbeddingModel::from_parts(vocab, input, output, config))
}

fn load_text<S: Real>(path: impl AsRef<Path>) -> Result<EmbeddingModel<S>, EmbeddingError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(truncated)??;
    let mut parts = header.split_whitespace();
    let v: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(1, "expected header 'V dim'"))?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(1, "expected header 'V dim'"))?;
    if parts.next().is_some() {
        return Err(parse_error(1, "expected header 'V dim'"));
    }
    let mut entries = Vec::with_capacity(v);
    let mut input = Mat::<S>::zeros(v, dim);
    for i in 0..v {
        let line = lines.next().ok_or_else(truncated)??;
        let mut fields = line.split_whitespace();
        let word = fields.next().ok_or_else(|| parse_error(i + 2, "missing word"))?;
        entries.push((word.to_string(), 0u64));
        let row = input.row_mut(i);
        for (d, value) in row.iter_mut().enumerate() {
            let field = fields.next().ok_or_else(truncated)?;
            let parsed: f64 = field
                .parse()
                .map_err(|_| parse_error(i + 2, &format!("bad component {d}")))?;
            *value = cast(parsed);
        }
        if fields.next().is_some() {
            return Err(parse_error(i + 2, "too many components"));
        }
    }
    let vocab = Vocabulary::from_entries(entries, 0)?;
    let output = Mat::zeros(v, dim);
    let config = TrainingConfig { dim, min_count: 0, ..TrainingConfig::default() };
    Ok(EmbeddingModel::from_parts(vocab, input, output, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_model(v: usize, dim: usize) -> EmbeddingModel<f32> {
        let words: Vec<String> = (0..v).map(|i| format!("كلمه{i}")).collect();
        let mut m = EmbeddingModel::<f32>::with_random_vectors(words, dim, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for x in m.input.as_mut_slice() {
            *x = rng.gen_range(-2.0..2.0);
        }
        m
    }

    #[test]
    fn binary_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = random_model(17, 9);
        m.save(&path, VectorFormat::Binary).unwrap();
        let loaded = load_model::<f32>(&path).unwrap();
        assert_eq!(loaded.vocab().words(), m.vocab().words());
        assert_eq!(loaded.input_vectors().as_slice(), m.input_vectors().as_slice());
    }

    #[test]
    fn text_round_trip_within_1e5() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vec");
        let m = random_model(11, 6);
        m.save(&path, VectorFormat::Text).unwrap();
        let loaded = load_model::<f32>(&path).unwrap();
        assert_eq!(loaded.vocab().words(), m.vocab().words());
        let max_err = m
            .input_vectors()
            .as_slice()
            .iter()
            .zip(loaded.input_vectors().as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_err < 1e-5, "max error {max_err}");
    }

    #[test]
    fn truncated_text_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vec");
        std::fs::write(&path, "3 2\nا 1.0 2.0\nب 3.0 4.0\n").unwrap();
        assert!(load_model::<f32>(&path).is_err());
    }

    #[test]
    fn truncated_binary_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = random_model(4, 3);
        m.save(&path, VectorFormat::Binary).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(load_model::<f32>(&path).is_err());
    }

    #[test]
    fn duplicate_word_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vec");
        std::fs::write(&path, "2 1\nا 1.0\nا 2.0\n").unwrap();
        assert!(matches!(
            load_model::<f32>(&path),
            Err(EmbeddingError::DuplicateWord { .. })
        ));
    }

    #[test]
    fn bad_magic_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        std::fs::write(&path, b"XXXX rest").unwrap();
        assert!(load_model::<f32>(&path).is_err());
    }

    #[test]
    fn f64_model_binary_round_trip_via_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let words = vec!["ا".to_string(), "ب".to_string()];
        let m = EmbeddingModel::<f64>::with_random_vectors(words, 4, 2).unwrap();
        m.save(&path, VectorFormat::Binary).unwrap();
        let loaded = load_model::<f64>(&path).unwrap();
        for (a, b) in m.input_vectors().as_slice().iter().zip(loaded.input_vectors().as_slice()) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
