//! Versioned binary checkpoint: config, vocabularies, and every parameter
//! tensor, with bit-exact round-trips.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            b"DSMC"
//! version          u32            (currently 1)
//! config           u64 length + serde_json bytes of ModelConfig
//! word vocabulary  u64 count + per token: u64 length + UTF-8 bytes
//! char vocabulary  same
//! parameters       u64 count + per parameter:
//!                    name   u64 length + UTF-8 bytes
//!                    shape  u32 rank + u64 per dimension
//!                    values f64 (IEEE 754 bits) per element
//! ```
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! crash never leaves a partial checkpoint at the target path.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig};
use crate::tensor::Tensor;
use crate::vocab::Vocabulary;

const MAGIC: &[u8; 4] = b"DSMC";
const VERSION: u32 = 1;

fn write_bytes<W: Write>(w: &mut W, bytes: &[u8]) -> Result<()> {
    w.write_all(&(bytes.len() as u64).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn write_vocab<W: Write>(w: &mut W, vocab: &Vocabulary) -> Result<()> {
    w.write_all(&(vocab.len() as u64).to_le_bytes())?;
    for token in vocab.tokens() {
        write_bytes(w, token.as_bytes())?;
    }
    Ok(())
}

/// Serializes a model to a writer.
pub fn save<W: Write>(model: &Model, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let config =
        serde_json::to_vec(&model.config).map_err(|e| Error::Checkpoint(e.to_string()))?;
    write_bytes(w, &config)?;
    write_vocab(w, &model.word_vocab)?;
    write_vocab(w, &model.char_vocab)?;

    let params = model.params();
    w.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in params {
        write_bytes(w, p.name.as_bytes())?;
        w.write_all(&(p.value.shape().len() as u32).to_le_bytes())?;
        for &dim in p.value.shape() {
            w.write_all(&(dim as u64).to_le_bytes())?;
        }
        for &v in p.value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<()> {
        self.inner
            .read_exact(buf)
            .map_err(|e| Error::Checkpoint(format!("truncated or corrupt checkpoint: {e}")))
    }

    fn u32(&mut self) -> Result<u32> {
        let mut buf = [0u8; 4];
        self.exact(&mut buf)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut buf = [0u8; 8];
        self.exact(&mut buf)?;
        Ok(u64::from_le_bytes(buf))
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let n = self.u64()?;
        // A length beyond this is certainly corruption, not data.
        if n > (1 << 32) {
            return Err(Error::Checkpoint(format!("implausible {what} length {n}")));
        }
        Ok(n as usize)
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.len(what)?;
        let mut buf = vec![0u8; len];
        self.exact(&mut buf)?;
        String::from_utf8(buf).map_err(|_| Error::Checkpoint(format!("{what} is not UTF-8")))
    }

    fn vocab(&mut self) -> Result<Vocabulary> {
        let count = self.len("vocabulary")?;
        let mut tokens = Vec::with_capacity(count);
        for _ in 0..count {
            tokens.push(self.string("vocabulary token")?);
        }
        Vocabulary::from_tokens(tokens)
            .map_err(|e| Error::Checkpoint(format!("bad vocabulary: {e}")))
    }
}

/// Deserializes a model from a reader.
pub fn load<R: Read>(r: R) -> Result<Model> {
    let mut r = Reader { inner: r };
    let mut magic = [0u8; 4];
    r.exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "checkpoint version {version}, this build reads {VERSION}"
        )));
    }
    let config: ModelConfig = serde_json::from_str(&r.string("config")?)
        .map_err(|e| Error::Checkpoint(format!("bad config: {e}")))?;
    let word_vocab = r.vocab()?;
    let char_vocab = r.vocab()?;

    let (mut model, _) = Model::new(config, word_vocab, char_vocab, None)?;

    let count = r.len("parameter list")?;
    if count != model.params().len() {
        return Err(Error::Checkpoint(format!(
            "checkpoint has {count} parameters, model expects {}",
            model.params().len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for expected in model.params().iter().map(|p| p.name.clone()).collect::<Vec<_>>() {
        let name = r.string("parameter name")?;
        if name != expected {
            return Err(Error::Checkpoint(format!(
                "parameter order mismatch: {name} where {expected} expected"
            )));
        }
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(self_check_dim(r.u64()?)?);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            r.exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        values.push(
            Tensor::new(shape, data).map_err(|e| Error::Checkpoint(format!("bad tensor: {e}")))?,
        );
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after checkpoint".into()));
    }
    model
        .set_param_values(&values)
        .map_err(|e| Error::Checkpoint(format!("parameter shapes do not match: {e}")))?;
    Ok(model)
}

fn self_check_dim(dim: u64) -> Result<usize> {
    if dim > (1 << 32) {
        return Err(Error::Checkpoint(format!("implausible dimension {dim}")));
    }
    Ok(dim as usize)
}

/// Writes a checkpoint atomically (temp file + rename).
pub fn save_to_path(model: &Model, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut writer = BufWriter::new(File::create(&tmp)?);
        save(model, &mut writer)?;
        writer.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_from_path(path: &Path) -> Result<Model> {
    let file = File::open(path)
        .map_err(|e| Error::Checkpoint(format!("cannot open {}: {e}", path.display())))?;
    load(BufReader::new(file))
}
