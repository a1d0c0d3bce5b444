//! Checkpoint file: `"AGCK"`, version u16, a u32-prefixed JSON header
//! holding the config, label vocabulary, completed epochs and the split
//! seed the training set came from (if known), the Adam step
//! u64, a u32 tensor count, then named tensors. Each tensor is a u16-prefixed
//! name, a u8 rank, u32 dims and little-endian f32 data. Parameters come
//! first, then `adam.m.*` and `adam.v.*` in the same order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamState, ClassifierParams, LabelVocab, ModelConfig, Task};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AGCK";
const VERSION: u16 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub vocab: LabelVocab,
    pub epochs_done: usize,
    pub split_seed: Option<u64>,
    pub params: ClassifierParams<f32>,
    pub adam: AdamState<f32>,
}

impl Checkpoint {
    pub fn bit_eq(&self, other: &Checkpoint) -> bool {
        self.config == other.config
            && self.vocab == other.vocab
            && self.epochs_done == other.epochs_done
            && self.split_seed == other.split_seed
            && self.adam.t == other.adam.t
            && self.params.bit_eq(&other.params)
            && self.adam.m.bit_eq(&other.adam.m)
            && self.adam.v.bit_eq(&other.adam.v)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    vocab: LabelVocab,
    epochs_done: usize,
    #[serde(default)]
    split_seed: Option<u64>,
}

fn check_vocab(config: &ModelConfig, vocab: &LabelVocab) -> Result<()> {
    for task in Task::ALL {
        if vocab.names(task).len() != config.classes(task) {
            return Err(Error::validation(format!(
                "{} vocabulary has {} names for {} classes",
                task.as_str(),
                vocab.names(task).len(),
                config.classes(task)
            )));
        }
    }
    Ok(())
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Result<Vec<u8>> {
    check_vocab(&ck.config, &ck.vocab)?;
    let expected = ClassifierParams::<f32>::zeros(&ck.config)?.layout();
    if ck.params.layout() != expected || ck.adam.m.layout() != expected || ck.adam.v.layout() != expected {
        return Err(Error::Shape("checkpoint tensors do not match its config".into()));
    }
    let header = serde_json::to_string(&Header {
        config: ck.config.clone(),
        vocab: ck.vocab.clone(),
        epochs_done: ck.epochs_done,
        split_seed: ck.split_seed,
    })
    .expect("header serializes");
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.str_u32(&header);
    w.u64(ck.adam.t);
    let groups = [("", &ck.params), ("adam.m.", &ck.adam.m), ("adam.v.", &ck.adam.v)];
    w.u32((expected.len() * groups.len()) as u32);
    for (prefix, p) in groups {
        for (name, shape, data) in p.tensors() {
            w.str_u16(&format!("{prefix}{name}"));
            w.u8(shape.len() as u8);
            for d in shape {
                w.u32(d as u32);
            }
            w.f32s(data);
        }
    }
    Ok(w.buf)
}

fn read_group(r: &mut Reader<'_>, prefix: &str, into: &mut ClassifierParams<f32>) -> Result<()> {
    let layout = into.layout();
    for ((name, shape), slot) in layout.into_iter().zip(into.tensors_mut()) {
        let got = r.str_u16()?;
        let want = format!("{prefix}{name}");
        if got != want {
            return Err(r.err(format!("expected tensor {want}, found {got}")));
        }
        let rank = r.u8()? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(r.u32()? as usize);
        }
        if dims != shape {
            return Err(r.err(format!("{want} has shape {dims:?}, config implies {shape:?}")));
        }
        let data = r.f32s(slot.len())?;
        slot.copy_from_slice(&data);
    }
    Ok(())
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader::new(bytes, "checkpoint");
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let header: Header =
        serde_json::from_str(r.str_u32()?).map_err(|e| r.err(format!("bad header: {e}")))?;
    header.config.validate()?;
    check_vocab(&header.config, &header.vocab)?;
    let t = r.u64()?;
    let count = r.u32()? as usize;
    let mut params = ClassifierParams::<f32>::zeros(&header.config)?;
    let expected = params.layout().len() * 3;
    if count != expected {
        return Err(r.err(format!("{count} tensors, config implies {expected}")));
    }
    let mut m = params.zeros_like();
    let mut v = params.zeros_like();
    read_group(&mut r, "", &mut params)?;
    read_group(&mut r, "adam.m.", &mut m)?;
    read_group(&mut r, "adam.v.", &mut v)?;
    r.finish()?;
    Ok(Checkpoint {
        config: header.config,
        vocab: header.vocab,
        epochs_done: header.epochs_done,
        split_seed: header.split_seed,
        params,
        adam: AdamState { m, v, t },
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, encode_checkpoint(ck)?)?)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}
