//! Dataset file: `"AGDS"`, version u16, a u32-prefixed JSON manifest, then
//! per instance: u32-prefixed artwork name, id u64, `visual_dim` f32 values,
//! three u32 label indices (artist, style, genre), a u8 context flag and,
//! when the flag is 1, `context_dim` f32 values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabelVocab, LabeledInstance, Task};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::graph::NodeId;

const MAGIC: &[u8; 4] = b"AGDS";
const VERSION: u16 = 1;

const LAYOUT: &str = "per instance: name (u32 len + utf-8), artwork id u64, visual f32 x visual_dim, \
labels u32 x 3 (artist, style, genre), context flag u8, context f32 x context_dim if flag = 1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub layout: String,
    pub visual_dim: usize,
    pub context_dim: usize,
    pub instances: usize,
    pub with_context: usize,
    pub vocab: LabelVocab,
}

impl DatasetManifest {
    pub fn describe(set: &[LabeledInstance], visual_dim: usize, context_dim: usize, vocab: &LabelVocab) -> Self {
        DatasetManifest {
            layout: LAYOUT.into(),
            visual_dim,
            context_dim,
            instances: set.len(),
            with_context: set.iter().filter(|i| i.context.is_some()).count(),
            vocab: vocab.clone(),
        }
    }
}

fn check(inst: &LabeledInstance, m: &DatasetManifest) -> Result<()> {
    if inst.visual.len() != m.visual_dim {
        return Err(Error::Shape(format!("{} visual length {}", inst.name, inst.visual.len())));
    }
    if let Some(c) = &inst.context {
        if c.len() != m.context_dim {
            return Err(Error::Shape(format!("{} context length {}", inst.name, c.len())));
        }
    }
    let values = inst.visual.iter().chain(inst.context.iter().flatten());
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(format!("{} has non-finite values", inst.name)));
    }
    for task in Task::ALL {
        let len = m.vocab.names(task).len();
        if inst.label(task) >= len {
            return Err(Error::Index {
                index: inst.label(task),
                len,
            });
        }
    }
    Ok(())
}

pub fn encode_dataset(manifest: &DatasetManifest, set: &[LabeledInstance]) -> Result<Vec<u8>> {
    if manifest.instances != set.len() {
        return Err(Error::validation("manifest instance count does not match the set"));
    }
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.str_u32(&serde_json::to_string(manifest).expect("manifest serializes"));
    for inst in set {
        check(inst, manifest)?;
        w.str_u32(&inst.name);
        w.u64(inst.artwork.0);
        w.f32s(&inst.visual);
        for l in inst.labels {
            w.u32(l as u32);
        }
        match &inst.context {
            Some(c) => {
                w.u8(1);
                w.f32s(c);
            }
            None => w.u8(0),
        }
    }
    Ok(w.buf)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<(DatasetManifest, Vec<LabeledInstance>)> {
    let mut r = Reader::new(bytes, "dataset");
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let manifest: DatasetManifest =
        serde_json::from_str(r.str_u32()?).map_err(|e| r.err(format!("bad manifest: {e}")))?;
    if manifest.visual_dim == 0 || manifest.context_dim == 0 {
        return Err(r.err("zero dimension in manifest"));
    }
    let min = 4 + 8 + 4 * manifest.visual_dim + 12 + 1;
    if manifest.instances > r.remaining() / min {
        return Err(r.err(format!("{} instances cannot fit", manifest.instances)));
    }
    let mut set = Vec::with_capacity(manifest.instances);
    for _ in 0..manifest.instances {
        let name = r.str_u32()?.to_string();
        let artwork = NodeId(r.u64()?);
        let visual = r.f32s(manifest.visual_dim)?;
        let labels = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
        let context = match r.u8()? {
            0 => None,
            1 => Some(r.f32s(manifest.context_dim)?),
            f => return Err(r.err(format!("bad context flag {f}"))),
        };
        let inst = LabeledInstance {
            artwork,
            name,
            visual,
            labels,
            context,
        };
        check(&inst, &manifest)?;
        set.push(inst);
    }
    r.finish()?;
    if set.iter().filter(|i| i.context.is_some()).count() != manifest.with_context {
        return Err(r.err("context count disagrees with manifest"));
    }
    Ok((manifest, set))
}

pub fn save_dataset(manifest: &DatasetManifest, set: &[LabeledInstance], path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, encode_dataset(manifest, set)?)?)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<(DatasetManifest, Vec<LabeledInstance>)> {
    decode_dataset(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (DatasetManifest, Vec<LabeledInstance>) {
        let vocab = LabelVocab {
            artists: vec!["a".into(), "b".into()],
            styles: vec!["s".into()],
            genres: vec!["g".into()],
        };
        let set = vec![
            LabeledInstance {
                artwork: NodeId(4),
                name: "Mona Lisa".into(),
                visual: vec![0.5, -1.0],
                labels: [1, 0, 0],
                context: Some(vec![0.25, 0.0, -0.0]),
            },
            LabeledInstance {
                artwork: NodeId(9),
                name: "Żółw".into(),
                visual: vec![3.0, 2.0],
                labels: [0, 0, 0],
                context: None,
            },
        ];
        (DatasetManifest::describe(&set, 2, 3, &vocab), set)
    }

    #[test]
    fn round_trip() {
        let (m, set) = sample();
        let bytes = encode_dataset(&m, &set).unwrap();
        let (m2, set2) = decode_dataset(&bytes).unwrap();
        assert_eq!(m, m2);
        assert_eq!(set, set2);
        assert!(decode_dataset(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn bad_labels_rejected() {
        let (m, mut set) = sample();
        set[0].labels[0] = 2;
        assert!(encode_dataset(&m, &set).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let (m, set) = sample();
        let clean = encode_dataset(&m, &set).unwrap();
        let mut bad = set.clone();
        bad[0].context.as_mut().unwrap()[1] = f32::NAN;
        assert!(encode_dataset(&m, &bad).is_err());
        // patch the same float in the clean bytes
        let at = clean
            .windows(12)
            .position(|w| w == [0.25f32.to_le_bytes(), 0.0f32.to_le_bytes(), (-0.0f32).to_le_bytes()].concat())
            .unwrap();
        let mut bytes = clean;
        bytes[at + 4..at + 8].copy_from_slice(&f32::INFINITY.to_le_bytes());
        assert!(decode_dataset(&bytes).is_err());
    }
}
