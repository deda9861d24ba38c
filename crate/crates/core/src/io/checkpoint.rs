//! `RIMM` v1 model checkpoints.
//!
//! Layout: magic, version u16, JSON header block (architecture plus the
//! training settings that produced the weights), every layer's kernel_re,
//! kernel_im, bias_re, bias_im as f32, an Adam flag byte and, when set, the
//! step count u64 followed by the first and second moments in parameter
//! order; CRC32 trailer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bytes::{json_block, Reader, Writer};
use crate::cvnn::{AdamState, ArchitectureSpec, CvFcnModel};
use crate::error::{Error, Result};
use crate::pipeline::SplitConfig;
use crate::tf::StftConfig;
use crate::train::TrainConfig;

const MAGIC: &[u8; 4] = b"RIMM";
const VERSION: u16 = 1;

/// Settings echoed into a checkpoint so inference can rebuild the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingEcho {
    pub train: TrainConfig,
    pub stft: StftConfig,
    pub split: SplitConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: CvFcnModel,
    pub training: TrainingEcho,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    arch: ArchitectureSpec,
    training: TrainingEcho,
}

pub fn encode_checkpoint(ckpt: &Checkpoint) -> Result<Vec<u8>> {
    let model = &ckpt.model;
    model.validate()?;
    let mut w = Writer::new(MAGIC, VERSION);
    w.block(&serde_json::to_vec(&Header { arch: model.arch.clone(), training: ckpt.training.clone() })?)?;
    for s in model.param_slices() {
        w.f32s(s);
    }
    let adam = &model.adam;
    if adam.m.is_empty() {
        w.u8(0);
    } else {
        let lens: Vec<usize> = model.param_slices().iter().map(|s| s.len()).collect();
        let mlens: Vec<usize> = adam.m.iter().map(|s| s.len()).collect();
        let vlens: Vec<usize> = adam.v.iter().map(|s| s.len()).collect();
        if lens != mlens || lens != vlens {
            return Err(Error::ShapeMismatch("optimizer state does not match the parameters".into()));
        }
        w.u8(1);
        w.u64(adam.step);
        for s in adam.m.iter().chain(&adam.v) {
            w.f32s(s);
        }
    }
    Ok(w.finish())
}

pub fn decode_checkpoint(data: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader::open(data, MAGIC, VERSION)?;
    let header: Header = json_block(r.block()?, "checkpoint header")?;
    header.arch.validate().map_err(|e| Error::Format(format!("architecture: {e}")))?;
    let mut model = CvFcnModel::zeros(&header.arch)?;
    let lens: Vec<usize> = model.param_slices().iter().map(|s| s.len()).collect();
    for (slot, n) in model.param_slices_mut().into_iter().zip(&lens) {
        slot.copy_from_slice(&r.f32s(*n)?);
    }
    match r.u8()? {
        0 => model.adam = AdamState::default(),
        1 => {
            let step = r.u64()?;
            let m = lens.iter().map(|n| r.f32s(*n)).collect::<Result<Vec<_>>>()?;
            let v = lens.iter().map(|n| r.f32s(*n)).collect::<Result<Vec<_>>>()?;
            model.adam = AdamState { step, m, v };
        }
        f => return Err(Error::Format(format!("bad optimizer flag {f}"))),
    }
    r.finish()?;
    Ok(Checkpoint { model, training: header.training })
}

pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    std::fs::write(path, encode_checkpoint(ckpt)?)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}
