//! `RIMD` v1 datasets.
//!
//! Layout: magic, version u16, record count u32, then per record a JSON
//! metadata block (u32 length + bytes), the sample count u32 and the four
//! vectors y, s, f, n as interleaved f32 pairs; CRC32 trailer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bytes::{json_block, Reader, Writer};
use crate::error::{Error, Result};
use crate::synth::{RadarConfig, SceneSpec, SweepSignal};

const MAGIC: &[u8; 4] = b"RIMD";
const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub radar: RadarConfig,
    pub sweep: SweepSignal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    index: usize,
    radar: RadarConfig,
    spec: SceneSpec,
    realized_snr_db: Option<f64>,
    realized_sinr_db: Option<f64>,
}

pub fn encode_dataset(records: &[Record]) -> Result<Vec<u8>> {
    let mut w = Writer::new(MAGIC, VERSION);
    w.len_u32(records.len())?;
    for (index, r) in records.iter().enumerate() {
        let s = &r.sweep;
        let n = s.samples.len();
        if s.clean.len() != n || s.interference.len() != n || s.noise.len() != n {
            return Err(Error::ShapeMismatch(format!("record {index} has vectors of different lengths")));
        }
        let meta = Metadata {
            index,
            radar: r.radar.clone(),
            spec: s.spec.clone(),
            realized_snr_db: s.realized_snr_db,
            realized_sinr_db: s.realized_sinr_db,
        };
        w.block(&serde_json::to_vec(&meta)?)?;
        w.len_u32(n)?;
        for v in [&s.samples, &s.clean, &s.interference, &s.noise] {
            w.complex(v);
        }
    }
    Ok(w.finish())
}

pub fn decode_dataset(data: &[u8]) -> Result<Vec<Record>> {
    let mut r = Reader::open(data, MAGIC, VERSION)?;
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let meta: Metadata = json_block(r.block()?, "record metadata")?;
        if meta.index != i {
            return Err(Error::Format(format!("record {i} carries index {}", meta.index)));
        }
        let n = r.u32()? as usize;
        let samples = r.complex(n)?;
        let clean = r.complex(n)?;
        let interference = r.complex(n)?;
        let noise = r.complex(n)?;
        out.push(Record {
            radar: meta.radar,
            sweep: SweepSignal {
                samples,
                clean,
                interference,
                noise,
                spec: meta.spec,
                realized_snr_db: meta.realized_snr_db,
                realized_sinr_db: meta.realized_sinr_db,
            },
        });
    }
    r.finish()?;
    Ok(out)
}

pub fn write_dataset(path: &Path, records: &[Record]) -> Result<()> {
    std::fs::write(path, encode_dataset(records)?)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<Record>> {
    decode_dataset(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_dataset, SceneRanges};

    fn records(n: usize) -> Vec<Record> {
        let radar = RadarConfig::desk_64();
        generate_dataset(&radar, &SceneRanges::default(), n, 9)
            .unwrap()
            .into_iter()
            .map(|sweep| Record { radar: radar.clone(), sweep })
            .collect()
    }

    #[test]
    fn write_read_write_is_bitwise() {
        let bytes = encode_dataset(&records(4)).unwrap();
        let back = decode_dataset(&bytes).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(encode_dataset(&back).unwrap(), bytes);
    }

    #[test]
    fn empty_dataset_is_valid() {
        let bytes = encode_dataset(&[]).unwrap();
        assert!(decode_dataset(&bytes).unwrap().is_empty());
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = encode_dataset(&records(1)).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x10;
        assert!(matches!(decode_dataset(&bytes), Err(Error::Format(_))));
        assert!(matches!(decode_dataset(b"RIMM\x01\x00xxxxxxxx"), Err(Error::Format(_))));
    }
}
