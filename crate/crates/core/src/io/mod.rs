//! File formats and configuration: binary datasets (`RIMD`) and checkpoints
//! (`RIMM`), JSON lab configs, PGM/CSV renderings.
//!
//! Both binary formats are little-endian and end with a CRC32 of every byte
//! before the trailer.

mod bytes;
pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod render;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, TrainingEcho};
pub use config::LabConfig;
pub use dataset::{read_dataset, write_dataset, Record};
