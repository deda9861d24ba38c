//! Radar interference mitigation with complex-valued fully convolutional
//! networks.
//!
//! The crate covers the whole loop: synthesizing interfered FMCW beat
//! signals ([`synth`]), moving them to the time-frequency plane ([`tf`]),
//! the complex network and its training ([`cvnn`], [`loss`], [`train`]),
//! chunked inference on arbitrary-length sweeps ([`pipeline`]), scoring
//! against classical zeroing baselines ([`eval`]) and the file formats and
//! command line front end ([`io`], [`cli`]).

pub mod cli;
pub mod cvnn;
pub mod error;
pub mod eval;
pub mod fft;
pub mod io;
pub mod loss;
pub mod pipeline;
pub mod synth;
pub mod tf;
pub mod train;

pub use error::{Error, Result};
