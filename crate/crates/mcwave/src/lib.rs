//! Monte-Carlo harness, file formats and command line for the `mcwave-core`
//! waveform models.

pub mod harness;
