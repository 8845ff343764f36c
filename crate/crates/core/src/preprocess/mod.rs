//! Bandpass filtering and sliding-window segmentation.

mod filter;
mod window;

pub use filter::{bandpass, BandpassConfig, ButterworthBandpass, Section};
pub use window::{segment, segment_all, Window, WindowConfig, WindowOrigin, WindowSet};
