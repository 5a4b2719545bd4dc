//! Truncated-series synthesis of MBM, the random wavelet series `f_H` and
//! the process `Z`.

mod path;
mod synth;
mod wavelet;

pub use path::{Grid, Model, PathData, Provenance, SamplePath, TruncationPolicy};
pub use synth::{check_condition25, synth_bh, synth_fh, synth_frozen, synth_z};
pub use wavelet::{psi_time_domain, TabulatedWavelet, TimeWavelet};
