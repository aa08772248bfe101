//! Discrete Bourgain-space experiments on a `(k, tau)` lattice.

pub mod counterexample;
pub mod ensemble;
pub mod ratios;
pub mod spacetime;
pub mod trilinear;

pub use counterexample::{three_wave_counterexample, CounterexampleReport, CounterexampleRow};
pub use ratios::{leibniz_ratio, strichartz_ratio, trilinear_ratio, BandPreset, TimeSpectrum};
pub use spacetime::{xsb_norm, NormFlavor, SpaceTimeField, SpaceTimeLattice, XsbNormSpec};
pub use trilinear::{spacetime_j, TrilinearPath};
