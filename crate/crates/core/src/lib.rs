//! Non-thermal black-hole radiation from entropy differences.
//!
//! * [`typicality`]: random pure universe states, partial traces and
//!   microcanonical weights, plus the generic entropy-difference spectrum.
//! * [`models`]: black-hole macro-states, horizons and horizon entropy.
//! * [`spectrum`]: discretized emission spectra and thermal baselines.
//! * [`cascade`]: Monte Carlo evaporation cascades and exhaustive enumeration.
//! * [`info`]: radiation entropy, conditional entropy, correlations and
//!   the per-emission information ledger.
//! * [`verify`]: machine-readable invariant suites.
//!
//! Units are Planck units throughout; entropies are in nats.

pub mod error;
pub mod logspace;
pub mod models;
pub mod spectrum;
pub mod typicality;

pub use error::{Error, Result};
pub use models::{BlackHoleState, Emission, Family, Hairs, Remnant};
pub use spectrum::{
    build_spectrum, build_thermal_spectrum, compare_thermal, emission_log_weight, thermal_log_weight,
    GridSpec, Normalization, QuantumAxis, SpectrumBin, SpectrumComparison, SpectrumGrid,
};
pub mod cascade;
pub mod info;
pub mod verify;
