//! Interference alignment (IA) over two orthogonal OFDM subcarriers.
//!
//! The crate decides whether zero-forcing IA is feasible for a K-user
//! single-antenna interference channel that uses two subcarriers, solves for
//! the precoders and receive filters, and specializes to line-of-sight
//! channels, where feasibility is obtained by choosing the subcarrier spacing.
//!
//! Modules:
//! - [`channel`]: line-of-sight scenarios, frequency responses, noise calibration.
//! - [`alignment`]: log-domain alignment system, feasibility, beamformers, rates.
//! - [`los`]: closed forms for three line-of-sight user pairs.
//! - [`baselines`]: TDMA and interference-as-noise reference schemes.
//! - [`scheme`]: named rate schemes behind a common trait, selectable at runtime.
//! - [`sim`]: deterministic Monte Carlo sweeps.
//! - [`cli`]: the `ia-sim` command line front end.

pub mod alignment;
pub mod baselines;
pub mod channel;
pub mod cli;
mod error;
pub mod linalg;
pub mod los;
pub mod rng;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};

pub use alignment::{
    build_system, effective_channels, feasibility, ia_sum_rate, leakage, solve_beamformers,
    theorem1_residual, AlignmentStructure, AlignmentSystem, BeamformerSet, FeasibilityReport,
};
pub use baselines::{interference_as_noise_sum_rate, tdma_sum_rate, RateReport, SchemeTag};
pub use channel::{
    calibrate_noise, channel_at, frequency_response, sample_scenario, ChannelSet, LosLink,
    Scenario, ScenarioConfig, SubcarrierPair,
};
pub use los::{
    best_spacing, effective_amplitudes, los_feasible, spacing_analysis, time_ia_residual,
    upper_bound, SpacingAnalysis,
};
pub use scheme::{RateScheme, SchemeRegistry};
pub use sim::{dfmin_distribution, run_sweep, SweepConfig, SweepResult};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex<f64>;
