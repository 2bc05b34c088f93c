//! Sliced error correction for correlated Gaussian sequences.
//!
//! Alice holds samples of a Gaussian source, Bob holds noisy observations of
//! them, and both want to agree on an identical bit string over a public
//! channel while disclosing as little as possible. This crate implements the
//! full pipeline:
//!
//! * [`channel`] - the Gaussian source/noise model, sampling and the
//!   numerical integration primitives;
//! * [`quantizer`] - symmetric interval partitions of Alice's key space
//!   chosen to maximize the mutual information I(T(X); X');
//! * [`slicing`] - bit assignment of intervals into slices, maximum
//!   likelihood slice estimators for Bob, and per-slice error rates;
//! * [`reconcile`] - the sequential slice-by-slice protocol with pluggable
//!   bitwise correction (Cascade, disclose-all, disclose-none) and a full
//!   transcript of every disclosed bit;
//! * [`distill`] - leakage accounting, net key rates, privacy amplification
//!   by Toeplitz hashing, and empirical checks of the asymptotic claims that
//!   justify the construction.
//!
//! All entropies and leak counts are in bits. Every stochastic routine takes
//! an explicit seed and is bit-reproducible across platforms.
//!
//! ```
//! use sliced_ec::quantizer::{optimize_partition, OptimizerSettings};
//! use sliced_ec::reconcile::{run_sec, AccountingMode, BcpKind, CascadeConfig};
//! use sliced_ec::slicing::{SliceDesign, SliceSystem};
//! use sliced_ec::{sample_pairs, ChannelParams};
//!
//! let params = ChannelParams::from_snr(3.0)?;
//! let partition = optimize_partition(&params, 8, &OptimizerSettings::default())?;
//! let system = SliceSystem::build(SliceDesign::new(params, partition)?)?;
//!
//! let pairs = sample_pairs(&params, 2000, 1)?;
//! let alice: Vec<f64> = pairs.iter().map(|p| p.x).collect();
//! let bob: Vec<f64> = pairs.iter().map(|p| p.x_prime).collect();
//! let bcps = vec![
//!     BcpKind::DiscloseAll,
//!     BcpKind::Cascade(CascadeConfig::with_seed(2)),
//!     BcpKind::Cascade(CascadeConfig::with_seed(3)),
//! ];
//! let outcome = run_sec(&system, &alice, &bob, &bcps, AccountingMode::MarkovBsc)?;
//! assert!(outcome.keys_equal());
//! # Ok::<(), sliced_ec::Error>(())
//! ```

pub mod channel;
pub mod distill;
pub mod error;
pub mod quad;
pub mod quantizer;
pub mod reconcile;
pub mod rng;
pub mod slicing;
pub mod stats;

pub use channel::{joint_density, sample_pairs, ChannelParams, SamplePair};
pub use distill::{
    asymptotic_experiment, lemma1_check, privacy_amplify, rate_report, toeplitz_hash,
    DiscreteJoint, PaParams, RateReport, TypicalityExperiment, TypicalityReport,
};
pub use error::{Error, Result};
pub use quad::{integrate_1d, integrate_2d, Quadrature};
pub use quantizer::{
    equiprobable_partition, interval_probabilities, interval_probability, mutual_information,
    optimize_partition, IntervalPartition, MutualInfoReport, OptimizerSettings, PartitionRecord,
};
pub use reconcile::{
    practical_leakage, run_cascade, run_sec, AccountingMode, BcpKind, CascadeConfig, LeakageLedger,
    PracticalLeakage, SecOutcome, Transcript,
};
pub use slicing::{
    error_rate_with_estimator, monte_carlo_error_rates, slice_error_rates, DesignFile, SliceDesign,
    SliceErrorProfile, SliceEstimator, SliceSystem,
};
