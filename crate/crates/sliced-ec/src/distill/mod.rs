//! Leakage accounting, net key rates and privacy amplification.
//!
//! Three idealized leak levels bracket what reconciliation discloses per key
//! element: the Slepian-Wolf limit H(K(X)|X'), the per-slice limit
//! sum_i H(S_i|estimate_i) of a protocol that corrects slices independently
//! but optimally, and the BSC limit sum_i h(e_i) of a protocol that only
//! sees the bit error rate. Net rates subtract each from H(K(X)). Privacy
//! amplification compresses the reconciled key by a seeded Toeplitz hash,
//! removing the eavesdropper bound and the transcript bits.

mod pa;
mod typicality;

pub use pa::toeplitz_hash;
pub use typicality::{
    asymptotic_experiment, lemma1_check, DiscreteJoint, TypicalityExperiment, TypicalityReport,
};

use serde::{Deserialize, Serialize};

use crate::channel::TAIL_SIGMAS;
use crate::error::{Error, Result};
use crate::quad::{integrate_1d, Quadrature};
use crate::quantizer::{interval_probabilities, mutual_information};
use crate::slicing::{set_weight, SliceSystem};
use crate::stats::xlog2x;

/// Conditioning on estimator outputs costs 2^(m-1) pattern integrals per
/// slice; beyond this many slices the slicewise leak is skipped.
pub const SLICEWISE_LEAK_MAX_SLICES: usize = 4;

/// Leakage levels and net rates for one design, all in bits per element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// H(S_1..m(X)) = H(T(X)), the raw entropy of Alice's key bits.
    pub h_key: f64,
    /// Slepian-Wolf leakage floor H(S_1..m(X) | X').
    pub leak_slepian_wolf: f64,
    /// Per-slice ideal leakage; present only for m <= 4.
    pub leak_slicewise: Option<f64>,
    /// BSC-protocol leakage sum_i h(e_i).
    pub leak_bsc: f64,
    /// h_key minus the Slepian-Wolf floor.
    pub net_ideal: f64,
    /// h_key minus the BSC leakage: the practical planning figure.
    pub net_bsc: f64,
    /// h_key - |C|/l for a measured transcript, when one is attached.
    pub net_practical: Option<f64>,
}

impl RateReport {
    /// Attaches the measured leakage of a finished session.
    pub fn with_practical(mut self, transcript_bits: u64, elements: usize) -> Self {
        self.net_practical = Some(self.h_key - transcript_bits as f64 / elements as f64);
        self
    }
}

/// Evaluates every leakage level for a built slice system.
pub fn rate_report(system: &SliceSystem) -> Result<RateReport> {
    let design = &system.design;
    let probs = interval_probabilities(design.params(), design.partition());
    let h_key = -probs.iter().map(|&p| xlog2x(p)).sum::<f64>();

    let (leak_slepian_wolf, leak_slicewise) = if design.params().sigma_noise() == 0.0 {
        // Noiseless channel: Bob already knows everything.
        (0.0, Some(0.0))
    } else {
        let report = mutual_information(design.params(), design.partition())?;
        let i0 = report.h_joint - report.h_observation;
        let is = if design.slice_count() <= SLICEWISE_LEAK_MAX_SLICES {
            Some(slicewise_leakage(system)?)
        } else {
            None
        };
        (i0, is)
    };
    let leak_bsc = system.profile.leakage_bits;

    Ok(RateReport {
        h_key,
        leak_slepian_wolf,
        leak_slicewise,
        leak_bsc,
        net_ideal: h_key - leak_slepian_wolf,
        net_bsc: h_key - leak_bsc,
        net_practical: None,
    })
}

/// sum_i H(S_i(X) | estimate_i), where estimate_i is conditioned on Alice's
/// true bits for the earlier slices. Each slice integrates the joint weight
/// of (S_i, estimate) over the estimator's constant-decision regions.
fn slicewise_leakage(system: &SliceSystem) -> Result<f64> {
    let design = &system.design;
    let span = TAIL_SIGMAS * design.params().observation_sd();
    let mut diffs = Vec::new();
    let mut total = 0.0;
    for estimator in &system.estimators {
        let i = estimator.slice;
        let mut joint = [[0.0f64; 2]; 2]; // [alice bit][estimate]
        for (pattern, decision) in estimator.patterns.iter().enumerate() {
            let zeros = design.matching_labels(i, pattern, 0);
            let ones = design.matching_labels(i, pattern, 1);
            for (lo, hi, guess) in decision.regions(span) {
                if hi - lo <= 0.0 {
                    continue;
                }
                let panels = (((hi - lo) / span * 48.0).ceil() as usize).clamp(2, 64);
                let quad = Quadrature::composite_gauss_legendre(16, panels, lo, hi)?;
                joint[0][guess as usize] +=
                    integrate_1d(|xp| set_weight(design, &zeros, xp, &mut diffs), &quad)?;
                joint[1][guess as usize] +=
                    integrate_1d(|xp| set_weight(design, &ones, xp, &mut diffs), &quad)?;
            }
        }
        let h_joint = -joint.iter().flatten().map(|&p| xlog2x(p)).sum::<f64>();
        let guess0 = joint[0][0] + joint[1][0];
        let guess1 = joint[0][1] + joint[1][1];
        let h_guess = -(xlog2x(guess0) + xlog2x(guess1));
        total += h_joint - h_guess;
    }
    Ok(total)
}

/// Inputs of the privacy amplification length rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaParams {
    /// Bound on the eavesdropper's information in bits per key element,
    /// supplied by the key distribution layer.
    pub eve_information: f64,
    /// Reconciliation leakage |C| from the transcript ledger.
    pub transcript_bits: u64,
    /// Extra bits removed to absorb finite-size slack.
    pub security_margin: f64,
}

impl Default for PaParams {
    fn default() -> Self {
        Self {
            eve_information: 0.0,
            transcript_bits: 0,
            security_margin: 30.0,
        }
    }
}

impl PaParams {
    /// floor(l h_key - l eve - |C| - margin), clamped at zero.
    pub fn output_length(&self, elements: usize, h_key: f64) -> usize {
        let l = elements as f64;
        let bits = l * h_key
            - l * self.eve_information
            - self.transcript_bits as f64
            - self.security_margin;
        bits.floor().max(0.0) as usize
    }
}

/// Compresses a reconciled key to its secret length with a seeded Toeplitz
/// hash. Identical inputs and seed give identical output.
pub fn privacy_amplify(
    key: &[u8],
    pa: &PaParams,
    elements: usize,
    h_key: f64,
    seed: u64,
) -> Result<Vec<u8>> {
    let target = pa.output_length(elements, h_key);
    if target > key.len() {
        return Err(Error::TargetLengthExceedsInput {
            target,
            input: key.len(),
        });
    }
    Ok(toeplitz_hash(key, target, seed))
}
