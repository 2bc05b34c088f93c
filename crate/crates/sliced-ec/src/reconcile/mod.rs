//! The sequential slice-correction protocol.
//!
//! Alice turns her l key elements into m slice strings; Bob estimates each
//! slice from his observations and the already corrected bits of the earlier
//! slices, then aligns it to Alice's with the bitwise correction protocol
//! assigned to that slice. Everything either party sends crosses the
//! in-process message log, so the transcript is the single source of truth
//! for leakage.

mod cascade;
mod transcript;

pub use cascade::{run_cascade, CascadeConfig};
pub use transcript::{
    AccountingMode, Direction, LeakageLedger, LedgerEntry, Message, Payload, SessionSummary,
    Transcript,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slicing::SliceSystem;
use crate::stats::binary_entropy;

/// Bitwise correction protocol assigned to one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcpKind {
    /// Alice sends the slice in clear: l bits leaked, zero residual errors.
    DiscloseAll,
    /// Nothing is exchanged; Bob keeps his estimates.
    DiscloseNone,
    /// Interactive parity exchange.
    Cascade(CascadeConfig),
}

impl BcpKind {
    fn name(&self) -> &'static str {
        match self {
            BcpKind::DiscloseAll => "disclose_all",
            BcpKind::DiscloseNone => "disclose_none",
            BcpKind::Cascade(_) => "cascade",
        }
    }
}

/// Result of one protocol session.
#[derive(Debug, Clone)]
pub struct SecOutcome {
    /// Concatenation of Alice's m slice strings, slice 1 first.
    pub alice_key: Vec<u8>,
    /// Bob's corrected strings, concatenated the same way.
    pub bob_key: Vec<u8>,
    pub transcript: Transcript,
}

impl SecOutcome {
    pub fn keys_equal(&self) -> bool {
        self.alice_key == self.bob_key
    }
}

/// Runs sliced error correction over an in-process channel.
///
/// Bob's slice-i estimates use his own corrected bits of slices 1..i-1,
/// right or wrong; a BCP that leaves residual errors therefore propagates
/// them into the conditioning of later slices, and the summary reports
/// whatever mismatch remains.
pub fn run_sec(
    system: &SliceSystem,
    alice_values: &[f64],
    bob_values: &[f64],
    bcp_per_slice: &[BcpKind],
    accounting_mode: AccountingMode,
) -> Result<SecOutcome> {
    if alice_values.len() != bob_values.len() {
        return Err(Error::LengthMismatch {
            alice: alice_values.len(),
            bob: bob_values.len(),
        });
    }
    let len = alice_values.len();
    if len == 0 {
        return Err(Error::InvalidParameter(
            "need at least one key element".into(),
        ));
    }
    let m = system.slice_count();
    if bcp_per_slice.len() != m {
        return Err(Error::InvalidParameter(format!(
            "need one BCP per slice: {m} slices, {} assignments",
            bcp_per_slice.len()
        )));
    }

    // Alice's slice strings, slice-major.
    let mut alice_slices: Vec<Vec<u8>> = vec![Vec::with_capacity(len); m];
    for &x in alice_values {
        for (i, bit) in system.design.slice_values(x).into_iter().enumerate() {
            alice_slices[i].push(bit);
        }
    }

    let mut transcript = Transcript::new(accounting_mode);
    let mut bob_corrected: Vec<Vec<u8>> = Vec::with_capacity(m);
    let mut prior = Vec::with_capacity(m);
    for (i, bcp) in bcp_per_slice.iter().enumerate() {
        let slice_no = (i + 1) as u32;
        let estimator = &system.estimators[i];
        let mut estimates = Vec::with_capacity(len);
        for (j, &xp) in bob_values.iter().enumerate() {
            prior.clear();
            for corrected in bob_corrected.iter() {
                prior.push(corrected[j]);
            }
            estimates.push(estimator.decide(xp, &prior));
        }

        let corrected = match bcp {
            BcpKind::DiscloseNone => estimates,
            BcpKind::DiscloseAll => {
                transcript.log(
                    slice_no,
                    0,
                    Direction::AliceToBob,
                    len as u64,
                    Payload::SliceBits,
                );
                alice_slices[i].clone()
            }
            BcpKind::Cascade(config) => run_cascade(
                &alice_slices[i],
                &estimates,
                config,
                system.profile.error_rates[i],
                slice_no,
                &mut transcript,
            )?,
        };
        bob_corrected.push(corrected);
    }

    let residual_errors: Vec<usize> = alice_slices
        .iter()
        .zip(&bob_corrected)
        .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
        .collect();
    let keys_equal = residual_errors.iter().all(|&r| r == 0);
    transcript.summary = Some(SessionSummary {
        elements: len,
        slices: m,
        residual_errors,
        keys_equal,
    });

    let alice_key: Vec<u8> = alice_slices.into_iter().flatten().collect();
    let bob_key: Vec<u8> = bob_corrected.into_iter().flatten().collect();
    Ok(SecOutcome {
        alice_key,
        bob_key,
        transcript,
    })
}

/// Cost breakdown of one slice under the practical-BCP accounting
/// |C_i| = min(l, f_i(l, e_i)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceCost {
    pub slice: u32,
    pub bcp: String,
    pub error_rate: f64,
    pub entropy: f64,
    /// Measured Cascade overhead: alice_bits / (l h(e)) - 1.
    pub xi_hat: Option<f64>,
    /// Model cost min(l, l (1 + xi) h(e)) under the slice's own BCP.
    pub predicted_bits: f64,
    pub actual_alice_bits: u64,
    pub actual_bob_bits: u64,
    /// Set when the Cascade cost model meets or exceeds disclosing the
    /// whole slice.
    pub disclose_all_recommended: bool,
}

/// Session-level cost report comparing the cost model with the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PracticalLeakage {
    pub per_slice: Vec<SliceCost>,
    pub predicted_total_bits: f64,
    pub both_parties_total: u64,
    pub markov_bsc_total: u64,
}

/// Evaluates the practical leakage model against a measured transcript.
pub fn practical_leakage(
    system: &SliceSystem,
    elements: usize,
    bcp_per_slice: &[BcpKind],
    measured: &Transcript,
) -> Result<PracticalLeakage> {
    let m = system.slice_count();
    if bcp_per_slice.len() != m {
        return Err(Error::InvalidParameter(format!(
            "need one BCP per slice: {m} slices, {} assignments",
            bcp_per_slice.len()
        )));
    }
    let l = elements as f64;

    // Mean measured overhead across Cascade slices, reused as the model's
    // overhead for slices that ran another BCP.
    let mut xi_sum = 0.0;
    let mut xi_count = 0usize;
    for (i, bcp) in bcp_per_slice.iter().enumerate() {
        if let BcpKind::Cascade(_) = bcp {
            let h = system.profile.entropies[i];
            if h > 1e-12 {
                let actual = measured
                    .ledger
                    .slice_entry((i + 1) as u32)
                    .map_or(0, |e| e.alice_bits) as f64;
                xi_sum += actual / (l * h) - 1.0;
                xi_count += 1;
            }
        }
    }
    let xi_mean = if xi_count > 0 {
        xi_sum / xi_count as f64
    } else {
        0.0
    };

    let mut per_slice = Vec::with_capacity(m);
    let mut predicted_total_bits = 0.0;
    for (i, bcp) in bcp_per_slice.iter().enumerate() {
        let slice = (i + 1) as u32;
        let e = system.profile.error_rates[i];
        let h = binary_entropy(e);
        let entry = measured.ledger.slice_entry(slice);
        let actual_alice_bits = entry.map_or(0, |en| en.alice_bits);
        let actual_bob_bits = entry.map_or(0, |en| en.bob_bits);
        let xi_hat = match bcp {
            BcpKind::Cascade(_) if h > 1e-12 => Some(actual_alice_bits as f64 / (l * h) - 1.0),
            _ => None,
        };
        let xi = xi_hat.unwrap_or(xi_mean);
        let cascade_model = l * (1.0 + xi) * h;
        let predicted_bits = match bcp {
            BcpKind::DiscloseAll => l,
            BcpKind::DiscloseNone => 0.0,
            BcpKind::Cascade(_) => cascade_model.min(l),
        };
        predicted_total_bits += predicted_bits;
        per_slice.push(SliceCost {
            slice,
            bcp: bcp.name().to_string(),
            error_rate: e,
            entropy: h,
            xi_hat,
            predicted_bits,
            actual_alice_bits,
            actual_bob_bits,
            disclose_all_recommended: cascade_model >= l,
        });
    }

    Ok(PracticalLeakage {
        per_slice,
        predicted_total_bits,
        both_parties_total: measured.ledger.total_for(AccountingMode::BothParties),
        markov_bsc_total: measured.ledger.total_for(AccountingMode::MarkovBsc),
    })
}
