//! Finite-dimension checks of the asymptotic arguments.
//!
//! The construction is asymptotically efficient because (a) a uniformly
//! random string is identified among N others by its first r bits with
//! probability (1 - 2^-r)^(N-1), and (b) for jointly typical sequences
//! Bob's candidate list is at most 2^(d (H(X|X') + 2 eps)) long. These are
//! only provable in the limit, so this module replays them at small d with
//! brute-force enumeration: random slice labels per input sequence, exact
//! conditional typical lists, identification by the first r labels.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest sequence space enumerated per trial.
const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Empirical rate at which a uniformly random string is uniquely identified
/// among `n_strings` by its first `r` bits. Converges to
/// (1 - 2^-r)^(n_strings - 1).
pub fn lemma1_check(n_strings: usize, r: u32, trials: usize, seed: u64) -> Result<f64> {
    if n_strings == 0 || trials == 0 {
        return Err(Error::InvalidParameter("need strings and trials".into()));
    }
    if r == 0 || r > 63 {
        return Err(Error::InvalidParameter(format!(
            "prefix length {r} out of 1..=63"
        )));
    }
    let mask = (1u64 << r) - 1;
    let mut unique = 0usize;
    for trial in 0..trials {
        let mut rng = rng::substream(seed, trial as u64);
        let target = rng.next_u64() & mask;
        let collided = (1..n_strings).any(|_| rng.next_u64() & mask == target);
        if !collided {
            unique += 1;
        }
    }
    Ok(unique as f64 / trials as f64)
}

/// A discrete source and memoryless channel with small alphabets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJoint {
    /// P(X = a).
    pub source: Vec<f64>,
    /// `transition[a][b]` = P(X' = b | X = a).
    pub transition: Vec<Vec<f64>>,
}

impl DiscreteJoint {
    pub fn new(source: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let simplex = |v: &[f64]| -> bool {
            v.iter().all(|&p| (0.0..=1.0).contains(&p))
                && (v.iter().sum::<f64>() - 1.0).abs() < 1e-9
        };
        if source.is_empty() || !simplex(&source) {
            return Err(Error::InvalidParameter(
                "source must be a distribution".into(),
            ));
        }
        if transition.len() != source.len() || transition.iter().any(|row| !simplex(row)) {
            return Err(Error::InvalidParameter(
                "transition rows must be distributions, one per source symbol".into(),
            ));
        }
        Ok(Self { source, transition })
    }

    /// Binary symmetric channel with a uniform source.
    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::new(
            vec![0.5, 0.5],
            vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]],
        )
    }

    fn observation_marginal(&self) -> Vec<f64> {
        let n_out = self.transition[0].len();
        let mut out = vec![0.0; n_out];
        for (a, row) in self.transition.iter().enumerate() {
            for (b, &p) in row.iter().enumerate() {
                out[b] += self.source[a] * p;
            }
        }
        out
    }

    pub fn h_source(&self) -> f64 {
        -self
            .source
            .iter()
            .map(|&p| crate::stats::xlog2x(p))
            .sum::<f64>()
    }

    pub fn h_observation(&self) -> f64 {
        -self
            .observation_marginal()
            .iter()
            .map(|&p| crate::stats::xlog2x(p))
            .sum::<f64>()
    }

    pub fn h_joint(&self) -> f64 {
        let mut h = 0.0;
        for (a, row) in self.transition.iter().enumerate() {
            for &p in row {
                h -= crate::stats::xlog2x(self.source[a] * p);
            }
        }
        h
    }

    pub fn h_source_given_observation(&self) -> f64 {
        self.h_joint() - self.h_observation()
    }
}

/// Parameters of the random-slice identification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityExperiment {
    pub joint: DiscreteJoint,
    /// Sequence length d.
    pub dimension: usize,
    pub epsilon: f64,
    /// Slices disclosed for identification.
    pub disclosed: usize,
    pub trials: usize,
}

impl TypicalityExperiment {
    pub fn new(
        joint: DiscreteJoint,
        dimension: usize,
        epsilon: f64,
        disclosed: usize,
        trials: usize,
    ) -> Result<Self> {
        let exp = Self {
            joint,
            dimension,
            epsilon,
            disclosed,
            trials,
        };
        exp.validate()?;
        Ok(exp)
    }

    /// Binary symmetric experiment with the disclosed-slice count set by
    /// `lemma3_disclosed`.
    pub fn binary_symmetric(
        flip: f64,
        dimension: usize,
        epsilon: f64,
        trials: usize,
    ) -> Result<Self> {
        let joint = DiscreteJoint::binary_symmetric(flip)?;
        let mut exp = Self {
            joint,
            dimension,
            epsilon,
            disclosed: 1,
            trials,
        };
        exp.disclosed = exp.lemma3_disclosed();
        exp.validate()?;
        Ok(exp)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("need dimension and trials".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        let states = (self.joint.source.len() as u128).pow(self.dimension as u32);
        if self.joint.source.len() > 4 || states > ENUMERATION_LIMIT {
            return Err(Error::EnumerationTooLarge {
                states,
                limit: ENUMERATION_LIMIT,
            });
        }
        if self.disclosed == 0 || self.disclosed + 2 > self.label_bits() {
            return Err(Error::InvalidParameter(format!(
                "disclosed slice count {} out of range for {} label bits",
                self.disclosed,
                self.label_bits()
            )));
        }
        Ok(())
    }

    /// Label width m = ceil(d H(X) + eps).
    pub fn label_bits(&self) -> usize {
        (self.dimension as f64 * self.joint.h_source() + self.epsilon).ceil() as usize
    }

    /// r = ceil(d H(X|X') + 2 eps - log2 eps + 1).
    pub fn lemma3_disclosed(&self) -> usize {
        (self.dimension as f64 * self.joint.h_source_given_observation() + 2.0 * self.epsilon
            - self.epsilon.log2()
            + 1.0)
            .ceil()
            .max(1.0) as usize
    }

    /// The identification failure bound from the asymptotic argument,
    /// 1 - (1 - 2^-(dH + 2eps - log2 eps + 1))^(2^(dH + 2eps) - 1) with
    /// H = H(X|X').
    pub fn lemma3_failure_bound(&self) -> f64 {
        let dh = self.dimension as f64 * self.joint.h_source_given_observation();
        let prefix = 2f64.powf(-(dh + 2.0 * self.epsilon - self.epsilon.log2() + 1.0));
        let candidates = 2f64.powf(dh + 2.0 * self.epsilon) - 1.0;
        1.0 - (1.0 - prefix).powf(candidates)
    }

    /// Conditional list size bound 2^(d (H(X|X') + 2 eps)).
    pub fn list_size_bound(&self) -> f64 {
        2f64.powf(
            self.dimension as f64 * (self.joint.h_source_given_observation() + 2.0 * self.epsilon),
        )
    }

    pub fn run(&self, seed: u64) -> Result<TypicalityReport> {
        asymptotic_experiment(self, seed)
    }
}

/// Outcome of the identification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    /// Disclosed-slice counts evaluated: r, r+1, r+2.
    pub disclosed: Vec<usize>,
    /// Identification failure rate per disclosed count, over typical trials.
    pub failure_rates: Vec<f64>,
    pub typical_trials: usize,
    pub non_typical_fraction: f64,
    pub max_list_size: usize,
    pub list_size_bound: f64,
    pub lemma3_failure_bound: f64,
}

/// Runs the random-slice experiment: sample a jointly distributed pair of
/// sequences, enumerate Bob's conditional typical list, and test whether the
/// first r random slice bits single out the truth.
pub fn asymptotic_experiment(exp: &TypicalityExperiment, seed: u64) -> Result<TypicalityReport> {
    exp.validate()?;
    let d = exp.dimension;
    let alphabet = exp.joint.source.len();
    let states = alphabet.pow(d as u32);
    let h_source = exp.joint.h_source();
    let h_obs = exp.joint.h_observation();
    let h_joint = exp.joint.h_joint();
    let eps = exp.epsilon;

    // Digits and source log-probabilities per sequence id, shared by all
    // trials.
    let mut digits = vec![0u8; states * d];
    let mut logp_source = vec![0.0f64; states];
    for id in 0..states {
        let mut rest = id;
        let mut lp = 0.0;
        for k in 0..d {
            let sym = (rest % alphabet) as u8;
            rest /= alphabet;
            digits[id * d + k] = sym;
            lp += exp.joint.source[sym as usize].log2();
        }
        logp_source[id] = lp;
    }
    let log_trans: Vec<Vec<f64>> = exp
        .joint
        .transition
        .iter()
        .map(|row| row.iter().map(|&p| p.log2()).collect())
        .collect();
    let obs_marginal = exp.joint.observation_marginal();
    let rs = [exp.disclosed, exp.disclosed + 1, exp.disclosed + 2];
    let masks: Vec<u64> = rs.iter().map(|&r| (1u64 << r) - 1).collect();

    let mut failures = [0usize; 3];
    let mut typical_trials = 0usize;
    let mut max_list = 0usize;
    let mut list = Vec::new();
    for trial in 0..exp.trials {
        let mut rng = rng::substream(seed, trial as u64);
        // Draw the true pair.
        let mut true_id = 0usize;
        let mut place = 1usize;
        let mut obs = Vec::with_capacity(d);
        let mut lp_obs = 0.0;
        let mut lp_joint_true = 0.0;
        for _ in 0..d {
            let a = draw(&exp.joint.source, &mut rng);
            let b = draw(&exp.joint.transition[a], &mut rng);
            true_id += a * place;
            place *= alphabet;
            obs.push(b as u8);
            lp_obs += obs_marginal[b].log2();
            lp_joint_true += (exp.joint.source[a] * exp.joint.transition[a][b]).log2();
        }
        let obs_typical = (-lp_obs / d as f64 - h_obs).abs() < eps;
        let true_typical = obs_typical
            && (-logp_source[true_id] / d as f64 - h_source).abs() < eps
            && (-lp_joint_true / d as f64 - h_joint).abs() < eps;
        if !true_typical {
            continue;
        }
        typical_trials += 1;

        // Bob's list: every source sequence jointly typical with obs.
        list.clear();
        for id in 0..states {
            if (-logp_source[id] / d as f64 - h_source).abs() >= eps {
                continue;
            }
            let mut lp = logp_source[id];
            for k in 0..d {
                lp += log_trans[digits[id * d + k] as usize][obs[k] as usize];
            }
            if (-lp / d as f64 - h_joint).abs() < eps {
                list.push(id);
            }
        }
        max_list = max_list.max(list.len());

        // Labels are uniform and independent per sequence, so only the list
        // members' labels need to be drawn; a dedicated substream keeps them
        // independent of the sampling randomness above.
        let mut label_rng = rng::substream(seed, (trial as u64) | (1 << 62));
        let labels: Vec<u64> = list.iter().map(|_| label_rng.next_u64()).collect();
        let true_pos = list
            .iter()
            .position(|&id| id == true_id)
            .expect("a typical pair puts the truth in the list");
        let mut collision = [false; 3];
        for (pos, &label) in labels.iter().enumerate() {
            if pos == true_pos {
                continue;
            }
            for (k, mask) in masks.iter().enumerate() {
                if label & mask == labels[true_pos] & mask {
                    collision[k] = true;
                }
            }
        }
        for (k, &c) in collision.iter().enumerate() {
            if c {
                failures[k] += 1;
            }
        }
    }

    let failure_rates = failures
        .iter()
        .map(|&f| {
            if typical_trials == 0 {
                0.0
            } else {
                f as f64 / typical_trials as f64
            }
        })
        .collect();
    Ok(TypicalityReport {
        disclosed: rs.to_vec(),
        failure_rates,
        typical_trials,
        non_typical_fraction: 1.0 - typical_trials as f64 / exp.trials as f64,
        max_list_size: max_list,
        list_size_bound: exp.list_size_bound(),
        lemma3_failure_bound: exp.lemma3_failure_bound(),
    })
}

fn draw(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
