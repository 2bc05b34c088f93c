//! Slices and their maximum likelihood estimators.
//!
//! With t = 2^m intervals, interval a is labeled by the binary digits of
//! a - 1 and slice i extracts bit i - 1, least significant bit first. The
//! first slices are nearly random given X' and exist to narrow Bob's search;
//! the last ones carry the information.
//!
//! Bob guesses slice i from his observation x' and the already corrected
//! bits beta_1..beta_{i-1} of the earlier slices by comparing the posterior
//! weights of the two candidate interval sets:
//!
//!   W_b(x') = sum over intervals a consistent with (beta, bit = b) of
//!             P(T(X) = a, x')
//!
//! choosing 0 when W_0 > W_1 and 1 otherwise (ties go to 1). Since each
//! W_b is a smooth mixture, the decision is piecewise constant in x' and is
//! stored as its list of sign-change boundaries, located by a grid scan plus
//! bisection. Error rates integrate min(W_0, W_1) per prior pattern, with
//! quadrature panels split at the decision boundaries so every panel sees a
//! smooth integrand.

use serde::{Deserialize, Serialize};

use crate::channel::{sample_pairs, ChannelParams, TAIL_SIGMAS};
use crate::error::{Error, Result};
use crate::quad::{integrate_1d, Quadrature};
use crate::quantizer::{IntervalPartition, MutualInfoReport, PartitionRecord};
use crate::stats::{binary_entropy, normal_cdf, normal_pdf};

/// Grid cells scanned for decision boundary sign changes.
const BOUNDARY_GRID: usize = 8192;
/// Per-region quadrature used for error rate integrals.
const REGION_ORDER: usize = 16;

/// A partition of size 2^m together with the LSB-first bit assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDesign {
    params: ChannelParams,
    partition: IntervalPartition,
    slices: usize,
}

impl SliceDesign {
    pub fn new(params: ChannelParams, partition: IntervalPartition) -> Result<Self> {
        let t = partition.interval_count();
        if t < 2 || !t.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "slicing needs a power-of-two interval count, got t = {t}"
            )));
        }
        Ok(Self {
            params,
            partition,
            slices: t.trailing_zeros() as usize,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    /// Number of slices m (t = 2^m).
    pub fn slice_count(&self) -> usize {
        self.slices
    }

    pub fn interval_count(&self) -> usize {
        self.partition.interval_count()
    }

    /// m-bit label of the 1-based interval index: the bits of a - 1.
    pub fn label_of_interval(&self, a: usize) -> usize {
        a - 1
    }

    /// S_i(x) for the 1-based slice index i.
    pub fn slice_value(&self, i: usize, x: f64) -> u8 {
        debug_assert!(i >= 1 && i <= self.slices);
        let label = self.partition.interval_of(x) - 1;
        ((label >> (i - 1)) & 1) as u8
    }

    /// All m slice bits of `x`, slice 1 first.
    pub fn slice_values(&self, x: f64) -> Vec<u8> {
        let label = self.partition.interval_of(x) - 1;
        (0..self.slices).map(|i| ((label >> i) & 1) as u8).collect()
    }

    /// Builds the maximum likelihood estimator for slice `i`.
    pub fn build_estimator(&self, i: usize) -> Result<SliceEstimator> {
        build_estimator(self, i)
    }

    /// Estimators for every slice, in order.
    pub fn build_estimators(&self) -> Result<Vec<SliceEstimator>> {
        (1..=self.slices).map(|i| self.build_estimator(i)).collect()
    }

    /// Labels (a - 1 values) whose low i bits match `pattern` in slices
    /// 1..i-1 and whose slice-i bit is `bit`.
    pub(crate) fn matching_labels(&self, i: usize, pattern: usize, bit: u8) -> Vec<usize> {
        let t = self.interval_count();
        let mask = (1usize << (i - 1)) - 1;
        (0..t)
            .filter(|label| label & mask == pattern && ((label >> (i - 1)) & 1) as u8 == bit)
            .collect()
    }

    /// Conditional interval weights P(T = a | x') ordered by label, or the
    /// degenerate indicator when the channel is noiseless.
    fn conditional_cdf_diffs(&self, x_prime: f64, out: &mut Vec<f64>) {
        out.clear();
        let t = self.interval_count();
        if self.params.sigma_noise() == 0.0 {
            out.resize(t, 0.0);
            out[self.partition.interval_of(x_prime) - 1] = 1.0;
            return;
        }
        let mu = self.params.conditional_mean(x_prime);
        let sd = self.params.conditional_sd();
        let mut prev = 0.0;
        for &tau in self.partition.thresholds() {
            let c = normal_cdf((tau - mu) / sd);
            out.push((c - prev).max(0.0));
            prev = c;
        }
        out.push((1.0 - prev).max(0.0));
    }
}

/// Decision rule for one prior-bit pattern: piecewise constant in x'.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDecision {
    /// Sorted boundaries where the decision flips.
    pub boundaries: Vec<f64>,
    /// Decision left of the first boundary.
    pub leftmost: u8,
    /// Set when the conditioning pattern selects an empty interval set; the
    /// decision is then the constant tie value 1.
    pub degenerate: bool,
}

impl PatternDecision {
    fn decide(&self, x_prime: f64) -> u8 {
        let flips = self.boundaries.partition_point(|&b| b <= x_prime);
        self.leftmost ^ ((flips & 1) as u8)
    }

    /// Constant-decision regions covering [-span, span].
    pub(crate) fn regions(&self, span: f64) -> Vec<(f64, f64, u8)> {
        let skipped = self.boundaries.iter().filter(|b| **b <= -span).count();
        let mut edges = vec![-span];
        edges.extend(self.boundaries.iter().copied().filter(|b| b.abs() < span));
        edges.push(span);
        let mut value = self.leftmost ^ ((skipped & 1) as u8);
        edges
            .windows(2)
            .map(|w| {
                let region = (w[0], w[1], value);
                value ^= 1;
                region
            })
            .collect()
    }
}

/// Bob's maximum likelihood estimator for one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceEstimator {
    /// 1-based slice index.
    pub slice: usize,
    /// One decision rule per prior-bit pattern; pattern index packs bit j of
    /// slice j+1 (slice 1 is the least significant bit).
    pub patterns: Vec<PatternDecision>,
}

impl SliceEstimator {
    /// Packs prior bits (slice 1 first) into the pattern index.
    pub fn pattern_index(prior_bits: &[u8]) -> usize {
        prior_bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | ((b as usize & 1) << j))
    }

    /// The estimated bit given the observation and the corrected bits of
    /// the earlier slices.
    pub fn decide(&self, x_prime: f64, prior_bits: &[u8]) -> u8 {
        debug_assert_eq!(prior_bits.len(), self.slice - 1);
        self.patterns[Self::pattern_index(prior_bits)].decide(x_prime)
    }
}

/// Builds the decision boundaries of slice `i` for every prior-bit pattern.
pub fn build_estimator(design: &SliceDesign, i: usize) -> Result<SliceEstimator> {
    let m = design.slice_count();
    if i == 0 || i > m {
        return Err(Error::InvalidParameter(format!(
            "slice index {i} out of range 1..={m}"
        )));
    }
    if design.params().sigma_noise() == 0.0 {
        return Ok(noiseless_estimator(design, i));
    }
    let span = TAIL_SIGMAS * design.params().observation_sd();
    let mut patterns = Vec::with_capacity(1 << (i - 1));
    let mut diffs = Vec::new();
    for pattern in 0..(1usize << (i - 1)) {
        let zeros = design.matching_labels(i, pattern, 0);
        let ones = design.matching_labels(i, pattern, 1);
        if zeros.is_empty() && ones.is_empty() {
            patterns.push(PatternDecision {
                boundaries: Vec::new(),
                leftmost: 1,
                degenerate: true,
            });
            continue;
        }
        // Difference of posterior weights; the marginal density cancels.
        let mut gap = |xp: f64| -> f64 {
            design.conditional_cdf_diffs(xp, &mut diffs);
            let w0: f64 = zeros.iter().map(|&l| diffs[l]).sum();
            let w1: f64 = ones.iter().map(|&l| diffs[l]).sum();
            w0 - w1
        };
        let mut boundaries = Vec::new();
        let step = 2.0 * span / BOUNDARY_GRID as f64;
        let mut x_prev = -span;
        let mut g_prev = gap(x_prev);
        let leftmost = if g_prev > 0.0 { 0 } else { 1 };
        for k in 1..=BOUNDARY_GRID {
            let x = -span + step * k as f64;
            let g = gap(x);
            if g_prev > 0.0 && g <= 0.0 || g_prev <= 0.0 && g > 0.0 {
                boundaries.push(bisect_sign_change(&mut gap, x_prev, x, g_prev));
            }
            x_prev = x;
            g_prev = g;
        }
        patterns.push(PatternDecision {
            boundaries,
            leftmost,
            degenerate: false,
        });
    }
    Ok(SliceEstimator { slice: i, patterns })
}

/// With zero noise Bob sees x exactly; the decision is the slice value of
/// his own interval whenever it is consistent with the prior bits, and the
/// tie value 1 otherwise.
fn noiseless_estimator(design: &SliceDesign, i: usize) -> SliceEstimator {
    let t = design.interval_count();
    let mask = (1usize << (i - 1)) - 1;
    let mut patterns = Vec::with_capacity(1 << (i - 1));
    for pattern in 0..(1usize << (i - 1)) {
        let decision_of_label = |label: usize| -> u8 {
            if label & mask == pattern {
                ((label >> (i - 1)) & 1) as u8
            } else {
                1
            }
        };
        let mut boundaries = Vec::new();
        let leftmost = decision_of_label(0);
        let mut current = leftmost;
        for a in 1..t {
            let d = decision_of_label(a);
            if d != current {
                boundaries.push(design.partition().thresholds()[a - 1]);
                current = d;
            }
        }
        patterns.push(PatternDecision {
            boundaries,
            leftmost,
            degenerate: false,
        });
    }
    SliceEstimator { slice: i, patterns }
}

fn bisect_sign_change(
    gap: &mut impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    g_lo: f64,
) -> f64 {
    let positive_left = g_lo > 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (gap(mid) > 0.0) == positive_left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-slice error rates and the leakage they imply, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceErrorProfile {
    /// e_i = Pr[S_i(X) != estimate], slice 1 first.
    #[serde(rename = "e")]
    pub error_rates: Vec<f64>,
    /// h(e_i) per slice.
    #[serde(rename = "h_e")]
    pub entropies: Vec<f64>,
    /// Sum of the h(e_i): the leakage of an ideal BSC-optimized protocol.
    #[serde(rename = "i_e")]
    pub leakage_bits: f64,
}

impl SliceErrorProfile {
    fn from_rates(error_rates: Vec<f64>) -> Self {
        let entropies: Vec<f64> = error_rates.iter().map(|&e| binary_entropy(e)).collect();
        let leakage_bits = entropies.iter().sum();
        Self {
            error_rates,
            entropies,
            leakage_bits,
        }
    }
}

/// Joint weight of the interval label set at x', including the marginal
/// observation density.
pub(crate) fn set_weight(
    design: &SliceDesign,
    labels: &[usize],
    x_prime: f64,
    diffs: &mut Vec<f64>,
) -> f64 {
    design.conditional_cdf_diffs(x_prime, diffs);
    let marginal = normal_pdf(x_prime, 0.0, design.params().observation_sd());
    labels.iter().map(|&l| diffs[l]).sum::<f64>() * marginal
}

/// Splits the observation window at the given boundaries and integrates `f`
/// with a fresh composite rule per region, so kinks at region edges do not
/// degrade the quadrature.
fn integrate_piecewise(
    span: f64,
    boundaries: &[f64],
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let mut edges = Vec::with_capacity(boundaries.len() + 2);
    edges.push(-span);
    edges.extend(boundaries.iter().copied().filter(|b| b.abs() < span));
    edges.push(span);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let panels = ((width / span * 48.0).ceil() as usize).clamp(2, 64);
        let quad = Quadrature::composite_gauss_legendre(REGION_ORDER, panels, w[0], w[1])?;
        total += integrate_1d(&mut f, &quad)?;
    }
    Ok(total)
}

/// Error rates by quadrature: e_i sums, over prior patterns, the integral of
/// the smaller posterior weight.
pub fn slice_error_rates(
    design: &SliceDesign,
    estimators: &[SliceEstimator],
) -> Result<SliceErrorProfile> {
    expect_estimators(design, estimators)?;
    let span = TAIL_SIGMAS * design.params().observation_sd();
    let mut diffs = Vec::new();
    let mut rates = Vec::with_capacity(design.slice_count());
    for estimator in estimators {
        let i = estimator.slice;
        let mut e_i = 0.0;
        for (pattern, decision) in estimator.patterns.iter().enumerate() {
            let zeros = design.matching_labels(i, pattern, 0);
            let ones = design.matching_labels(i, pattern, 1);
            e_i += integrate_piecewise(span, &decision.boundaries, |xp| {
                let w0 = set_weight(design, &zeros, xp, &mut diffs);
                let w1 = set_weight(design, &ones, xp, &mut diffs);
                w0.min(w1)
            })?;
        }
        rates.push(e_i);
    }
    Ok(SliceErrorProfile::from_rates(rates))
}

/// Error rate of an arbitrary (not necessarily optimal) estimator for its
/// slice, integrating the weight of the rejected bit over each decision
/// region.
pub fn error_rate_with_estimator(design: &SliceDesign, estimator: &SliceEstimator) -> Result<f64> {
    let i = estimator.slice;
    if i == 0 || i > design.slice_count() {
        return Err(Error::InvalidParameter(format!(
            "estimator slice {i} out of range"
        )));
    }
    let span = TAIL_SIGMAS * design.params().observation_sd();
    let mut diffs = Vec::new();
    let mut e_i = 0.0;
    for (pattern, decision) in estimator.patterns.iter().enumerate() {
        let zeros = design.matching_labels(i, pattern, 0);
        let ones = design.matching_labels(i, pattern, 1);
        e_i += integrate_piecewise(span, &decision.boundaries, |xp| {
            let rejected = if decision.decide(xp) == 0 {
                &ones
            } else {
                &zeros
            };
            set_weight(design, rejected, xp, &mut diffs)
        })?;
    }
    Ok(e_i)
}

/// Empirical error rates from seeded sampling; Bob conditions on Alice's
/// true bits for the earlier slices, mirroring the quadrature definition.
pub fn monte_carlo_error_rates(
    design: &SliceDesign,
    estimators: &[SliceEstimator],
    count: usize,
    seed: u64,
) -> Result<SliceErrorProfile> {
    expect_estimators(design, estimators)?;
    if count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let pairs = sample_pairs(design.params(), count, seed)?;
    let m = design.slice_count();
    let mut mismatches = vec![0usize; m];
    for pair in &pairs {
        let alice = design.slice_values(pair.x);
        for (i, estimator) in estimators.iter().enumerate() {
            let guess = estimator.decide(pair.x_prime, &alice[..i]);
            if guess != alice[i] {
                mismatches[i] += 1;
            }
        }
    }
    let rates = mismatches
        .iter()
        .map(|&k| k as f64 / count as f64)
        .collect();
    Ok(SliceErrorProfile::from_rates(rates))
}

fn expect_estimators(design: &SliceDesign, estimators: &[SliceEstimator]) -> Result<()> {
    if estimators.len() != design.slice_count() {
        return Err(Error::InvalidParameter(format!(
            "expected {} estimators, got {}",
            design.slice_count(),
            estimators.len()
        )));
    }
    for (k, est) in estimators.iter().enumerate() {
        if est.slice != k + 1 {
            return Err(Error::InvalidParameter(format!(
                "estimator at position {k} is for slice {}",
                est.slice
            )));
        }
    }
    Ok(())
}

/// A design together with its estimators and error profile, the working set
/// every consumer (protocol, rate reports, CLI) needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSystem {
    pub design: SliceDesign,
    pub estimators: Vec<SliceEstimator>,
    pub profile: SliceErrorProfile,
}

impl SliceSystem {
    /// Builds the estimators and evaluates the error rates by quadrature.
    pub fn build(design: SliceDesign) -> Result<Self> {
        let estimators = design.build_estimators()?;
        let profile = slice_error_rates(&design, &estimators)?;
        Ok(Self {
            design,
            estimators,
            profile,
        })
    }

    pub fn slice_count(&self) -> usize {
        self.design.slice_count()
    }
}

/// Serializable bundle of a complete slice system: partition, estimator
/// boundaries per slice per prior pattern, and the error profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignFile {
    pub partition: PartitionRecord,
    pub m: usize,
    pub estimators: Vec<SliceEstimator>,
    #[serde(flatten)]
    pub profile: SliceErrorProfile,
}

impl DesignFile {
    pub fn assemble(
        design: &SliceDesign,
        mi_report: Option<MutualInfoReport>,
        estimators: Vec<SliceEstimator>,
        profile: SliceErrorProfile,
    ) -> Self {
        Self {
            partition: PartitionRecord::new(design.params(), design.partition(), mi_report),
            m: design.slice_count(),
            estimators,
            profile,
        }
    }

    /// Rebuilds the in-memory system; estimator boundaries are reused as
    /// stored rather than recomputed.
    pub fn instantiate(&self) -> Result<SliceSystem> {
        let design = SliceDesign::new(self.partition.channel()?, self.partition.partition()?)?;
        if design.slice_count() != self.m {
            return Err(Error::InvalidParameter(format!(
                "design file claims m = {}, partition gives {}",
                self.m,
                design.slice_count()
            )));
        }
        expect_estimators(&design, &self.estimators)?;
        Ok(SliceSystem {
            design,
            estimators: self.estimators.clone(),
            profile: self.profile.clone(),
        })
    }
}
