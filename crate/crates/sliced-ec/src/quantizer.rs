//! Interval quantization of Alice's key space.
//!
//! The real line is divided into `t` intervals by thresholds
//! tau_1 < ... < tau_{t-1} (tau_0 = -inf and tau_t = +inf are implicit).
//! The optimizer picks symmetric thresholds (tau_a = -tau_{t-a}) that
//! maximize I(T(X); X') = H(T(X)) + H(X') - H(T(X), X'). The optimal ladders
//! blend equiprobable spacing, which maximizes H(T(X)), with equal widths,
//! which suit the additive noise; both serve as starting points.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::quad::integrate_1d;
use crate::stats::{normal_cdf, normal_quantile, xlog2x};

/// Strictly increasing finite thresholds defining t = len + 1 intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct IntervalPartition {
    thresholds: Vec<f64>,
}

impl TryFrom<Vec<f64>> for IntervalPartition {
    type Error = Error;
    fn try_from(thresholds: Vec<f64>) -> Result<Self> {
        Self::new(thresholds)
    }
}

impl From<IntervalPartition> for Vec<f64> {
    fn from(p: IntervalPartition) -> Vec<f64> {
        p.thresholds
    }
}

impl IntervalPartition {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidParameter(
                "a partition needs at least one threshold (t >= 2)".into(),
            ));
        }
        if !thresholds.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("thresholds must be finite".into()));
        }
        if !thresholds.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self { thresholds })
    }

    /// Number of intervals.
    pub fn interval_count(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// 1-based index a of the interval [tau_{a-1}, tau_a) containing `x`.
    pub fn interval_of(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&tau| tau <= x) + 1
    }

    /// True when tau_a = -tau_{t-a} within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.thresholds.len();
        (0..n).all(|i| (self.thresholds[i] + self.thresholds[n - 1 - i]).abs() <= tol)
    }
}

/// Entropy terms behind a mutual information evaluation, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoReport {
    /// H(T(X)), entropy of the interval index.
    pub h_intervals: f64,
    /// H(X'), differential entropy of Bob's observation.
    pub h_observation: f64,
    /// H(T(X), X'), the mixed joint entropy.
    pub h_joint: f64,
    /// I(T(X); X') = H(T(X)) + H(X') - H(T(X), X').
    pub mi: f64,
}

/// P(T(X) = a) for the 1-based interval index `a`.
pub fn interval_probability(
    params: &ChannelParams,
    partition: &IntervalPartition,
    a: usize,
) -> Result<f64> {
    let t = partition.interval_count();
    if a == 0 || a > t {
        return Err(Error::InvalidParameter(format!(
            "interval index {a} out of range 1..={t}"
        )));
    }
    Ok(interval_probabilities(params, partition)[a - 1])
}

/// All interval probabilities; they sum to 1 up to rounding.
pub fn interval_probabilities(params: &ChannelParams, partition: &IntervalPartition) -> Vec<f64> {
    let s = params.sigma_source() * std::f64::consts::SQRT_2;
    let mut cdf = Vec::with_capacity(partition.interval_count() + 1);
    cdf.push(-1.0);
    for &tau in partition.thresholds() {
        cdf.push(libm::erf(tau / s));
    }
    cdf.push(1.0);
    cdf.windows(2).map(|w| 0.5 * (w[1] - w[0])).collect()
}

/// Joint weights f_a(x') = P(T(X) = a, X' = x') for every interval at a
/// fixed observation, computed from the conditional CDF at the thresholds.
pub(crate) fn interval_weights_at(
    params: &ChannelParams,
    partition: &IntervalPartition,
    x_prime: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    let marginal = crate::stats::normal_pdf(x_prime, 0.0, params.observation_sd());
    if params.sigma_noise() == 0.0 {
        // Perfect channel: all conditional mass sits in x' own interval.
        let a = partition.interval_of(x_prime);
        out.resize(partition.interval_count(), 0.0);
        out[a - 1] = marginal;
        return;
    }
    let mu = params.conditional_mean(x_prime);
    let sd = params.conditional_sd();
    let mut prev = 0.0;
    for &tau in partition.thresholds() {
        let c = normal_cdf((tau - mu) / sd);
        out.push((c - prev).max(0.0) * marginal);
        prev = c;
    }
    out.push((1.0 - prev).max(0.0) * marginal);
}

/// Evaluates H(T(X)), H(X'), H(T(X), X') and their mutual information.
pub fn mutual_information(
    params: &ChannelParams,
    partition: &IntervalPartition,
) -> Result<MutualInfoReport> {
    if params.sigma_noise() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let probs = interval_probabilities(params, partition);
    let h_intervals = -probs.iter().map(|&p| xlog2x(p)).sum::<f64>();
    let h_observation = params.observation_entropy_bits();
    let quad = params.observation_quadrature();
    let mut weights = Vec::new();
    let h_joint = integrate_1d(
        |xp| {
            interval_weights_at(params, partition, xp, &mut weights);
            -weights.iter().map(|&w| xlog2x(w)).sum::<f64>()
        },
        &quad,
    )?;
    Ok(MutualInfoReport {
        h_intervals,
        h_observation,
        h_joint,
        mi: h_intervals + h_observation - h_joint,
    })
}

/// Symmetric partition whose intervals are equiprobable under the source.
pub fn equiprobable_partition(params: &ChannelParams, t: usize) -> Result<IntervalPartition> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "need t >= 2 intervals, got {t}"
        )));
    }
    let thresholds = (1..t)
        .map(|a| {
            if 2 * a == t {
                0.0
            } else {
                params.sigma_source() * normal_quantile(a as f64 / t as f64)
            }
        })
        .collect();
    IntervalPartition::new(thresholds)
}

/// Symmetric equal-width partition spanning the central quantile range.
fn equal_width_partition(params: &ChannelParams, t: usize) -> Result<IntervalPartition> {
    if t == 2 {
        return IntervalPartition::new(vec![0.0]);
    }
    let outer = params.sigma_source() * normal_quantile(1.0 - 0.5 / t as f64);
    // tau_a = (a - t/2) w is symmetric for both parities of t; w scales the
    // outermost threshold onto `outer`.
    let width = outer / (t as f64 / 2.0 - 1.0).max(0.5);
    let thresholds = (1..t)
        .map(|a| (a as f64 - t as f64 / 2.0) * width)
        .collect();
    IntervalPartition::new(thresholds)
}

/// Controls for the threshold optimizer.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    /// Stop once a full refinement sweep improves the objective by less than
    /// this many bits.
    pub mi_tolerance: f64,
    /// Budget of refinement sweeps after the simplex stage.
    pub max_sweeps: usize,
    /// Iteration budget for each Nelder-Mead stage.
    pub max_simplex_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            mi_tolerance: 1e-9,
            max_sweeps: 500,
            max_simplex_iterations: 20_000,
        }
    }
}

/// Maximizes I(T(X); X') over symmetric partitions with `t` intervals.
///
/// The free variables are the floor((t-1)/2) positive thresholds; the
/// negative half is mirrored. Two starts (equiprobable and equal-width) are
/// each refined by Nelder-Mead on log-increments followed by cyclic
/// per-threshold parabolic polishing; the best result wins, with ties broken
/// toward the lexicographically smaller threshold vector.
pub fn optimize_partition(
    params: &ChannelParams,
    t: usize,
    settings: &OptimizerSettings,
) -> Result<IntervalPartition> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "need t >= 2 intervals, got {t}"
        )));
    }
    if params.sigma_noise() == 0.0 {
        // Noiseless channel: I(T(X); X') = H(T(X)), maximized by the
        // equiprobable ladder.
        return equiprobable_partition(params, t);
    }
    let free = (t - 1) / 2;
    if free == 0 {
        return IntervalPartition::new(vec![0.0]);
    }

    let quad = params.observation_quadrature();
    let probs_cache = std::cell::RefCell::new(Vec::new());
    let objective = |upper: &[f64]| -> f64 {
        let partition = match assemble_symmetric(upper, t) {
            Ok(p) => p,
            Err(_) => return f64::NEG_INFINITY,
        };
        let probs = interval_probabilities(params, &partition);
        let h_intervals = -probs.iter().map(|&p| xlog2x(p)).sum::<f64>();
        let mut weights = probs_cache.borrow_mut();
        let h_joint = integrate_1d(
            |xp| {
                interval_weights_at(params, &partition, xp, &mut weights);
                -weights.iter().map(|&w| xlog2x(w)).sum::<f64>()
            },
            &quad,
        )
        .unwrap_or(f64::NEG_INFINITY);
        if !h_joint.is_finite() {
            return f64::NEG_INFINITY;
        }
        h_intervals + params.observation_entropy_bits() - h_joint
    };

    let starts = [
        upper_half(&equiprobable_partition(params, t)?, t),
        upper_half(&equal_width_partition(params, t)?, t),
    ];

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let candidate = refine_start(&start, &objective, settings)?;
        let value = objective(&candidate);
        let better = match &best {
            None => true,
            Some((bv, bu)) => {
                value > bv + 1e-12 || ((value - bv).abs() <= 1e-12 && lex_less(&candidate, bu))
            }
        };
        if better {
            best = Some((value, candidate));
        }
    }
    let (_, upper) = best.expect("at least one start");
    assemble_symmetric(&upper, t)
}

/// Positive free thresholds of a symmetric partition.
fn upper_half(partition: &IntervalPartition, t: usize) -> Vec<f64> {
    let ts = partition.thresholds();
    let free = (t - 1) / 2;
    ts[ts.len() - free..].to_vec()
}

/// Full symmetric threshold ladder from the positive free ones.
fn assemble_symmetric(upper: &[f64], t: usize) -> Result<IntervalPartition> {
    if upper.iter().any(|&u| !u.is_finite() || u <= 0.0) {
        return Err(Error::InvalidParameter(
            "free thresholds must be positive".into(),
        ));
    }
    let mut thresholds = Vec::with_capacity(t - 1);
    for &u in upper.iter().rev() {
        thresholds.push(-u);
    }
    if t.is_multiple_of(2) {
        thresholds.push(0.0);
    }
    thresholds.extend_from_slice(upper);
    IntervalPartition::new(thresholds)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Nelder-Mead on log-increments, then cyclic parabolic polish per
/// threshold in the original coordinates.
fn refine_start(
    start: &[f64],
    objective: &dyn Fn(&[f64]) -> f64,
    settings: &OptimizerSettings,
) -> Result<Vec<f64>> {
    let to_log_inc = |upper: &[f64]| -> Vec<f64> {
        let mut prev = 0.0;
        upper
            .iter()
            .map(|&u| {
                let inc = (u - prev).max(1e-12);
                prev = u;
                inc.ln()
            })
            .collect()
    };
    let from_log_inc = |z: &[f64]| -> Vec<f64> {
        let mut acc = 0.0;
        z.iter()
            .map(|&v| {
                acc += v.exp();
                acc
            })
            .collect()
    };

    let f = |z: &[f64]| -> f64 { objective(&from_log_inc(z)) };
    let z0 = to_log_inc(start);
    let z_opt = nelder_mead_max(&f, &z0, 0.15, settings.max_simplex_iterations);
    let mut upper = from_log_inc(&z_opt);
    let mut value = objective(&upper);

    // Cyclic per-coordinate parabolic refinement in threshold space.
    let mut converged = false;
    for _ in 0..settings.max_sweeps {
        let before = value;
        for i in 0..upper.len() {
            let lo = if i == 0 { 0.0 } else { upper[i - 1] };
            let hi = if i + 1 < upper.len() {
                upper[i + 1]
            } else {
                f64::INFINITY
            };
            let (x, v) = line_maximize(
                |x| {
                    let mut candidate = upper.clone();
                    candidate[i] = x;
                    objective(&candidate)
                },
                upper[i],
                lo,
                hi,
                value,
            );
            upper[i] = x;
            value = v;
        }
        if value - before < settings.mi_tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OptimizerNonConvergence {
            iterations: settings.max_sweeps,
        });
    }
    Ok(upper)
}

/// One-dimensional maximization by successive parabolic interpolation with
/// golden-section fallbacks, constrained to (lo, hi).
fn line_maximize(f: impl Fn(f64) -> f64, x0: f64, lo: f64, hi: f64, f0: f64) -> (f64, f64) {
    let span = if hi.is_finite() {
        hi - lo
    } else {
        (x0 - lo).max(1.0) * 2.0
    };
    let clamp = |x: f64| {
        let eps = span * 1e-9;
        x.max(lo + eps)
            .min(if hi.is_finite() { hi - eps } else { f64::MAX })
    };

    // Bracket the maximum around x0 by doubling steps in the uphill
    // direction.
    let mut step = (span * 0.05).max(1e-8);
    let up = clamp(x0 + step);
    let down = clamp(x0 - step);
    let (fu, fd) = (f(up), f(down));
    let (mut a, mut b, mut c, mut fa, mut fb, mut fc);
    if fu >= f0 && fu >= fd {
        (a, fa, b, fb) = (x0, f0, up, fu);
        (c, fc) = loop {
            step *= 2.0;
            let next = clamp(b + step);
            if next <= b {
                break (b, fb);
            }
            let fnext = f(next);
            if fnext < fb {
                break (next, fnext);
            }
            (a, fa, b, fb) = (b, fb, next, fnext);
        };
    } else if fd >= f0 {
        (c, fc, b, fb) = (x0, f0, down, fd);
        (a, fa) = loop {
            step *= 2.0;
            let next = clamp(b - step);
            if next >= b {
                break (b, fb);
            }
            let fnext = f(next);
            if fnext < fb {
                break (next, fnext);
            }
            (c, fc, b, fb) = (b, fb, next, fnext);
        };
    } else {
        (a, fa, b, fb, c, fc) = (down, fd, x0, f0, up, fu);
    }

    // Parabolic steps through (a, b, c) with a golden fallback.
    let gold = 0.381_966_011_250_105;
    for _ in 0..60 {
        if (c - a).abs() < 1e-12 {
            break;
        }
        let (left, right) = (b - a, c - b);
        let mut x = if left > right {
            b - gold * left
        } else {
            b + gold * right
        };
        let d1 = (b - a) * (fb - fc);
        let d2 = (b - c) * (fb - fa);
        let denom = 2.0 * (d1 - d2);
        if denom.abs() > 1e-300 {
            let xp = b - ((b - a) * d1 - (b - c) * d2) / denom;
            if xp > a && xp < c && (xp - b).abs() > 1e-14 {
                x = xp;
            }
        }
        let fx = f(x);
        if fx > fb {
            if x < b {
                (c, fc) = (b, fb);
            } else {
                (a, fa) = (b, fb);
            }
            (b, fb) = (x, fx);
        } else if x < b {
            (a, fa) = (x, fx);
        } else {
            (c, fc) = (x, fx);
        }
        if (c - a).abs() < 1e-11 * (b.abs() + 1.0) {
            break;
        }
    }
    (b, fb)
}

/// Standard Nelder-Mead simplex ascent (maximization).
fn nelder_mead_max(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iterations: usize,
) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iterations {
        // Order descending (best first).
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if values[best] - values[worst] < 1e-13 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, &x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = lerp(1.0);
        let fr = f(&reflected);
        if fr > values[best] {
            let expanded = lerp(2.0);
            let fe = f(&expanded);
            if fe > fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr > values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr > values[worst] {
                lerp(0.5)
            } else {
                lerp(-0.5)
            };
            let fc = f(&contracted);
            if fc > values[worst].max(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for (x, &a) in simplex[i].iter_mut().zip(&anchor) {
                        *x = a + 0.5 * (*x - a);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    simplex.swap_remove(order[0])
}

/// Partition file format shared by the CLI and the slicing design files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub snr: f64,
    pub sigma_source: f64,
    pub sigma_noise: f64,
    pub t: usize,
    pub thresholds: Vec<f64>,
    pub mi_report: Option<MutualInfoReport>,
}

impl PartitionRecord {
    pub fn new(
        params: &ChannelParams,
        partition: &IntervalPartition,
        mi_report: Option<MutualInfoReport>,
    ) -> Self {
        Self {
            snr: params.snr(),
            sigma_source: params.sigma_source(),
            sigma_noise: params.sigma_noise(),
            t: partition.interval_count(),
            thresholds: partition.thresholds().to_vec(),
            mi_report,
        }
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.sigma_source, self.sigma_noise)
    }

    pub fn partition(&self) -> Result<IntervalPartition> {
        let p = IntervalPartition::new(self.thresholds.clone())?;
        if p.interval_count() != self.t {
            return Err(Error::InvalidParameter(format!(
                "partition record claims t = {}, thresholds give {}",
                self.t,
                p.interval_count()
            )));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_2d, Quadrature};
    use crate::stats::binary_entropy;

    fn snr3() -> ChannelParams {
        ChannelParams::from_snr(3.0).unwrap()
    }

    #[test]
    fn rejects_bad_thresholds() {
        assert!(IntervalPartition::new(vec![]).is_err());
        assert!(IntervalPartition::new(vec![0.0, 0.0]).is_err());
        assert!(IntervalPartition::new(vec![1.0, -1.0]).is_err());
        assert!(IntervalPartition::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn interval_lookup_matches_definition() {
        let p = IntervalPartition::new(vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(p.interval_of(-5.0), 1);
        assert_eq!(p.interval_of(-1.0), 2); // tau_{a-1} <= x < tau_a
        assert_eq!(p.interval_of(-0.5), 2);
        assert_eq!(p.interval_of(0.0), 3);
        assert_eq!(p.interval_of(1.9), 3);
        assert_eq!(p.interval_of(2.0), 4);
        assert_eq!(p.interval_of(100.0), 4);
    }

    #[test]
    fn sign_split_is_even() {
        let params = ChannelParams::new(1.0, 0.5).unwrap();
        let part = IntervalPartition::new(vec![0.0]).unwrap();
        assert!((interval_probability(&params, &part, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((interval_probability(&params, &part, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(interval_probability(&params, &part, 0).is_err());
        assert!(interval_probability(&params, &part, 3).is_err());
    }

    fn published_partition() -> IntervalPartition {
        let upper = [0.254, 0.514, 0.768, 1.081, 1.411, 1.808, 2.347];
        let mut thresholds: Vec<f64> = upper.iter().rev().map(|&u| -u).collect();
        thresholds.push(0.0);
        thresholds.extend_from_slice(&upper);
        IntervalPartition::new(thresholds).unwrap()
    }

    #[test]
    fn published_interval_probability() {
        // Interval 9 is [0, 0.254): P = erf(0.254 / sqrt 2) / 2.
        let params = snr3();
        let part = published_partition();
        let p9 = interval_probability(&params, &part, 9).unwrap();
        let expect = 0.5 * libm::erf(0.254 / std::f64::consts::SQRT_2);
        assert!((p9 - expect).abs() < 1e-14);
        assert!((p9 - 0.1003).abs() < 5e-4);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let params = snr3();
        for part in [
            published_partition(),
            IntervalPartition::new(vec![-0.3, 1.7]).unwrap(),
            equiprobable_partition(&params, 13).unwrap(),
        ] {
            let total: f64 = interval_probabilities(&params, &part).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn report_terms_are_consistent() {
        let params = snr3();
        let part = published_partition();
        let report = mutual_information(&params, &part).unwrap();
        assert!(
            (report.mi - (report.h_intervals + report.h_observation - report.h_joint)).abs() < 1e-9
        );
        let t = part.interval_count() as f64;
        assert!(report.mi > 0.0 && report.mi <= t.log2());
        assert!(report.mi <= params.capacity_bits());
    }

    #[test]
    fn trivial_partition_carries_no_information() {
        // t = 1 cannot be represented (needs a threshold); the nearest
        // degenerate case is rejected at construction.
        assert!(IntervalPartition::new(vec![]).is_err());
    }

    /// Independent route to I(T(X); X'): nested generic quadrature of the
    /// joint density per interval, never using the erf shortcut.
    fn mi_by_2d_quadrature(params: &ChannelParams, part: &IntervalPartition) -> f64 {
        let probs = interval_probabilities(params, part);
        let sd = params.observation_sd();
        let qy = params.observation_quadrature();
        let mut edges = vec![-8.0 * params.sigma_source()];
        edges.extend_from_slice(part.thresholds());
        edges.push(8.0 * params.sigma_source());
        let mut mi = 0.0;
        for (a, w) in edges.windows(2).enumerate() {
            let qx = Quadrature::composite_gauss_legendre(16, 24, w[0], w[1]).unwrap();
            mi += integrate_2d(
                |x, xp| {
                    // f log2( f_a(x') / (P_a p(x')) ) integrated over the
                    // cell equals the cell's contribution to I(T; X').
                    let f = crate::channel::joint_density(params, x, xp).unwrap();
                    let mut weights = Vec::new();
                    interval_weights_at(params, part, xp, &mut weights);
                    let fa = weights[a];
                    if f <= 0.0 || fa <= 0.0 {
                        // Far-tail underflow; the true contribution is
                        // below 1e-40.
                        return 0.0;
                    }
                    let marginal = crate::stats::normal_pdf(xp, 0.0, sd);
                    f * (fa / (probs[a] * marginal)).log2()
                },
                &qx,
                &qy,
            )
            .unwrap();
        }
        mi
    }

    #[test]
    fn sign_partition_mi_matches_independent_quadrature() {
        let params = snr3();
        let part = IntervalPartition::new(vec![0.0]).unwrap();
        let report = mutual_information(&params, &part).unwrap();
        let oracle = mi_by_2d_quadrature(&params, &part);
        assert!(
            (report.mi - oracle).abs() < 1e-6,
            "{} vs {oracle}",
            report.mi
        );
        // The sign channel's error rate is 1/6 at SNR 3; its BSC capacity
        // 1 - h(1/6) = 0.35 lower-bounds the mutual information with the
        // raw observation (data processing). The net rate of the one-slice
        // system is that BSC figure, not this mutual information.
        assert!(report.mi >= 1.0 - binary_entropy(1.0 / 6.0) - 1e-9);
    }

    #[test]
    fn optimizer_t2_puts_threshold_at_zero() {
        let params = snr3();
        let part = optimize_partition(&params, 2, &OptimizerSettings::default()).unwrap();
        assert_eq!(part.thresholds().len(), 1);
        assert!(part.thresholds()[0].abs() < 1e-3);
    }

    #[test]
    fn optimizer_matches_published_ladder() {
        let params = snr3();
        let part = optimize_partition(&params, 16, &OptimizerSettings::default()).unwrap();
        assert!(part.is_symmetric(1e-12));
        let expect = [0.0, 0.254, 0.514, 0.768, 1.081, 1.411, 1.808, 2.347];
        for (tau, want) in part.thresholds()[7..].iter().zip(expect) {
            assert!((tau - want).abs() < 0.02, "tau {tau} vs published {want}");
        }
        // The published ladder is rounded to three decimals; its mutual
        // information must sit within a sliver of the optimizer's own
        // maximum.
        let best = mutual_information(&params, &part).unwrap().mi;
        let rounded = mutual_information(&params, &published_partition())
            .unwrap()
            .mi;
        assert!(rounded >= 0.99 * best && rounded <= best + 1e-9);
        assert!(best <= 1.0 + 1e-9, "one bit is the cap at SNR 3");
    }

    #[test]
    fn optimizer_result_is_locally_optimal() {
        let params = snr3();
        let settings = OptimizerSettings::default();
        let part = optimize_partition(&params, 8, &settings).unwrap();
        let base = mutual_information(&params, &part).unwrap().mi;
        let free: Vec<f64> = part
            .thresholds()
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .collect();
        let mut rng = crate::rng::seeded(99);
        use rand::Rng;
        for _ in 0..100 {
            let perturbed: Vec<f64> = free
                .iter()
                .map(|&u| u * (1.0 + 1e-3 * rng.gen_range(-1.0..1.0)))
                .collect();
            let Ok(candidate) = assemble_symmetric(&perturbed, 8) else {
                continue;
            };
            let mi = mutual_information(&params, &candidate).unwrap().mi;
            assert!(
                mi <= base + 1e-10,
                "perturbation beat the optimum: {mi} > {base}"
            );
        }
    }

    #[test]
    fn optimizer_reports_non_convergence() {
        let params = snr3();
        let starved = OptimizerSettings {
            max_sweeps: 0,
            ..OptimizerSettings::default()
        };
        let err = optimize_partition(&params, 8, &starved);
        assert!(matches!(err, Err(Error::OptimizerNonConvergence { .. })));
    }

    #[test]
    fn odd_interval_counts_optimize_symmetrically() {
        let params = snr3();
        for t in [3usize, 5] {
            let part = optimize_partition(&params, t, &OptimizerSettings::default()).unwrap();
            assert_eq!(part.interval_count(), t);
            assert!(part.is_symmetric(1e-9), "t = {t}: {:?}", part.thresholds());
            let mi = mutual_information(&params, &part).unwrap().mi;
            assert!(mi > 0.0 && mi <= (t as f64).log2());
        }
    }

    #[test]
    fn mi_is_monotone_in_interval_count() {
        let params = snr3();
        let settings = OptimizerSettings::default();
        let mut last = 0.0;
        for t in [2usize, 4, 8, 16] {
            let part = optimize_partition(&params, t, &settings).unwrap();
            let mi = mutual_information(&params, &part).unwrap().mi;
            assert!(mi > last, "t = {t}: {mi} <= {last}");
            last = mi;
        }
        // At SNR 3 sixteen intervals already carry > 0.95 of the 1-bit cap.
        assert!(last > 0.95);
        assert!(last <= 1.0);
    }

    #[test]
    fn refinement_never_loses_information() {
        let params = snr3();
        let coarse = IntervalPartition::new(vec![-0.6, 0.6]).unwrap();
        let mi_coarse = mutual_information(&params, &coarse).unwrap().mi;
        for extra in [-1.5, -0.1, 0.3, 2.0] {
            let mut ts = coarse.thresholds().to_vec();
            ts.push(extra);
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let fine = IntervalPartition::new(ts).unwrap();
            let mi_fine = mutual_information(&params, &fine).unwrap().mi;
            assert!(
                mi_fine >= mi_coarse - 1e-9,
                "adding {extra} lost information"
            );
        }
    }

    #[test]
    fn scale_equivariance() {
        let lambda = 3.7;
        let params = snr3();
        let scaled = ChannelParams::new(
            params.sigma_source() * lambda,
            params.sigma_noise() * lambda,
        )
        .unwrap();
        let part = published_partition();
        let part_scaled =
            IntervalPartition::new(part.thresholds().iter().map(|&x| x * lambda).collect())
                .unwrap();
        let p1 = interval_probabilities(&params, &part);
        let p2 = interval_probabilities(&scaled, &part_scaled);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-12);
        }
        let r1 = mutual_information(&params, &part).unwrap();
        let r2 = mutual_information(&scaled, &part_scaled).unwrap();
        assert!((r1.mi - r2.mi).abs() < 1e-9, "{} vs {}", r1.mi, r2.mi);
    }

    #[test]
    fn partition_record_round_trips() {
        let params = snr3();
        let part = published_partition();
        let report = mutual_information(&params, &part).unwrap();
        let record = PartitionRecord::new(&params, &part, Some(report));
        let json = serde_json::to_string(&record).unwrap();
        let back: PartitionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.partition().unwrap(), part);
        assert_eq!(back.channel().unwrap(), params);
        let again =
            mutual_information(&back.channel().unwrap(), &back.partition().unwrap()).unwrap();
        assert_eq!(again.mi, report.mi);
    }
}
