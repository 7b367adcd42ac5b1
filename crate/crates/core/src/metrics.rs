//! Exact and empirical evaluation of the distances the bounds dominate.

use crate::error::{Error, Result};
use crate::pmf::{common_lattice, LatticePmf};
use crate::special::{
    gamma_partial_expectation, gamma_quantile, normal_cdf, normal_cdf_antideriv,
    normal_partial_expectation, normal_quantile, solve_increasing,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Wasserstein,
    StopLoss,
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    ExactPmf,
    Empirical,
}

/// A distance value plus how it was obtained and how wrong it could be
/// (truncation mass contribution or a Monte Carlo band).
#[derive(Debug, Clone, Copy)]
pub struct DistanceEstimate {
    pub kind: DistanceKind,
    pub value: f64,
    pub method: DistanceMethod,
    pub error_bound: f64,
}

/// Continuous approximation target for stop-loss distances.
#[derive(Debug, Clone, Copy)]
pub enum StopLossTarget {
    /// Gamma with shape `r` and rate `s`.
    Gamma { r: f64, s: f64 },
    Normal { mean: f64, sd: f64 },
}

impl StopLossTarget {
    fn partial_expectation(&self, a: f64) -> f64 {
        match *self {
            StopLossTarget::Gamma { r, s } => gamma_partial_expectation(r, s, a),
            StopLossTarget::Normal { mean, sd } => normal_partial_expectation(mean, sd, a),
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        match *self {
            StopLossTarget::Gamma { r, s } => gamma_quantile(r, s, p),
            StopLossTarget::Normal { mean, sd } => mean + sd * normal_quantile(p),
        }
    }
}

/// 1-Wasserstein distance between two lattice pmfs: the integral of
/// |F_p - F_q| over lattice gaps, exact up to the truncation masses.
pub fn wasserstein_pmf_vs_pmf(p: &LatticePmf, q: &LatticePmf) -> Result<DistanceEstimate> {
    let (a, b) = common_lattice(p, q)?;
    let mut keys: Vec<i64> = a.iter().map(|(k, _)| k).chain(b.iter().map(|(k, _)| k)).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut fa = 0.0;
    let mut fb = 0.0;
    let mut acc = 0.0;
    for w in keys.windows(2) {
        fa += a.prob(w[0]);
        fb += b.prob(w[0]);
        acc += (fa - fb).abs() * (a.value(w[1]) - a.value(w[0]));
    }
    let span = a.value(*keys.last().unwrap()) - a.value(keys[0]);
    Ok(DistanceEstimate {
        kind: DistanceKind::Wasserstein,
        value: acc,
        method: DistanceMethod::ExactPmf,
        error_bound: (p.truncation_mass() + q.truncation_mass()) * span.max(1.0),
    })
}

/// Total variation distance (1/2) sum |p_k - q_k| between integer-lattice pmfs.
pub fn tv_pmf(p: &LatticePmf, q: &LatticePmf) -> Result<DistanceEstimate> {
    let value = p.tv_distance(q)?;
    Ok(DistanceEstimate {
        kind: DistanceKind::Tv,
        value,
        method: DistanceMethod::ExactPmf,
        error_bound: 0.5 * (p.truncation_mass() + q.truncation_mass()),
    })
}

/// Wasserstein distance between a step cdf (given as ascending `(x, F(x))`
/// pairs with F right-continuous) and N(mean, sd^2), as an exact integral of
/// the cdf difference using the closed antiderivative of Phi.
fn wasserstein_step_cdf_vs_normal(points: &[(f64, f64)], mean: f64, sd: f64) -> f64 {
    assert!(!points.is_empty() && sd > 0.0);
    let z = |x: f64| (x - mean) / sd;
    // Work on the standardized axis; rescale by sd at the end.
    let mut acc = normal_cdf_antideriv(z(points[0].0)); // left tail: F = 0
    for w in points.windows(2) {
        let (x0, c) = w[0];
        let x1 = w[1].0;
        acc += segment_abs_integral(z(x0), z(x1), c);
    }
    let (x_last, c_last) = *points.last().unwrap();
    debug_assert!((c_last - 1.0).abs() < 1e-9);
    let zl = z(x_last);
    acc += normal_cdf_antideriv(zl) - zl; // right tail: integral of 1 - Phi
    acc * sd
}

/// Integral of |c - Phi(z)| over [z0, z1], splitting at the crossing when the
/// segment brackets it.
fn segment_abs_integral(z0: f64, z1: f64, c: f64) -> f64 {
    let piece = |a: f64, b: f64| {
        // signed integral of (c - Phi) on [a, b]
        c * (b - a) - (normal_cdf_antideriv(b) - normal_cdf_antideriv(a))
    };
    if c <= 0.0 || c >= 1.0 {
        return piece(z0, z1).abs();
    }
    let p0 = normal_cdf(z0);
    let p1 = normal_cdf(z1);
    if (p0 - c) * (p1 - c) >= 0.0 {
        piece(z0, z1).abs()
    } else {
        let zc = solve_increasing(normal_cdf, c, z0, z1);
        piece(z0, zc).abs() + piece(zc, z1).abs()
    }
}

/// Wasserstein distance between the empirical cdf of `samples` and
/// N(mean, sd^2). The samples are consumed unsorted.
///
/// The error bound is a documented heuristic: a 1/sqrt(n) empirical-cdf band
/// scaled by the integration range.
pub fn wasserstein_empirical_vs_normal(
    samples: &mut [f64],
    mean: f64,
    sd: f64,
) -> Result<DistanceEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    if sd <= 0.0 {
        return Err(Error::InvalidParameter("sd must be positive".into()));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    // Collapse ties so the step cdf has one point per distinct value.
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    for (i, &x) in samples.iter().enumerate() {
        let f = (i + 1) as f64 / n as f64;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => points.push((x, f)),
        }
    }
    let value = wasserstein_step_cdf_vs_normal(&points, mean, sd);
    let range = (samples[n - 1] - samples[0]).max(sd);
    Ok(DistanceEstimate {
        kind: DistanceKind::Wasserstein,
        value,
        method: DistanceMethod::Empirical,
        error_bound: range / (n as f64).sqrt(),
    })
}

/// Wasserstein distance between a lattice pmf and N(mean, sd^2), exact up to
/// the pmf's truncation mass.
pub fn wasserstein_pmf_vs_normal(pmf: &LatticePmf, mean: f64, sd: f64) -> Result<DistanceEstimate> {
    if sd <= 0.0 {
        return Err(Error::InvalidParameter("sd must be positive".into()));
    }
    let pmf = pmf.normalized();
    let points = pmf.cdf_points();
    let value = wasserstein_step_cdf_vs_normal(&points, mean, sd);
    let span = points.last().unwrap().0 - points[0].0;
    Ok(DistanceEstimate {
        kind: DistanceKind::Wasserstein,
        value,
        method: DistanceMethod::ExactPmf,
        error_bound: pmf.truncation_mass() * span.max(sd),
    })
}

/// Number of retention grid points for the stop-loss supremum.
const STOPLOSS_GRID: usize = 4096;

/// Stop-loss distance sup_a |E(Y-a)_+ - E(Z-a)_+| over a hybrid
/// (geometric near 0 plus uniform) retention grid up to the 0.9999 quantile
/// of the wider law.
///
/// Both partial expectations are 1-Lipschitz in `a`, so the grid error is
/// bounded by the largest grid step; that bound goes into `error_bound`.
pub fn stoploss_distance_pmf(pmf: &LatticePmf, target: StopLossTarget) -> Result<DistanceEstimate> {
    let pmf = pmf.normalized();
    let atoms = pmf.atoms();
    stoploss_from_atoms(&atoms, target, DistanceMethod::ExactPmf, pmf.truncation_mass())
}

/// Stop-loss distance from samples of Y against the target law.
pub fn stoploss_distance_samples(
    samples: &mut [f64],
    target: StopLossTarget,
) -> Result<DistanceEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    let w = 1.0 / n as f64;
    let atoms: Vec<(f64, f64)> = samples.iter().map(|&x| (x, w)).collect();
    let mc_band = {
        // CLT band for a mean of (Y - a)_+ terms, crudely bounded by the
        // sample standard deviation over sqrt(n).
        let mean = samples.iter().sum::<f64>() * w;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() * w;
        3.0 * (var / n as f64).sqrt()
    };
    let mut est = stoploss_from_atoms(&atoms, target, DistanceMethod::Empirical, 0.0)?;
    est.error_bound += mc_band;
    Ok(est)
}

fn stoploss_from_atoms(
    atoms: &[(f64, f64)],
    target: StopLossTarget,
    method: DistanceMethod,
    truncation_mass: f64,
) -> Result<DistanceEstimate> {
    let y_hi = atoms.last().unwrap().0;
    let hi = target.quantile(0.9999).max(y_hi).max(1e-12);

    // Suffix sums over atoms sorted ascending: for retention a,
    // E(Y-a)_+ = S1(a) - a S0(a) with sums over atoms strictly above a.
    let xs: Vec<f64> = atoms.iter().map(|&(x, _)| x).collect();
    let mut s0 = vec![0.0; atoms.len() + 1];
    let mut s1 = vec![0.0; atoms.len() + 1];
    for i in (0..atoms.len()).rev() {
        s0[i] = s0[i + 1] + atoms[i].1;
        s1[i] = s1[i + 1] + atoms[i].0 * atoms[i].1;
    }
    let partial_y = |a: f64| {
        let i = xs.partition_point(|&x| x <= a);
        s1[i] - a * s0[i]
    };

    let mut sup = 0.0f64;
    let mut max_step = 0.0f64;
    let mut prev = 0.0;
    for (i, a) in stoploss_grid(hi).into_iter().enumerate() {
        let d = (partial_y(a) - target.partial_expectation(a)).abs();
        sup = sup.max(d);
        if i > 0 {
            max_step = max_step.max(a - prev);
        }
        prev = a;
    }
    Ok(DistanceEstimate {
        kind: DistanceKind::StopLoss,
        value: sup,
        method,
        error_bound: max_step + truncation_mass * hi,
    })
}

/// Hybrid retention grid on [0, hi]: half uniform, half geometric toward 0.
fn stoploss_grid(hi: f64) -> Vec<f64> {
    let half = STOPLOSS_GRID / 2;
    let mut grid = Vec::with_capacity(STOPLOSS_GRID + 1);
    grid.push(0.0);
    let lo = hi * 1e-6;
    for i in 0..half {
        grid.push(lo * (hi / lo).powf(i as f64 / (half - 1) as f64));
    }
    for i in 1..=half {
        grid.push(hi * i as f64 / half as f64);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}
