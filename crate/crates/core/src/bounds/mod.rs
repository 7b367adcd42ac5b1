//! Explicit approximation error bounds for the random sum Y = X_1 + ... + X_N,
//! each packaged as an auditable report of named constants.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::ClaimLaw;
use crate::error::{Error, Result};
use crate::metrics::wasserstein_pmf_vs_pmf;
use crate::model::RandomSumModel;
use crate::rng::stream;
use crate::transforms::{
    abs_mean_nz_product, coupling_delta_claim, coupling_delta_count, size_bias_count,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    NormalZeroMean,
    NormalZeroMeanIndep,
    NormalPoisson,
    GammaStoploss,
    PoissonWasserstein,
    PoissonTv,
    NormalCountCouplingAlt,
}

impl BoundKind {
    pub const ALL: [BoundKind; 7] = [
        BoundKind::NormalZeroMean,
        BoundKind::NormalZeroMeanIndep,
        BoundKind::NormalPoisson,
        BoundKind::GammaStoploss,
        BoundKind::PoissonWasserstein,
        BoundKind::PoissonTv,
        BoundKind::NormalCountCouplingAlt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::NormalZeroMean => "normal_zero_mean",
            BoundKind::NormalZeroMeanIndep => "normal_zero_mean_indep",
            BoundKind::NormalPoisson => "normal_poisson",
            BoundKind::GammaStoploss => "gamma_stoploss",
            BoundKind::PoissonWasserstein => "poisson_wasserstein",
            BoundKind::PoissonTv => "poisson_tv",
            BoundKind::NormalCountCouplingAlt => "normal_count_coupling_alt",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown bound kind '{s}'")))
    }
}

/// A Monte-Carlo-estimated ingredient of a bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McTerm {
    pub name: String,
    pub estimate: f64,
    pub standard_error: f64,
}

/// A bound value together with every constant entering its closed form.
/// `value` is always reproducible from `constants` alone via `reevaluate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub constants: BTreeMap<String, f64>,
    pub mc_terms: Vec<McTerm>,
}

impl BoundReport {
    fn finish(kind: BoundKind, constants: BTreeMap<String, f64>, mc_terms: Vec<McTerm>) -> Self {
        let value = assemble(kind, &constants);
        BoundReport { kind, value, constants, mc_terms }
    }

    /// Re-run the closed form on the stored constants.
    pub fn reevaluate(&self) -> f64 {
        assemble(self.kind, &self.constants)
    }

    /// Conservative value: every Monte Carlo ingredient shifted up by three
    /// standard errors before reassembly.
    pub fn upper(&self) -> f64 {
        let mut constants = self.constants.clone();
        for term in &self.mc_terms {
            if let Some(c) = constants.get_mut(&term.name) {
                *c += 3.0 * term.standard_error;
            }
        }
        assemble(self.kind, &constants)
    }
}

/// Evaluation settings shared by all bound constructors.
#[derive(Debug, Clone, Copy)]
pub struct BoundContext {
    pub mc_budget: u64,
    pub tail_eps: f64,
    pub seed: u64,
}

impl Default for BoundContext {
    fn default() -> Self {
        BoundContext { mc_budget: 1_000_000, tail_eps: 1e-12, seed: 0 }
    }
}

pub fn compute(kind: BoundKind, model: &RandomSumModel, ctx: &BoundContext) -> Result<BoundReport> {
    match kind {
        BoundKind::NormalZeroMean => bound_normal_zero_mean(model, ctx),
        BoundKind::NormalZeroMeanIndep => bound_normal_zero_mean_indep(model, ctx),
        BoundKind::NormalPoisson => bound_normal_poisson(model, ctx),
        BoundKind::GammaStoploss => bound_gamma_stoploss(model, ctx),
        BoundKind::PoissonWasserstein => bound_poisson_wasserstein(model, ctx),
        BoundKind::PoissonTv => bound_poisson_tv(model, ctx),
        BoundKind::NormalCountCouplingAlt => bound_normal_count_coupling_alt(model, ctx),
    }
}

/// The mixture weight moving mass onto the comonotone branch of the
/// zero-biased representation.
pub fn tau(model: &RandomSumModel) -> Result<f64> {
    let en = model.count.mean();
    let en2 = model.count.m2();
    let denom = en + model.rho * model.count.m2_factorial();
    if denom <= 0.0 {
        return Err(Error::InvalidParameter("count has no mass above zero".into()));
    }
    Ok(model.rho * en2 / denom)
}

/// The analogous weight for the non-zero-biased representation under a
/// Poisson count with mean `lambda`. Always at least `rho`.
pub fn sigma(lambda: f64, claim: &ClaimLaw, rho: f64) -> Result<f64> {
    let m = claim.moments();
    let denom = m.m2 + lambda * rho * m.variance;
    if denom <= 0.0 {
        return Err(Error::InvalidParameter("claim has zero second moment".into()));
    }
    let sigma = rho * (m.m2 + lambda * m.variance) / denom;
    assert!(sigma >= rho - 1e-15, "sigma {sigma} below rho {rho}");
    Ok(sigma)
}

/// Gamma parameters matching the mean and variance of Y: E[Y] = r/s and
/// Var(Y) = r/s^2.
pub fn gamma_params(lambda: f64, claim: &ClaimLaw, rho: f64) -> Result<(f64, f64)> {
    let m = claim.moments();
    if m.mean <= 0.0 {
        return Err(Error::InvalidParameter("claim mean must be positive".into()));
    }
    let denom = m.m2 + lambda * rho * m.variance;
    let r = lambda * m.mean * m.mean / denom;
    let s = m.mean / denom;
    debug_assert!({
        let mean = lambda * m.mean;
        let var = lambda * m.m2 + lambda * lambda * rho * m.variance;
        (r / s - mean).abs() <= 1e-12 * mean.max(1.0)
            && (r / (s * s) - var).abs() <= 1e-12 * var.max(1.0)
    });
    Ok((r, s))
}

/// Stein factor for the gamma smoothing argument.
pub fn stein_factor_cr(r: f64) -> f64 {
    assert!(r > 0.0);
    ((2.0 * std::f64::consts::PI).sqrt() + (-1.0f64).exp()) / (r + 2.0).sqrt() + 2.0 / (r + 2.0)
}

/// E|(N X_1)^nz| for a Poisson count with mean `lambda` and a non-negative
/// claim, where the absolute third moment collapses to E[X^3].
pub fn beta(lambda: f64, claim: &ClaimLaw) -> Result<f64> {
    if !claim.is_nonnegative() {
        return Err(Error::InvalidParameter("beta requires a non-negative claim".into()));
    }
    abs_mean_nz_product(lambda, claim)
}

fn require_zero_mean(claim: &ClaimLaw) -> Result<()> {
    if claim.moments().mean.abs() > 1e-12 {
        return Err(Error::InvalidParameter("claim must have zero mean".into()));
    }
    Ok(())
}

fn require_counting_claim(claim: &ClaimLaw) -> Result<()> {
    if claim.denom() != 1 || !claim.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "claim must be non-negative and integer-valued".into(),
        ));
    }
    if claim.moments().mean <= 0.0 {
        return Err(Error::InvalidParameter("claim mean must be positive".into()));
    }
    Ok(())
}

pub fn bound_normal_zero_mean(model: &RandomSumModel, ctx: &BoundContext) -> Result<BoundReport> {
    require_zero_mean(&model.claim)?;
    let m = model.claim.moments();
    let (_, var_y) = model.mean_var();
    if var_y <= 0.0 {
        return Err(Error::InvalidParameter("Var(Y) must be positive".into()));
    }
    let mut constants = BTreeMap::new();
    constants.insert("tau".into(), tau(model)?);
    constants.insert("var_y".into(), var_y);
    constants.insert("count_m2".into(), model.count.m2());
    constants.insert("count_m3".into(), model.count.m3());
    constants.insert("claim_var".into(), m.variance);
    constants.insert("claim_m3abs".into(), m.m3abs);
    constants.insert("tail_eps".into(), ctx.tail_eps);

    let mut mc_terms = Vec::new();
    let delta = if model.rho == 0.0 {
        coupling_delta_count(&model.count, ctx.tail_eps)? * m.m1abs
    } else {
        let (est, se) =
            mc_sum_coupling_delta(model, ctx.tail_eps, ctx.mc_budget, &mut stream(ctx.seed, 10))?;
        mc_terms.push(McTerm {
            name: "sum_coupling_delta".into(),
            estimate: est,
            standard_error: se,
        });
        est
    };
    constants.insert("sum_coupling_delta".into(), delta);
    Ok(BoundReport::finish(BoundKind::NormalZeroMean, constants, mc_terms))
}

pub fn bound_normal_zero_mean_indep(
    model: &RandomSumModel,
    ctx: &BoundContext,
) -> Result<BoundReport> {
    if model.rho != 0.0 {
        return Err(Error::Unsupported("independent-claims bound requires rho = 0".into()));
    }
    require_zero_mean(&model.claim)?;
    let m = model.claim.moments();
    let mut constants = BTreeMap::new();
    constants.insert("count_mean".into(), model.count.mean());
    constants.insert("claim_var".into(), m.variance);
    constants.insert("claim_m3abs".into(), m.m3abs);
    constants.insert("claim_m1abs".into(), m.m1abs);
    constants.insert("count_delta".into(), coupling_delta_count(&model.count, ctx.tail_eps)?);
    constants.insert("tail_eps".into(), ctx.tail_eps);
    Ok(BoundReport::finish(BoundKind::NormalZeroMeanIndep, constants, Vec::new()))
}

pub fn bound_normal_poisson(model: &RandomSumModel, ctx: &BoundContext) -> Result<BoundReport> {
    let lambda = model.poisson_lambda()?;
    let m = model.claim.moments();
    let (_, var_y) = model.mean_var();
    if var_y <= 0.0 {
        return Err(Error::InvalidParameter("Var(Y) must be positive".into()));
    }
    let rho = model.rho;
    let alpha = (lambda * (1.0 + lambda * rho) * m.m2
        + lambda * lambda * (1.0 - rho) * m.mean * m.mean)
        .sqrt()
        + abs_mean_nz_product(lambda, &model.claim)?;
    let mut constants = BTreeMap::new();
    constants.insert("rho".into(), rho);
    constants.insert("lambda".into(), lambda);
    constants.insert("sigma".into(), sigma(lambda, &model.claim, rho)?);
    constants.insert("alpha".into(), alpha);
    constants.insert("var_y".into(), var_y);
    constants.insert("claim_m2".into(), m.m2);
    constants.insert("claim_m3abs".into(), m.m3abs);
    constants.insert("claim_self_diff".into(), model.claim.mean_abs_self_difference());
    constants.insert("tail_eps".into(), ctx.tail_eps);
    Ok(BoundReport::finish(BoundKind::NormalPoisson, constants, Vec::new()))
}

pub fn bound_gamma_stoploss(model: &RandomSumModel, ctx: &BoundContext) -> Result<BoundReport> {
    let lambda = model.poisson_lambda()?;
    if !model.claim.is_nonnegative() {
        return Err(Error::InvalidParameter("claim must be non-negative".into()));
    }
    let m = model.claim.moments();
    if m.mean <= 0.0 {
        return Err(Error::InvalidParameter("claim mean must be positive".into()));
    }
    let rho = model.rho;
    let (r, s) = gamma_params(lambda, &model.claim, rho)?;
    let mut constants = BTreeMap::new();
    constants.insert("rho".into(), rho);
    constants.insert("lambda".into(), lambda);
    constants.insert("sigma".into(), sigma(lambda, &model.claim, rho)?);
    constants.insert("r".into(), r);
    constants.insert("s".into(), s);
    constants.insert("c_r".into(), stein_factor_cr(r));
    constants.insert("beta".into(), beta(lambda, &model.claim)?);
    constants.insert("claim_mean".into(), m.mean);
    constants.insert("claim_m2".into(), m.m2);
    constants.insert("claim_delta".into(), coupling_delta_claim(&model.claim)?);
    constants.insert("tail_eps".into(), ctx.tail_eps);
    Ok(BoundReport::finish(BoundKind::GammaStoploss, constants, Vec::new()))
}

pub fn bound_poisson_wasserstein(
    model: &RandomSumModel,
    ctx: &BoundContext,
) -> Result<BoundReport> {
    let (constants, mc_terms) = poisson_ingredients(model, ctx, 11)?;
    Ok(BoundReport::finish(BoundKind::PoissonWasserstein, constants, mc_terms))
}

pub fn bound_poisson_tv(model: &RandomSumModel, ctx: &BoundContext) -> Result<BoundReport> {
    let (constants, mc_terms) = poisson_ingredients(model, ctx, 12)?;
    Ok(BoundReport::finish(BoundKind::PoissonTv, constants, mc_terms))
}

fn poisson_ingredients(
    model: &RandomSumModel,
    ctx: &BoundContext,
    rng_stream: u64,
) -> Result<(BTreeMap<String, f64>, Vec<McTerm>)> {
    require_counting_claim(&model.claim)?;
    let m = model.claim.moments();
    let mut constants = BTreeMap::new();
    constants.insert("rho".into(), model.rho);
    constants.insert("count_mean".into(), model.count.mean());
    constants.insert("count_m2".into(), model.count.m2());
    constants.insert("claim_mean".into(), m.mean);
    constants.insert("claim_m2".into(), m.m2);
    constants.insert("claim_m1absdev1".into(), m.m1absdev1);
    constants.insert("count_delta".into(), coupling_delta_count(&model.count, ctx.tail_eps)?);
    constants.insert("tail_eps".into(), ctx.tail_eps);

    let mut mc_terms = Vec::new();
    let d2 = if model.rho == 0.0 {
        coupling_delta_count(&model.count, ctx.tail_eps)? * m.mean
    } else {
        let (est, se) = mc_sum_coupling_delta(
            model,
            ctx.tail_eps,
            ctx.mc_budget,
            &mut stream(ctx.seed, rng_stream),
        )?;
        mc_terms.push(McTerm {
            name: "sum_coupling_delta".into(),
            estimate: est,
            standard_error: se,
        });
        est
    };
    constants.insert("sum_coupling_delta".into(), d2);
    Ok((constants, mc_terms))
}

pub fn bound_normal_count_coupling_alt(
    model: &RandomSumModel,
    ctx: &BoundContext,
) -> Result<BoundReport> {
    if model.rho != 0.0 {
        return Err(Error::Unsupported("count-coupling bound requires rho = 0".into()));
    }
    require_zero_mean(&model.claim)?;
    let m = model.claim.moments();
    let count_pmf = model.count.to_pmf(ctx.tail_eps)?;
    let poisson_pmf =
        crate::dist::CountLaw::Poisson { lambda: model.count.mean() }.to_pmf(ctx.tail_eps)?;
    let dw = wasserstein_pmf_vs_pmf(&count_pmf, &poisson_pmf)?.value;
    let mut constants = BTreeMap::new();
    constants.insert("count_mean".into(), model.count.mean());
    constants.insert("claim_var".into(), m.variance);
    constants.insert("claim_m3abs".into(), m.m3abs);
    constants.insert("claim_m1abs".into(), m.m1abs);
    constants.insert("count_wasserstein".into(), dw);
    constants.insert("tail_eps".into(), ctx.tail_eps);
    Ok(BoundReport::finish(BoundKind::NormalCountCouplingAlt, constants, Vec::new()))
}

/// Monte Carlo estimate of E|sum_{j<N^s} X'_j - Y| with (N, N^s) under the
/// quantile coupling and the X'_j independent of everything else. Returns
/// (estimate, standard error).
pub fn mc_sum_coupling_delta<R: Rng>(
    model: &RandomSumModel,
    tail_eps: f64,
    budget: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if budget == 0 {
        return Err(Error::InvalidParameter("mc budget must be positive".into()));
    }
    let count_sampler = model.count.to_pmf(tail_eps)?.normalized().sampler();
    let sb_sampler = size_bias_count(&model.count, tail_eps)?.normalized().sampler();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..budget {
        let u: f64 = rng.gen();
        let n = count_sampler.index_at(u).max(0) as u64;
        let ns = sb_sampler.index_at(u).max(1) as u64;
        let y = if model.rho > 0.0 && rng.gen::<f64>() < model.rho {
            n as f64 * model.claim.sample(rng)
        } else {
            (0..n).map(|_| model.claim.sample(rng)).sum()
        };
        let y_prime: f64 = (0..ns - 1).map(|_| model.claim.sample(rng)).sum();
        let t = (y_prime - y).abs();
        sum += t;
        sum_sq += t * t;
    }
    let n = budget as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

fn assemble(kind: BoundKind, c: &BTreeMap<String, f64>) -> f64 {
    let g = |key: &str| *c.get(key).unwrap_or_else(|| panic!("missing constant '{key}'"));
    match kind {
        BoundKind::NormalZeroMean => {
            let tau = g("tau");
            let var_y = g("var_y");
            2.0 * tau
                * (1.0
                    + g("count_m3") * g("claim_m3abs")
                        / (2.0 * g("count_m2") * g("claim_var") * var_y.sqrt()))
                + 2.0 * (1.0 - tau) / var_y.sqrt()
                    * (g("claim_m3abs") / (2.0 * g("claim_var")) + g("sum_coupling_delta"))
        }
        BoundKind::NormalZeroMeanIndep => {
            2.0 / (g("count_mean") * g("claim_var")).sqrt()
                * (g("claim_m3abs") / (2.0 * g("claim_var"))
                    + g("count_delta") * g("claim_m1abs"))
        }
        BoundKind::NormalPoisson => {
            if g("rho") == 0.0 {
                g("claim_m3abs") / (g("lambda").sqrt() * g("claim_m2").powf(1.5))
            } else {
                let sigma = g("sigma");
                (2.0 * sigma * g("alpha")
                    + (1.0 - sigma) * g("claim_m3abs") / g("claim_m2")
                    + 2.0 * g("lambda") * (1.0 - sigma) * g("claim_self_diff"))
                    / g("var_y").sqrt()
            }
        }
        BoundKind::GammaStoploss => {
            let (rho, sigma) = (g("rho"), g("sigma"));
            let (m1, m2) = (g("claim_mean"), g("claim_m2"));
            let lambda = g("lambda");
            let inner = lambda * rho * m2 / m1
                + sigma * (m2 / m1 + g("beta"))
                + (sigma - rho) * lambda * m1
                + (1.0 - sigma) * g("claim_delta");
            2.0 * (lambda * g("c_r") * m1 * inner).sqrt()
        }
        BoundKind::PoissonWasserstein => {
            let scale = 3.0 * (g("count_mean") * g("claim_mean")).sqrt();
            scale * poisson_coupling_terms(c)
        }
        BoundKind::PoissonTv => poisson_coupling_terms(c),
        BoundKind::NormalCountCouplingAlt => {
            (g("claim_m3abs") / g("claim_var") + g("count_wasserstein") * g("claim_m1abs"))
                / (g("claim_var") * g("count_mean")).sqrt()
        }
    }
}

/// The rho-mixture of size-bias coupling terms shared by the Poisson
/// Wasserstein and total-variation bounds; only the Stein factor differs.
fn poisson_coupling_terms(c: &BTreeMap<String, f64>) -> f64 {
    let g = |key: &str| *c.get(key).unwrap_or_else(|| panic!("missing constant '{key}'"));
    let rho = g("rho");
    let (m1, m2) = (g("claim_mean"), g("claim_m2"));
    let overdispersion = m2 / m1 - 1.0;
    rho * (g("count_delta")
        + g("count_mean") * g("claim_m1absdev1")
        + g("count_m2") / g("count_mean") * overdispersion)
        + (1.0 - rho) * (overdispersion + g("sum_coupling_delta"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::CountLaw;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::collections::BTreeMap as Map;

    fn model(count: CountLaw, claim: ClaimLaw, rho: f64) -> RandomSumModel {
        RandomSumModel::new(count, claim, rho).unwrap()
    }

    fn bernoulli(p: f64) -> ClaimLaw {
        ClaimLaw::Bernoulli { p }
    }

    #[test]
    fn tau_examples() {
        let m0 = model(CountLaw::Poisson { lambda: 2.0 }, bernoulli(0.5), 0.0);
        assert_abs_diff_eq!(tau(&m0).unwrap(), 0.0, epsilon = 1e-15);
        let fixed = CountLaw::FinitePmf { weights: Map::from([(3, 1.0)]) };
        let m1 = model(fixed, bernoulli(0.5), 1.0);
        assert_abs_diff_eq!(tau(&m1).unwrap(), 1.0, epsilon = 1e-15);
        let m2 = model(CountLaw::Poisson { lambda: 2.0 }, bernoulli(0.5), 0.5);
        assert_abs_diff_eq!(tau(&m2).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn sigma_examples_and_lower_bound() {
        assert_abs_diff_eq!(sigma(2.0, &bernoulli(0.5), 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma(2.0, &bernoulli(0.5), 1.0).unwrap(), 1.0, epsilon = 1e-15);
        let degenerate = ClaimLaw::constant(2, 1);
        assert_abs_diff_eq!(sigma(5.0, &degenerate, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(
            sigma(2.0, &bernoulli(0.5), 0.5).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        for &rho in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            for &lambda in &[0.5, 2.0, 100.0] {
                assert!(sigma(lambda, &bernoulli(0.3), rho).unwrap() >= rho - 1e-15);
            }
        }
    }

    #[test]
    fn gamma_params_examples() {
        let (r, s) = gamma_params(100.0, &bernoulli(0.5), 0.0).unwrap();
        assert_abs_diff_eq!(r, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        let (r, s) = gamma_params(7.0, &ClaimLaw::constant(3, 1), 0.0).unwrap();
        assert_abs_diff_eq!(r, 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 1.0 / 3.0, epsilon = 1e-12);
        let (r, s) = gamma_params(2.0, &bernoulli(0.5), 0.5).unwrap();
        assert_abs_diff_eq!(r, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn stein_factor_values_and_monotonicity() {
        assert_abs_diff_eq!(stein_factor_cr(50.0), 0.437086, epsilon = 5e-6);
        assert_abs_diff_eq!(stein_factor_cr(2.0), 1.937254, epsilon = 1e-6);
        let mut prev = f64::INFINITY;
        for &r in &[1.0, 10.0, 100.0, 1000.0] {
            let c = stein_factor_cr(r);
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn beta_examples() {
        assert_abs_diff_eq!(beta(1.0, &ClaimLaw::constant(1, 1)).unwrap(), 1.5, epsilon = 1e-12);
        // Bernoulli(p): numerator p[(l^2+3l+1) - l(l+1)p].
        let (lambda, p) = (3.0, 0.25);
        let num = p * ((lambda * lambda + 3.0 * lambda + 1.0) - lambda * (lambda + 1.0) * p);
        let den = 2.0 * (p + lambda * p * (1.0 - p));
        assert_relative_eq!(
            beta(lambda, &bernoulli(p)).unwrap(),
            num / den,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(beta(2.0, &bernoulli(0.5)).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            beta(2.0, &bernoulli(0.5)).unwrap(),
            abs_mean_nz_product(2.0, &bernoulli(0.5)).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn normal_zero_mean_poisson_rademacher() {
        let m = model(CountLaw::Poisson { lambda: 100.0 }, ClaimLaw::rademacher(), 0.0);
        let report = bound_normal_zero_mean(&m, &BoundContext::default()).unwrap();
        assert_abs_diff_eq!(report.value, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn normal_zero_mean_binomial_closed_form() {
        let (n, p) = (400u64, 0.25);
        let m = model(CountLaw::Binomial { n, p }, ClaimLaw::rademacher(), 0.0);
        let report = bound_normal_zero_mean(&m, &BoundContext::default()).unwrap();
        let np = n as f64 * p;
        let expected = 2.0 / np.sqrt() * (0.5 + p);
        assert_relative_eq!(report.value, expected, max_relative = 1e-12);
        let indep = bound_normal_zero_mean_indep(&m, &BoundContext::default()).unwrap();
        assert_relative_eq!(indep.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn normal_zero_mean_negative_binomial() {
        let m = model(
            CountLaw::GammaMixedPoisson { r: 100.0, p: 0.5 },
            ClaimLaw::rademacher(),
            0.0,
        );
        let report = bound_normal_zero_mean(&m, &BoundContext::default()).unwrap();
        assert_abs_diff_eq!(report.value, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn normal_poisson_independent_cases() {
        let ctx = BoundContext::default();
        let m = model(CountLaw::Poisson { lambda: 100.0 }, bernoulli(0.5), 0.0);
        let report = bound_normal_poisson(&m, &ctx).unwrap();
        assert_abs_diff_eq!(report.value, 0.5 / (10.0 * 0.5f64.powf(1.5)), epsilon = 1e-12);
        assert_abs_diff_eq!(report.value, std::f64::consts::SQRT_2 / 10.0, epsilon = 1e-12);
        let m = model(CountLaw::Poisson { lambda: 100.0 }, ClaimLaw::rademacher(), 0.0);
        assert_abs_diff_eq!(bound_normal_poisson(&m, &ctx).unwrap().value, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn normal_zero_mean_and_poisson_agree_when_independent() {
        let ctx = BoundContext::default();
        for &lambda in &[10.0, 100.0, 1000.0] {
            let m = model(CountLaw::Poisson { lambda }, ClaimLaw::rademacher(), 0.0);
            let a = bound_normal_zero_mean(&m, &ctx).unwrap().value;
            let b = bound_normal_poisson(&m, &ctx).unwrap().value;
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gamma_stoploss_examples() {
        let ctx = BoundContext::default();
        let m = model(CountLaw::Poisson { lambda: 100.0 }, bernoulli(0.5), 0.0);
        let report = bound_gamma_stoploss(&m, &ctx).unwrap();
        assert_abs_diff_eq!(report.value, (2.0 * 50.0 * stein_factor_cr(50.0)).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.value, 6.611, epsilon = 1e-3);

        let m = model(CountLaw::Poisson { lambda: 1.0 }, ClaimLaw::constant(1, 1), 0.0);
        let report = bound_gamma_stoploss(&m, &ctx).unwrap();
        assert_abs_diff_eq!(report.value, 2.157, epsilon = 1e-3);
        assert_abs_diff_eq!(report.constants["claim_delta"], 0.5, epsilon = 1e-12);

        let m = model(CountLaw::Poisson { lambda: 5.0 }, ClaimLaw::constant(1, 1), 1.0);
        let report = bound_gamma_stoploss(&m, &ctx).unwrap();
        assert!(report.value.is_finite() && report.value > 0.0);
        assert_abs_diff_eq!(report.constants["sigma"], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn poisson_wasserstein_zero_for_poisson_unit_claims() {
        let ctx = BoundContext { mc_budget: 20_000, ..BoundContext::default() };
        for &rho in &[0.0, 0.5, 1.0] {
            let m = model(CountLaw::Poisson { lambda: 4.0 }, ClaimLaw::constant(1, 1), rho);
            let report = bound_poisson_wasserstein(&m, &ctx).unwrap();
            assert_abs_diff_eq!(report.value, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn poisson_wasserstein_binomial_closed_form() {
        let ctx = BoundContext::default();
        let (n, p) = (20u64, 0.3);
        let claim = ClaimLaw::FiniteIntPmf { weights: Map::from([(1, 0.5), (2, 0.5)]) };
        let cm = claim.moments();
        let m = model(CountLaw::Binomial { n, p }, claim, 0.0);
        let report = bound_poisson_wasserstein(&m, &ctx).unwrap();
        let np = n as f64 * p;
        let expected =
            3.0 * (np * cm.mean).sqrt() * (cm.m2 / cm.mean - 1.0 + p * cm.mean);
        assert_relative_eq!(report.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn poisson_tv_examples() {
        let ctx = BoundContext::default();
        let m = model(CountLaw::Binomial { n: 10, p: 0.3 }, ClaimLaw::constant(1, 1), 0.0);
        assert_abs_diff_eq!(bound_poisson_tv(&m, &ctx).unwrap().value, 0.3, epsilon = 1e-12);
        let m = model(CountLaw::Binomial { n: 5, p: 0.2 }, bernoulli(0.5), 0.0);
        assert_abs_diff_eq!(bound_poisson_tv(&m, &ctx).unwrap().value, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn count_coupling_alt_examples() {
        let ctx = BoundContext::default();
        let m = model(CountLaw::Poisson { lambda: 25.0 }, ClaimLaw::rademacher(), 0.0);
        let report = bound_normal_count_coupling_alt(&m, &ctx).unwrap();
        assert_abs_diff_eq!(report.constants["count_wasserstein"], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.value, 1.0 / 5.0, epsilon = 1e-9);

        // d_W(Po(1), point mass at 1) = E|N - 1| = 2/e under the comonotone
        // coupling, which is optimal in one dimension.
        let fixed = CountLaw::FinitePmf { weights: Map::from([(1, 1.0)]) };
        let m = model(fixed, ClaimLaw::rademacher(), 0.0);
        let report = bound_normal_count_coupling_alt(&m, &ctx).unwrap();
        assert_abs_diff_eq!(
            report.constants["count_wasserstein"],
            2.0 * (-1.0f64).exp(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn mc_delta_vanishes_for_poisson_count_unit_claims() {
        // Under the quantile coupling N^s - 1 and N are the same draw for a
        // Poisson count, and unit claims make both sums equal.
        let m = model(CountLaw::Poisson { lambda: 3.0 }, ClaimLaw::constant(1, 1), 0.7);
        let (est, se) =
            mc_sum_coupling_delta(&m, 1e-12, 5_000, &mut stream(1, 99)).unwrap();
        assert_abs_diff_eq!(est, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(se, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mc_delta_matches_analytic_rho_zero_limit() {
        // rho = 0, Binomial count, unit claims: |sum difference| = |N^s-1-N|,
        // whose mean under the quantile coupling is E|N+1-N^s| = p.
        let m = model(CountLaw::Binomial { n: 30, p: 0.2 }, ClaimLaw::constant(1, 1), 0.0);
        let (est, se) =
            mc_sum_coupling_delta(&m, 1e-12, 400_000, &mut stream(2, 98)).unwrap();
        assert!((est - 0.2).abs() < 4.0 * se + 1e-3, "est {est} se {se}");
    }

    #[test]
    fn reports_reevaluate_from_their_constants() {
        let ctx = BoundContext { mc_budget: 50_000, ..BoundContext::default() };
        let zero_mean = model(CountLaw::Poisson { lambda: 10.0 }, ClaimLaw::rademacher(), 0.3);
        let nonneg = model(CountLaw::Poisson { lambda: 10.0 }, bernoulli(0.4), 0.3);
        let reports = [
            bound_normal_zero_mean(&zero_mean, &ctx).unwrap(),
            bound_normal_poisson(&zero_mean, &ctx).unwrap(),
            bound_gamma_stoploss(&nonneg, &ctx).unwrap(),
            bound_poisson_wasserstein(&nonneg, &ctx).unwrap(),
            bound_poisson_tv(&nonneg, &ctx).unwrap(),
        ];
        for report in &reports {
            assert_abs_diff_eq!(report.reevaluate(), report.value, epsilon = 0.0);
            assert!(report.upper() >= report.value);
            for term in &report.mc_terms {
                assert!(term.standard_error >= 0.0);
            }
        }
    }

    #[test]
    fn compute_dispatch_and_kind_round_trip() {
        let ctx = BoundContext::default();
        let m = model(CountLaw::Poisson { lambda: 100.0 }, ClaimLaw::rademacher(), 0.0);
        for kind in BoundKind::ALL {
            let parsed: BoundKind = kind.as_str().parse().unwrap();
            assert_eq!(parsed, kind);
            let _ = compute(kind, &m, &ctx);
        }
        assert!("nonsense".parse::<BoundKind>().is_err());
        assert_abs_diff_eq!(
            compute(BoundKind::NormalZeroMean, &m, &ctx).unwrap().value,
            0.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rate_decays_like_inverse_root_lambda() {
        let ctx = BoundContext::default();
        let values: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0]
            .iter()
            .map(|&lambda| {
                let m = model(CountLaw::Poisson { lambda }, ClaimLaw::rademacher(), 0.0);
                bound_normal_zero_mean(&m, &ctx).unwrap().value
            })
            .collect();
        for w in values.windows(2) {
            let slope = (w[1].ln() - w[0].ln()) / 10.0f64.ln();
            assert_abs_diff_eq!(slope, -0.5, epsilon = 0.05);
        }
    }
}
