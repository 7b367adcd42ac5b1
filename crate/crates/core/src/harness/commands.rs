//! Command implementations: single bound evaluation, bound-vs-distance
//! verification, and rho sweeps, plus text/CSV rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{self, BoundContext, BoundKind, BoundReport};
use crate::dist::CountLaw;
use crate::error::Result;
use crate::harness::config::{ExperimentConfig, OutputFormat, Target};
use crate::metrics::{
    stoploss_distance_pmf, stoploss_distance_samples, tv_pmf, wasserstein_empirical_vs_normal,
    wasserstein_pmf_vs_normal, wasserstein_pmf_vs_pmf, DistanceEstimate, DistanceMethod,
    StopLossTarget,
};
use crate::model::RandomSumModel;
use crate::pmf::LatticePmf;
use crate::rng::stream;

/// Largest exact-pmf support used for distance evaluation before falling back
/// to sampling.
const MAX_EXACT_ATOMS: u64 = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRow {
    pub config: ExperimentConfig,
    pub bound: BoundReport,
    pub distance_value: f64,
    pub distance_error: f64,
    pub distance_method: &'static str,
    pub slack: f64,
    pub pass: bool,
}

pub fn run_bound(cfg: &ExperimentConfig) -> Result<BoundReport> {
    let model = cfg.model.build()?;
    bounds::compute(cfg.bound_kind, &model, &bound_context(cfg))
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerificationRow> {
    let model = cfg.model.build()?;
    let bound = bounds::compute(cfg.bound_kind, &model, &bound_context(cfg))?;
    let distance = measure_distance(&model, &DistanceRequest::from_config(cfg))?;
    let slack = bound.value - distance.value;
    let mc_band: f64 = bound.mc_terms.iter().map(|t| 3.0 * t.standard_error).sum();
    let pass = slack >= -(distance.error_bound + mc_band);
    Ok(VerificationRow {
        config: cfg.clone(),
        bound,
        distance_value: distance.value,
        distance_error: distance.error_bound,
        distance_method: method_str(distance.method),
        slack,
        pass,
    })
}

pub fn run_sweep_rho(cfg: &ExperimentConfig, rhos: &[f64]) -> Result<Vec<VerificationRow>> {
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let mut sub = cfg.clone();
        sub.model.rho = rho;
        sub.validate()?;
        rows.push(run_verify(&sub)?);
    }
    Ok(rows)
}

fn bound_context(cfg: &ExperimentConfig) -> BoundContext {
    BoundContext { mc_budget: cfg.mc_budget, tail_eps: cfg.tail_eps, seed: cfg.seed }
}

fn method_str(method: DistanceMethod) -> &'static str {
    match method {
        DistanceMethod::ExactPmf => "exact_pmf",
        DistanceMethod::Empirical => "empirical",
    }
}

/// What to measure and how hard to try.
#[derive(Debug, Clone, Copy)]
pub struct DistanceRequest {
    pub target: Target,
    pub bound_kind: BoundKind,
    pub mc_budget: u64,
    pub seed: u64,
    pub tail_eps: f64,
}

impl DistanceRequest {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        DistanceRequest {
            target: cfg.target,
            bound_kind: cfg.bound_kind,
            mc_budget: cfg.mc_budget,
            seed: cfg.seed,
            tail_eps: cfg.tail_eps,
        }
    }
}

/// The distance each bound kind dominates, computed from the exact pmf when
/// the support is manageable and otherwise from `mc_budget` samples.
pub fn measure_distance(model: &RandomSumModel, cfg: &DistanceRequest) -> Result<DistanceEstimate> {
    let exact = exact_support_estimate(model, cfg.tail_eps)? <= MAX_EXACT_ATOMS;
    match cfg.target {
        Target::Normal => {
            let (mean, var) = model.mean_var();
            let sd = var.sqrt();
            if exact {
                let pmf = model.exact_pmf(cfg.tail_eps)?;
                let mut est = wasserstein_pmf_vs_normal(&pmf, mean, sd)?;
                est.value /= sd;
                est.error_bound /= sd;
                Ok(est)
            } else {
                let mut rng = stream(cfg.seed, 20);
                let mut samples: Vec<f64> = (0..cfg.mc_budget)
                    .map(|_| (model.sample_sum(&mut rng) - mean) / sd)
                    .collect();
                wasserstein_empirical_vs_normal(&mut samples, 0.0, 1.0)
            }
        }
        Target::Gamma => {
            let lambda = model.poisson_lambda()?;
            let (r, s) = bounds::gamma_params(lambda, &model.claim, model.rho)?;
            let target = StopLossTarget::Gamma { r, s };
            if exact {
                stoploss_distance_pmf(&model.exact_pmf(cfg.tail_eps)?, target)
            } else {
                let mut rng = stream(cfg.seed, 20);
                let mut samples: Vec<f64> =
                    (0..cfg.mc_budget).map(|_| model.sample_sum(&mut rng)).collect();
                stoploss_distance_samples(&mut samples, target)
            }
        }
        Target::Poisson => {
            let (mean, _) = model.mean_var();
            let z = CountLaw::Poisson { lambda: mean }.to_pmf(cfg.tail_eps)?;
            let (y, extra_error) = if exact {
                (model.exact_pmf(cfg.tail_eps)?, 0.0)
            } else {
                let mut rng = stream(cfg.seed, 20);
                empirical_integer_pmf(model, cfg.mc_budget, &mut rng)?
            };
            let mut est = match cfg.bound_kind {
                BoundKind::PoissonTv => tv_pmf(&y, &z)?,
                _ => wasserstein_pmf_vs_pmf(&y, &z)?,
            };
            est.error_bound += extra_error;
            if !exact {
                est.method = DistanceMethod::Empirical;
            }
            Ok(est)
        }
    }
}

fn exact_support_estimate(model: &RandomSumModel, tail_eps: f64) -> Result<u64> {
    let count_hi = model.count.truncated_support(tail_eps)?;
    let claim = model.claim.to_pmf();
    let width = (claim.max_index() - claim.min_index()).unsigned_abs().max(1);
    Ok(count_hi.saturating_mul(width).saturating_add(1))
}

fn empirical_integer_pmf<R: rand::Rng>(
    model: &RandomSumModel,
    budget: u64,
    rng: &mut R,
) -> Result<(LatticePmf, f64)> {
    let mut counts: BTreeMap<i64, f64> = BTreeMap::new();
    for _ in 0..budget {
        let y = model.sample_sum(rng).round() as i64;
        *counts.entry(y).or_insert(0.0) += 1.0;
    }
    let n = budget as f64;
    let weights: BTreeMap<i64, f64> = counts.into_iter().map(|(k, c)| (k, c / n)).collect();
    let range = (*weights.keys().last().unwrap() - *weights.keys().next().unwrap()) as f64;
    let pmf = LatticePmf::new(1, weights, 0.0)?;
    Ok((pmf, (range.max(1.0) / n.sqrt())))
}

pub const CSV_HEADER: &str = "count,claim,rho,target,bound_kind,seed,mc_budget,tail_eps,\
tau,sigma,alpha,beta,r,s,c_r,bound,distance,slack,pass";

fn opt_constant(report: &BoundReport, name: &str) -> String {
    report.constants.get(name).map(|v| format!("{v}")).unwrap_or_default()
}

fn csv_config_prefix(cfg: &ExperimentConfig) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        cfg.model.count,
        cfg.model.claim,
        cfg.model.rho,
        cfg.target.as_str(),
        cfg.bound_kind.as_str(),
        cfg.seed,
        cfg.mc_budget,
        cfg.tail_eps
    )
}

fn csv_constants(report: &BoundReport) -> String {
    ["tau", "sigma", "alpha", "beta", "r", "s", "c_r"]
        .map(|name| opt_constant(report, name))
        .join(",")
}

pub fn render_bound(cfg: &ExperimentConfig, report: &BoundReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => format!(
            "{CSV_HEADER}\n{},{},{},,,\n",
            csv_config_prefix(cfg),
            csv_constants(report),
            report.value
        ),
        OutputFormat::Text => {
            let mut out = String::new();
            writeln!(
                out,
                "model: count={} claim={} rho={}",
                cfg.model.count, cfg.model.claim, cfg.model.rho
            )
            .unwrap();
            writeln!(out, "bound: kind={} value={}", report.kind.as_str(), report.value).unwrap();
            for (name, value) in &report.constants {
                writeln!(out, "  {name} = {value}").unwrap();
            }
            for term in &report.mc_terms {
                writeln!(
                    out,
                    "  mc {} = {} (se {})",
                    term.name, term.estimate, term.standard_error
                )
                .unwrap();
            }
            out
        }
    }
}

pub fn render_rows(rows: &[VerificationRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    csv_config_prefix(&row.config),
                    csv_constants(&row.bound),
                    row.bound.value,
                    row.distance_value,
                    row.slack,
                    row.pass
                )
                .unwrap();
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            for row in rows {
                writeln!(
                    out,
                    "count={} claim={} rho={} kind={}: bound={} distance={} ({}, err {}) \
                     slack={} pass={}",
                    row.config.model.count,
                    row.config.model.claim,
                    row.config.model.rho,
                    row.config.bound_kind.as_str(),
                    row.bound.value,
                    row.distance_value,
                    row.distance_method,
                    row.distance_error,
                    row.slack,
                    row.pass
                )
                .unwrap();
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;
    use approx::assert_abs_diff_eq;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    const EQ13: &str = r#"{
        "schema_version": 1,
        "model": {
            "count": {"family": "poisson", "lambda": 100.0},
            "claim": {"family": "rademacher"},
            "rho": 0.0
        },
        "target": "normal",
        "bound_kind": "normal_zero_mean"
    }"#;

    #[test]
    fn verify_poisson_rademacher_passes() {
        let row = run_verify(&config(EQ13)).unwrap();
        assert_abs_diff_eq!(row.bound.value, 0.1, epsilon = 1e-12);
        assert!(row.distance_value > 0.0 && row.distance_value <= 0.1);
        assert!(row.pass);
        assert_eq!(row.distance_method, "exact_pmf");
    }

    #[test]
    fn verify_poisson_tv_zero_case() {
        let cfg = config(
            r#"{
            "schema_version": 1,
            "model": {
                "count": {"family": "poisson", "lambda": 3.0},
                "claim": {"family": "constant", "num": 1},
                "rho": 0.7
            },
            "target": "poisson",
            "bound_kind": "poisson_tv",
            "mc_budget": 20000
        }"#,
        );
        let row = run_verify(&cfg).unwrap();
        assert_abs_diff_eq!(row.bound.value, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(row.distance_value, 0.0, epsilon = 1e-9);
        assert!(row.pass);
    }

    #[test]
    fn verify_normal_poisson_with_correlation() {
        let cfg = config(
            r#"{
            "schema_version": 1,
            "model": {
                "count": {"family": "poisson", "lambda": 20.0},
                "claim": {"family": "bernoulli", "p": 0.3},
                "rho": 0.2
            },
            "target": "normal",
            "bound_kind": "normal_poisson"
        }"#,
        );
        let row = run_verify(&cfg).unwrap();
        assert!(row.pass, "slack {}", row.slack);
        assert!(row.slack > 0.0);
    }

    #[test]
    fn outputs_are_deterministic() {
        let cfg = config(EQ13);
        let a = render_rows(&[run_verify(&cfg).unwrap()], OutputFormat::Csv);
        let b = render_rows(&[run_verify(&cfg).unwrap()], OutputFormat::Csv);
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }

    #[test]
    fn sweep_rho_reports_monotone_tau() {
        let cfg = config(
            r#"{
            "schema_version": 1,
            "model": {
                "count": {"family": "poisson", "lambda": 5.0},
                "claim": {"family": "bernoulli", "p": 0.4},
                "rho": 0.0
            },
            "target": "gamma",
            "bound_kind": "gamma_stoploss",
            "mc_budget": 10000
        }"#,
        );
        let rows = run_sweep_rho(&cfg, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(rows.len(), 5);
        let sigmas: Vec<f64> = rows.iter().map(|r| r.bound.constants["sigma"]).collect();
        for w in sigmas.windows(2) {
            assert!(w[1] > w[0]);
        }
        // The rho = 0 row matches the short-circuit evaluation exactly.
        let direct = run_bound(&cfg).unwrap();
        assert_abs_diff_eq!(rows[0].bound.value, direct.value, epsilon = 0.0);
    }

    #[test]
    fn sweep_rho_degenerate_count_hits_unit_weights() {
        let cfg = config(
            r#"{
            "schema_version": 1,
            "model": {
                "count": {"family": "finite_pmf", "weights": {"4": 1.0}},
                "claim": {"family": "rademacher"},
                "rho": 0.0
            },
            "target": "normal",
            "bound_kind": "normal_zero_mean",
            "mc_budget": 5000
        }"#,
        );
        let rows = run_sweep_rho(&cfg, &[1.0]).unwrap();
        assert_abs_diff_eq!(rows[0].bound.constants["tau"], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empirical_fallback_kicks_in_for_wide_supports() {
        let cfg = config(
            r#"{
            "schema_version": 1,
            "model": {
                "count": {"family": "poisson", "lambda": 80000.0},
                "claim": {"family": "rademacher"},
                "rho": 0.0
            },
            "target": "normal",
            "bound_kind": "normal_zero_mean",
            "mc_budget": 30000
        }"#,
        );
        let row = run_verify(&cfg).unwrap();
        assert_eq!(row.distance_method, "empirical");
        assert!(row.pass);
    }
}
