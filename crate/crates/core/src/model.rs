//! The equally-correlated random-sum model: sampling, exact moments, and the
//! exact pmf constructions used as oracles for the representation identities.

use rand::Rng;

use crate::dist::{ClaimLaw, CountLaw};
use crate::error::{Error, Result};
use crate::pmf::LatticePmf;

/// Random sum `Y = X_1 + ... + X_N` with pairwise claim correlation `rho`.
///
/// With probability `rho` all summands equal a single claim draw, otherwise
/// the summands are independent; the count is independent of the claims.
#[derive(Debug, Clone)]
pub struct RandomSumModel {
    pub count: CountLaw,
    pub claim: ClaimLaw,
    pub rho: f64,
}

impl RandomSumModel {
    pub fn new(count: CountLaw, claim: ClaimLaw, rho: f64) -> Result<Self> {
        count.validate()?;
        claim.validate()?;
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!("rho {rho} out of [0,1]")));
        }
        Ok(Self { count, claim, rho })
    }

    /// Poisson mean if the count is Poisson.
    pub fn poisson_lambda(&self) -> Result<f64> {
        match self.count {
            CountLaw::Poisson { lambda } => Ok(lambda),
            _ => Err(Error::Unsupported("operation requires a Poisson count".into())),
        }
    }

    /// One draw of Y.
    pub fn sample_sum<R: Rng>(&self, rng: &mut R) -> f64 {
        let comonotone = self.rho > 0.0 && rng.gen::<f64>() < self.rho;
        let n = self.count.sample(rng);
        if comonotone {
            n as f64 * self.claim.sample(rng)
        } else {
            (0..n).map(|_| self.claim.sample(rng)).sum()
        }
    }

    /// Exact mean and variance of Y.
    ///
    /// Total-variance expansion with Cov(X_j, X_k) = rho Var(X_1):
    /// Var(Y) = Var(X)(E[N] + rho E[N(N-1)]) + E[X]^2 Var(N).
    pub fn mean_var(&self) -> (f64, f64) {
        let m = self.claim.moments();
        let en = self.count.mean();
        let mean = en * m.mean;
        let var = m.variance * (en + self.rho * self.count.m2_factorial())
            + m.mean * m.mean * self.count.variance();
        (mean, var)
    }

    /// Exact law of `N * X_1` over the truncated count support.
    pub fn product_pmf(&self, tail_eps: f64) -> Result<LatticePmf> {
        let count = self.count.to_pmf(tail_eps)?;
        let claim = self.claim.to_pmf();
        let components: Vec<(f64, LatticePmf)> =
            count.iter().map(|(n, p)| (p, claim.scale_index(n))).collect();
        let refs: Vec<(f64, &LatticePmf)> = components.iter().map(|(p, c)| (*p, c)).collect();
        let mut out = LatticePmf::mixture(&refs)?;
        out = carry_truncation(out, count.truncation_mass());
        Ok(out)
    }

    /// Exact law of `X_1 + ... + X_n` mixed over `n ~ count_pmf` with
    /// independent claims.
    fn compound_pmf(&self, count_pmf: &LatticePmf) -> Result<LatticePmf> {
        compound(count_pmf, &self.claim.to_pmf())
    }

    /// Exact pmf of Y: the rho-mixture of the comonotone law of `N X_1` and
    /// the independent compound law.
    pub fn exact_pmf(&self, tail_eps: f64) -> Result<LatticePmf> {
        let count = self.count.to_pmf(tail_eps)?;
        if self.rho == 0.0 {
            return self.compound_pmf(&count);
        }
        let product = self.product_pmf(tail_eps)?;
        if self.rho == 1.0 {
            return Ok(product);
        }
        let independent = self.compound_pmf(&count)?;
        LatticePmf::mixture(&[(self.rho, &product), (1.0 - self.rho, &independent)])
    }

    /// Direct size-bias reweighting of the exact pmf of Y.
    pub fn exact_pmf_size_bias_lhs(&self, tail_eps: f64) -> Result<LatticePmf> {
        self.exact_pmf(tail_eps)?.size_biased()
    }

    /// The size-bias representation built from its mixture form:
    /// with probability rho the size bias of `N X_1`, otherwise
    /// `X_1^s + (X'_1 + ... + X'_{N^s - 1})` with independent primed claims.
    pub fn exact_pmf_size_bias_rhs(&self, tail_eps: f64) -> Result<LatticePmf> {
        let count = self.count.to_pmf(tail_eps)?;
        let claim = self.claim.to_pmf();
        let count_sb_minus_one = count.size_biased()?.shift_index(-1);
        let independent_branch =
            claim.size_biased()?.convolve(&compound(&count_sb_minus_one, &claim)?)?;
        if self.rho == 0.0 {
            return Ok(independent_branch);
        }
        let product_sb = self.product_pmf(tail_eps)?.size_biased()?;
        if self.rho == 1.0 {
            return Ok(product_sb);
        }
        LatticePmf::mixture(&[(self.rho, &product_sb), (1.0 - self.rho, &independent_branch)])
    }
}

/// Law of `X_1 + ... + X_n` for `n ~ count_pmf`, claims iid with the given
/// pmf, by repeated direct convolution over the truncated count support.
pub fn compound(count_pmf: &LatticePmf, claim_pmf: &LatticePmf) -> Result<LatticePmf> {
    let claim = claim_pmf;
    let max_n = count_pmf.max_index();
    let mut power = LatticePmf::point_mass(0, claim.denom());
    let mut components: Vec<(f64, LatticePmf)> = Vec::new();
    for n in 0..=max_n {
        let p = count_pmf.prob(n);
        if p > 0.0 {
            components.push((p, power.clone()));
        }
        if n < max_n {
            power = power.convolve(&claim)?;
        }
    }
    let refs: Vec<(f64, &LatticePmf)> = components.iter().map(|(p, c)| (*p, c)).collect();
    let out = LatticePmf::mixture(&refs)?;
    Ok(carry_truncation(out, count_pmf.truncation_mass()))
}

fn carry_truncation(pmf: LatticePmf, extra: f64) -> LatticePmf {
    let total = (pmf.truncation_mass() + extra).min(1.0 - f64::MIN_POSITIVE);
    let weights = pmf.iter().collect();
    LatticePmf::new(pmf.denom(), weights, total).unwrap()
}
