//! Biasing transforms and coupling expectations.
//!
//! The size bias of a lattice law is itself a lattice law and is built
//! exactly. The zero-type biases (zero, generalized-zero, non-zero) of a
//! lattice law are continuous; the bounds only consume their absolute means,
//! so those are carried as closed-form moment functionals.
//!
//! Every "for any coupling" freedom is resolved by the quantile (comonotone)
//! coupling, which minimizes E|A - B| in one dimension.

use crate::dist::{ClaimLaw, CountLaw};
use crate::error::{Error, Result};
use crate::pmf::{common_lattice, LatticePmf};

/// Size-biased pmf of a non-negative lattice law: P(j) = value(j) P(X=j) / E[X].
pub fn size_bias_pmf(pmf: &LatticePmf) -> Result<LatticePmf> {
    pmf.size_biased()
}

/// Size-biased pmf of a count law over its truncated support.
pub fn size_bias_count(law: &CountLaw, tail_eps: f64) -> Result<LatticePmf> {
    law.to_pmf(tail_eps)?.size_biased()
}

/// Size-biased pmf of a claim law (requires non-negative support).
pub fn size_bias_claim(law: &ClaimLaw) -> Result<LatticePmf> {
    law.to_pmf().size_biased()
}

/// E|A - B| under the comonotone (inverse-cdf) coupling, computed exactly for
/// lattice pmfs as the integral of |F_A - F_B| over lattice gaps.
pub fn quantile_coupling_expectation(a: &LatticePmf, b: &LatticePmf) -> Result<f64> {
    let (a, b) = common_lattice(a, b)?;
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
    Ok(acc)
}

/// E|N + 1 - N^s| under the quantile coupling of N^s and N.
///
/// Families with a known closed form use it; anything else falls back to the
/// exact quantile-coupling sum over truncated supports.
pub fn coupling_delta_count(law: &CountLaw, tail_eps: f64) -> Result<f64> {
    match law {
        // N^s has the law of N + 1.
        CountLaw::Poisson { .. } => Ok(0.0),
        // N + 1 is stochastically larger than N^s, so the expectation is
        // E[N + 1] - E[N^s] = 1 + E[N] - E[N^2]/E[N].
        CountLaw::Binomial { n: _, p } => Ok(*p),
        CountLaw::Hypergeometric { .. } => Ok(1.0 + law.mean() - law.m2() / law.mean()),
        // Mixed Poisson: N^s is stochastically larger than N + 1, and the
        // difference of means is Var(Lambda)/E[Lambda].
        CountLaw::GammaMixedPoisson { r: _, p } => Ok((1.0 - p) / p),
        CountLaw::FinitePmf { .. } => {
            let pmf = law.to_pmf(tail_eps)?;
            quantile_coupling_expectation(&pmf.shift_index(1), &pmf.size_biased()?)
        }
    }
}

/// Exact quantile-coupling value of E|N + 1 - N^s| ignoring family shortcuts.
pub fn coupling_delta_count_generic(law: &CountLaw, tail_eps: f64) -> Result<f64> {
    let pmf = law.to_pmf(tail_eps)?;
    quantile_coupling_expectation(&pmf.shift_index(1), &pmf.size_biased()?)
}

/// E|X^z| = E|X|^3 / (2 Var X) for a mean-zero claim.
pub fn abs_mean_zero_bias(law: &ClaimLaw) -> Result<f64> {
    let m = law.moments();
    if m.mean.abs() > 1e-12 {
        return Err(Error::MeanConstraint(format!(
            "zero bias requires mean 0, got {}",
            m.mean
        )));
    }
    if m.variance <= 0.0 {
        return Err(Error::InvalidParameter("zero bias requires positive variance".into()));
    }
    Ok(m.m3abs / (2.0 * m.variance))
}

/// E|X^gz| = E|X|^3 / (2 E[X^2]).
pub fn abs_mean_gz(law: &ClaimLaw) -> Result<f64> {
    let m = law.moments();
    if m.m2 <= 0.0 {
        return Err(Error::InvalidParameter("generalized zero bias requires E[X^2] > 0".into()));
    }
    Ok(m.m3abs / (2.0 * m.m2))
}

/// E|(N X_1)^nz| for N ~ Poisson(lambda), with sgn(0) = +1:
/// [(l^2+3l+1) E|X|^3 - l(l+1) E[X] E[X^2 sgn X]] / (2 (E[X^2] + l Var X)).
pub fn abs_mean_nz_product(lambda: f64, law: &ClaimLaw) -> Result<f64> {
    let m = law.moments();
    let denom = 2.0 * (m.m2 + lambda * m.variance);
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(
            "non-zero bias requires Var(N X_1) > 0".into(),
        ));
    }
    let numer = (lambda * lambda + 3.0 * lambda + 1.0) * m.m3abs
        - lambda * (lambda + 1.0) * m.mean * m.m2sgn;
    Ok(numer / denom)
}

/// E|X^s - X^gz| under the quantile coupling, for a non-negative claim with
/// positive mean.
///
/// X^s is a lattice law; X^gz has the piecewise-constant density
/// E[X 1{X > x}] / E[X^2] on x >= 0, so |F_s - F_gz| integrates in closed
/// form segment by segment.
pub fn coupling_delta_claim(law: &ClaimLaw) -> Result<f64> {
    if let ClaimLaw::Bernoulli { p } = law {
        if *p <= 0.0 {
            return Err(Error::MeanConstraint("claim mean must be positive".into()));
        }
        // X^s = 1 a.s. and X^gz ~ U(0,1).
        return Ok(0.5);
    }
    let pmf = law.to_pmf();
    if !pmf.is_nonnegative() {
        return Err(Error::Unsupported("size bias of a negative-support claim".into()));
    }
    let m = law.moments();
    if m.mean <= 0.0 {
        return Err(Error::MeanConstraint("claim mean must be positive".into()));
    }
    let atoms: Vec<(f64, f64)> = pmf.atoms();

    // Segment breakpoints: 0 plus every positive atom.
    let mut points: Vec<f64> = vec![0.0];
    points.extend(atoms.iter().map(|&(x, _)| x).filter(|&x| x > 0.0));

    let mut f_s = 0.0; // size-bias cdf, right-continuous at segment start
    let mut f_gz = 0.0;
    let mut acc = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Mass of the size-biased law at the left endpoint.
        if a > 0.0 {
            let p_at: f64 =
                atoms.iter().filter(|&&(x, _)| x == a).map(|&(x, p)| x * p).sum::<f64>() / m.mean;
            f_s += p_at;
        }
        // Generalized-zero-bias density on (a, b): E[X 1{X > a}] / E[X^2].
        let density = atoms.iter().filter(|&&(x, _)| x > a).map(|&(x, p)| x * p).sum::<f64>() / m.m2;
        let width = b - a;
        let d0 = f_s - f_gz;
        let d1 = f_s - (f_gz + density * width);
        acc += segment_abs_area(d0, d1, width);
        f_gz += density * width;
    }
    Ok(acc)
}

/// Integral of |d(t)| for the linear function d running from d0 to d1 over a
/// segment of the given width.
fn segment_abs_area(d0: f64, d1: f64, width: f64) -> f64 {
    if d0 * d1 >= 0.0 {
        0.5 * (d0.abs() + d1.abs()) * width
    } else {
        let t = d0.abs() / (d0.abs() + d1.abs()) * width;
        0.5 * (d0.abs() * t + d1.abs() * (width - t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn size_bias_of_bernoulli_is_point_mass_at_one() {
        let sb = size_bias_claim(&ClaimLaw::Bernoulli { p: 0.3 }).unwrap();
        assert_abs_diff_eq!(sb.prob(1), 1.0, epsilon = 1e-15);
        assert_eq!(sb.support_len(), 1);
    }

    #[test]
    fn size_bias_of_poisson_is_shifted_poisson() {
        let law = CountLaw::Poisson { lambda: 2.5 };
        let sb = size_bias_count(&law, 1e-14).unwrap();
        let shifted = law.to_pmf(1e-14).unwrap().shift_index(1);
        assert!(sb.tv_distance(&shifted).unwrap() < 1e-12);
    }

    #[test]
    fn size_bias_of_binomial_is_one_plus_smaller_binomial() {
        let sb = size_bias_count(&CountLaw::Binomial { n: 9, p: 0.35 }, 1e-14).unwrap();
        let smaller = CountLaw::Binomial { n: 8, p: 0.35 }.to_pmf(1e-14).unwrap().shift_index(1);
        assert!(sb.tv_distance(&smaller).unwrap() < 1e-12);
    }

    #[test]
    fn size_bias_functional_identity_on_monomials() {
        // E[g(X^s)] E[X] = E[X g(X)] for g(x) = x^k.
        let laws = [
            ClaimLaw::FiniteIntPmf { weights: [(1, 0.5), (3, 0.5)].into_iter().collect() },
            ClaimLaw::FiniteLatticePmf {
                denom: 4,
                weights: [(1, 0.2), (2, 0.3), (7, 0.5)].into_iter().collect(),
            },
        ];
        for law in laws {
            let base = law.to_pmf();
            let sb = base.size_biased().unwrap();
            let mean = base.mean();
            for k in 0..=4u32 {
                let lhs = sb.moment(k) * mean;
                let rhs = base.moment(k + 1);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn coupling_delta_count_closed_forms_match_generic() {
        let cases = [
            (CountLaw::Poisson { lambda: 3.0 }, 0.0),
            (CountLaw::Binomial { n: 12, p: 0.4 }, 0.4),
            (CountLaw::GammaMixedPoisson { r: 5.0, p: 0.25 }, 3.0),
        ];
        for (law, expected) in cases {
            assert_abs_diff_eq!(coupling_delta_count(&law, 1e-14).unwrap(), expected, epsilon = 1e-12);
            let generic = coupling_delta_count_generic(&law, 1e-14).unwrap();
            assert_abs_diff_eq!(generic, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn coupling_delta_hypergeometric_matches_quantile_sum() {
        let law = CountLaw::Hypergeometric { population: 40, successes: 15, draws: 8 };
        let analytic = coupling_delta_count(&law, 1e-14).unwrap();
        let generic = coupling_delta_count_generic(&law, 1e-14).unwrap();
        assert_abs_diff_eq!(analytic, generic, epsilon = 1e-10);
        assert_abs_diff_eq!(analytic, 1.0 + law.mean() - law.m2() / law.mean(), epsilon = 1e-12);
    }

    #[test]
    fn abs_mean_zero_bias_rademacher_cases() {
        assert_abs_diff_eq!(abs_mean_zero_bias(&ClaimLaw::rademacher()).unwrap(), 0.5, epsilon = 1e-14);
        // Scaled Rademacher +-a has E|X^z| = a/2 (here a = 3/2).
        let scaled = ClaimLaw::FiniteLatticePmf {
            denom: 2,
            weights: [(-3, 0.5), (3, 0.5)].into_iter().collect(),
        };
        assert_abs_diff_eq!(abs_mean_zero_bias(&scaled).unwrap(), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn abs_mean_zero_bias_centered_bernoulli() {
        // X in {-p, 1-p} with p = 1/4 on the lattice of quarters.
        let p = 0.25;
        let law = ClaimLaw::FiniteLatticePmf {
            denom: 4,
            weights: [(-1, 1.0 - p), (3, p)].into_iter().collect(),
        };
        let m3abs = p * (1.0 - p) * (p * p + (1.0 - p) * (1.0 - p));
        let expected = m3abs / (2.0 * p * (1.0 - p));
        assert_relative_eq!(abs_mean_zero_bias(&law).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn abs_mean_zero_bias_rejects_nonzero_mean() {
        assert!(abs_mean_zero_bias(&ClaimLaw::Bernoulli { p: 0.5 }).is_err());
    }

    #[test]
    fn abs_mean_gz_examples() {
        assert_abs_diff_eq!(abs_mean_gz(&ClaimLaw::Bernoulli { p: 0.3 }).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(abs_mean_gz(&ClaimLaw::rademacher()).unwrap(), 0.5, epsilon = 1e-14);
        let law = ClaimLaw::FiniteIntPmf { weights: [(1, 0.5), (3, 0.5)].into_iter().collect() };
        assert_abs_diff_eq!(abs_mean_gz(&law).unwrap(), 1.4, epsilon = 1e-14);
    }

    #[test]
    fn abs_mean_nz_product_examples() {
        assert_abs_diff_eq!(
            abs_mean_nz_product(1.0, &ClaimLaw::Bernoulli { p: 1.0 }).unwrap(),
            1.5,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            abs_mean_nz_product(1.0, &ClaimLaw::rademacher()).unwrap(),
            1.25,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            abs_mean_nz_product(2.0, &ClaimLaw::Bernoulli { p: 0.5 }).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn coupling_delta_claim_bernoulli_and_point_mass() {
        assert_abs_diff_eq!(coupling_delta_claim(&ClaimLaw::Bernoulli { p: 0.4 }).unwrap(), 0.5, epsilon = 1e-14);
        // X = c: X^s = c, X^gz ~ U(0, c), quantile coupling gives c/2.
        let c3 = ClaimLaw::constant(3, 1);
        assert_abs_diff_eq!(coupling_delta_claim(&c3).unwrap(), 1.5, epsilon = 1e-13);
        let one = ClaimLaw::FiniteIntPmf { weights: [(1, 1.0)].into_iter().collect() };
        assert_abs_diff_eq!(coupling_delta_claim(&one).unwrap(), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn coupling_delta_claim_matches_quadrature_oracle() {
        let law = ClaimLaw::FiniteIntPmf {
            weights: [(0, 0.2), (1, 0.3), (2, 0.1), (4, 0.4)].into_iter().collect(),
        };
        let m = law.moments();
        let atoms = law.to_pmf().atoms();
        let sb = law.to_pmf().size_biased().unwrap();
        let hi = 4.0;
        let n = 2_000_000;
        let h = hi / n as f64;
        let mut f_gz = 0.0;
        let mut quad = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let density: f64 =
                atoms.iter().filter(|&&(v, _)| v > x).map(|&(v, p)| v * p).sum::<f64>() / m.m2;
            let f_s: f64 = sb.iter().filter(|&(k, _)| sb.value(k) <= x).map(|(_, p)| p).sum();
            f_gz += density * h;
            quad += (f_s - f_gz).abs() * h;
        }
        assert_relative_eq!(coupling_delta_claim(&law).unwrap(), quad, max_relative = 1e-4);
    }

    #[test]
    fn quantile_coupling_examples() {
        let a = LatticePmf::point_mass(2, 1);
        assert_abs_diff_eq!(quantile_coupling_expectation(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
        let b = LatticePmf::point_mass(7, 1);
        assert_abs_diff_eq!(quantile_coupling_expectation(&a, &b).unwrap(), 5.0, epsilon = 1e-15);
        // Binomial(10, 1/2) against its size bias shifted down by one: value p.
        let bin = CountLaw::Binomial { n: 10, p: 0.5 }.to_pmf(1e-14).unwrap();
        let sb_minus_one = bin.size_biased().unwrap().shift_index(-1);
        assert_abs_diff_eq!(
            quantile_coupling_expectation(&bin, &sb_minus_one).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }
}
