//! Special functions: log-gamma, regularized incomplete gamma, and the normal
//! and gamma distribution functions built on them.

/// Lanczos approximation coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// ln C(n, k) for 0 <= k <= n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 500;

/// Regularized lower incomplete gamma function P(a, x), with Q = 1 - P.
///
/// Series for x < a + 1, Lentz continued fraction otherwise.
pub fn reg_gamma_lower(a: f64, x: f64) -> f64 {
    reg_gamma_pair(a, x).0
}

/// Regularized upper incomplete gamma function Q(a, x).
pub fn reg_gamma_upper(a: f64, x: f64) -> f64 {
    reg_gamma_pair(a, x).1
}

fn reg_gamma_pair(a: f64, x: f64) -> (f64, f64) {
    assert!(a > 0.0 && x >= 0.0, "reg_gamma requires a > 0, x >= 0");
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x < a + 1.0 {
        // Series: P(a,x) = x^a e^-x / Gamma(a) * sum x^n / (a)_{n+1}.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        let p = sum * (a * x.ln() - x - ln_gamma(a)).exp();
        (p.min(1.0), (1.0 - p).max(0.0))
    } else {
        // Continued fraction for Q(a,x), modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        let q = h * (a * x.ln() - x - ln_gamma(a)).exp();
        (1.0 - q.min(1.0), q.min(1.0))
    }
}

/// Complementary error function via the incomplete gamma function:
/// erfc(x) = Q(1/2, x^2) for x >= 0.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        reg_gamma_upper(0.5, x * x)
    } else {
        2.0 - erfc(-x)
    }
}

/// Standard normal cdf.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, solved on a bracket by safeguarded Newton.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    // Beasley-Springer-Moro style starting point, then Newton steps against
    // the cdf to full precision.
    let mut z = if p < 0.5 {
        -(-2.0 * p.ln()).sqrt()
    } else {
        (-2.0 * (1.0 - p).ln()).sqrt()
    };
    for _ in 0..50 {
        let err = normal_cdf(z) - p;
        let step = err / normal_pdf(z).max(1e-300);
        z -= step.clamp(-1.0, 1.0);
        if step.abs() < 1e-13 * (1.0 + z.abs()) {
            break;
        }
    }
    z
}

/// Antiderivative of the standard normal cdf: d/dz [z Phi(z) + phi(z)] = Phi(z).
pub fn normal_cdf_antideriv(z: f64) -> f64 {
    z * normal_cdf(z) + normal_pdf(z)
}

/// E (Z - a)_+ for Z ~ N(mean, sd^2).
pub fn normal_partial_expectation(mean: f64, sd: f64, a: f64) -> f64 {
    let z = (a - mean) / sd;
    (mean - a) * (1.0 - normal_cdf(z)) + sd * normal_pdf(z)
}

/// Cdf of Gamma(shape r, rate s) at x.
pub fn gamma_cdf(r: f64, s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        reg_gamma_lower(r, s * x)
    }
}

/// E (Z - a)_+ for Z ~ Gamma(shape r, rate s).
pub fn gamma_partial_expectation(r: f64, s: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return r / s - a;
    }
    (r / s) * reg_gamma_upper(r + 1.0, s * a) - a * reg_gamma_upper(r, s * a)
}

/// Quantile of Gamma(shape r, rate s).
pub fn gamma_quantile(r: f64, s: f64, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    // Bracket: the mean plus a generous multiple of the standard deviation.
    let hi = (r / s + 40.0 * (r.sqrt() / s)).max(40.0 / s);
    solve_increasing(|x| gamma_cdf(r, s, x), p, 0.0, hi)
}

/// Solve f(x) = target for increasing f on [lo, hi] by bisection.
pub fn solve_increasing(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
