//! Exact probability mass functions on a lattice.
//!
//! Support points are `index / denom` for integer `index`, so sums and scalar
//! integer multiples of lattice variables stay on the lattice and every pmf
//! operation is exact up to floating-point rounding and the recorded
//! truncation mass.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A finitely supported pmf on the lattice `{ k / denom : k integer }`.
#[derive(Debug, Clone)]
pub struct LatticePmf {
    denom: u32,
    weights: BTreeMap<i64, f64>,
    truncation_mass: f64,
}

impl LatticePmf {
    pub fn new(denom: u32, weights: BTreeMap<i64, f64>, truncation_mass: f64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter("lattice denom must be positive".into()));
        }
        if !(0.0..1.0).contains(&truncation_mass) {
            return Err(Error::InvalidParameter(format!(
                "truncation mass {truncation_mass} out of [0,1)"
            )));
        }
        let mut pruned = BTreeMap::new();
        for (k, w) in weights {
            if w < -1e-12 {
                return Err(Error::InvalidParameter(format!("negative weight {w} at index {k}")));
            }
            if w > 0.0 {
                pruned.insert(k, w);
            }
        }
        if pruned.is_empty() {
            return Err(Error::InvalidParameter("pmf has empty support".into()));
        }
        Ok(Self { denom, weights: pruned, truncation_mass })
    }

    pub fn point_mass(index: i64, denom: u32) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(index, 1.0);
        Self { denom, weights, truncation_mass: 0.0 }
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Real value of a lattice index.
    pub fn value(&self, index: i64) -> f64 {
        index as f64 / self.denom as f64
    }

    pub fn prob(&self, index: i64) -> f64 {
        self.weights.get(&index).copied().unwrap_or(0.0)
    }

    /// Ascending iteration over (index, probability).
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn min_index(&self) -> i64 {
        *self.weights.keys().next().unwrap()
    }

    pub fn max_index(&self) -> i64 {
        *self.weights.keys().next_back().unwrap()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_index() >= 0
    }

    /// Expectation of `f` over the pmf (unnormalized: uses the stored mass).
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(k, w)| w * f(self.value(k))).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn moment(&self, order: u32) -> f64 {
        self.expect(|x| x.powi(order as i32))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    /// Rescale weights so the total mass is exactly 1.
    pub fn normalized(&self) -> Self {
        let total = self.total_mass();
        let weights = self.weights.iter().map(|(&k, &w)| (k, w / total)).collect();
        Self { denom: self.denom, weights, truncation_mass: self.truncation_mass }
    }

    /// Law of `X + Y` for independent X, Y on the same lattice.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.denom != other.denom {
            return Err(Error::Unsupported(format!(
                "convolution across lattices (denom {} vs {})",
                self.denom, other.denom
            )));
        }
        let mut weights: BTreeMap<i64, f64> = BTreeMap::new();
        for (ka, wa) in self.iter() {
            for (kb, wb) in other.iter() {
                *weights.entry(ka + kb).or_insert(0.0) += wa * wb;
            }
        }
        let truncation_mass =
            (self.truncation_mass + other.truncation_mass).min(1.0 - f64::MIN_POSITIVE);
        Self::new(self.denom, weights, truncation_mass)
    }

    /// Law of `n * X`.
    pub fn scale_index(&self, n: i64) -> Self {
        if n == 0 {
            let mut pm = Self::point_mass(0, self.denom);
            pm.truncation_mass = self.truncation_mass;
            return pm;
        }
        let mut weights = BTreeMap::new();
        for (k, w) in self.iter() {
            *weights.entry(k * n).or_insert(0.0) += w;
        }
        Self { denom: self.denom, weights, truncation_mass: self.truncation_mass }
    }

    /// Law of `X + shift/denom`.
    pub fn shift_index(&self, shift: i64) -> Self {
        let weights = self.iter().map(|(k, w)| (k + shift, w)).collect();
        Self { denom: self.denom, weights, truncation_mass: self.truncation_mass }
    }

    /// Mixture of pmfs on a common lattice with the given (non-negative) weights.
    pub fn mixture(components: &[(f64, &Self)]) -> Result<Self> {
        let denom = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?
            .1
            .denom;
        let mut weights: BTreeMap<i64, f64> = BTreeMap::new();
        let mut trunc = 0.0;
        for (p, pmf) in components {
            if pmf.denom != denom {
                return Err(Error::Unsupported("mixture across lattices".into()));
            }
            trunc += p * pmf.truncation_mass;
            if *p == 0.0 {
                continue;
            }
            for (k, w) in pmf.iter() {
                *weights.entry(k).or_insert(0.0) += p * w;
            }
        }
        Self::new(denom, weights, trunc.min(1.0 - f64::MIN_POSITIVE))
    }

    /// Size-biased law: P(j) proportional to value(j) * P(X = j).
    ///
    /// Requires non-negative support and positive mean; the result is
    /// renormalized and carries the base truncation mass forward.
    pub fn size_biased(&self) -> Result<Self> {
        if !self.is_nonnegative() {
            return Err(Error::Unsupported("size bias of a law with negative support".into()));
        }
        let total: f64 = self.iter().map(|(k, w)| k as f64 * w).sum();
        if total <= 0.0 {
            return Err(Error::MeanConstraint("size bias requires positive mean".into()));
        }
        let weights = self
            .iter()
            .filter(|&(k, _)| k > 0)
            .map(|(k, w)| (k, k as f64 * w / total))
            .collect();
        Self::new(self.denom, weights, self.truncation_mass)
    }

    /// Re-express the pmf on a finer lattice whose denom is a multiple of ours.
    pub fn with_denom(&self, denom: u32) -> Result<Self> {
        if denom % self.denom != 0 {
            return Err(Error::Unsupported(format!(
                "cannot refine lattice denom {} to {}",
                self.denom, denom
            )));
        }
        let factor = (denom / self.denom) as i64;
        let weights = self.iter().map(|(k, w)| (k * factor, w)).collect();
        Ok(Self { denom, weights, truncation_mass: self.truncation_mass })
    }

    /// Sorted `(value, probability)` pairs.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.iter().map(|(k, w)| (self.value(k), w)).collect()
    }

    /// Sorted `(value, cdf)` pairs where cdf is the right-continuous cdf of
    /// the stored (possibly sub-probability) mass.
    pub fn cdf_points(&self) -> Vec<(f64, f64)> {
        let mut cum = 0.0;
        self.iter()
            .map(|(k, w)| {
                cum += w;
                (self.value(k), cum)
            })
            .collect()
    }

    /// Half the L1 distance between two pmfs, matched atom by atom.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        let (a, b) = common_lattice(self, other)?;
        let mut keys: Vec<i64> = a.weights.keys().chain(b.weights.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let sum: f64 = keys.iter().map(|&k| (a.prob(k) - b.prob(k)).abs()).sum();
        Ok(0.5 * sum)
    }

    /// Serialize as a two-column text table (support point, probability).
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (k, w) in self.iter() {
            out.push_str(&format!("{:.12e} {:.12e}\n", self.value(k), w));
        }
        out
    }

    /// Precomputed inverse-cdf sampler over the stored atoms.
    pub fn sampler(&self) -> PmfSampler {
        let total = self.total_mass();
        let mut cum = 0.0;
        let entries = self
            .iter()
            .map(|(k, w)| {
                cum += w / total;
                (k, cum)
            })
            .collect();
        PmfSampler { entries }
    }
}

/// Bring two pmfs onto a common (lcm) lattice.
pub fn common_lattice(a: &LatticePmf, b: &LatticePmf) -> Result<(LatticePmf, LatticePmf)> {
    let d = lcm(a.denom, b.denom);
    Ok((a.with_denom(d)?, b.with_denom(d)?))
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse-cdf sampler for a lattice pmf.
pub struct PmfSampler {
    entries: Vec<(i64, f64)>,
}

impl PmfSampler {
    /// Lattice index at cdf level `u` in [0,1).
    pub fn index_at(&self, u: f64) -> i64 {
        let pos = self.entries.partition_point(|&(_, c)| c < u);
        self.entries[pos.min(self.entries.len() - 1)].0
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> i64 {
        self.index_at(rng.gen::<f64>())
    }
}
