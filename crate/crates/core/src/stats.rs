//! Scalar probability primitives: the Gaussian tail, Gaussian mixtures and
//! the Poisson-binomial distribution.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tolerance on the total mass of mixtures and count distributions.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Upper tail of the standard normal, `P(Z > x)`.
///
/// Evaluated as `erfc(x / sqrt 2) / 2`; the musl-derived `erfc` is accurate to
/// a few ulp, well inside a 1e-10 absolute error bound.
pub fn gaussian_q(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("gaussian_q: non-finite argument {x}"));
    }
    Ok(q(x))
}

/// Unchecked tail; infinities map to the limits.
#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// A normal law `N(mean, std^2)`; `std == 0` is a point mass at `mean`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianDist {
    pub mean: f64,
    pub std: f64,
}

impl GaussianDist {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !std.is_finite() || std < 0.0 {
            return domain(format!("invalid Gaussian N({mean}, {std}^2)"));
        }
        Ok(Self { mean, std })
    }

    pub fn point(mean: f64) -> Self {
        Self { mean, std: 0.0 }
    }

    pub fn is_degenerate(&self) -> bool {
        self.std == 0.0
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }

    /// `P(X >= x)`; a point mass contributes `1{mean >= x}`.
    pub fn ccdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return if self.mean >= x { 1.0 } else { 0.0 };
        }
        q((x - self.mean) / self.std)
    }

    /// `P(X < x)`, the complement of [`GaussianDist::ccdf`].
    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return if self.mean < x { 1.0 } else { 0.0 };
        }
        q((self.mean - x) / self.std)
    }

    /// Density. A point mass has no density and returns 0.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// One weighted component of a [`GaussianMixture`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub dist: GaussianDist,
}

/// A finite mixture of normal laws whose weights sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return domain("mixture needs at least one component");
        }
        let mut total = 0.0;
        for c in &components {
            if !(0.0..=1.0).contains(&c.weight) {
                return domain(format!("mixture weight {} outside [0, 1]", c.weight));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return domain(format!("mixture weights sum to {total}, expected 1"));
        }
        Ok(Self { components })
    }

    pub fn single(dist: GaussianDist) -> Self {
        Self { components: vec![MixtureComponent { weight: 1.0, dist }] }
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.dist.mean).sum()
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        mixture_ccdf(self, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.dist.cdf(x)).sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.dist.pdf(x)).sum()
    }
}

/// `P(X >= x)` for a mixture: `sum_i w_i Q((x - mu_i) / sigma_i)`.
pub fn mixture_ccdf(m: &GaussianMixture, x: f64) -> f64 {
    m.components.iter().map(|c| c.weight * c.dist.ccdf(x)).sum()
}

/// Probability of exactly `k` simultaneous blockers, `k = 0..=B`.
/// Entry 0 is the LoS probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockerCountDistribution {
    probs: Vec<f64>,
}

impl BlockerCountDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return domain("blocker distribution needs at least the k = 0 entry");
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return domain(format!("blocker probability {p} outside [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return domain(format!("blocker probabilities sum to {total}, expected 1"));
        }
        Ok(Self { probs })
    }

    /// Point mass at `k = 0`, padded with zeros up to `max_blockers`.
    pub fn line_of_sight(max_blockers: usize) -> Self {
        let mut probs = vec![0.0; max_blockers + 1];
        probs[0] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_blockers(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn los_probability(&self) -> f64 {
        self.probs[0]
    }

    /// `1 - P(LoS)`, summed over `k >= 1` to avoid cancellation.
    pub fn blockage_probability(&self) -> f64 {
        self.probs[1..].iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Total variation distance to another PMF on the non-negative integers.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        let n = self.probs.len().max(other.len());
        0.5 * (0..n).map(|k| (self.prob(k) - other.get(k).copied().unwrap_or(0.0)).abs()).sum::<f64>()
    }
}

/// Full Poisson-binomial PMF over `0..=n` by the O(n^2) recurrence
/// `P_j(k) = P_{j-1}(k) (1 - p_j) + P_{j-1}(k - 1) p_j`.
pub fn poisson_binomial(success_probs: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = success_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return domain(format!("success probability {p} outside [0, 1]"));
    }
    let n = success_probs.len();
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for (j, &p) in success_probs.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    Ok(pmf)
}

/// `P(K = k)` for a sum of independent Bernoulli trials with the given
/// success probabilities.
pub fn poisson_binomial_pmf(success_probs: &[f64], k: usize) -> Result<f64> {
    if k > success_probs.len() {
        return domain(format!("k = {k} exceeds the number of trials {}", success_probs.len()));
    }
    Ok(poisson_binomial(success_probs)?[k])
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Composite Simpson integral of the standard normal density over
    /// `[x, x + 40]`.
    fn tail_by_quadrature(x: f64) -> f64 {
        let n = 40_000;
        let h = 40.0 / n as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = phi(x) + phi(x + 40.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * phi(x + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Sum over all 2^n outcomes.
    fn enumerate(probs: &[f64], k: usize) -> f64 {
        let n = probs.len();
        (0u32..(1 << n))
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| (0..n).map(|i| if mask & (1 << i) != 0 { probs[i] } else { 1.0 - probs[i] }).product::<f64>())
            .sum()
    }

    #[test]
    fn ks_statistic_matches_brute_force() {
        // brute force: sup over a fine grid of |F_n(x) - F(x)| and its left limits
        let mut xs = vec![0.9, 0.1, 0.45, 0.45, 0.7];
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        let brute = {
            let mut best: f64 = 0.0;
            for i in 0..=100_000 {
                let x = i as f64 / 100_000.0;
                let right = xs.iter().filter(|&&v| v <= x).count() as f64 / 5.0;
                let left = xs.iter().filter(|&&v| v < x).count() as f64 / 5.0;
                best = best.max((right - cdf(x)).abs()).max((left - cdf(x)).abs());
            }
            best
        };
        let ks = ks_statistic(&mut xs, cdf);
        assert!((ks - brute).abs() < 1e-4, "{ks} vs {brute}");
        // attained just below 0.45: F = 0.45, F_n = 1/5
        assert!((ks - 0.25).abs() < 1e-12);
    }

    #[test]
    fn q_known_values() {
        assert_eq!(gaussian_q(0.0).unwrap(), 0.5);
        assert!((gaussian_q(1.6449).unwrap() - 0.05).abs() < 1e-4);
        for x in [0.1, 1.0, 3.0] {
            let s = gaussian_q(x).unwrap() + gaussian_q(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(gaussian_q(f64::NAN).is_err());
        assert!(gaussian_q(f64::INFINITY).is_err());
    }

    #[test]
    fn q_matches_quadrature() {
        let mut x = -6.0;
        while x <= 6.0 {
            let err = (gaussian_q(x).unwrap() - tail_by_quadrature(x)).abs();
            assert!(err < 1e-10, "x = {x}: error {err}");
            x += 0.25;
        }
    }

    #[test]
    fn q_strictly_decreasing() {
        let xs: Vec<f64> = (-80..=80).map(|i| i as f64 * 0.1).collect();
        for w in xs.windows(2) {
            assert!(q(w[1]) < q(w[0]));
        }
    }

    #[test]
    fn poisson_binomial_examples() {
        assert!((poisson_binomial_pmf(&[0.5, 0.5], 1).unwrap() - 0.5).abs() < 1e-15);
        let p = poisson_binomial_pmf(&[0.2, 0.3, 0.4], 2).unwrap();
        assert!((p - enumerate(&[0.2, 0.3, 0.4], 2)).abs() < 1e-15);
        assert!((p - 0.188).abs() < 1e-12);
        assert!(poisson_binomial_pmf(&[0.2, 0.3], 3).is_err());
        assert!(poisson_binomial(&[1.2]).is_err());
        assert_eq!(poisson_binomial(&[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn poisson_binomial_reduces_to_binomial() {
        let p: f64 = 0.37;
        let n = 9;
        let pmf = poisson_binomial(&vec![p; n]).unwrap();
        let mut c = 1.0;
        for (k, v) in pmf.iter().enumerate() {
            if k > 0 {
                c = c * (n - k + 1) as f64 / k as f64;
            }
            let binom = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            assert!((v - binom).abs() < 1e-14);
        }
    }

    #[test]
    fn mixture_validation() {
        let d = GaussianDist::new(0.0, 1.0).unwrap();
        assert!(GaussianMixture::new(vec![]).is_err());
        assert!(GaussianMixture::new(vec![MixtureComponent { weight: 0.7, dist: d }]).is_err());
        assert!(GaussianMixture::new(vec![MixtureComponent { weight: 1.2, dist: d }]).is_err());
        assert!(GaussianDist::new(0.0, -1.0).is_err());
    }

    #[test]
    fn mixture_ccdf_examples() {
        let single = GaussianMixture::single(GaussianDist::new(0.0, 1.0).unwrap());
        assert_eq!(mixture_ccdf(&single, 0.0), 0.5);
        let two = GaussianMixture::new(vec![
            MixtureComponent { weight: 0.5, dist: GaussianDist::new(-10.0, 1.0).unwrap() },
            MixtureComponent { weight: 0.5, dist: GaussianDist::new(10.0, 1.0).unwrap() },
        ])
        .unwrap();
        assert!((mixture_ccdf(&two, 0.0) - 0.5).abs() < 1e-6);
        assert!((mixture_ccdf(&two, -1e9) - 1.0).abs() < 1e-15);
        assert!(mixture_ccdf(&two, 1e9).abs() < 1e-15);
    }

    #[test]
    fn degenerate_component_uses_indicator() {
        let m = GaussianMixture::new(vec![
            MixtureComponent { weight: 0.25, dist: GaussianDist::point(2.0) },
            MixtureComponent { weight: 0.75, dist: GaussianDist::new(0.0, 1.0).unwrap() },
        ])
        .unwrap();
        assert!((mixture_ccdf(&m, 2.0) - (0.25 + 0.75 * q(2.0))).abs() < 1e-15);
        assert!((mixture_ccdf(&m, 2.0 + 1e-12) - 0.75 * q(2.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn mixture_ccdf_matches_sampling() {
        let comps = [(0.2, -3.0, 1.5), (0.5, 1.0, 0.5), (0.3, 4.0, 2.0)];
        let m = GaussianMixture::new(
            comps
                .iter()
                .map(|&(w, mu, s)| MixtureComponent { weight: w, dist: GaussianDist::new(mu, s).unwrap() })
                .collect(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normals: Vec<Normal<f64>> = comps.iter().map(|&(_, mu, s)| Normal::new(mu, s).unwrap()).collect();
        let n = 1_000_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let idx = if u < 0.2 {
                    0
                } else if u < 0.7 {
                    1
                } else {
                    2
                };
                normals[idx].sample(&mut rng)
            })
            .collect();
        for x in [-4.0, -1.0, 0.5, 2.0, 5.0] {
            let emp = samples.iter().filter(|&&s| s >= x).count() as f64 / n as f64;
            let p = mixture_ccdf(&m, x);
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() <= 3.0 * sd, "x = {x}: {emp} vs {p}");
        }
    }

    #[test]
    fn blocker_distribution_accessors() {
        let d = BlockerCountDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(d.max_blockers(), 2);
        assert!((d.mean() - 0.7).abs() < 1e-15);
        assert!((d.blockage_probability() - 0.5).abs() < 1e-15);
        assert_eq!(d.prob(7), 0.0);
        assert!((d.total_variation(&[0.5, 0.5]) - 0.2).abs() < 1e-15);
        assert!(BlockerCountDistribution::new(vec![0.5, 0.4]).is_err());
    }

    proptest! {
        #[test]
        fn poisson_binomial_matches_enumeration(probs in prop::collection::vec(0.0f64..=1.0, 0..=12)) {
            let pmf = poisson_binomial(&probs).unwrap();
            let total: f64 = pmf.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for (k, v) in pmf.iter().enumerate() {
                prop_assert!((v - enumerate(&probs, k)).abs() < 1e-12);
            }
        }

        #[test]
        fn mixture_ccdf_monotone(
            comps in prop::collection::vec((0.01f64..1.0, -20.0f64..20.0, 0.0f64..5.0), 1..6),
        ) {
            let total: f64 = comps.iter().map(|c| c.0).sum();
            let m = GaussianMixture::new(comps.iter().map(|&(w, mu, s)| MixtureComponent {
                weight: w / total,
                dist: GaussianDist::new(mu, s).unwrap(),
            }).collect()).unwrap();
            let mut prev = 1.0 + 1e-12;
            for i in -300..=300 {
                let v = mixture_ccdf(&m, i as f64 * 0.1);
                prop_assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }
}
