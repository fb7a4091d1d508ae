//! Probability distributions over a finite alphabet `[n]` and the
//! distances the testers are built around.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Absolute tolerance for "sums to one" checks. All machine and tester
/// constructions in this crate use rationals exactly representable in
/// binary floating point, so a tight tolerance is safe.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DistError {
    /// The vector is empty, has a negative entry, or does not sum to one.
    InvalidProbabilities { sum: f64 },
    /// Operation on two distributions with different alphabet sizes.
    AlphabetMismatch { left: usize, right: usize },
    /// Index outside `[0, n)`.
    SymbolOutOfRange { symbol: usize, n: usize },
    /// Conditional probability of a pair with zero total mass.
    DegeneratePair { i: usize, j: usize },
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistError::InvalidProbabilities { sum } => {
                write!(f, "invalid probability vector (sum = {sum})")
            }
            DistError::AlphabetMismatch { left, right } => {
                write!(f, "alphabet mismatch: {left} vs {right}")
            }
            DistError::SymbolOutOfRange { symbol, n } => {
                write!(f, "symbol {symbol} out of range for alphabet size {n}")
            }
            DistError::DegeneratePair { i, j } => {
                write!(f, "pair ({i}, {j}) has zero total probability")
            }
        }
    }
}

impl core::error::Error for DistError {}

/// A probability vector over the alphabet `{0, .., n-1}`.
///
/// Entries are nonnegative and sum to one within [`PROB_SUM_TOL`];
/// violating vectors are unrepresentable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, DistError> {
        if probs.is_empty() {
            return Err(DistError::InvalidProbabilities { sum: 0.0 });
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(DistError::InvalidProbabilities { sum: f64::NAN });
            }
            sum += p;
        }
        if math::abs(sum - 1.0) > PROB_SUM_TOL {
            return Err(DistError::InvalidProbabilities { sum });
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `[n]`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on a single symbol.
    pub fn point_mass(n: usize, symbol: usize) -> Result<Self, DistError> {
        if symbol >= n {
            return Err(DistError::SymbolOutOfRange { symbol, n });
        }
        let mut probs = vec![0.0; n];
        probs[symbol] = 1.0;
        Ok(Self { probs })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total variation distance: half the l1 distance between the vectors.
    pub fn tv_distance(&self, other: &Self) -> Result<f64, DistError> {
        if self.n() != other.n() {
            return Err(DistError::AlphabetMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let sum: f64 = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| math::abs(a - b))
            .sum();
        Ok(0.5 * sum)
    }

    /// Distance to the uniform distribution over the same alphabet.
    pub fn tv_to_uniform(&self) -> f64 {
        let u = 1.0 / self.n() as f64;
        0.5 * self.probs.iter().map(|p| math::abs(p - u)).sum::<f64>()
    }

    /// Probability that two independent samples coincide: the squared
    /// l2 norm of the vector. Equals `1/n` exactly when uniform.
    pub fn collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Probability of symbol `i` given the sample is in `{i, j}`.
    pub fn pair_conditional(&self, i: usize, j: usize) -> Result<f64, DistError> {
        let n = self.n();
        if i >= n {
            return Err(DistError::SymbolOutOfRange { symbol: i, n });
        }
        if j >= n {
            return Err(DistError::SymbolOutOfRange { symbol: j, n });
        }
        let total = self.probs[i] + self.probs[j];
        if total <= 0.0 {
            return Err(DistError::DegeneratePair { i, j });
        }
        Ok(self.probs[i] / total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::paninski;

    #[test]
    fn rejects_bad_vectors() {
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn tv_identity_and_disjoint() {
        let u = DiscreteDistribution::uniform(5);
        assert_eq!(u.tv_distance(&u).unwrap(), 0.0);
        let a = DiscreteDistribution::new(vec![1.0, 0.0]).unwrap();
        let b = DiscreteDistribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(a.tv_distance(&b).unwrap(), 1.0);
    }

    #[test]
    fn tv_alphabet_mismatch() {
        let a = DiscreteDistribution::uniform(3);
        let b = DiscreteDistribution::uniform(4);
        assert!(matches!(
            a.tv_distance(&b),
            Err(DistError::AlphabetMismatch { .. })
        ));
    }

    // The alternating-pair family has every entry off by eps/n, so its
    // distance from uniform is eps/2 under the half-l1 convention.
    #[test]
    fn tv_of_alternating_pair_family() {
        for (n, eps) in [(4usize, 0.5f64), (8, 0.25), (10, 0.9)] {
            let z = vec![true; n / 2];
            let q = paninski(n, eps, &z).unwrap();
            let tv = q.tv_to_uniform();
            assert!((tv - eps / 2.0).abs() < 1e-12, "tv = {tv}, eps = {eps}");
        }
    }

    #[test]
    fn collision_uniform_and_spiky() {
        let u = DiscreteDistribution::uniform(8);
        assert!((u.collision_probability() - 1.0 / 8.0).abs() < 1e-15);
        let p = DiscreteDistribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((p.collision_probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collision_of_alternating_pair_family() {
        for (n, eps) in [(4usize, 0.5f64), (6, 0.3), (12, 0.8)] {
            let z: Vec<bool> = (0..n / 2).map(|i| i % 2 == 0).collect();
            let q = paninski(n, eps, &z).unwrap();
            let expect = (1.0 + eps * eps) / n as f64;
            assert!((q.collision_probability() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_conditionals() {
        let u = DiscreteDistribution::uniform(4);
        assert_eq!(u.pair_conditional(0, 1).unwrap(), 0.5);

        let p = DiscreteDistribution::new(vec![0.2, 0.6, 0.2]).unwrap();
        // symbols 2 and 1 in 1-based terms
        assert!((p.pair_conditional(1, 0).unwrap() - 0.75).abs() < 1e-15);

        let eps = 0.4;
        let q = paninski(6, eps, &[true, true, true]).unwrap();
        let c = q.pair_conditional(1, 0).unwrap();
        assert!((c - (1.0 + eps) / 2.0).abs() < 1e-12);

        let deg = DiscreteDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            deg.pair_conditional(0, 1),
            Err(DistError::DegeneratePair { .. })
        ));
    }
}
