//! Finite discrete entry laws with exact rational atoms and point masses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("atoms and probabilities must be nonempty lists of equal length (got {atoms} and {probs})")]
    LengthMismatch { atoms: usize, probs: usize },
    #[error("probability {0} is not strictly positive")]
    NonPositiveProbability(String),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
}

/// A real random variable taking finitely many rational values.
///
/// Atoms are sorted ascending and pairwise distinct; the point masses are
/// strictly positive and sum to exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DistributionFile", into = "DistributionFile")]
pub struct AtomicDistribution {
    atoms: Vec<Rational>,
    probs: Vec<Rational>,
    sampler: Sampler,
}

impl AtomicDistribution {
    /// Builds a distribution, merging equal atoms by summing their masses.
    pub fn new(atoms: Vec<Rational>, probs: Vec<Rational>) -> Result<Self, DistError> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(DistError::LengthMismatch {
                atoms: atoms.len(),
                probs: probs.len(),
            });
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_positive()) {
            return Err(DistError::NonPositiveProbability(rational::format(bad)));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(DistError::NotNormalized(rational::format(&total)));
        }
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (a, p) in atoms.into_iter().zip(probs) {
            *merged.entry(a).or_insert_with(Rational::zero) += p;
        }
        let (atoms, probs): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
        let sampler = Sampler::build(&probs);
        Ok(Self {
            atoms,
            probs,
            sampler,
        })
    }

    /// Uniform signs, `P(ξ = ±1) = 1/2`.
    pub fn rademacher() -> Self {
        Self::new(
            vec![rational::int(-1), rational::int(1)],
            vec![rational::frac(1, 2), rational::frac(1, 2)],
        )
        .expect("valid")
    }

    /// `P(ξ = 1) = p`, `P(ξ = 0) = 1 - p`; the edge law of `G(n, p)`.
    pub fn bernoulli(p: Rational) -> Result<Self, DistError> {
        if p.is_one() {
            return Ok(Self::point(rational::int(1)));
        }
        if p.is_zero() {
            return Ok(Self::point(rational::int(0)));
        }
        Self::new(
            vec![rational::int(0), rational::int(1)],
            vec![Rational::one() - &p, p],
        )
    }

    /// Deterministic variable at `value`.
    pub fn point(value: Rational) -> Self {
        Self::new(vec![value], vec![Rational::one()]).expect("valid")
    }

    pub fn atoms(&self) -> &[Rational] {
        &self.atoms
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.atoms.iter().zip(self.probs.iter())
    }

    pub fn max_prob(&self) -> &Rational {
        self.probs.iter().max().expect("nonempty")
    }

    /// `μ = 1 - max_x P(ξ = x)`; positive iff the law is non-degenerate.
    pub fn nontriviality_margin(&self) -> Rational {
        Rational::one() - self.max_prob()
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Draws the index of an atom.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Rational {
        &self.atoms[self.sample_index(rng)]
    }
}

/// Inverse-CDF sampler. When the common denominator of the masses fits in a
/// `u64` the draw is exact (uniform integer below the denominator); otherwise
/// it falls back to comparing a uniform float against float cumulative sums.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Sampler {
    Exact { denom: u64, cumulative: Vec<u64> },
    Float { cumulative_bits: Vec<u64> },
}

impl Sampler {
    fn build(probs: &[Rational]) -> Self {
        let denom = rational::common_denominator(probs);
        if let Some(d) = denom.to_u64() {
            let mut acc = 0u64;
            let cumulative = probs
                .iter()
                .map(|p| {
                    let scaled: BigInt = p.numer() * (&denom / p.denom());
                    acc += scaled.to_u64().expect("bounded by denominator");
                    acc
                })
                .collect();
            return Sampler::Exact {
                denom: d,
                cumulative,
            };
        }
        let mut acc = 0.0f64;
        let cumulative_bits = probs
            .iter()
            .map(|p| {
                acc += rational::to_f64(p);
                acc.to_bits()
            })
            .collect();
        Sampler::Float { cumulative_bits }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Sampler::Exact { denom, cumulative } => {
                if cumulative.len() == 1 {
                    return 0;
                }
                let u = rng.random_range(0..*denom);
                cumulative.partition_point(|&c| c <= u)
            }
            Sampler::Float { cumulative_bits } => {
                let u: f64 = rng.random();
                let idx = cumulative_bits.partition_point(|&c| f64::from_bits(c) <= u);
                idx.min(cumulative_bits.len() - 1)
            }
        }
    }
}

/// On-disk form: `{"atoms": ["-1","1"], "probs": ["1/2","1/2"]}`.
#[derive(Serialize, Deserialize)]
struct DistributionFile {
    #[serde(with = "rational::vec_as_string")]
    atoms: Vec<Rational>,
    #[serde(with = "rational::vec_as_string")]
    probs: Vec<Rational>,
}

impl TryFrom<DistributionFile> for AtomicDistribution {
    type Error = DistError;
    fn try_from(f: DistributionFile) -> Result<Self, DistError> {
        AtomicDistribution::new(f.atoms, f.probs)
    }
}

impl From<AtomicDistribution> for DistributionFile {
    fn from(d: AtomicDistribution) -> Self {
        DistributionFile {
            atoms: d.atoms,
            probs: d.probs,
        }
    }
}
