//! Experiments: the orthogonality check behind the eigenvalue to
//! eigenvector reduction, exhaustive graph censuses, Monte Carlo simplicity
//! estimates and rich-eigenvector frequencies.
//!
//! Every randomized experiment draws trial `t` from [`trial_rng`]`(seed, t)`
//! and reduces with integer addition, so results do not depend on the
//! number of worker threads or on scheduling.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::matrix::{graph_count, graph_from_index, trial_rng, EnsembleSpec, MatrixError, SymmetricMatrix};
use crate::rational::{self, Rational};
use crate::smallball::{self, SmallBallError, WeightVector};
use crate::spectrum::{
    eigen_decompose, multiplicity_clusters, scaled_gap_tol, simplicity_exact, SpectrumError, DEFAULT_GAP_TOL,
    DEFAULT_JACOBI_TOL,
};

/// Relative tolerance for `|X·u| ≤ tol ‖X‖ ‖u‖`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Largest `n` accepted by [`exhaustive_census`].
pub const CENSUS_MAX_N: usize = 7;
/// Largest ensemble support enumerated by [`rich_eigenvector_probability`].
pub const SUPPORT_ENUMERATION_LIMIT: u64 = 1 << 20;
/// Two-sided normal quantiles.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("matrix has simple spectrum; the lemma needs a repeated eigenvalue")]
    Simple,
    #[error("n = {0} is too small (need n >= 2)")]
    TooSmall(usize),
    #[error("census supports 2 <= n <= {CENSUS_MAX_N}, got {0}")]
    CensusRange(usize),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("window width must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("ensemble support at n = {n} exceeds {SUPPORT_ENUMERATION_LIMIT} matrices")]
    SupportTooLarge { n: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    SmallBall(#[from] SmallBallError),
}

/// Closest approach of `X` to orthogonality with one eigenspace of the minor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityWitness {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// `|X·w| / (‖X‖ ‖w‖)` for the best vector `w` found in the eigenspace.
    pub residual: f64,
    /// `‖proj_E X‖ / ‖X‖`; zero only when `X` is orthogonal to all of `E`.
    pub projection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub holds: bool,
    pub witness: OrthogonalityWitness,
}

/// Checks that the last column `X` of a matrix with a repeated eigenvalue
/// is orthogonal to some eigenvector of the leading `(n-1)×(n-1)` minor.
///
/// Minor eigenvalues are clustered with the scaled default gap. In a
/// cluster of size at least two the vector
/// `w = (X·u₂) u₁ - (X·u₁) u₂` lies in the eigenspace and is orthogonal to
/// `X`; its residual is computed, not assumed. Singletons are tested
/// directly. The witness is the eigenspace with the smallest residual.
pub fn verify_orthogonality_lemma(m: &SymmetricMatrix) -> Result<LemmaCheck, HarnessError> {
    let n = m.n();
    if n < 2 {
        return Err(HarnessError::TooSmall(n));
    }
    if simplicity_exact(m).is_simple() {
        return Err(HarnessError::Simple);
    }
    let split = m.minor_decompose()?;
    let x: Vec<f64> = split.x.iter().map(rational::to_f64).collect();
    let x_norm = norm(&x);
    let s = eigen_decompose(&split.minor, DEFAULT_JACOBI_TOL)?;
    let clusters = multiplicity_clusters(&s, scaled_gap_tol(&s, DEFAULT_GAP_TOL));

    let mut best: Option<OrthogonalityWitness> = None;
    for range in clusters.clusters {
        let vecs = &s.eigenvectors[range.clone()];
        let dots: Vec<f64> = vecs.iter().map(|u| dot(&x, u)).collect();
        let projection = if x_norm == 0.0 {
            0.0
        } else {
            dots.iter().map(|d| d * d).sum::<f64>().sqrt() / x_norm
        };
        let w: Vec<f64> = if vecs.len() >= 2 {
            let w: Vec<f64> = vecs[0]
                .iter()
                .zip(&vecs[1])
                .map(|(a, b)| dots[1] * a - dots[0] * b)
                .collect();
            if norm(&w) > 0.0 {
                w
            } else {
                vecs[0].clone()
            }
        } else {
            vecs[0].clone()
        };
        let residual = if x_norm == 0.0 {
            0.0
        } else {
            dot(&x, &w).abs() / (x_norm * norm(&w))
        };
        let eigenvalue = s.eigenvalues[range.clone()].iter().sum::<f64>() / range.len() as f64;
        let candidate = OrthogonalityWitness {
            eigenvalue,
            multiplicity: range.len(),
            residual,
            projection,
        };
        if best.as_ref().is_none_or(|b| candidate.residual < b.residual) {
            best = Some(candidate);
        }
    }
    let witness = best.expect("minor has at least one eigenvalue");
    Ok(LemmaCheck {
        holds: witness.residual <= ORTHOGONALITY_TOL,
        witness,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Exact simple/non-simple counts over all labelled graphs on `n` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusResult {
    pub n: usize,
    pub total: u64,
    pub simple_count: u64,
    pub nonsimple_count: u64,
}

impl CensusResult {
    pub fn simple_fraction(&self) -> Rational {
        rational::frac(self.simple_count as i64, self.total as i64)
    }

    pub fn nonsimple_fraction(&self) -> Rational {
        rational::frac(self.nonsimple_count as i64, self.total as i64)
    }
}

fn census_range(n: usize) -> Result<u64, HarnessError> {
    if !(2..=CENSUS_MAX_N).contains(&n) {
        return Err(HarnessError::CensusRange(n));
    }
    Ok(graph_count(n).expect("small n"))
}

/// Classifies every adjacency matrix on `n` vertices by [`simplicity_exact`].
pub fn exhaustive_census(n: usize) -> Result<CensusResult, HarnessError> {
    let total = census_range(n)?;
    let nonsimple: u64 = (0..total)
        .into_par_iter()
        .map(|i| {
            let m = graph_from_index(n, i).expect("index in range");
            u64::from(!simplicity_exact(&m).is_simple())
        })
        .sum();
    Ok(CensusResult {
        n,
        total,
        simple_count: total - nonsimple,
        nonsimple_count: nonsimple,
    })
}

/// Indices (see [`graph_from_index`]) of the graphs on `n` vertices whose
/// spectrum is not simple, ascending.
pub fn nonsimple_graph_indices(n: usize) -> Result<Vec<u64>, HarnessError> {
    let total = census_range(n)?;
    Ok((0..total)
        .into_par_iter()
        .filter(|&i| !simplicity_exact(&graph_from_index(n, i).expect("index in range")).is_simple())
        .collect())
}

/// Binomial proportion summary with a Wilson 95% interval.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub trials: u64,
    pub successes: u64,
    pub point_estimate: f64,
    pub wilson_ci_95: (f64, f64),
    pub seed: u64,
    /// Seconds; excluded from [`ExperimentSummary::same_outcome`].
    pub wall_time: f64,
}

impl ExperimentSummary {
    pub fn new(trials: u64, successes: u64, seed: u64, wall_time: f64) -> Self {
        Self {
            trials,
            successes,
            point_estimate: successes as f64 / trials as f64,
            wilson_ci_95: wilson_interval(successes, trials, Z95),
            seed,
            wall_time,
        }
    }

    /// Bitwise equality of everything except the wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.trials == other.trials
            && self.successes == other.successes
            && self.seed == other.seed
            && self.point_estimate.to_bits() == other.point_estimate.to_bits()
            && self.wilson_ci_95.0.to_bits() == other.wilson_ci_95.0.to_bits()
            && self.wilson_ci_95.1.to_bits() == other.wilson_ci_95.1.to_bits()
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.successes, self.trials, z)
    }
}

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = (center - half).clamp(0.0, 1.0).min(p);
    let hi = (center + half).clamp(0.0, 1.0).max(p);
    (lo, hi)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn count_trials(
    trials: u64,
    threads: Option<usize>,
    trial: impl Fn(u64) -> Result<bool, HarnessError> + Sync + Send,
) -> Result<u64, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    with_threads(threads, || {
        (0..trials)
            .into_par_iter()
            .map(|t| trial(t).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?
}

/// Fraction of sampled matrices whose spectrum is not simple.
pub fn monte_carlo_simplicity(
    spec: &EnsembleSpec,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentSummary, HarnessError> {
    monte_carlo_simplicity_with(spec, n, trials, seed, None)
}

pub fn monte_carlo_simplicity_with(
    spec: &EnsembleSpec,
    n: usize,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<ExperimentSummary, HarnessError> {
    let start = Instant::now();
    let successes = count_trials(trials, threads, |t| {
        let m = spec.sample(n, &mut trial_rng(seed, t))?;
        Ok(!simplicity_exact(&m).is_simple())
    })?;
    Ok(ExperimentSummary::new(trials, successes, seed, start.elapsed().as_secs_f64()))
}

fn has_rich_eigenvector(
    m: &SymmetricMatrix,
    spec: &EnsembleSpec,
    a: f64,
    delta: f64,
) -> Result<bool, HarnessError> {
    let s = eigen_decompose(m, DEFAULT_JACOBI_TOL)?;
    for u in s.eigenvectors {
        let r = smallball::is_rich(&WeightVector::Numeric(u), &spec.offdiag, a, m.n(), delta)?;
        if r.rich {
            return Ok(true);
        }
    }
    Ok(false)
}

fn check_delta(delta: f64) -> Result<(), HarnessError> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::BadDelta(delta))
    }
}

/// Fraction of sampled matrices with at least one eigenvector `u` whose
/// windowed concentration `p_δ(u)` under the off-diagonal law reaches
/// `n^(-A)`.
pub fn rich_eigenvector_frequency(
    spec: &EnsembleSpec,
    n: usize,
    a: f64,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<ExperimentSummary, HarnessError> {
    rich_eigenvector_frequency_with(spec, n, a, delta, trials, seed, None)
}

pub fn rich_eigenvector_frequency_with(
    spec: &EnsembleSpec,
    n: usize,
    a: f64,
    delta: f64,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<ExperimentSummary, HarnessError> {
    check_delta(delta)?;
    let start = Instant::now();
    let successes = count_trials(trials, threads, |t| {
        let m = spec.sample(n, &mut trial_rng(seed, t))?;
        has_rich_eigenvector(&m, spec, a, delta)
    })?;
    Ok(ExperimentSummary::new(trials, successes, seed, start.elapsed().as_secs_f64()))
}

/// Every matrix in the support of `spec` at size `n` with its probability,
/// in the digit order used by [`EnsembleSpec::sample`].
pub fn ensemble_support(spec: &EnsembleSpec, n: usize) -> Result<Vec<(SymmetricMatrix, Rational)>, HarnessError> {
    let size = spec
        .support_size(n)
        .filter(|&s| s <= SUPPORT_ENUMERATION_LIMIT)
        .ok_or(HarnessError::SupportTooLarge { n })?;
    if n == 0 {
        return Err(MatrixError::Empty.into());
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut digits = vec![0usize; pairs.len() + n];
    let radix: Vec<usize> = std::iter::repeat_n(spec.offdiag.len(), pairs.len())
        .chain(std::iter::repeat_n(spec.diag.len(), n))
        .collect();
    loop {
        let mut p = Rational::one();
        let mut upper = vec![vec![Rational::zero(); n]; n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            upper[i][j] = spec.offdiag.atoms()[digits[k]].clone();
            p *= &spec.offdiag.probs()[digits[k]];
        }
        for i in 0..n {
            let k = pairs.len() + i;
            upper[i][i] = spec.diag.atoms()[digits[k]].clone();
            p *= &spec.diag.probs()[digits[k]];
        }
        out.push((SymmetricMatrix::from_upper_fn(n, |i, j| upper[i][j].clone()), p));

        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Exact probability that some eigenvector is rich, by enumerating the
/// ensemble support.
pub fn rich_eigenvector_probability(
    spec: &EnsembleSpec,
    n: usize,
    a: f64,
    delta: f64,
) -> Result<Rational, HarnessError> {
    check_delta(delta)?;
    let mut total = Rational::zero();
    for (m, p) in ensemble_support(spec, n)? {
        if has_rich_eigenvector(&m, spec, a, delta)? {
            total += p;
        }
    }
    Ok(total)
}

/// Least-squares rate `c` in `f(n) ≈ C e^(-c n)` over the points with
/// positive frequency; `None` with fewer than two such points.
pub fn fit_decay_rate(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|&(n, f)| (n as f64, f.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// Exact `k / total` as a rational, for comparisons against census values.
pub fn fraction(k: u64, total: u64) -> Rational {
    Rational::new(BigInt::from(k), BigInt::from(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::AtomicDistribution;
    use crate::rational::{frac, int};

    #[test]
    fn lemma_triangle() {
        let k3 = SymmetricMatrix::from_integer_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        let check = verify_orthogonality_lemma(&k3).unwrap();
        assert!(check.holds);
        assert!((check.witness.eigenvalue + 1.0).abs() < 1e-9);
        assert_eq!(check.witness.multiplicity, 1);
    }

    #[test]
    fn lemma_zero_matrix() {
        let check = verify_orthogonality_lemma(&SymmetricMatrix::zero(3)).unwrap();
        assert!(check.holds);
        assert_eq!(check.witness.multiplicity, 2);
        assert_eq!(check.witness.residual, 0.0);
    }

    #[test]
    fn lemma_rejects_simple() {
        let m = SymmetricMatrix::from_integer_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(verify_orthogonality_lemma(&m), Err(HarnessError::Simple));
        assert_eq!(
            verify_orthogonality_lemma(&SymmetricMatrix::zero(1)),
            Err(HarnessError::TooSmall(1))
        );
    }

    #[test]
    fn lemma_with_clustered_minor() {
        // minor diag(1, 1, 5), X = (2, 2, 0): spectrum {-1, 1, 5, 5}
        let m = SymmetricMatrix::from_integer_rows(&[
            vec![1, 0, 0, 2],
            vec![0, 1, 0, 2],
            vec![0, 0, 5, 0],
            vec![2, 2, 0, 3],
        ])
        .unwrap();
        assert!(!simplicity_exact(&m).is_simple());
        let check = verify_orthogonality_lemma(&m).unwrap();
        assert!(check.holds);
        assert!(check.witness.residual <= ORTHOGONALITY_TOL);
    }

    #[test]
    fn census_small() {
        let c2 = exhaustive_census(2).unwrap();
        assert_eq!((c2.total, c2.simple_count), (2, 1));
        assert_eq!(c2.simple_fraction(), frac(1, 2));
        let c3 = exhaustive_census(3).unwrap();
        assert_eq!((c3.total, c3.simple_count), (8, 6));
        assert_eq!(nonsimple_graph_indices(3).unwrap(), vec![0, 7]);
        assert_eq!(exhaustive_census(1), Err(HarnessError::CensusRange(1)));
        assert_eq!(exhaustive_census(8), Err(HarnessError::CensusRange(8)));
    }

    #[test]
    fn wilson_properties() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(100, 100, Z99);
        assert!(lo < 1.0 && hi == 1.0);
    }

    #[test]
    fn monte_carlo_reproducible() {
        let spec = EnsembleSpec::gnp_half();
        let a = monte_carlo_simplicity_with(&spec, 3, 500, 7, Some(1)).unwrap();
        let b = monte_carlo_simplicity_with(&spec, 3, 500, 7, Some(3)).unwrap();
        assert!(a.same_outcome(&b));
        let (lo, hi) = a.wilson(Z99);
        assert!(lo <= 0.25 && 0.25 <= hi);
        assert_eq!(monte_carlo_simplicity(&spec, 3, 0, 7).unwrap_err(), HarnessError::NoTrials);
    }

    #[test]
    fn degenerate_ensemble_always_repeated() {
        let spec = EnsembleSpec {
            offdiag: AtomicDistribution::point(int(1)),
            diag: AtomicDistribution::point(int(0)),
        };
        let s = monte_carlo_simplicity(&spec, 3, 50, 1).unwrap();
        assert_eq!(s.successes, 50);
    }

    #[test]
    fn support_enumeration_sums_to_one() {
        let support = ensemble_support(&EnsembleSpec::sign(), 2).unwrap();
        assert_eq!(support.len(), 8);
        let total: Rational = support.iter().map(|(_, p)| p.clone()).sum();
        assert_eq!(total, int(1));
        assert!(ensemble_support(&EnsembleSpec::sign(), 6).is_err());
    }

    #[test]
    fn rich_frequency_two_by_two() {
        // every ±1 2×2 matrix has eigenvectors (1, ±1)/√2 or e1, e2, all
        // with concentration at least 1/2 ≥ 2^-2
        let spec = EnsembleSpec::sign();
        assert_eq!(rich_eigenvector_probability(&spec, 2, 2.0, 1e-9).unwrap(), int(1));
        let s = rich_eigenvector_frequency(&spec, 2, 2.0, 1e-9, 64, 3).unwrap();
        assert_eq!(s.successes, 64);
        let again = rich_eigenvector_frequency(&spec, 2, 2.0, 1e-9, 64, 3).unwrap();
        assert!(s.same_outcome(&again));
        assert!(rich_eigenvector_frequency(&spec, 2, 2.0, 0.0, 1, 3).is_err());
    }

    #[test]
    fn decay_fit() {
        let pts: Vec<(usize, f64)> = (4..8).map(|n| (n, 3.0 * (-0.5 * n as f64).exp())).collect();
        assert!((fit_decay_rate(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fit_decay_rate(&[(4, 0.0), (5, 0.1)]), None);
    }
}
