//! Concentration probabilities `p_ξ(V) = max_x P(Σ ξ_i v_i = x)`.
//!
//! The exact route convolves point masses keyed by the exact value of the
//! partial sum. Because the law is finite the supremum is a maximum over
//! attained sums. The windowed route replaces equality by a window of width
//! `δ` and is what float eigenvectors need; its value is reported together
//! with the window so the surrogate is never mistaken for the exact quantity.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::dist::AtomicDistribution;
use crate::matrix::trial_rng;
use crate::rational::{self, Rational};

/// Default cap on the number of distinct partial sums kept in memory.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;
/// Windowed mode enumerates every assignment up to this many.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 20;
/// Monte Carlo sample count used by [`is_rich`] when enumeration is too big.
pub const DEFAULT_WINDOW_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmallBallError {
    #[error("partial sums have more than {cap} distinct values")]
    SupportCapExceeded { cap: usize },
    #[error("window width must be positive, got {0}")]
    BadWindow(String),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("richness needs A > 0 and n >= 1 (got A = {a}, n = {n})")]
    BadRichnessParams { a: String, n: usize },
}

/// Coefficient vector `V`, either exact or floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightVector {
    Exact(Vec<Rational>),
    Numeric(Vec<f64>),
}

impl WeightVector {
    pub fn len(&self) -> usize {
        match self {
            Self::Exact(v) => v.len(),
            Self::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Self::Exact(v) => v.iter().map(rational::to_f64).collect(),
            Self::Numeric(v) => v.clone(),
        }
    }
}

/// How a windowed probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMethod {
    Enumeration,
    MonteCarlo { trials: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmallBallResult {
    Exact {
        p: Rational,
        atom: Rational,
    },
    /// `p ≈ max_x P(|S - x| ≤ δ/2)` with `center` the maximizing `x`.
    Windowed {
        p: f64,
        center: f64,
        window: f64,
        method: WindowMethod,
    },
}

impl SmallBallResult {
    pub fn p_f64(&self) -> f64 {
        match self {
            Self::Exact { p, .. } => rational::to_f64(p),
            Self::Windowed { p, .. } => *p,
        }
    }

    pub fn exact_p(&self) -> Option<&Rational> {
        match self {
            Self::Exact { p, .. } => Some(p),
            Self::Windowed { .. } => None,
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Self::Exact { .. } => "exact",
            Self::Windowed { .. } => "windowed",
        }
    }

    pub fn window(&self) -> f64 {
        match self {
            Self::Exact { .. } => 0.0,
            Self::Windowed { window, .. } => *window,
        }
    }
}

impl Serialize for SmallBallResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Exact { p, atom } => {
                let mut m = s.serialize_map(Some(3))?;
                m.serialize_entry("p", &rational::format(p))?;
                m.serialize_entry("atom", &rational::format(atom))?;
                m.serialize_entry("mode", "exact")?;
                m.end()
            }
            Self::Windowed {
                p,
                center,
                window,
                method,
            } => {
                let mut m = s.serialize_map(None)?;
                m.serialize_entry("p", p)?;
                m.serialize_entry("atom", center)?;
                m.serialize_entry("mode", "windowed")?;
                m.serialize_entry("window", window)?;
                match method {
                    WindowMethod::Enumeration => m.serialize_entry("method", "enumeration")?,
                    WindowMethod::MonteCarlo { trials } => {
                        m.serialize_entry("method", "monte_carlo")?;
                        m.serialize_entry("trials", trials)?;
                    }
                }
                m.end()
            }
        }
    }
}

/// Exact concentration probability with the default support cap.
pub fn small_ball_exact(v: &[Rational], d: &AtomicDistribution) -> Result<SmallBallResult, SmallBallError> {
    small_ball_exact_capped(v, d, DEFAULT_SUPPORT_CAP)
}

/// Exact concentration probability, failing once more than `cap` distinct
/// partial sums are live.
///
/// Weights and atoms are scaled to integers and masses to integer weights
/// over the common denominator of the probabilities, so the hot loop keys on
/// `i128` and accumulates `u128`; any overflow reruns the convolution over
/// big integers.
pub fn small_ball_exact_capped(
    v: &[Rational],
    d: &AtomicDistribution,
    cap: usize,
) -> Result<SmallBallResult, SmallBallError> {
    let vscale = rational::common_denominator(v.iter());
    let ascale = rational::common_denominator(d.atoms().iter());
    let pscale = rational::common_denominator(d.probs().iter());
    let to_int = |x: &Rational, s: &BigInt| (x * Rational::from_integer(s.clone())).to_integer();
    let weights: Vec<BigInt> = v.iter().map(|x| to_int(x, &vscale)).collect();
    let atoms: Vec<BigInt> = d.atoms().iter().map(|x| to_int(x, &ascale)).collect();
    let masses: Vec<BigInt> = d.probs().iter().map(|x| to_int(x, &pscale)).collect();

    let fast = || -> Option<Result<(BigInt, BigInt), SmallBallError>> {
        let w: Vec<i128> = weights.iter().map(|x| x.to_i128()).collect::<Option<_>>()?;
        let a: Vec<i128> = atoms.iter().map(|x| x.to_i128()).collect::<Option<_>>()?;
        let m: Vec<u128> = masses.iter().map(|x| x.to_u128()).collect::<Option<_>>()?;
        let step = |acc: &HashMap<i128, u128>, wi: i128| -> Option<HashMap<i128, u128>> {
            let mut next = HashMap::with_capacity(acc.len() * a.len());
            for (&s, &mass) in acc {
                for (&ak, &mk) in a.iter().zip(&m) {
                    let key = s.checked_add(wi.checked_mul(ak)?)?;
                    let e = next.entry(key).or_insert(0u128);
                    *e = e.checked_add(mass.checked_mul(mk)?)?;
                }
            }
            Some(next)
        };
        let res = convolve(&w, 0i128, 1u128, cap, step)?;
        Some(res.map(|(k, mass)| (BigInt::from(k), BigInt::from(mass))))
    };
    let (key, mass) = match fast() {
        Some(r) => r?,
        None => {
            let step = |acc: &HashMap<BigInt, BigInt>, wi: &BigInt| -> Option<HashMap<BigInt, BigInt>> {
                let mut next = HashMap::with_capacity(acc.len() * atoms.len());
                for (s, mass) in acc {
                    for (ak, mk) in atoms.iter().zip(&masses) {
                        *next.entry(s + wi * ak).or_insert_with(BigInt::zero) += mass * mk;
                    }
                }
                Some(next)
            };
            let refs: Vec<&BigInt> = weights.iter().collect();
            convolve(&refs, BigInt::zero(), BigInt::one(), cap, |acc, wi| step(acc, wi))
                .expect("big integer arithmetic cannot overflow")?
        }
    };
    let total = num_traits::pow(pscale, v.len());
    let p = Rational::new(mass, total);
    let atom = Rational::new(key, vscale * ascale);
    Ok(SmallBallResult::Exact { p, atom })
}

/// Runs the per-coordinate convolution and picks the heaviest sum: largest
/// mass, then smallest `|x|`, then smallest `x`.
fn convolve<W, K, M, F>(
    weights: &[W],
    zero_key: K,
    unit_mass: M,
    cap: usize,
    mut step: F,
) -> Option<Result<(K, M), SmallBallError>>
where
    W: Clone,
    K: Hash + Eq + Ord + Clone + KeyAbs,
    M: Ord + Clone,
    F: FnMut(&HashMap<K, M>, W) -> Option<HashMap<K, M>>,
{
    let mut acc: HashMap<K, M> = HashMap::from([(zero_key, unit_mass)]);
    for w in weights {
        acc = step(&acc, w.clone())?;
        if acc.len() > cap {
            return Some(Err(SmallBallError::SupportCapExceeded { cap }));
        }
    }
    let best = acc
        .into_iter()
        .max_by(|(ka, ma), (kb, mb)| {
            ma.cmp(mb)
                .then_with(|| kb.key_abs().cmp(&ka.key_abs()))
                .then_with(|| kb.cmp(ka))
        })
        .expect("nonempty");
    Some(Ok(best))
}

trait KeyAbs {
    type Abs: Ord;
    fn key_abs(&self) -> Self::Abs;
}

impl KeyAbs for i128 {
    type Abs = u128;
    fn key_abs(&self) -> u128 {
        self.unsigned_abs()
    }
}

impl KeyAbs for BigInt {
    type Abs = BigInt;
    fn key_abs(&self) -> BigInt {
        self.abs()
    }
}

/// Windowed concentration probability `max_x P(|Σ ξ_i v_i - x| ≤ δ/2)`.
///
/// Enumerates every assignment when there are at most [`EXHAUSTIVE_LIMIT`]
/// of them, otherwise samples `trials` sums from `rng`.
pub fn small_ball_windowed<R: Rng + ?Sized>(
    v: &[f64],
    d: &AtomicDistribution,
    delta: f64,
    trials: usize,
    rng: &mut R,
) -> Result<SmallBallResult, SmallBallError> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(SmallBallError::BadWindow(delta.to_string()));
    }
    if trials == 0 {
        return Err(SmallBallError::NoTrials);
    }
    let atoms: Vec<f64> = d.atoms().iter().map(rational::to_f64).collect();
    let probs: Vec<f64> = d.probs().iter().map(rational::to_f64).collect();
    let assignments = u32::try_from(v.len())
        .ok()
        .and_then(|len| (atoms.len() as u64).checked_pow(len));
    let (mut points, method) = match assignments {
        Some(count) if count <= EXHAUSTIVE_LIMIT => {
            let mut points: Vec<(f64, f64)> = vec![(0.0, 1.0)];
            for &w in v {
                let mut next = Vec::with_capacity(points.len() * atoms.len());
                for &(s, mass) in &points {
                    for (&a, &p) in atoms.iter().zip(&probs) {
                        next.push((s + w * a, mass * p));
                    }
                }
                points = next;
            }
            (points, WindowMethod::Enumeration)
        }
        _ => {
            let mass = 1.0 / trials as f64;
            let points = (0..trials)
                .map(|_| {
                    let s: f64 = v.iter().map(|&w| w * atoms[d.sample_index(rng)]).sum();
                    (s, mass)
                })
                .collect();
            (points, WindowMethod::MonteCarlo { trials })
        }
    };
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (p, center) = best_window(&points, delta);
    Ok(SmallBallResult::Windowed {
        p: p.min(1.0),
        center,
        window: delta,
        method,
    })
}

/// Heaviest closed window `[s_i, s_i + δ]` over sorted `(sum, mass)` points.
fn best_window(points: &[(f64, f64)], delta: f64) -> (f64, f64) {
    let mut best = (0.0f64, 0.0f64);
    let mut right = 0;
    let mut mass = 0.0;
    for left in 0..points.len() {
        if right < left {
            right = left;
            mass = 0.0;
        }
        while right < points.len() && points[right].0 - points[left].0 <= delta {
            mass += points[right].1;
            right += 1;
        }
        if mass > best.0 {
            best = (mass, 0.5 * (points[left].0 + points[right - 1].0));
        }
        mass -= points[left].1;
    }
    best
}

/// Outcome of a richness test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Richness {
    pub rich: bool,
    pub threshold: f64,
    pub result: SmallBallResult,
}

/// `n^(-A)`
pub fn richness_threshold(n: usize, a: f64) -> f64 {
    (n as f64).powf(-a)
}

/// `p ≥ n^(-A)`, exactly when `A` is a small nonnegative integer.
pub fn meets_threshold(p: &Rational, n: usize, a: f64) -> bool {
    if a.fract() == 0.0 && (0.0..=64.0).contains(&a) {
        let bound = num_traits::pow(BigInt::from(n), a as usize);
        return p * Rational::from_integer(bound) >= Rational::one();
    }
    rational::to_f64(p).ln() >= -a * (n as f64).ln()
}

/// Richness of `v` against the threshold `n^(-A)`.
///
/// Callers in this crate pass `n = |V|`. Exact vectors ignore `delta`;
/// numeric vectors use the windowed surrogate with width `delta`, sampling
/// deterministically when enumeration is out of reach.
pub fn is_rich(
    v: &WeightVector,
    d: &AtomicDistribution,
    a: f64,
    n: usize,
    delta: f64,
) -> Result<Richness, SmallBallError> {
    if a.is_nan() || a <= 0.0 || n == 0 {
        return Err(SmallBallError::BadRichnessParams {
            a: a.to_string(),
            n,
        });
    }
    let threshold = richness_threshold(n, a);
    let (rich, result) = match v {
        WeightVector::Exact(values) => {
            let result = small_ball_exact(values, d)?;
            let rich = meets_threshold(result.exact_p().expect("exact"), n, a);
            (rich, result)
        }
        WeightVector::Numeric(values) => {
            let mut rng = trial_rng(0, 0);
            let result = small_ball_windowed(values, d, delta, DEFAULT_WINDOW_TRIALS, &mut rng)?;
            (result.p_f64() >= threshold, result)
        }
    };
    Ok(Richness {
        rich,
        threshold,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn p_of(v: &[Rational], d: &AtomicDistribution) -> Rational {
        small_ball_exact(v, d).unwrap().exact_p().unwrap().clone()
    }

    #[test]
    fn exact_examples() {
        let r = AtomicDistribution::rademacher();
        assert_eq!(
            small_ball_exact(&[], &r).unwrap(),
            SmallBallResult::Exact { p: int(1), atom: int(0) }
        );
        assert_eq!(
            small_ball_exact(&ints(&[1, 1, 1, 1]), &r).unwrap(),
            SmallBallResult::Exact { p: frac(3, 8), atom: int(0) }
        );
        assert_eq!(p_of(&ints(&[1, 2, 4, 8]), &r), frac(1, 16));
        let json = serde_json::to_string(&small_ball_exact(&ints(&[1, 1, 1, 1]), &r).unwrap()).unwrap();
        assert_eq!(json, r#"{"p":"3/8","atom":"0","mode":"exact"}"#);
    }

    #[test]
    fn exact_with_rational_weights_and_atoms() {
        let d = AtomicDistribution::new(vec![frac(-1, 2), frac(1, 3)], vec![frac(1, 4), frac(3, 4)]).unwrap();
        // sums of (1/2)ξ1 + (1/2)ξ2: -1/2 (1/16), -1/12 (6/16), 1/3 (9/16)
        let res = small_ball_exact(&[frac(1, 2), frac(1, 2)], &d).unwrap();
        assert_eq!(res, SmallBallResult::Exact { p: frac(9, 16), atom: frac(1, 3) });
    }

    #[test]
    fn bigint_fallback() {
        let huge = Rational::from_integer(BigInt::from(10).pow(40));
        let r = AtomicDistribution::rademacher();
        assert_eq!(p_of(&[huge.clone(), huge], &r), frac(1, 2));
    }

    #[test]
    fn cap_is_enforced() {
        let r = AtomicDistribution::rademacher();
        let err = small_ball_exact_capped(&ints(&[1, 2, 4, 8]), &r, 8).unwrap_err();
        assert_eq!(err, SmallBallError::SupportCapExceeded { cap: 8 });
    }

    #[test]
    fn windowed_examples() {
        let r = AtomicDistribution::rademacher();
        let mut rng = trial_rng(1, 0);
        let res = small_ball_windowed(&[1.0, 1.0], &r, 1e-9, 100, &mut rng).unwrap();
        assert_eq!(res.p_f64(), 0.5);
        let res = small_ball_windowed(&[1.0, std::f64::consts::SQRT_2], &r, 1e-9, 100, &mut rng).unwrap();
        assert_eq!(res.p_f64(), 0.25);
        let res = small_ball_windowed(&[0.3, -1.7, 2.2], &r, 100.0, 100, &mut rng).unwrap();
        assert_eq!(res.p_f64(), 1.0);
        assert!(small_ball_windowed(&[1.0], &r, 0.0, 100, &mut rng).is_err());
        assert!(small_ball_windowed(&[1.0], &r, 1.0, 0, &mut rng).is_err());
    }

    #[test]
    fn windowed_monte_carlo_path() {
        let r = AtomicDistribution::rademacher();
        let mut rng = trial_rng(5, 0);
        let v = vec![1.0; 24];
        let res = small_ball_windowed(&v, &r, 1e-9, 20_000, &mut rng).unwrap();
        let SmallBallResult::Windowed { method, p, .. } = res else { unreachable!() };
        assert_eq!(method, WindowMethod::MonteCarlo { trials: 20_000 });
        // C(24,12)/2^24 ≈ 0.1612
        assert!((p - 0.16118).abs() < 0.02, "{p}");
    }

    #[test]
    fn richness_examples() {
        let r = AtomicDistribution::rademacher();
        let rich = is_rich(&WeightVector::Exact(ints(&[1, 1, 1, 1])), &r, 1.0, 4, 0.0).unwrap();
        assert!(rich.rich);
        let poor = is_rich(&WeightVector::Exact(ints(&[1, 2, 4, 8])), &r, 1.0, 4, 0.0).unwrap();
        assert!(!poor.rich);
        let zero = is_rich(&WeightVector::Exact(ints(&[0, 0, 0])), &r, 7.5, 3, 0.0).unwrap();
        assert!(zero.rich);
        assert_eq!(zero.result.exact_p(), Some(&int(1)));
        assert!(is_rich(&WeightVector::Numeric(vec![1.0, 1.0]), &r, 1.0, 2, 1e-9).unwrap().rich);
        assert!(is_rich(&WeightVector::Exact(ints(&[1])), &r, 0.0, 1, 0.0).is_err());
    }

    #[test]
    fn threshold_boundary_is_exact() {
        // 1/4 = 4^(-1) exactly
        assert!(meets_threshold(&frac(1, 4), 4, 1.0));
        assert!(!meets_threshold(&frac(1, 4), 4, 0.999_999));
        assert!(meets_threshold(&frac(1, 4), 4, 1.000_001));
        assert!(!meets_threshold(&frac(63, 256), 4, 1.0));
    }
}
