//! Deciding whether a symmetric matrix has simple spectrum.
//!
//! Two independent routes are provided. The exact route computes the
//! characteristic polynomial `det(xI - M)` over the integers and tests it for
//! squarefreeness; for a real symmetric matrix algebraic and geometric
//! multiplicities agree, so the spectrum is simple exactly when
//! `gcd(p, p')` is constant. The numeric route diagonalizes a float copy by
//! cyclic Jacobi rotations and clusters nearby eigenvalues.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::SymmetricMatrix;
use crate::poly::{self, RatPoly};
use crate::rational::{self, Rational};

/// Jacobi sweep limit.
pub const MAX_SWEEPS: usize = 50;
/// Default relative off-diagonal tolerance for [`eigen_decompose`].
pub const DEFAULT_JACOBI_TOL: f64 = 1e-13;
/// Default eigenvalue cluster threshold, relative to `max(1, spectral diameter)`.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Monic characteristic polynomial `det(xI - M)`, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharPoly(RatPoly);

impl CharPoly {
    pub fn poly(&self) -> &RatPoly {
        &self.0
    }

    pub fn coeffs(&self) -> &[Rational] {
        self.0.coeffs()
    }

    pub fn degree(&self) -> usize {
        self.0.degree().expect("monic")
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_integer())
    }
}

/// Characteristic polynomial by the Faddeev–LeVerrier trace recursion.
///
/// Denominators are cleared first (`B = L·M`), so the recursion runs over
/// the integers, where each division by `k` is exact; the coefficients are
/// then rescaled by powers of `L`. The recursion is attempted in checked
/// `i128` arithmetic and restarts over `BigInt` on overflow. Coefficient size
/// grows like `n · log(n · max|m_ij|)` bits and the work is `O(n^4)`.
pub fn char_poly(m: &SymmetricMatrix) -> CharPoly {
    let n = m.n();
    let denom = rational::common_denominator(m.entries().iter());
    let scaled: Vec<BigInt> = m
        .entries()
        .iter()
        .map(|e| (e * Rational::from_integer(denom.clone())).to_integer())
        .collect();
    let int_coeffs = scaled
        .iter()
        .map(|x| x.to_i128())
        .collect::<Option<Vec<_>>>()
        .and_then(|small| faddeev_i128(n, &small))
        .unwrap_or_else(|| faddeev_bigint(n, &scaled));
    // c_k(M) = c_k(B) / L^(n-k)
    let mut coeffs = vec![Rational::zero(); n + 1];
    let mut power = BigInt::one();
    for k in (0..=n).rev() {
        coeffs[k] = Rational::new(int_coeffs[k].clone(), power.clone());
        power *= &denom;
    }
    CharPoly(RatPoly::new(coeffs))
}

fn faddeev_i128(n: usize, a: &[i128]) -> Option<Vec<BigInt>> {
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    // N_0 = I
    let mut aux = vec![0i128; n * n];
    for i in 0..n {
        aux[i * n + i] = 1;
    }
    let mut prod = vec![0i128; n * n];
    for k in 1..=n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0i128;
                for l in 0..n {
                    acc = acc.checked_add(a[i * n + l].checked_mul(aux[l * n + j])?)?;
                }
                prod[i * n + j] = acc;
            }
        }
        let mut tr = 0i128;
        for i in 0..n {
            tr = tr.checked_add(prod[i * n + i])?;
        }
        let k128 = k as i128;
        debug_assert_eq!(tr % k128, 0);
        let c = (tr / k128).checked_neg()?;
        coeffs[n - k] = c;
        std::mem::swap(&mut aux, &mut prod);
        for i in 0..n {
            aux[i * n + i] = aux[i * n + i].checked_add(c)?;
        }
    }
    Some(coeffs.into_iter().map(BigInt::from).collect())
}

fn faddeev_bigint(n: usize, a: &[BigInt]) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut aux = vec![BigInt::zero(); n * n];
    for i in 0..n {
        aux[i * n + i] = BigInt::one();
    }
    let mut prod = vec![BigInt::zero(); n * n];
    for k in 1..=n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for l in 0..n {
                    if !a[i * n + l].is_zero() {
                        acc += &a[i * n + l] * &aux[l * n + j];
                    }
                }
                prod[i * n + j] = acc;
            }
        }
        let tr: BigInt = (0..n).map(|i| &prod[i * n + i]).sum();
        let kb = BigInt::from(k);
        debug_assert!((&tr % &kb).is_zero());
        let c = -(tr / kb);
        std::mem::swap(&mut aux, &mut prod);
        for i in 0..n {
            aux[i * n + i] += &c;
        }
        coeffs[n - k] = c;
    }
    coeffs
}

/// Outcome of a simplicity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum SimplicityVerdict {
    SimpleExact,
    /// `certificate` is the monic `gcd(p, p')`, of degree at least one; its
    /// roots are exactly the repeated eigenvalues.
    NotSimpleExact { certificate: RatPoly },
    SimpleNumeric { min_gap: Option<f64> },
    NotSimpleNumeric { min_gap: Option<f64> },
    /// The numeric screen disagreed with the exact verdict, which wins.
    Ambiguous {
        exact: Box<SimplicityVerdict>,
        min_gap: Option<f64>,
    },
}

impl SimplicityVerdict {
    pub fn is_simple(&self) -> bool {
        match self {
            Self::SimpleExact | Self::SimpleNumeric { .. } => true,
            Self::NotSimpleExact { .. } | Self::NotSimpleNumeric { .. } => false,
            Self::Ambiguous { exact, .. } => exact.is_simple(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::SimpleExact => "SimpleExact",
            Self::NotSimpleExact { .. } => "NotSimpleExact",
            Self::SimpleNumeric { .. } => "SimpleNumeric",
            Self::NotSimpleNumeric { .. } => "NotSimpleNumeric",
            Self::Ambiguous { .. } => "Ambiguous",
        }
    }
}

/// Exact simplicity: squarefreeness of the characteristic polynomial.
///
/// A modular screen modulo `2^61 - 1` settles the common squarefree case
/// cheaply (the polynomial is monic, so a squarefree reduction is a proof);
/// anything else goes through the primitive remainder sequence.
pub fn simplicity_exact(m: &SymmetricMatrix) -> SimplicityVerdict {
    let p = char_poly(m);
    let f = p.poly().to_primitive_integer();
    if poly::squarefree_mod_prime(&f, poly::SCREEN_PRIME) {
        return SimplicityVerdict::SimpleExact;
    }
    squarefree_verdict(&f)
}

/// Exact verdict through the remainder sequence only, without the screen.
pub fn simplicity_exact_prs(m: &SymmetricMatrix) -> SimplicityVerdict {
    squarefree_verdict(&char_poly(m).poly().to_primitive_integer())
}

fn squarefree_verdict(f: &[BigInt]) -> SimplicityVerdict {
    let g = poly::primitive_gcd(f, &poly::derivative_int(f));
    if g.len() <= 1 {
        SimplicityVerdict::SimpleExact
    } else {
        SimplicityVerdict::NotSimpleExact {
            certificate: RatPoly::from_bigints(&g).monic(),
        }
    }
}

/// Full float eigendecomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `max_k ‖M v_k - λ_k v_k‖₂`.
    pub residual: f64,
    pub sweeps: usize,
}

impl NumericSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = self.eigenvectors[a]
                    .iter()
                    .zip(&self.eigenvectors[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn diameter(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

/// Cyclic Jacobi diagonalization of a float copy of `m`.
///
/// Sweeps until the off-diagonal Frobenius norm is at most
/// `tol · ‖M‖_F`, or fails after [`MAX_SWEEPS`].
pub fn eigen_decompose(m: &SymmetricMatrix, tol: f64) -> Result<NumericSpectrum, SpectrumError> {
    jacobi(m.n(), &m.to_f64(), tol)
}

/// Jacobi on a row-major float matrix (assumed symmetric).
pub fn jacobi(n: usize, input: &[f64], tol: f64) -> Result<NumericSpectrum, SpectrumError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(SpectrumError::BadTolerance(tol));
    }
    let mut a = input.to_vec();
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = tol * frob;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(SpectrumError::NotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    let mut residual = 0.0f64;
    for (lambda, vec) in eigenvalues.iter().zip(&eigenvectors) {
        let mut r2 = 0.0;
        for i in 0..n {
            let mv: f64 = (0..n).map(|j| input[i * n + j] * vec[j]).sum();
            r2 += (mv - lambda * vec[i]).powi(2);
        }
        residual = residual.max(r2.sqrt());
    }
    Ok(NumericSpectrum {
        eigenvalues,
        eigenvectors,
        residual,
        sweeps,
    })
}

/// Maximal runs of sorted eigenvalues whose consecutive gaps are below a
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clusters {
    /// Index ranges into the ascending eigenvalue list.
    pub clusters: Vec<std::ops::Range<usize>>,
    /// Smallest consecutive gap; `None` for a 1×1 spectrum.
    pub min_gap: Option<f64>,
}

impl Clusters {
    pub fn all_singletons(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }

    pub fn verdict(&self) -> SimplicityVerdict {
        if self.all_singletons() {
            SimplicityVerdict::SimpleNumeric {
                min_gap: self.min_gap,
            }
        } else {
            SimplicityVerdict::NotSimpleNumeric {
                min_gap: self.min_gap,
            }
        }
    }
}

/// Clusters `eigenvalues` (ascending) with the absolute threshold `gap_tol`.
pub fn cluster_values(eigenvalues: &[f64], gap_tol: f64) -> Clusters {
    let mut clusters = Vec::new();
    let mut min_gap: Option<f64> = None;
    let mut start = 0;
    for k in 1..eigenvalues.len() {
        let gap = eigenvalues[k] - eigenvalues[k - 1];
        min_gap = Some(min_gap.map_or(gap, |g| g.min(gap)));
        if gap >= gap_tol {
            clusters.push(start..k);
            start = k;
        }
    }
    if !eigenvalues.is_empty() {
        clusters.push(start..eigenvalues.len());
    }
    Clusters { clusters, min_gap }
}

pub fn multiplicity_clusters(s: &NumericSpectrum, gap_tol: f64) -> Clusters {
    cluster_values(&s.eigenvalues, gap_tol)
}

/// Threshold actually used by the default numeric screen.
pub fn scaled_gap_tol(s: &NumericSpectrum, gap_tol: f64) -> f64 {
    gap_tol * s.diameter().max(1.0)
}

/// Numeric verdict with [`DEFAULT_GAP_TOL`] scaled by the spectral diameter.
pub fn simplicity_numeric(m: &SymmetricMatrix) -> Result<(NumericSpectrum, SimplicityVerdict), SpectrumError> {
    let s = eigen_decompose(m, DEFAULT_JACOBI_TOL)?;
    let verdict = multiplicity_clusters(&s, scaled_gap_tol(&s, DEFAULT_GAP_TOL)).verdict();
    Ok((s, verdict))
}

/// Combines both routes; on disagreement the exact verdict is kept inside
/// an [`SimplicityVerdict::Ambiguous`] wrapper.
pub fn reconcile(exact: SimplicityVerdict, numeric: &SimplicityVerdict) -> SimplicityVerdict {
    let min_gap = match numeric {
        SimplicityVerdict::SimpleNumeric { min_gap } | SimplicityVerdict::NotSimpleNumeric { min_gap } => *min_gap,
        _ => None,
    };
    if exact.is_simple() == numeric.is_simple() {
        exact
    } else {
        SimplicityVerdict::Ambiguous {
            exact: Box::new(exact),
            min_gap,
        }
    }
}
