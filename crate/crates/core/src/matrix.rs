//! Exact symmetric matrices, random ensembles and the last-row/column split.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::AtomicDistribution;
use crate::rational::{self, Rational, RationalValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix dimension must be positive")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    Ragged { row: usize, len: usize, n: usize },
    #[error("entries ({i},{j}) and ({j},{i}) differ")]
    NotSymmetric { i: usize, j: usize },
    #[error("graph index {index} out of range for n = {n}")]
    IndexOutOfRange { n: usize, index: u64 },
    #[error("n = {n} has too many vertex pairs to index with 64 bits")]
    TooLarge { n: usize },
    #[error("minor decomposition needs n >= 2, got {0}")]
    TooSmallToSplit(usize),
    #[error("declared n = {declared} but {rows} rows given")]
    DimensionMismatch { declared: usize, rows: usize },
    #[error("bad adjacency text: {0}")]
    Text(String),
}

/// Real symmetric `n × n` matrix with exact rational entries (row-major).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl SymmetricMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::Ragged {
                    row,
                    len: r.len(),
                    n,
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(MatrixError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rational::int(x)).collect())
                .collect(),
        )
    }

    /// Builds the matrix from its upper triangle; `f(i, j)` is called for `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                entries[j * n + i] = v.clone();
                entries[i * n + j] = v;
            }
        }
        Self { n, entries }
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let n = values.len();
        Self::from_upper_fn(n, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::from_upper_fn(n, |_, _| Rational::zero())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_integer(&self) -> bool {
        self.entries.iter().all(|e| e.is_integer())
    }

    /// Integer entries as `i64`, if every entry is an integer in range.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries
            .iter()
            .map(|e| {
                if e.is_integer() {
                    e.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }

    /// Row-major float copy.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational::to_f64).collect()
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.to_f64().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `P M Pᵀ` where vertex `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut entries = vec![Rational::zero(); self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                entries[perm[i] * self.n + perm[j]] = self.get(i, j).clone();
            }
        }
        Self { n: self.n, entries }
    }

    /// Splits off the last row and column: `M = [[minor, x], [xᵀ, corner]]`.
    pub fn minor_decompose(&self) -> Result<MinorSplit, MatrixError> {
        if self.n < 2 {
            return Err(MatrixError::TooSmallToSplit(self.n));
        }
        let m = self.n - 1;
        let minor = SymmetricMatrix::from_upper_fn(m, |i, j| self.get(i, j).clone());
        let x = (0..m).map(|i| self.get(i, m).clone()).collect();
        Ok(MinorSplit {
            minor,
            x,
            corner: self.get(m, m).clone(),
        })
    }

    /// Parses whitespace-separated integer rows (one row per line).
    pub fn parse_adjacency_text(text: &str) -> Result<Self, MatrixError> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<i64>().map_err(|_| MatrixError::Text(t.to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_integer_rows(&rows)
    }

    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(rational::format).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.iter().map(rational::format).collect())
            .collect();
        f.debug_struct("SymmetricMatrix")
            .field("n", &self.n)
            .field("rows", &rows)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    rows: Vec<Vec<String>>,
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixFile {
            n: self.n,
            rows: self
                .rows()
                .map(|r| r.iter().map(rational::format).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            rows: Vec<Vec<RationalValue>>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.rows.len() != raw.n {
            return Err(serde::de::Error::custom(MatrixError::DimensionMismatch {
                declared: raw.n,
                rows: raw.rows.len(),
            }));
        }
        let rows = raw
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.0).collect())
            .collect();
        SymmetricMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// `(M_{n-1}, X, ξ_nn)` for `M_n = [[M_{n-1}, X], [Xᵀ, ξ_nn]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorSplit {
    pub minor: SymmetricMatrix,
    pub x: Vec<Rational>,
    pub corner: Rational,
}

impl MinorSplit {
    pub fn reassemble(&self) -> SymmetricMatrix {
        let m = self.minor.n();
        SymmetricMatrix::from_upper_fn(m + 1, |i, j| match (i < m, j < m) {
            (true, true) => self.minor.get(i, j).clone(),
            (true, false) => self.x[i].clone(),
            _ => self.corner.clone(),
        })
    }
}

/// Law of the upper-triangular entries and of the (independent) diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub offdiag: AtomicDistribution,
    pub diag: AtomicDistribution,
}

impl EnsembleSpec {
    /// Adjacency matrix of `G(n, 1/2)`: Bernoulli(1/2) edges, zero diagonal.
    pub fn gnp_half() -> Self {
        Self {
            offdiag: AtomicDistribution::bernoulli(rational::frac(1, 2)).expect("valid"),
            diag: AtomicDistribution::point(Rational::zero()),
        }
    }

    pub fn gnp(p: Rational) -> Result<Self, crate::dist::DistError> {
        Ok(Self {
            offdiag: AtomicDistribution::bernoulli(p)?,
            diag: AtomicDistribution::point(Rational::zero()),
        })
    }

    /// Symmetric sign matrix: every entry, diagonal included, is ±1.
    pub fn sign() -> Self {
        Self {
            offdiag: AtomicDistribution::rademacher(),
            diag: AtomicDistribution::rademacher(),
        }
    }

    /// Draws `M_n`; upper-triangular entries row by row, then the diagonal.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SymmetricMatrix, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.offdiag.sample(rng).clone();
                entries[j * n + i] = v.clone();
                entries[i * n + j] = v;
            }
        }
        for i in 0..n {
            entries[i * n + i] = self.diag.sample(rng).clone();
        }
        Ok(SymmetricMatrix { n, entries })
    }

    /// Number of distinct matrices in the support, if it fits in a `u64`.
    pub fn support_size(&self, n: usize) -> Option<u64> {
        let pairs = u32::try_from(n * (n.saturating_sub(1)) / 2).ok()?;
        let off = (self.offdiag.len() as u64).checked_pow(pairs)?;
        let diag = (self.diag.len() as u64).checked_pow(u32::try_from(n).ok()?)?;
        off.checked_mul(diag)
    }
}

/// Free-function form of [`EnsembleSpec::sample`].
pub fn sample_matrix<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    n: usize,
    rng: &mut R,
) -> Result<SymmetricMatrix, MatrixError> {
    spec.sample(n, rng)
}

/// Random stream for trial `trial` of an experiment seeded with `seed`.
///
/// Streams are ChaCha8 keyed by the seed and selected by the trial number, so
/// a trial's matrix depends only on `(seed, trial)` and never on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Number of vertex pairs `n(n-1)/2`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Number of labelled simple graphs on `n` vertices, if it fits in a `u64`.
pub fn graph_count(n: usize) -> Option<u64> {
    let pairs = pair_count(n);
    if pairs >= 64 {
        None
    } else {
        Some(1u64 << pairs)
    }
}

/// Adjacency matrix whose upper-triangular bits, read in row-major order,
/// are the binary digits of `index` (most significant bit first).
pub fn graph_from_index(n: usize, index: u64) -> Result<SymmetricMatrix, MatrixError> {
    if n == 0 {
        return Err(MatrixError::Empty);
    }
    let total = graph_count(n).ok_or(MatrixError::TooLarge { n })?;
    if index >= total {
        return Err(MatrixError::IndexOutOfRange { n, index });
    }
    let pairs = pair_count(n);
    let mut bit = pairs;
    let one = Rational::from_integer(BigInt::from(1));
    let mut entries = vec![Rational::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            bit -= 1;
            if (index >> bit) & 1 == 1 {
                entries[i * n + j] = one.clone();
                entries[j * n + i] = one.clone();
            }
        }
    }
    Ok(SymmetricMatrix { n, entries })
}
