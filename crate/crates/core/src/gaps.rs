//! Symmetric generalized arithmetic progressions
//! `P = { m_1 g_1 + … + m_r g_r : |m_i| ≤ M_i }`.
//!
//! A GAP is the image of the integer box `B = { m : |m_i| ≤ ⌊M_i⌋ }` under
//! `Φ(m) = Σ m_i g_i`. Membership, properness and the full-rank reduction are
//! all decided by walking the box, so every operation takes an explicit cap
//! on the box size and fails rather than running away.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

/// Default cap on box sizes walked by enumeration.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GapError {
    #[error("{generators} generators but {dims} dimensions")]
    RankMismatch { generators: usize, dims: usize },
    #[error("dimension {0} is negative")]
    NegativeDimension(String),
    #[error("GAP volume {volume} exceeds the enumeration cap {cap}")]
    CapExceeded { volume: String, cap: u64 },
    #[error("dimension {0} is too large to enumerate")]
    DimensionTooLarge(String),
    #[error("no rank-reducing substitution preserves the intersection (rank {rank}, Σ spans {span})")]
    IntersectionNotPreserved { rank: usize, span: usize },
}

/// Symmetric GAP with exact generators and dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GapFile", into = "GapFile")]
pub struct Gap {
    generators: Vec<Rational>,
    dims: Vec<Rational>,
}

/// Integer box `{ m ∈ ℤ^r : |m_i| ≤ N_i }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    pub bounds: Vec<i64>,
}

impl LatticeBox {
    pub fn volume(&self) -> BigUint {
        self.bounds
            .iter()
            .map(|&b| BigUint::from(2 * b as u64 + 1))
            .product()
    }

    /// Box points in lexicographic order, first coordinate slowest.
    pub fn points(&self) -> BoxPoints<'_> {
        BoxPoints {
            bounds: &self.bounds,
            current: Some(self.bounds.iter().map(|b| -b).collect()),
        }
    }
}

pub struct BoxPoints<'a> {
    bounds: &'a [i64],
    current: Option<Vec<i64>>,
}

impl Iterator for BoxPoints<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut i = next.len();
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if next[i] < self.bounds[i] {
                next[i] += 1;
                break true;
            }
            next[i] = -self.bounds[i];
        };
        if advanced {
            self.current = Some(next);
        }
        Some(out)
    }
}

impl Gap {
    pub fn new(generators: Vec<Rational>, dims: Vec<Rational>) -> Result<Self, GapError> {
        if generators.len() != dims.len() {
            return Err(GapError::RankMismatch {
                generators: generators.len(),
                dims: dims.len(),
            });
        }
        if let Some(bad) = dims.iter().find(|m| m.is_negative()) {
            return Err(GapError::NegativeDimension(rational::format(bad)));
        }
        Ok(Self { generators, dims })
    }

    pub fn from_integers(generators: &[i64], dims: &[i64]) -> Result<Self, GapError> {
        Self::new(
            generators.iter().map(|&g| rational::int(g)).collect(),
            dims.iter().map(|&m| rational::int(m)).collect(),
        )
    }

    /// The rank-0 GAP `{0}`.
    pub fn trivial() -> Self {
        Self {
            generators: Vec::new(),
            dims: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Rational] {
        &self.generators
    }

    pub fn dims(&self) -> &[Rational] {
        &self.dims
    }

    pub fn lattice_box(&self) -> Result<LatticeBox, GapError> {
        let bounds = self
            .dims
            .iter()
            .map(|m| rational::floor_to_i64(m).ok_or_else(|| GapError::DimensionTooLarge(rational::format(m))))
            .collect::<Result<_, _>>()?;
        Ok(LatticeBox { bounds })
    }

    /// `∏ (2⌊M_i⌋ + 1)`, which is 1 for the trivial GAP.
    pub fn volume(&self) -> BigUint {
        self.dims
            .iter()
            .map(|m| BigUint::from(2u32) * m.floor().to_integer().magnitude() + BigUint::one())
            .product()
    }

    pub fn volume_f64(&self) -> f64 {
        self.volume().to_f64().unwrap_or(f64::INFINITY)
    }

    fn checked_box(&self, cap: u64) -> Result<LatticeBox, GapError> {
        let volume = self.volume();
        if volume > BigUint::from(cap) {
            return Err(GapError::CapExceeded {
                volume: volume.to_string(),
                cap,
            });
        }
        self.lattice_box()
    }

    /// `Φ(m)` for a box point.
    pub fn image(&self, m: &[i64]) -> Rational {
        self.generators
            .iter()
            .zip(m)
            .map(|(g, &k)| g * rational::int(k))
            .sum()
    }

    /// Walks the box, yielding `(m, Φ(m) · scale)` with integer images where
    /// `scale` is the common denominator of the generators.
    fn scaled_images(&self, cap: u64) -> Result<(ScaledImages, BigInt), GapError> {
        let lattice = self.checked_box(cap)?;
        let scale = rational::common_denominator(self.generators.iter());
        let gens: Vec<BigInt> = self
            .generators
            .iter()
            .map(|g| (g * Rational::from_integer(scale.clone())).to_integer())
            .collect();
        let out = lattice
            .points()
            .map(|m| {
                let v: BigInt = gens.iter().zip(&m).map(|(g, &k)| g * k).sum();
                (m, v)
            })
            .collect();
        Ok((out, scale))
    }

    /// All box images, collisions retained, in box order.
    pub fn enumerate_members(&self, cap: u64) -> Result<Vec<Rational>, GapError> {
        let (images, scale) = self.scaled_images(cap)?;
        Ok(images
            .into_iter()
            .map(|(_, v)| Rational::new(v, scale.clone()))
            .collect())
    }

    pub fn distinct_members(&self, cap: u64) -> Result<HashSet<Rational>, GapError> {
        Ok(self.enumerate_members(cap)?.into_iter().collect())
    }

    /// `Φ` is injective on the box.
    pub fn is_proper(&self, cap: u64) -> Result<bool, GapError> {
        let (images, _) = self.scaled_images(cap)?;
        let mut seen = HashSet::with_capacity(images.len());
        Ok(images.into_iter().all(|(_, v)| seen.insert(v)))
    }

    pub fn contains(&self, x: &Rational, cap: u64) -> Result<bool, GapError> {
        let (images, scale) = self.scaled_images(cap)?;
        let target = x * Rational::from_integer(scale);
        if !target.is_integer() {
            return Ok(false);
        }
        let target = target.to_integer();
        Ok(images.iter().any(|(_, v)| *v == target))
    }

    /// Membership oracle backed by the distinct member set.
    pub fn membership(&self, cap: u64) -> Result<Membership, GapError> {
        Ok(Membership {
            members: self.distinct_members(cap)?,
        })
    }
}

/// Precomputed member set of a GAP.
#[derive(Debug, Clone)]
pub struct Membership {
    members: HashSet<Rational>,
}

impl Membership {
    pub fn contains(&self, x: &Rational) -> bool {
        self.members.contains(x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// On-disk form `{"generators": ["1","2"], "dims": ["2","1"]}`.
#[derive(Serialize, Deserialize)]
struct GapFile {
    #[serde(with = "rational::vec_as_string")]
    generators: Vec<Rational>,
    #[serde(with = "rational::vec_as_string")]
    dims: Vec<Rational>,
}

impl TryFrom<GapFile> for Gap {
    type Error = GapError;
    fn try_from(f: GapFile) -> Result<Self, GapError> {
        Gap::new(f.generators, f.dims)
    }
}

impl From<Gap> for GapFile {
    fn from(g: Gap) -> Self {
        GapFile {
            generators: g.generators,
            dims: g.dims,
        }
    }
}

/// Incremental reduced row echelon form over ℚ.
#[derive(Debug, Default)]
struct Echelon {
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl Echelon {
    /// Adds `v` to the span; returns whether the rank grew.
    fn insert(&mut self, v: &[Rational]) -> bool {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, r) in row.iter_mut().zip(&v) {
                    *x -= &f * r;
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Basis of `{ a : a · row = 0 for all rows }`, one vector per free column.
    fn null_space(&self, dim: usize) -> Vec<Vec<Rational>> {
        (0..dim)
            .filter(|c| !self.pivots.contains(c))
            .map(|free| {
                let mut a = vec![Rational::zero(); dim];
                a[free] = Rational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    a[p] = -row[free].clone();
                }
                a
            })
            .collect()
    }
}

/// Box points with their images times the common denominator.
type ScaledImages = Vec<(Vec<i64>, BigInt)>;

/// Result of [`full_rank_reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub gap: Gap,
    /// Rank before each substitution followed by the final rank.
    pub ranks: Vec<usize>,
}

/// Box points of `p_i` whose image lies in `p` (the set Σ).
pub fn sigma(p_i: &Gap, p: &Membership, cap: u64) -> Result<Vec<Vec<i64>>, GapError> {
    let lattice = p_i.checked_box(cap)?;
    Ok(lattice.points().filter(|m| p.contains(&p_i.image(m))).collect())
}

/// Replaces `p_i` by a GAP of full rank in `p` with the same intersection.
///
/// While Σ fails to span, pick a normal `a` of a hyperplane containing Σ and
/// a coordinate `k` with `a_k ≠ 0`, so that `m_k = Σ_{j≠k} c_j m_j` on Σ with
/// `c_j = -a_j / a_k`; then `w_j ← w_j + c_j w_k` for `j ≠ k` and `w_k` is
/// dropped. Every point of `p_i ∩ p` stays representable, so the new
/// intersection contains the old one, but the reverse inclusion can fail (a
/// fractional `c_j` lets the new box reach values the old one could not).
/// Candidates are therefore tried in a fixed order (null-space basis vectors
/// in order, coordinates from the highest index down) and the first whose
/// intersection with `p` is verified equal by enumeration is taken.
///
/// Σ always contains the origin, so the degenerate case is Σ = {0}, which
/// reduces all the way to the trivial GAP.
pub fn full_rank_reduce(p_i: &Gap, p: &Gap, cap: u64) -> Result<Reduction, GapError> {
    let target = p.membership(cap)?;
    let mut current = p_i.clone();
    let mut ranks = vec![current.rank()];
    loop {
        let d = current.rank();
        if d == 0 {
            return Ok(Reduction { gap: current, ranks });
        }
        let points = sigma(&current, &target, cap)?;
        let mut echelon = Echelon::default();
        for m in &points {
            let row: Vec<Rational> = m.iter().map(|&x| rational::int(x)).collect();
            if echelon.insert(&row) && echelon.rank() == d {
                break;
            }
        }
        if echelon.rank() == d {
            return Ok(Reduction { gap: current, ranks });
        }
        let before = intersection(&current, &target, cap)?;
        let mut chosen = None;
        'search: for normal in echelon.null_space(d) {
            for k in (0..d).rev() {
                if normal[k].is_zero() {
                    continue;
                }
                let candidate = substitute(&current, &normal, k);
                if intersection(&candidate, &target, cap)? == before {
                    chosen = Some(candidate);
                    break 'search;
                }
            }
        }
        let Some(next) = chosen else {
            return Err(GapError::IntersectionNotPreserved {
                rank: d,
                span: echelon.rank(),
            });
        };
        current = next;
        ranks.push(current.rank());
    }
}

fn substitute(gap: &Gap, normal: &[Rational], k: usize) -> Gap {
    let wk = &gap.generators[k];
    let mut generators = Vec::with_capacity(gap.rank() - 1);
    let mut dims = Vec::with_capacity(gap.rank() - 1);
    for j in 0..gap.rank() {
        if j == k {
            continue;
        }
        let c = -(&normal[j] / &normal[k]);
        generators.push(&gap.generators[j] + c * wk);
        dims.push(gap.dims[j].clone());
    }
    Gap { generators, dims }
}

/// Distinct members of `gap` that lie in the target.
pub fn intersection(gap: &Gap, target: &Membership, cap: u64) -> Result<HashSet<Rational>, GapError> {
    Ok(gap
        .distinct_members(cap)?
        .into_iter()
        .filter(|x| target.contains(x))
        .collect())
}
