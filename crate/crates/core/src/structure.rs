//! Structure of rich vectors at desk scale.
//!
//! [`find_covering_gap`] searches for a low-rank proper GAP containing all
//! but a few coordinates of a vector. [`refine_structure`] runs the
//! iterative refinement that turns a rich vector `V` into sets
//! `W' ⊂ W ⊂ V`, a level `p ≥ n^(-A)` and a GAP `P ⊇ W` such that `W'` is
//! small and does not concentrate much more than `p`. The constants `d0` and
//! `C0` are user parameters; every report carries certificates that
//! [`verify_report`] re-checks from scratch.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dist::AtomicDistribution;
use crate::gaps::{Gap, GapError, DEFAULT_ENUM_CAP};
use crate::matrix::trial_rng;
use crate::rational::{self, Rational};
use crate::smallball::{self, SmallBallError, WeightVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("vector is not rich: p = {p} < n^(-A) = {threshold:e}")]
    NotRich { p: String, threshold: f64 },
    #[error("no covering GAP found at iteration {}", .0.iteration)]
    CoveringSearchFailed(Box<PartialState>),
    #[error("iteration budget of {budget} exhausted")]
    IterationBudget { budget: usize, state: Box<PartialState> },
    #[error("level p_i fell below n_i^(-A) at iteration {}", .0.iteration)]
    BelowThreshold(Box<PartialState>),
    #[error("covering search budget of {0} box points exhausted")]
    SearchBudget(u64),
    #[error("report failed its own certificates: {0:?}")]
    CertificateFailed(Vec<String>),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    SmallBall(#[from] SmallBallError),
}

/// Where the refinement loop stood when it gave up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialState {
    pub iteration: usize,
    pub indices: Vec<usize>,
    #[serde(with = "rational::as_string")]
    pub p: Rational,
    pub gap: Option<Gap>,
}

/// Enumeration and search limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest GAP volume walked when checking membership.
    pub enum_cap: u64,
    /// Largest number of distinct partial sums in exact small-ball runs.
    pub support_cap: usize,
    /// All `k`-subsets are tried when there are at most this many.
    pub subset_enumeration_limit: u64,
    /// Otherwise this many random subsets are drawn.
    pub subset_samples: usize,
    pub subset_seed: u64,
    /// Number of rank-1 candidates combined into rank ≥ 2 candidates.
    pub top_candidates: usize,
    /// Total box points the rank ≥ 2 covering search may walk.
    pub search_budget: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enum_cap: DEFAULT_ENUM_CAP,
            support_cap: smallball::DEFAULT_SUPPORT_CAP,
            subset_enumeration_limit: 100_000,
            subset_samples: 10_000,
            subset_seed: 0,
            top_candidates: 32,
            search_budget: 50_000_000,
        }
    }
}

/// Parameters of the refinement: richness exponent `A`, `ε ∈ (0, 1/4)`,
/// rank cap `d0` and volume constant `C0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub a: f64,
    pub eps: f64,
    pub d0: usize,
    #[serde(with = "rational::as_string")]
    pub c0: Rational,
    pub caps: Caps,
}

impl StructureParams {
    pub const DEFAULT_D0: usize = 3;
    pub const DEFAULT_C0: i64 = 10;

    pub fn new(a: f64, eps: f64, d0: usize, c0: Rational) -> Result<Self, StructureError> {
        let params = Self {
            a,
            eps,
            d0,
            c0,
            caps: Caps::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_defaults(a: f64, eps: f64) -> Result<Self, StructureError> {
        Self::new(a, eps, Self::DEFAULT_D0, rational::int(Self::DEFAULT_C0))
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        if !(self.eps > 0.0 && self.eps < 0.25) {
            return Err(StructureError::BadParams(format!("eps = {} not in (0, 1/4)", self.eps)));
        }
        if self.a.is_nan() || self.a <= 0.0 {
            return Err(StructureError::BadParams(format!("A = {} must be positive", self.a)));
        }
        if self.d0 == 0 {
            return Err(StructureError::BadParams("d0 must be at least 1".into()));
        }
        if !self.c0.is_positive() {
            return Err(StructureError::BadParams("C0 must be positive".into()));
        }
        Ok(())
    }

    /// `⌈2A/ε⌉ + 2`
    pub fn iteration_budget(&self) -> usize {
        (2.0 * self.a / self.eps).ceil() as usize + 2
    }
}

/// Covering GAP with all but at most `m` coordinates of `v` (with
/// multiplicity), proper, rank ≤ `r_max`, volume ≤ `vol_max`.
pub fn find_covering_gap(
    v: &[Rational],
    m: usize,
    r_max: usize,
    vol_max: u64,
) -> Result<Option<Gap>, StructureError> {
    find_covering_gap_with(v, m, r_max, |_| vol_max, &Caps::default())
}

/// [`find_covering_gap`] with a rank-dependent volume bound.
///
/// Candidate generators are `|v_i|` and `|v_i - v_j|` divided by `1..=6`.
/// Rank 0 is tried first, then every rank-1 candidate with its smallest
/// sufficient dimension; rank `r ≥ 2` combines `r` of the best-covering
/// rank-1 candidates and walks dimension vectors in order of volume. The
/// winner minimizes `(rank, volume, -coverage)`, ties going to the earlier
/// candidate, and is re-verified by enumeration before being returned.
pub fn find_covering_gap_with(
    v: &[Rational],
    m: usize,
    r_max: usize,
    vol_bound: impl Fn(usize) -> u64,
    caps: &Caps,
) -> Result<Option<Gap>, StructureError> {
    let n = v.len();
    let need = n.saturating_sub(m);
    if need == 0 || v.iter().filter(|x| x.is_zero()).count() >= need {
        return Ok(Some(Gap::trivial()));
    }
    if r_max == 0 {
        return Ok(None);
    }

    let candidates = candidate_generators(v);
    let mut ranked: Vec<(usize, &Rational)> = Vec::new();
    let mut best: Option<(u64, usize, Gap)> = None;
    let bound1 = vol_bound(1);
    let max_dim1 = bound1.saturating_sub(1) / 2;
    for g in &candidates {
        let mut coords: Vec<u64> = v
            .iter()
            .filter_map(|x| {
                let q = x / g;
                q.is_integer().then(|| q.to_integer().magnitude().to_u64()).flatten()
            })
            .collect();
        coords.sort_unstable();
        ranked.push((coords.iter().filter(|&&c| c <= max_dim1).count(), g));
        if coords.len() < need {
            continue;
        }
        let dim = coords[need - 1];
        let volume = 2 * dim + 1;
        if volume > bound1 {
            continue;
        }
        let coverage = coords.partition_point(|&c| c <= dim);
        if best.as_ref().is_none_or(|(bv, bc, _)| (volume, std::cmp::Reverse(coverage)) < (*bv, std::cmp::Reverse(*bc))) {
            let gap = Gap::new(vec![g.clone()], vec![Rational::from_integer(BigInt::from(dim))])?;
            best = Some((volume, coverage, gap));
        }
    }
    if let Some((_, _, gap)) = best {
        return verified(v, need, r_max, &vol_bound, gap, caps).map(Some);
    }

    // stable sort keeps the generator order among equal coverage
    ranked.sort_by_key(|r| std::cmp::Reverse(r.0));
    let top: Vec<Rational> = ranked
        .iter()
        .take(caps.top_candidates)
        .map(|(_, g)| (*g).clone())
        .collect();
    let mut budget = caps.search_budget;
    for rank in 2..=r_max.min(top.len()) {
        let bound = vol_bound(rank);
        let dims_list = dimension_vectors(rank, bound);
        let mut best: Option<(u64, usize, Gap)> = None;
        for combo in combinations(top.len(), rank) {
            let gens: Vec<Rational> = combo.iter().map(|&i| top[i].clone()).collect();
            for (volume, dims) in &dims_list {
                if best.as_ref().is_some_and(|(bv, _, _)| volume > bv) {
                    break;
                }
                budget = budget
                    .checked_sub(*volume)
                    .ok_or(StructureError::SearchBudget(caps.search_budget))?;
                let gap = Gap::new(
                    gens.clone(),
                    dims.iter().map(|&d| Rational::from_integer(BigInt::from(d))).collect(),
                )?;
                if let Some(coverage) = proper_coverage(&gap, v, caps.enum_cap)? {
                    if coverage >= need {
                        let better = best.as_ref().is_none_or(|(bv, bc, _)| {
                            (*volume, std::cmp::Reverse(coverage)) < (*bv, std::cmp::Reverse(*bc))
                        });
                        if better {
                            best = Some((*volume, coverage, gap));
                        }
                        break;
                    }
                }
            }
        }
        if let Some((_, _, gap)) = best {
            return verified(v, need, r_max, &vol_bound, gap, caps).map(Some);
        }
    }
    Ok(None)
}

fn verified(
    v: &[Rational],
    need: usize,
    r_max: usize,
    vol_bound: &impl Fn(usize) -> u64,
    gap: Gap,
    caps: &Caps,
) -> Result<Gap, StructureError> {
    let coverage = proper_coverage(&gap, v, caps.enum_cap)?;
    assert!(
        gap.rank() <= r_max
            && gap.volume() <= vol_bound(gap.rank()).into()
            && coverage.is_some_and(|c| c >= need),
        "covering search produced an unverified GAP {gap:?}"
    );
    Ok(gap)
}

/// Number of coordinates of `v` in `gap`, or `None` if `gap` is not proper.
fn proper_coverage(gap: &Gap, v: &[Rational], cap: u64) -> Result<Option<usize>, GapError> {
    let members = gap.enumerate_members(cap)?;
    let mut seen = HashSet::with_capacity(members.len());
    for x in members {
        if !seen.insert(x) {
            return Ok(None);
        }
    }
    Ok(Some(v.iter().filter(|x| seen.contains(*x)).count()))
}

fn candidate_generators(v: &[Rational]) -> Vec<Rational> {
    let mut base: BTreeSet<Rational> = v.iter().filter(|x| !x.is_zero()).map(|x| x.abs()).collect();
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = (&v[i] - &v[j]).abs();
            if !d.is_zero() {
                base.insert(d);
            }
        }
    }
    let mut out = BTreeSet::new();
    for b in &base {
        for k in 1..=6 {
            out.insert(b / rational::int(k));
        }
    }
    out.into_iter().collect()
}

/// Dimension vectors with every entry ≥ 1 and volume ≤ `bound`, sorted by
/// volume then lexicographically.
fn dimension_vectors(rank: usize, bound: u64) -> Vec<(u64, Vec<u64>)> {
    fn rec(rank: usize, bound: u64, prefix: &mut Vec<u64>, vol: u64, out: &mut Vec<(u64, Vec<u64>)>) {
        if prefix.len() == rank {
            out.push((vol, prefix.clone()));
            return;
        }
        let mut d = 1;
        while vol * (2 * d + 1) <= bound {
            prefix.push(d);
            rec(rank, bound, prefix, vol * (2 * d + 1), out);
            prefix.pop();
            d += 1;
        }
    }
    let mut out = Vec::new();
    rec(rank, bound, &mut Vec::new(), 1, &mut out);
    out.sort();
    out
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.take()?;
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in (i + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// One named inequality of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub holds: bool,
    pub value: String,
    pub bound: String,
}

/// Output of [`refine_structure`]: `W' ⊂ W ⊂ V` by index, the level `p`
/// and the GAP `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub w_indices: Vec<usize>,
    pub w_prime_indices: Vec<usize>,
    #[serde(with = "rational::as_string")]
    pub p: Rational,
    pub gap: Gap,
    pub iterations: usize,
    /// Whether the stopping subset search tried every subset.
    pub exhaustive_search: bool,
    pub certificates: BTreeMap<String, Certificate>,
}

/// Result of [`verify_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub certificates: BTreeMap<String, Certificate>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.certificates.values().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<String> {
        self.certificates
            .iter()
            .filter(|(_, c)| !c.holds)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Runs the refinement loop on a rich vector.
///
/// 1. `p_1 = p_ξ(V)`; cover all but `⌊n^(1-ε/2)⌋` coordinates by `P_1` with
///    rank ≤ `d0` and volume ≤ `C0 p_1^(-1) n^(-rank/2)`; `V_1 = V ∩ P_1`.
/// 2. Look for `V'_i ⊂ V_i` of size `⌊ε n_i⌋` with
///    `p_ξ(V'_i) ≤ n_i^(d0 ε) p_i`; if found, stop with
///    `(W', W, p, P) = (V'_i, V_i, p_i, P_i)`.
/// 3. Stop with an error if `p_i < n_i^(-A)`. Otherwise set
///    `p_{i+1} = n_i^(ε/2) p_i` and re-cover `V_i`, leaving out at most
///    `⌊n_i^(1-ε/3)⌋` coordinates, by a GAP of volume at most
///    `min(p_{i+1}^(-1) n_i^(-rank/2), 2 C0 p_{i+1}^(-1) n^(-rank/2))`.
/// 4. Repeat from step 2, at most `⌈2A/ε⌉ + 2` times.
///
/// The factor `n_i^(ε/2)` is applied as the exact dyadic value of its
/// `f64` approximation so `p` stays rational.
pub fn refine_structure(
    v: &[Rational],
    d: &AtomicDistribution,
    params: &StructureParams,
) -> Result<StructureReport, StructureError> {
    params.validate()?;
    let n = v.len();
    let nf = n as f64;
    let richness = smallball::is_rich(&WeightVector::Exact(v.to_vec()), d, params.a, n.max(1), 0.0)?;
    let p1 = richness.result.exact_p().expect("exact mode").clone();
    if !richness.rich || n == 0 {
        return Err(StructureError::NotRich {
            p: rational::format(&p1),
            threshold: richness.threshold,
        });
    }
    let caps = &params.caps;
    let p1f = rational::to_f64(&p1);
    let c0 = rational::to_f64(&params.c0);
    let m1 = nf.powf(1.0 - params.eps / 2.0).floor() as usize;
    let bound1 = |rank: usize| (c0 / p1f * nf.powf(-(rank as f64) / 2.0)).floor() as u64;
    let all: Vec<usize> = (0..n).collect();
    let mut state = PartialState {
        iteration: 1,
        indices: all.clone(),
        p: p1.clone(),
        gap: None,
    };
    let gap = find_covering_gap_with(v, m1, params.d0, bound1, caps)?
        .ok_or_else(|| StructureError::CoveringSearchFailed(Box::new(state.clone())))?;
    state.indices = members_of(&gap, v, &all, caps.enum_cap)?;
    state.gap = Some(gap);

    let budget = params.iteration_budget();
    loop {
        if state.iteration > budget {
            return Err(StructureError::IterationBudget {
                budget,
                state: Box::new(state),
            });
        }
        let n_i = state.indices.len();
        let nif = n_i as f64;
        let k_i = (params.eps * nif).floor() as usize;
        let limit = nif.powf(params.d0 as f64 * params.eps) * rational::to_f64(&state.p);
        let (found, exhaustive) = stability_subset(v, &state.indices, k_i, d, limit, caps)?;
        if let Some(w_prime) = found {
            let report = StructureReport {
                w_indices: state.indices.clone(),
                w_prime_indices: w_prime,
                p: state.p.clone(),
                gap: state.gap.clone().expect("set before the loop"),
                iterations: state.iteration,
                exhaustive_search: exhaustive,
                certificates: BTreeMap::new(),
            };
            let check = verify_report(v, d, params, &report);
            if !check.ok() {
                return Err(StructureError::CertificateFailed(check.failures()));
            }
            return Ok(StructureReport {
                certificates: check.certificates,
                ..report
            });
        }
        if !smallball::meets_threshold(&state.p, n_i.max(1), params.a) {
            return Err(StructureError::BelowThreshold(Box::new(state)));
        }
        let factor = rational::from_f64(nif.powf(params.eps / 2.0)).expect("finite");
        let p_next = &state.p * factor;
        let pnf = rational::to_f64(&p_next);
        let m_next = nif.powf(1.0 - params.eps / 3.0).floor() as usize;
        let bound = |rank: usize| {
            let r = rank as f64 / 2.0;
            let local = nif.powf(-r) / pnf;
            let global = 2.0 * c0 / pnf * nf.powf(-r);
            local.min(global).floor() as u64
        };
        let sub: Vec<Rational> = state.indices.iter().map(|&i| v[i].clone()).collect();
        let gap = find_covering_gap_with(&sub, m_next, params.d0, bound, caps)?
            .ok_or_else(|| StructureError::CoveringSearchFailed(Box::new(state.clone())))?;
        state.indices = members_of(&gap, v, &state.indices, caps.enum_cap)?;
        state.gap = Some(gap);
        state.p = p_next;
        state.iteration += 1;
    }
}

fn members_of(gap: &Gap, v: &[Rational], indices: &[usize], cap: u64) -> Result<Vec<usize>, GapError> {
    let members = gap.membership(cap)?;
    Ok(indices.iter().copied().filter(|&i| members.contains(&v[i])).collect())
}

/// First `k`-subset of `indices` (lexicographic, or in seeded sample order)
/// with `p_ξ ≤ limit`, plus whether the search was exhaustive.
fn stability_subset(
    v: &[Rational],
    indices: &[usize],
    k: usize,
    d: &AtomicDistribution,
    limit: f64,
    caps: &Caps,
) -> Result<(Option<Vec<usize>>, bool), StructureError> {
    let mut memo: HashMap<Vec<Rational>, bool> = HashMap::new();
    let mut test = |subset: &[usize]| -> Result<bool, StructureError> {
        let mut key: Vec<Rational> = subset.iter().map(|&j| v[indices[j]].clone()).collect();
        key.sort();
        if let Some(&hit) = memo.get(&key) {
            return Ok(hit);
        }
        let res = smallball::small_ball_exact_capped(&key, d, caps.support_cap)?;
        let hit = res.p_f64() <= limit;
        memo.insert(key, hit);
        Ok(hit)
    };
    let pick = |subset: &[usize]| subset.iter().map(|&j| indices[j]).collect::<Vec<_>>();
    let n = indices.len();
    match binomial(n, k) {
        Some(total) if total <= caps.subset_enumeration_limit => {
            for subset in combinations(n, k) {
                if test(&subset)? {
                    return Ok((Some(pick(&subset)), true));
                }
            }
            Ok((None, true))
        }
        _ => {
            let mut rng = trial_rng(caps.subset_seed, 0);
            for _ in 0..caps.subset_samples {
                let mut subset = sample(&mut rng, n, k).into_vec();
                subset.sort_unstable();
                if test(&subset)? {
                    return Ok((Some(pick(&subset)), false));
                }
            }
            Ok((None, false))
        }
    }
}

/// Re-checks every certificate of a report using only the GAP and
/// small-ball primitives.
///
/// Checked: `indices` (`W' ⊂ W ⊂ {0..n}`, no repeats), `w_size`
/// (`|W| ≥ n - n^(1-ε/4)`), `w_prime_size` (`|W'| ≤ ε n`), `membership`
/// (`V_W ⊂ P`), `p_floor` (`p ≥ n^(-A)`), `rank` (`rank P ≤ d0`), `volume`
/// (`vol P ≤ 2 C0 p^(-1) n^(-rank/2)`) and `small_ball`
/// (`p_ξ(W') ≤ n^(d0 ε) p`).
pub fn verify_report(
    v: &[Rational],
    d: &AtomicDistribution,
    params: &StructureParams,
    report: &StructureReport,
) -> Verification {
    let n = v.len();
    let nf = n as f64;
    let mut certs = BTreeMap::new();
    let mut put = |name: &str, holds: bool, value: String, bound: String| {
        certs.insert(name.to_string(), Certificate { holds, value, bound });
    };

    let w: HashSet<usize> = report.w_indices.iter().copied().collect();
    let wp: HashSet<usize> = report.w_prime_indices.iter().copied().collect();
    let indices_ok = w.len() == report.w_indices.len()
        && wp.len() == report.w_prime_indices.len()
        && w.iter().all(|&i| i < n)
        && wp.is_subset(&w);
    put(
        "indices",
        indices_ok,
        format!("|W| = {}, |W'| = {}", report.w_indices.len(), report.w_prime_indices.len()),
        format!("W' ⊂ W ⊂ [0, {n})"),
    );

    let w_floor = nf - nf.powf(1.0 - params.eps / 4.0);
    put(
        "w_size",
        report.w_indices.len() as f64 >= w_floor,
        report.w_indices.len().to_string(),
        format!(">= {w_floor}"),
    );
    let wp_ceiling = params.eps * nf;
    put(
        "w_prime_size",
        report.w_prime_indices.len() as f64 <= wp_ceiling,
        report.w_prime_indices.len().to_string(),
        format!("<= {wp_ceiling}"),
    );

    let membership = if indices_ok {
        report
            .gap
            .membership(params.caps.enum_cap)
            .map(|m| report.w_indices.iter().all(|&i| m.contains(&v[i])))
            .map_err(|e| e.to_string())
    } else {
        Err("indices invalid".to_string())
    };
    put(
        "membership",
        membership == Ok(true),
        match &membership {
            Ok(b) => b.to_string(),
            Err(e) => e.clone(),
        },
        "every W value in P".into(),
    );

    put(
        "p_floor",
        report.p.is_positive() && smallball::meets_threshold(&report.p, n.max(1), params.a),
        rational::format(&report.p),
        format!(">= {:e}", smallball::richness_threshold(n.max(1), params.a)),
    );

    let rank = report.gap.rank();
    put("rank", rank <= params.d0, rank.to_string(), format!("<= {}", params.d0));

    let pf = rational::to_f64(&report.p);
    let vol_bound = 2.0 * rational::to_f64(&params.c0) / pf * nf.powf(-(rank as f64) / 2.0);
    let volume = report.gap.volume();
    put(
        "volume",
        report.p.is_positive() && report.gap.volume_f64() <= vol_bound,
        volume.to_string(),
        format!("<= {vol_bound}"),
    );

    let small_ball = if indices_ok {
        let vals: Vec<Rational> = report.w_prime_indices.iter().map(|&i| v[i].clone()).collect();
        smallball::small_ball_exact_capped(&vals, d, params.caps.support_cap)
            .map(|r| r.exact_p().expect("exact").clone())
            .map_err(|e| e.to_string())
    } else {
        Err("indices invalid".to_string())
    };
    let sb_bound = nf.powf(params.d0 as f64 * params.eps) * pf;
    put(
        "small_ball",
        small_ball.as_ref().is_ok_and(|p| rational::to_f64(p) <= sb_bound),
        match &small_ball {
            Ok(p) => rational::format(p),
            Err(e) => e.clone(),
        },
        format!("<= {sb_bound}"),
    );
    Verification { certificates: certs }
}

impl StructureReport {
    /// True when the attached certificates are present and all hold.
    pub fn certified(&self) -> bool {
        !self.certificates.is_empty() && self.certificates.values().all(|c| c.holds)
    }
}
