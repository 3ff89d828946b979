//! Acceptance gate. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::Rng;
use simspec_core::gaps::{full_rank_reduce, intersection, DEFAULT_ENUM_CAP};
use simspec_core::harness::{
    exhaustive_census, monte_carlo_simplicity_with, nonsimple_graph_indices, verify_orthogonality_lemma,
    with_threads, wilson_interval, Z99,
};
use simspec_core::matrix::{graph_from_index, trial_rng};
use simspec_core::rational::{frac, int, Rational};
use simspec_core::smallball::{small_ball_exact, SmallBallResult};
use simspec_core::spectrum::{eigen_decompose, multiplicity_clusters, reconcile, simplicity_exact, DEFAULT_JACOBI_TOL};
use simspec_core::structure::{refine_structure, verify_report, StructureParams};
use simspec_core::{AtomicDistribution, EnsembleSpec, Gap, SimplicityVerdict};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:.2?}, limit {limit:?}"))
}

fn exact(r: SmallBallResult) -> (Rational, Rational) {
    match r {
        SmallBallResult::Exact { p, atom } => (p, atom),
        other => panic!("expected exact result, got {other:?}"),
    }
}

const SNAPSHOT: [(usize, u64, u64); 3] = [(4, 30, 34), (5, 750, 274), (6, 20340, 12428)];

fn census_exactness() -> Outcome {
    for (n, want) in [(2, frac(1, 2)), (3, frac(3, 4))] {
        let start = Instant::now();
        let c = exhaustive_census(n).map_err(|e| e.to_string())?;
        within(start.elapsed(), Duration::from_secs(1), &format!("census({n})"))?;
        ensure(c.simple_fraction() == want, || {
            format!("census({n}) P(simple) = {}, want {want}", c.simple_fraction())
        })?;
    }
    for (n, simple, nonsimple) in SNAPSHOT {
        for threads in [1, 4] {
            let c = with_threads(Some(threads), || exhaustive_census(n))
                .map_err(|e| e.to_string())?
                .map_err(|e| e.to_string())?;
            ensure(c.simple_count == simple && c.nonsimple_count == nonsimple, || {
                format!("census({n}) on {threads} threads = {c:?}, snapshot {simple}/{nonsimple}")
            })?;
        }
    }
    Ok("P(simple) = 1/2, 3/4; n = 4..6 snapshot stable on 1 and 4 threads".into())
}

fn lemma_suite() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for n in 2..=6 {
        for index in nonsimple_graph_indices(n).map_err(|e| e.to_string())? {
            let m = graph_from_index(n, index).map_err(|e| e.to_string())?;
            let check = verify_orthogonality_lemma(&m).map_err(|e| format!("n={n} index={index}: {e}"))?;
            ensure(check.holds, || format!("n={n} index={index}: witness {:?}", check.witness))?;
            worst = worst.max(check.witness.residual);
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(300), "lemma suite")?;
    Ok(format!("{checked} non-simple graphs, worst residual {worst:.1e}"))
}

fn small_ball_oracle() -> Outcome {
    let rad = AtomicDistribution::rademacher();
    let ber = AtomicDistribution::bernoulli(frac(1, 2)).expect("valid");
    let fixed = [
        (vec![1, 1, 1, 1], frac(3, 8)),
        (vec![1, 2, 4, 8], frac(1, 16)),
    ];
    for (v, want) in fixed {
        let v: Vec<Rational> = v.into_iter().map(int).collect();
        let (p, _) = exact(small_ball_exact(&v, &rad).map_err(|e| e.to_string())?);
        ensure(p == want, || format!("p({v:?}) = {p}, want {want}"))?;
    }
    let mut rng = trial_rng(3, 0);
    let mut cases = 0;
    for n in 1..=12 {
        for _ in 0..200 {
            let v = common::random_vector(&mut rng, n);
            for d in [&rad, &ber] {
                let got = exact(small_ball_exact(&v, d).map_err(|e| e.to_string())?);
                let want = common::brute_force_p(&v, d);
                ensure(got == want, || format!("v = {v:?}: convolution {got:?}, enumeration {want:?}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} vectors equal to enumeration, fixed cases 3/8 and 1/16"))
}

fn small_ball_properties() -> Outcome {
    let rad = AtomicDistribution::rademacher();
    let ber = AtomicDistribution::bernoulli(frac(1, 2)).expect("valid");
    let lazy = AtomicDistribution::new(vec![int(-1), int(0), int(1)], vec![frac(1, 4), frac(1, 2), frac(1, 4)])
        .expect("valid");
    let p_of = |v: &[Rational], d: &AtomicDistribution| -> Result<Rational, String> {
        Ok(exact(small_ball_exact(v, d).map_err(|e| e.to_string())?).0)
    };
    let mut rng = trial_rng(4, 0);
    let mut violations = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(1..=12);
        let v = common::random_nonzero_vector(&mut rng, n);
        let c = common::small_nonzero_rational(&mut rng);
        let scaled: Vec<Rational> = v.iter().map(|x| x * &c).collect();
        let mut perm = v.clone();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut longer = v.clone();
        longer.push(common::small_nonzero_rational(&mut rng));
        for (name, d) in [("rademacher", &rad), ("bernoulli", &ber), ("lazy", &lazy)] {
            let p = p_of(&v, d)?;
            if p_of(&scaled, d)? != p {
                violations.push(format!("case {case} {name}: scaling"));
            }
            if p_of(&perm, d)? != p {
                violations.push(format!("case {case} {name}: permutation"));
            }
            if p > Rational::one() - d.nontriviality_margin() {
                violations.push(format!("case {case} {name}: p > 1 - mu"));
            }
            if p < num_traits::pow(d.max_prob().clone(), n) {
                violations.push(format!("case {case} {name}: p < max_prob^n"));
            }
            if p_of(&longer, d)? > p {
                violations.push(format!("case {case} {name}: append"));
            }
        }
        if p_of(&v, &rad)? > common::central_binomial_bound(n) {
            violations.push(format!("case {case}: central binomial bound"));
        }
    }
    ensure(violations.is_empty(), || format!("{} violations: {:?}", violations.len(), &violations[..violations.len().min(5)]))?;
    Ok("1000 vectors x 3 laws, zero violations".into())
}

fn constructed_degenerate<R: Rng>(rng: &mut R) -> (Gap, Gap) {
    let g = common::small_nonzero_rational(rng);
    let big_dim = rng.random_range(3..=8);
    let p = Gap::new(vec![g.clone()], vec![int(big_dim)]).expect("valid");
    let mut gens = Vec::new();
    let mut dims = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        let a = rng.random_range(1..=big_dim) * if rng.random_bool(0.5) { 1 } else { -1 };
        gens.push(&g * int(a));
        dims.push(int(rng.random_range(1..=3)));
    }
    let h = &g / int(101);
    match rng.random_range(0..3) {
        0 => {
            gens.push(h);
            dims.push(int(rng.random_range(1..=3)));
        }
        1 => {
            let a = rng.random_range(-2..=2);
            gens.push(h.clone());
            gens.push(&g * int(a) + h);
            dims.push(int(rng.random_range(1..=3)));
            dims.push(int(rng.random_range(1..=3)));
        }
        _ => {
            gens.push(h);
            gens.push(&g / int(103));
            dims.push(int(rng.random_range(1..=3)));
            dims.push(int(rng.random_range(1..=3)));
        }
    }
    // shuffle generator order so the degenerate direction is not always last
    let mut order: Vec<usize> = (0..gens.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let gens = order.iter().map(|&i| gens[i].clone()).collect();
    let dims = order.iter().map(|&i| dims[i].clone()).collect();
    (Gap::new(gens, dims).expect("valid"), p)
}

fn gap_suite() -> Outcome {
    let mut rng = trial_rng(5, 0);
    let mut proper = 0;
    for case in 0..500 {
        let rank = rng.random_range(1..=3);
        let gens: Vec<Rational> = (0..rank).map(|_| common::small_nonzero_rational(&mut rng)).collect();
        let mut dims = Vec::new();
        let mut volume = 1i64;
        for _ in 0..rank {
            let max = ((10_000 / volume - 1) / 2).clamp(0, 20);
            let d = rng.random_range(0..=max);
            volume *= 2 * d + 1;
            dims.push(int(d));
        }
        let gap = Gap::new(gens, dims).map_err(|e| e.to_string())?;
        ensure(gap.volume() <= 10_000u32.into(), || format!("case {case}: volume {}", gap.volume()))?;
        let is_proper = gap.is_proper(DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?;
        let distinct = gap.distinct_members(DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?.len();
        let oracle = common::proper_by_differences(&gap);
        ensure(is_proper == (distinct as i64 == volume) && is_proper == oracle, || {
            format!("case {case} {gap:?}: is_proper {is_proper}, distinct {distinct}/{volume}, oracle {oracle}")
        })?;
        proper += usize::from(is_proper);
    }
    let mut steps = 0;
    for case in 0..100 {
        let (p_i, p) = constructed_degenerate(&mut rng);
        let target = p.membership(DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?;
        let before = intersection(&p_i, &target, DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?;
        let red = full_rank_reduce(&p_i, &p, DEFAULT_ENUM_CAP).map_err(|e| format!("case {case} {p_i:?}: {e}"))?;
        let after = intersection(&red.gap, &target, DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?;
        ensure(before == after, || format!("case {case} {p_i:?}: intersection changed"))?;
        ensure(red.ranks.len() >= 2 && red.ranks.windows(2).all(|w| w[1] < w[0]), || {
            format!("case {case} {p_i:?}: ranks {:?}", red.ranks)
        })?;
        let again = full_rank_reduce(&red.gap, &p, DEFAULT_ENUM_CAP).map_err(|e| e.to_string())?;
        ensure(again.ranks.len() == 1, || format!("case {case}: result is not of full rank"))?;
        steps += red.ranks.len() - 1;
    }
    Ok(format!("500 GAPs ({proper} proper) agree with the difference oracle; 100 reductions, {steps} rank drops"))
}

fn structure_pipeline() -> Outcome {
    let start = Instant::now();
    let v = vec![int(1); 16];
    let d = AtomicDistribution::rademacher();
    let params = StructureParams::new(1.0, 0.2, 3, int(10)).map_err(|e| e.to_string())?;
    let report = refine_structure(&v, &d, &params).map_err(|e| e.to_string())?;
    ensure(report.iterations <= params.iteration_budget(), || {
        format!("{} iterations > {}", report.iterations, params.iteration_budget())
    })?;
    ensure(verify_report(&v, &d, &params, &report).ok(), || "report rejected".into())?;

    let mut index = report.clone();
    index.w_prime_indices.push(16);
    let mut p = report.clone();
    p.p = frac(1, 1000);
    let mut membership = report.clone();
    membership.gap = Gap::from_integers(&[2], &[1]).expect("valid");
    let mut bound = report.clone();
    bound.gap = Gap::from_integers(&[1], &[100]).expect("valid");
    for (name, tampered, cert) in [
        ("index", index, "indices"),
        ("p", p, "p_floor"),
        ("membership", membership, "membership"),
        ("bound", bound, "volume"),
    ] {
        let check = verify_report(&v, &d, &params, &tampered);
        ensure(!check.ok() && check.failures().iter().any(|f| f == cert), || {
            format!("{name} tamper not caught by {cert}: failures {:?}", check.failures())
        })?;
    }
    within(start.elapsed(), Duration::from_secs(30), "structure pipeline")?;
    Ok(format!(
        "{} iteration(s), |W| = {}, |W'| = {}, p = {}; 4 tampered reports rejected",
        report.iterations,
        report.w_indices.len(),
        report.w_prime_indices.len(),
        report.p
    ))
}

fn reconciliation() -> Outcome {
    let start = Instant::now();
    let spec = EnsembleSpec::sign();
    let trials = 10_000u64;
    let mut agree = 0u64;
    let mut disagreements = Vec::new();
    for t in 0..trials {
        let m = spec.sample(10, &mut trial_rng(7, t)).map_err(|e| e.to_string())?;
        let exact = simplicity_exact(&m);
        let s = eigen_decompose(&m, DEFAULT_JACOBI_TOL).map_err(|e| e.to_string())?;
        let numeric = multiplicity_clusters(&s, 1e-8).verdict();

        let f = m.to_f64();
        let trace: f64 = (0..10).map(|i| f[i * 10 + i]).sum();
        let frob2: f64 = f.iter().map(|x| x * x).sum();
        let eig_sum: f64 = s.eigenvalues.iter().sum();
        let eig_sq: f64 = s.eigenvalues.iter().map(|x| x * x).sum();
        ensure((eig_sum - trace).abs() <= 1e-9 * frob2.sqrt().max(1.0), || {
            format!("trial {t}: trace {trace} vs {eig_sum}")
        })?;
        ensure((eig_sq - frob2).abs() <= 1e-9 * frob2.max(1.0), || {
            format!("trial {t}: Frobenius {frob2} vs {eig_sq}")
        })?;

        if exact.is_simple() == numeric.is_simple() {
            agree += 1;
        } else {
            let min_gap = match &numeric {
                SimplicityVerdict::SimpleNumeric { min_gap } | SimplicityVerdict::NotSimpleNumeric { min_gap } => {
                    min_gap.unwrap_or(0.0)
                }
                _ => unreachable!(),
            };
            let resolved = reconcile(exact.clone(), &numeric);
            ensure(resolved.is_simple() == exact.is_simple(), || format!("trial {t}: not resolved by exact"))?;
            ensure(min_gap < 1e-6, || format!("trial {t}: disagreement with min gap {min_gap:e}"))?;
            disagreements.push((t, min_gap));
        }
    }
    for (t, gap) in &disagreements {
        println!("    disagreement at trial {t}: min gap {gap:e}");
    }
    ensure(agree * 1000 >= trials * 999, || format!("agreement {agree}/{trials}"))?;
    within(start.elapsed(), Duration::from_secs(300), "reconciliation")?;
    Ok(format!("agreement {agree}/{trials}, trace and Frobenius conserved"))
}

fn monte_carlo_calibration() -> Outcome {
    let spec = EnsembleSpec::gnp_half();
    let mut lines = Vec::new();
    for n in [2, 3] {
        let census = exhaustive_census(n).map_err(|e| e.to_string())?;
        let exact_frac = census.nonsimple_count as f64 / census.total as f64;
        let runs: Vec<_> = [1, 4, 8]
            .into_iter()
            .map(|k| monte_carlo_simplicity_with(&spec, n, 10_000, 11, Some(k)).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        ensure(runs.windows(2).all(|w| w[0].same_outcome(&w[1])), || {
            format!("n={n}: summaries differ across worker counts")
        })?;
        let (lo, hi) = wilson_interval(runs[0].successes, runs[0].trials, Z99);
        ensure(lo <= exact_frac && exact_frac <= hi, || {
            format!("n={n}: exact {exact_frac} outside 99% interval ({lo}, {hi})")
        })?;
        lines.push(format!("n={n}: {}/{} vs {}", runs[0].successes, runs[0].trials, census.nonsimple_fraction()));
    }
    Ok(format!("{}; identical on 1/4/8 workers", lines.join(", ")))
}

fn trend_check() -> Outcome {
    let fractions: Vec<(usize, Rational)> = (2..=6)
        .map(|n| exhaustive_census(n).map(|c| (n, c.nonsimple_fraction())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let listing = fractions
        .iter()
        .map(|(n, f)| format!("n={n}: {f}"))
        .collect::<Vec<_>>()
        .join(", ");
    let n3 = fractions[1].1.clone();
    let mut mc = Vec::new();
    for n in [8, 16, 24] {
        let s = monte_carlo_simplicity_with(&EnsembleSpec::gnp_half(), n, 1000, 13, None).map_err(|e| e.to_string())?;
        let f = Rational::new(s.successes.into(), s.trials.into());
        ensure(s.successes == 0 || f < n3, || format!("Monte Carlo n={n}: {f} not below {n3}"))?;
        mc.push(format!("n={n}: {}/{}", s.successes, s.trials));
    }
    let rises: Vec<String> = fractions
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .map(|w| format!("{}->{}", w[0].0, w[1].0))
        .collect();
    ensure(rises.is_empty(), || {
        format!("census non-simple fraction rises at {}: {listing}; Monte Carlo {}", rises.join(", "), mc.join(", "))
    })?;
    ensure(!n3.is_zero(), || "n=3 fraction is zero".into())?;
    Ok(format!("census {listing}; Monte Carlo {}", mc.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("census exactness", census_exactness),
        ("orthogonality lemma suite", lemma_suite),
        ("small-ball oracle equivalence", small_ball_oracle),
        ("small-ball property suite", small_ball_properties),
        ("GAP suite", gap_suite),
        ("structure pipeline", structure_pipeline),
        ("exact/numeric reconciliation", reconciliation),
        ("Monte Carlo calibration", monte_carlo_calibration),
        ("trend check", trend_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
