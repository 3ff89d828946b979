//! Independent oracles and generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use simspec_core::rational::{self, Rational};
use simspec_core::{AtomicDistribution, Gap};

/// Largest point mass of `Σ ξ_i v_i` by enumerating every outcome, and the
/// attaining value (largest mass, then smallest `|x|`, then smallest `x`).
pub fn brute_force_p(v: &[Rational], d: &AtomicDistribution) -> (Rational, Rational) {
    let k = d.len();
    let mut masses: HashMap<Rational, Rational> = HashMap::new();
    let mut digits = vec![0usize; v.len()];
    loop {
        let mut sum = Rational::zero();
        let mut prob = Rational::one();
        for (i, &dg) in digits.iter().enumerate() {
            sum += &d.atoms()[dg] * &v[i];
            prob *= &d.probs()[dg];
        }
        *masses.entry(sum).or_insert_with(Rational::zero) += prob;

        let mut pos = digits.len();
        loop {
            if pos == 0 {
                let mut best: Option<(Rational, Rational)> = None;
                for (x, p) in masses {
                    let better = match &best {
                        None => true,
                        Some((bx, bp)) => {
                            p > *bp || (p == *bp && (x.abs() < bx.abs() || (x.abs() == bx.abs() && x < *bx)))
                        }
                    };
                    if better {
                        best = Some((x, p));
                    }
                }
                let (x, p) = best.expect("at least one outcome");
                return (p, x);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Rational with numerator in `[-4, 4]` and denominator in `[1, 3]`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rational::frac(rng.random_range(-4..=4), rng.random_range(1..=3))
}

pub fn small_nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let x = small_rational(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| small_rational(rng)).collect()
}

pub fn random_nonzero_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| small_nonzero_rational(rng)).collect()
}

/// Properness by searching the difference box `|d_i| ≤ 2 N_i` for a nonzero
/// `d` with `Σ d_i g_i = 0`.
pub fn proper_by_differences(gap: &Gap) -> bool {
    let scale = rational::common_denominator(gap.generators());
    let gens: Vec<i128> = gap
        .generators()
        .iter()
        .map(|g| {
            let s = g * Rational::from_integer(scale.clone());
            i128::try_from(s.to_integer()).expect("small generator")
        })
        .collect();
    let bounds: Vec<i64> = gap
        .dims()
        .iter()
        .map(|d| 2 * rational::floor_to_i64(d).expect("small dim"))
        .collect();
    let r = gens.len();
    if r == 0 {
        return true;
    }
    let mut d: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if d.iter().any(|&x| x != 0) {
            let s: i128 = d.iter().zip(&gens).map(|(&a, &g)| a as i128 * g).sum();
            if s == 0 {
                return false;
            }
        }
        let mut pos = r;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            if d[pos] < bounds[pos] {
                d[pos] += 1;
                break;
            }
            d[pos] = -bounds[pos];
        }
    }
}

/// `C(n, ⌊n/2⌋) / 2^n`
pub fn central_binomial_bound(n: usize) -> Rational {
    let mut c = num_bigint::BigInt::one();
    let k = n / 2;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    Rational::new(c, num_bigint::BigInt::one() << n)
}
