//! Seeded random instances: arcs, integral units, representations and
//! vectors of bounded size. Used by the property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arcs::ArcMatrix;
use crate::gaussian::GaussianRational;
use crate::laurent::LaurentSeries;
use crate::repr::{RepExpr, RepVector};

fn small_int<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    rng.gen_range(-bound..=bound)
}

fn nonzero_int<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    loop {
        let x = small_int(rng, bound);
        if x != 0 {
            return x;
        }
    }
}

/// A nonzero Gaussian integer with small parts.
pub fn coefficient<R: Rng>(rng: &mut R) -> GaussianRational {
    let re = GaussianRational::from_integer(nonzero_int(rng, 3));
    if rng.gen_bool(0.2) {
        &re + &(&GaussianRational::from_integer(small_int(rng, 2)) * &GaussianRational::i())
    } else {
        re
    }
}

/// One of ±1, ±i.
pub fn unit<R: Rng>(rng: &mut R) -> GaussianRational {
    let one = GaussianRational::one();
    [one.clone(), -&one, GaussianRational::i(), -&GaussianRational::i()].choose(rng).unwrap().clone()
}

/// An exact polynomial in z with terms of degree `lo..=hi`, possibly zero.
pub fn polynomial<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> LaurentSeries {
    let mut terms = Vec::new();
    for e in lo..=hi {
        if rng.gen_bool(0.5) {
            terms.push((e, coefficient(rng)));
        }
    }
    LaurentSeries::from_terms(terms)
}

/// An element of GL(m, ℂ[[z]]): a permuted product of unit lower and upper
/// triangular polynomial matrices and a diagonal of units ±1, ±i.
pub fn integral_unit<R: Rng>(rng: &mut R, m: usize) -> ArcMatrix {
    let tri = |rng: &mut R, lower: bool| {
        let rows = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            LaurentSeries::one()
                        } else if (j < i) == lower {
                            polynomial(rng, 0, 2)
                        } else {
                            LaurentSeries::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        ArcMatrix::from_rows(rows).unwrap()
    };
    let l = tri(rng, true);
    let u = tri(rng, false);
    let d = ArcMatrix::diagonal((0..m).map(|_| LaurentSeries::constant(unit(rng))).collect());
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let p = ArcMatrix::from_rows(
        (0..m)
            .map(|i| (0..m).map(|j| if perm[i] == j { LaurentSeries::one() } else { LaurentSeries::zero() }).collect())
            .collect(),
    )
    .unwrap();
    p.compose(&l).unwrap().compose(&d).unwrap().compose(&u).unwrap()
}

/// A cocharacter with entries in `-bound..=bound`.
pub fn cocharacter<R: Rng>(rng: &mut R, m: usize, bound: i64) -> Vec<i64> {
    (0..m).map(|_| small_int(rng, bound)).collect()
}

/// `u₁ · diag(z^λ) · u₂` with integral units u₁, u₂ and |λ_i| ≤ 2.
pub fn arc<R: Rng>(rng: &mut R, m: usize) -> ArcMatrix {
    let u1 = integral_unit(rng, m);
    let u2 = integral_unit(rng, m);
    let d = ArcMatrix::from_cocharacter(&cocharacter(rng, m, 2));
    u1.compose(&d).unwrap().compose(&u2).unwrap()
}

/// Representations of GL(m) with nonnegative weights and dimension at most `max_dim`.
pub fn representation<R: Rng>(rng: &mut R, m: usize, max_dim: usize) -> RepExpr {
    let std = RepExpr::Std(m);
    let candidates = vec![
        RepExpr::Triv,
        std.clone(),
        RepExpr::MatrixRep(m),
        RepExpr::sym(2, std.clone()),
        RepExpr::sym(3, std.clone()),
        RepExpr::tensor(std.clone(), std.clone()),
        RepExpr::direct_sum(std.clone(), RepExpr::sym(2, std.clone())),
        RepExpr::direct_sum(RepExpr::Triv, std.clone()),
        RepExpr::tensor(RepExpr::sym(2, std.clone()), std.clone()),
    ];
    let fitting: Vec<RepExpr> = candidates.into_iter().filter(|r| r.dim_u128() as usize <= max_dim).collect();
    fitting.choose(rng).expect("Triv always fits").clone()
}

/// Representations that may also contain duals, so weights can be negative.
pub fn representation_with_duals<R: Rng>(rng: &mut R, m: usize, max_dim: usize) -> RepExpr {
    if rng.gen_bool(0.3) && m * m <= max_dim {
        let base = RepExpr::Std(m);
        [RepExpr::dual(base.clone()), RepExpr::tensor(base.clone(), RepExpr::dual(base))].choose(rng).unwrap().clone()
    } else {
        representation(rng, m, max_dim)
    }
}

/// A nonzero vector with between 1 and `max_terms` nonzero coordinates.
pub fn vector<R: Rng>(rng: &mut R, rep: &RepExpr, max_terms: usize) -> RepVector {
    let dim = rep.dim().expect("generated representations are consistent");
    let terms = rng.gen_range(1..=max_terms.min(dim).max(1));
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.shuffle(rng);
    RepVector::from_pairs(rep.clone(), idx.into_iter().take(terms).map(|i| (i, coefficient(rng)))).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn units_are_integral_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..4 {
            for _ in 0..5 {
                assert!(integral_unit(&mut rng, m).is_integral_unit().unwrap());
            }
        }
    }

    #[test]
    fn arcs_are_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = arc(&mut rng, 3);
            assert!(a.determinant().unwrap().ord().unwrap().is_some());
        }
    }

    #[test]
    fn sizes_are_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = representation(&mut rng, 3, 20);
            assert!(r.dim().unwrap() <= 20);
            assert!(!vector(&mut rng, &r, 4).is_zero());
        }
    }
}
