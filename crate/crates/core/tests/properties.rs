use arcstab_core::lp::{rat, Rational};
use arcstab_core::random;
use arcstab_core::repr::{act, representation_matrix};
use arcstab_core::slope::{torus_infimum, DescentOptions, TorusFunctional};
use arcstab_core::stability::{self, twisted_arc};
use arcstab_core::{ArcMatrix, GaussianRational, LaurentSeries, Pair, RepExpr, RepVector, TorusData};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn series(lead: i64, coeffs: Vec<i64>) -> LaurentSeries {
    LaurentSeries::polynomial(lead, coeffs.into_iter().map(GaussianRational::from_integer).collect())
}

fn nonzero_series() -> impl Strategy<Value = LaurentSeries> {
    (-3i64..3, prop::collection::vec(-4i64..=4, 1..5))
        .prop_filter("nonzero", |(_, c)| c.iter().any(|&x| x != 0))
        .prop_map(|(lead, c)| series(lead, c))
}

fn any_series() -> impl Strategy<Value = LaurentSeries> {
    (-3i64..3, prop::collection::vec(-4i64..=4, 0..5)).prop_map(|(lead, c)| series(lead, c))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pair(r: &mut ChaCha8Rng, m: usize) -> Pair {
    let v = random::representation(r, m, 6);
    let w = random::representation(r, m, 6);
    Pair::new(random::vector(r, &v, 3), random::vector(r, &w, 3)).unwrap()
}

/// diag(c_i z^{a_i} (1 + p_i(z))) commutes with the diagonal torus.
fn diagonal_arc(r: &mut ChaCha8Rng, m: usize) -> ArcMatrix {
    let diag = (0..m)
        .map(|_| {
            let unit = LaurentSeries::one().add(&random::polynomial(r, 1, 2));
            unit.scale(&random::unit(r)).shift(random::cocharacter(r, 1, 2)[0])
        })
        .collect();
    ArcMatrix::diagonal(diag)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in any_series(), b in any_series(), c in any_series()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_exact_zero());
    }

    #[test]
    fn ord_is_multiplicative(a in nonzero_series(), b in nonzero_series()) {
        let (oa, ob) = (a.ord().unwrap().unwrap(), b.ord().unwrap().unwrap());
        prop_assert_eq!(a.mul(&b).ord().unwrap(), Some(oa + ob));
        prop_assert!(a.add(&b).ord_lower_bound().is_none_or(|o| o >= oa.min(ob)));
    }

    #[test]
    fn series_inverse(a in nonzero_series()) {
        let inv = a.invert_with_precision(12).unwrap();
        prop_assert_eq!(inv.ord().unwrap(), Some(-a.ord().unwrap().unwrap()));
        prop_assert!(a.mul(&inv).approx_eq(&LaurentSeries::one()));
    }

    #[test]
    fn arc_inverse(seed in any::<u64>(), m in 1usize..4) {
        let a = random::arc(&mut rng(seed), m);
        let inv = a.inverse().unwrap();
        prop_assert!(a.compose(&inv).unwrap().approx_eq(&ArcMatrix::identity(m)));
        prop_assert!(inv.compose(&a).unwrap().approx_eq(&ArcMatrix::identity(m)));
    }

    #[test]
    fn action_is_a_homomorphism(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let rep = random::representation(&mut r, m, 10);
        let g = random::arc(&mut r, m);
        let h = random::arc(&mut r, m);
        let rg = representation_matrix(&g, &rep).unwrap();
        let rh = representation_matrix(&h, &rep).unwrap();
        let rgh = representation_matrix(&g.compose(&h).unwrap(), &rep).unwrap();
        let n = rgh.len();
        for i in 0..n {
            for j in 0..n {
                let mut s = LaurentSeries::zero();
                for k in 0..n {
                    s = s.add(&rg[i][k].mul(&rh[k][j]));
                }
                prop_assert_eq!(&s, &rgh[i][j]);
            }
        }
    }

    #[test]
    fn action_is_linear(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let rep = random::representation(&mut r, m, 10);
        let g = random::arc(&mut r, m);
        let v = random::vector(&mut r, &rep, 3);
        let w = random::vector(&mut r, &rep, 3);
        let c = random::coefficient(&mut r);
        let sum = v.scale(&c).add(&w).unwrap();
        let lhs = act(&g, &sum).unwrap();
        let (av, aw) = (act(&g, &v).unwrap(), act(&g, &w).unwrap());
        let zero = LaurentSeries::zero();
        for i in 0..rep.dim().unwrap() {
            let expect = av.get(&i).unwrap_or(&zero).scale(&c).add(aw.get(&i).unwrap_or(&zero));
            prop_assert_eq!(lhs.get(&i).unwrap_or(&zero), &expect);
        }
    }

    #[test]
    fn degree_is_additive(seed in any::<u64>(), m in 1usize..4, k in 1u32..4) {
        let mut r = rng(seed);
        let a = random::representation(&mut r, m, 10);
        let b = random::representation(&mut r, m, 10);
        // deg is floored at 1, so the trivial representation is not additive
        prop_assume!(a != RepExpr::Triv && b != RepExpr::Triv);
        let (da, db) = (a.deg().unwrap(), b.deg().unwrap());
        prop_assert_eq!(RepExpr::tensor(a.clone(), b.clone()).deg().unwrap(), da + db);
        prop_assert_eq!(RepExpr::sym(k, a.clone()).deg().unwrap(), k * da);
        prop_assert_eq!(a.tensor_power(k).deg().unwrap(), k * da);
    }

    #[test]
    fn snf_is_invariant(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let a = random::arc(&mut r, m);
        let b = random::integral_unit(&mut r, m).compose(&a).unwrap().compose(&random::integral_unit(&mut r, m)).unwrap();
        let mut ea = a.snf().unwrap().exponents;
        let mut eb = b.snf().unwrap().exponents;
        ea.sort();
        eb.sort();
        prop_assert_eq!(ea.iter().sum::<i64>(), a.determinant().unwrap().ord().unwrap().unwrap());
        prop_assert_eq!(ea, eb);
    }

    #[test]
    fn weight_ignores_integral_units(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let p = random_pair(&mut r, m);
        let a = random::arc(&mut r, m);
        let ua = random::integral_unit(&mut r, m).compose(&a).unwrap();
        prop_assert_eq!(stability::weight(&ua, &p).unwrap(), stability::weight(&a, &p).unwrap());
        prop_assert_eq!(
            stability::weight(&a, &p).unwrap(),
            stability::weight_via_specialization(&a, &p).unwrap()
        );
    }

    #[test]
    fn twisted_weight_matches_twisted_arc(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let p = random_pair(&mut r, m);
        let rho = diagonal_arc(&mut r, m);
        let t = TorusData::diagonal(m);
        let xi = random::cocharacter(&mut r, m, 3);
        let xi_q: Vec<Rational> = xi.iter().map(|&x| rat(x)).collect();
        let twisted = twisted_arc(&rho, &xi, &t).unwrap();
        prop_assert_eq!(
            stability::twisted_weight(&rho, &xi_q, &p, &t).unwrap(),
            rat(stability::weight(&twisted, &p).unwrap())
        );
    }

    #[test]
    fn reduced_norm_is_a_lower_bound(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let p = random_pair(&mut r, m);
        let rho = diagonal_arc(&mut r, m);
        let t = TorusData::diagonal(m);
        let Ok(red) = stability::reduced_norm(&rho, &p, &t) else { return Ok(()) };
        prop_assert_eq!(stability::twisted_norm(&rho, &red.minimizer, &p, &t).unwrap(), red.value.clone());
        for _ in 0..20 {
            let xi: Vec<Rational> =
                random::cocharacter(&mut r, m, 6).into_iter().map(|x| Rational::new(x.into(), 2.into())).collect();
            prop_assert!(stability::twisted_norm(&rho, &xi, &p, &t).unwrap() >= red.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn torus_infimum_is_below_the_origin(seed in any::<u64>(), m in 1usize..3) {
        let mut r = rng(seed);
        let p = random_pair(&mut r, m);
        let rho = diagonal_arc(&mut r, m);
        let t = TorusData::diagonal(m);
        let g = rho.eval(Complex64::new(0.05, 0.0)).unwrap();
        let f = TorusFunctional::new(&g, &p, &t).unwrap();
        let opts = DescentOptions { max_iterations: 2_000, ..DescentOptions::default() };
        if let Ok(min) = torus_infimum(&g, &p, &t, &opts) {
            prop_assert!(min.value <= f.value(&vec![0.0; m]) + 1e-12);
            prop_assert!((f.value(&min.point) - min.value).abs() <= 1e-9 * (1.0 + min.value.abs()));
        }
    }
}

#[test]
fn basis_vectors_round_trip_through_names() {
    let rep = RepExpr::sym(2, RepExpr::Std(3));
    for i in 0..rep.dim().unwrap() {
        let name = rep.basis_name(i);
        assert_eq!(rep.basis_index(&name), Some(i));
        let v = RepVector::from_names(rep.clone(), [(name.as_str(), GaussianRational::one())]).unwrap();
        assert_eq!(v, RepVector::basis(rep.clone(), i).unwrap());
    }
}
