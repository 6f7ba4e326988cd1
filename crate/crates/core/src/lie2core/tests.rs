use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::symexpr::Oracle;

fn oracle() -> Oracle {
    Oracle::default()
}

fn axioms(l: &FinDimLie2) -> crate::report::Report {
    let (x0, x1) = l.sample_elements(3, 7);
    check_lie2_axioms(l, &x0, &x1, &oracle())
}

#[test]
fn cross_product_is_a_lie_algebra() {
    let r = axioms(&FinDimLie2::cross_product());
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn string_type_satisfies_coherence() {
    let r = axioms(&FinDimLie2::string_type());
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn jacobiator_scaled_on_one_triple_fails() {
    let l = FinDimLie2::string_type().with_scaled_jacobiator_entry((0, 1, 2, 0), 2.0);
    let r = axioms(&l);
    assert!(!r.passed());
    assert_eq!(r.get("skew.jacobiator").unwrap().status, crate::report::Status::Fail);
}

#[test]
fn non_module_action_fails() {
    // [x, h] = x_0 h on R^3 with the cross product is not a representation
    let l = FinDimLie2::from_maps(
        3,
        1,
        |_| DVector::zeros(3),
        |x, y| FinDimLie2::cross_product().bracket(x, y).unwrap(),
        |x, h| DVector::from_vec(vec![x[0] * h[0]]),
        |_, _, _| DVector::zeros(1),
    )
    .unwrap();
    let r = axioms(&l);
    assert_eq!(r.get("homotopy.degree-one").unwrap().status, crate::report::Status::Fail);
}

#[test]
fn non_jacobi_bracket_without_jacobiator_fails() {
    // [e0,e1] = e1 + e2, [e0,e2] = e0, [e1,e2] = 0 violates Jacobi
    let mut c = vec![0.0; 27];
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c[(i * 3 + j) * 3 + k] = v;
        c[(j * 3 + i) * 3 + k] = -v;
    };
    set(0, 1, 1, 1.0);
    set(0, 1, 2, 1.0);
    set(0, 2, 0, 1.0);
    let l = FinDimLie2::lie_algebra(3, c).unwrap();
    let r = axioms(&l);
    assert!(!r.passed());
    assert_eq!(r.get("homotopy.degree-zero").unwrap().status, crate::report::Status::Fail);
}

#[test]
fn non_skew_tensor_is_rejected() {
    let mut c = vec![0.0; 8];
    c[1] = 1.0;
    assert!(matches!(FinDimLie2::lie_algebra(2, c), Err(crate::error::Error::Invalid(_))));
}

#[test]
fn adjoint_instance_in_random_basis_is_strict() {
    let (u, _, _, _, _) = random_strict_chain(3);
    let r = axioms(&u);
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn identity_morphism_passes() {
    let l = FinDimLie2::adjoint(1.5);
    let (x0, x1) = l.sample_elements(2, 1);
    let r = check_morphism(&FinDimMorphism::identity(&l), &l, &l, &x0, &x1, &oracle());
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn constant_homotopy_on_identity_fails() {
    let l = FinDimLie2::adjoint(1.0);
    let mut f = FinDimMorphism::identity(&l);
    f.f2 = vec![0.5; 27];
    let (x0, x1) = l.sample_elements(2, 1);
    let r = check_morphism(&f, &l, &l, &x0, &x1, &oracle());
    assert!(!r.passed());
}

#[test]
fn random_strict_morphisms_pass() {
    for seed in 0..3 {
        let (u, v, w, f, g) = random_strict_chain(seed);
        let (x0, x1) = u.sample_elements(2, seed);
        assert!(check_morphism(&f, &u, &v, &x0, &x1, &oracle()).passed());
        let (y0, y1) = v.sample_elements(2, seed);
        assert!(check_morphism(&g, &v, &w, &y0, &y1, &oracle()).passed());
    }
}

#[test]
fn identity_butterfly_is_invertible() {
    for l in [FinDimLie2::adjoint(2.0), FinDimLie2::string_type(), FinDimLie2::cross_product()] {
        let b = identity_butterfly(&l);
        let r = check_invertible(&b, &b.samples(3, 5), &oracle()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}

#[test]
fn butterfly_of_an_isomorphism_is_invertible() {
    let (u, v, _, f, _) = random_strict_chain(11);
    let b = butterfly_of_morphism(&f, &u, &v).unwrap();
    let r = check_invertible(&b, &b.samples(3, 2), &oracle()).unwrap();
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn butterfly_of_a_non_injective_morphism_is_not_invertible() {
    let l = FinDimLie2::cross_product();
    let z = FinDimLie2::lie_algebra(0, Vec::new()).unwrap();
    let f = FinDimMorphism::strict(DMatrix::zeros(0, 3), DMatrix::zeros(0, 0));
    let b = butterfly_of_morphism(&f, &l, &z).unwrap();
    let s = b.samples(2, 1);
    assert!(check_butterfly(&b, &s, &oracle()).unwrap().passed());
    assert!(!check_invertible(&b, &s, &oracle()).unwrap().passed());
}

#[test]
fn broken_wing_fails() {
    let l = FinDimLie2::adjoint(1.0);
    let mut b = identity_butterfly(&l);
    // rho(kappa(x)) must vanish; perturb rho on the W1 block
    b.rho[(0, 3)] += 1.0;
    let r = check_butterfly(&b, &b.samples(2, 4), &oracle()).unwrap();
    assert_eq!(r.get("wing.rho-kappa").unwrap().status, crate::report::Status::Fail);
}

#[test]
fn flip_adapter_agrees_with_flipped_matrices() {
    let (u, v, _, f, _) = random_strict_chain(5);
    let b = butterfly_of_morphism(&f, &u, &v).unwrap();
    let fl = b.flipped();
    let s = fl.samples(2, 3);
    let s_flip = ButterflySamples {
        carrier: s.carrier.clone(),
        source1: s.source1.clone(),
        target1: s.target1.clone(),
        source0: s.source0.clone(),
        target0: s.target0.clone(),
    };
    let r1 = check_invertible(&Flip(b.clone()), &s_flip, &oracle()).unwrap();
    let r2 = check_invertible(&fl, &fl.samples(2, 3), &oracle()).unwrap();
    assert!(r1.passed() && r2.passed());
}

#[test]
fn composite_adapter_satisfies_butterfly_axioms_on_fibre() {
    let (u, v, w, f, g) = random_strict_chain(9);
    let b1 = butterfly_of_morphism(&f, &u, &v).unwrap();
    let b2 = butterfly_of_morphism(&g, &v, &w).unwrap();
    let c = Composite::new(b1.clone(), b2.clone());
    // fibre elements: (a, w) over u-space paired with (F0 a + dw, w')
    let (a0, _) = u.sample_elements(2, 8);
    let (_, w1) = w.sample_elements(2, 8);
    let (_, v1) = v.sample_elements(2, 8);
    let mut carrier = Vec::new();
    for (i, a) in a0.iter().enumerate() {
        let wv = &v1[i % v1.len()];
        let mut e1 = DVector::zeros(6);
        e1.rows_mut(0, 3).copy_from(a);
        e1.rows_mut(3, 3).copy_from(wv);
        let mid = &b1.rho * &e1;
        let mut e2 = DVector::zeros(6);
        e2.rows_mut(0, 3).copy_from(&mid);
        e2.rows_mut(3, 3).copy_from(&w1[i % w1.len()]);
        assert!(c.fibre_defect(&(e1.clone(), e2.clone()), &oracle()).unwrap().pass);
        carrier.push((e1, e2));
    }
    let (s0, s1) = u.sample_elements(1, 2);
    let (t0, t1) = w.sample_elements(1, 2);
    let samples = ButterflySamples { carrier, source1: s1, target1: t1, source0: s0, target0: t0 };
    let r = check_butterfly(&c, &samples, &oracle()).unwrap();
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn composition_with_identity_is_two_isomorphic() {
    let (u, v, _, f, _) = random_strict_chain(21);
    let b = butterfly_of_morphism(&f, &u, &v).unwrap();
    let left = compose_butterflies(&identity_butterfly(&u), &b).unwrap();
    let right = compose_butterflies(&b, &identity_butterfly(&v)).unwrap();
    assert_eq!(left.dim(), b.dim());
    assert!(check_butterfly(&left, &left.samples(2, 1), &oracle()).unwrap().passed());
    assert!(find_2iso(&left, &b).is_some());
    assert!(find_2iso(&right, &b).is_some());
}

#[test]
fn composition_of_strict_morphisms_matches_composite_morphism() {
    for seed in 0..3 {
        let (u, v, w, f, g) = random_strict_chain(seed);
        let b1 = butterfly_of_morphism(&f, &u, &v).unwrap();
        let b2 = butterfly_of_morphism(&g, &v, &w).unwrap();
        let comp = compose_butterflies(&b1, &b2).unwrap();
        let direct = butterfly_of_morphism(&g.after(&f).unwrap(), &u, &w).unwrap();
        let r = check_invertible(&comp, &comp.samples(2, seed), &oracle()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let iso = find_2iso(&comp, &direct).expect("composites agree up to 2-isomorphism");
        assert!(iso.residual <= 1e-8);
    }
}

#[test]
fn composition_with_flip_is_two_isomorphic_to_identity() {
    let (u, v, _, f, _) = random_strict_chain(4);
    let b = butterfly_of_morphism(&f, &u, &v).unwrap();
    let loop_ = compose_butterflies(&b, &b.flipped()).unwrap();
    let iso = find_2iso(&loop_, &identity_butterfly(&u)).expect("b followed by its flip is the identity");
    assert!(iso.residual <= 1e-8);
}

#[test]
fn composition_rejects_mismatched_middle() {
    let a = identity_butterfly(&FinDimLie2::adjoint(1.0));
    let b = identity_butterfly(&FinDimLie2::string_type());
    assert!(matches!(compose_butterflies(&a, &b), Err(crate::error::Error::DimensionMismatch(_))));
}

#[test]
fn find_2iso_identity_and_basis_change() {
    let l = FinDimLie2::adjoint(1.0);
    let b = identity_butterfly(&l);
    let iso = find_2iso(&b, &b).unwrap();
    assert!(check_butterfly(&b, &b.samples(1, 1), &oracle()).unwrap().passed());
    assert!(iso.residual <= 1e-8);

    // same butterfly written in a different carrier basis
    let p = DMatrix::from_row_slice(
        6,
        6,
        &[
            1.0, 0.2, 0.0, 0.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.2, 0.1, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0, 0.0, 0.4, 0.0, 1.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 1.0,
        ],
    );
    let q = p.clone().try_inverse().unwrap();
    let mut c = b.clone();
    c.kappa = &q * &b.kappa;
    c.lambda = &q * &b.lambda;
    c.sigma = &b.sigma * &p;
    c.rho = &b.rho * &p;
    let n = 6;
    let mut t = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let v = &q * b.bracket(&p.column(i).into_owned(), &p.column(j).into_owned()).unwrap();
            for k in 0..n {
                t[(i * n + j) * n + k] = v[k];
            }
        }
    }
    c.bracket = t;
    let iso = find_2iso(&c, &b).unwrap();
    assert!((&iso.map - &p).amax() < 1e-6);
}

#[test]
fn find_2iso_absent_for_different_morphisms() {
    let l = FinDimLie2::cross_product();
    let b = identity_butterfly(&l);
    let mut half = FinDimMorphism::identity(&l);
    half.f0 *= 0.0;
    half.f1 *= 0.0;
    let z = butterfly_of_morphism(&half, &l, &l).unwrap();
    assert!(find_2iso(&b, &z).is_none());
    let s = identity_butterfly(&FinDimLie2::string_type());
    assert!(find_2iso(&b, &s).is_none());
    // an invertible d makes every morphism 2-isomorphic to zero
    let a = FinDimLie2::adjoint(1.0);
    let zero = FinDimMorphism::strict(DMatrix::zeros(3, 3), DMatrix::zeros(3, 3));
    assert!(find_2iso(&identity_butterfly(&a), &butterfly_of_morphism(&zero, &a, &a).unwrap()).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn composition_is_associative_up_to_iso(seed in 0u64..1000) {
        let (u, v, w, f, g) = random_strict_chain(seed);
        let b1 = butterfly_of_morphism(&f, &u, &v).unwrap();
        let b2 = butterfly_of_morphism(&g, &v, &w).unwrap();
        let b3 = identity_butterfly(&w);
        let left = compose_butterflies(&compose_butterflies(&b1, &b2).unwrap(), &b3).unwrap();
        let right = compose_butterflies(&b1, &compose_butterflies(&b2, &b3).unwrap()).unwrap();
        prop_assert!(find_2iso(&left, &right).is_some());
    }

    #[test]
    fn composite_carrier_dimension(seed in 0u64..1000) {
        let (u, v, w, f, g) = random_strict_chain(seed);
        let b1 = butterfly_of_morphism(&f, &u, &v).unwrap();
        let b2 = butterfly_of_morphism(&g, &v, &w).unwrap();
        let c = compose_butterflies(&b1, &b2).unwrap();
        // dim E1 + dim E2 - dim V0 - dim V1
        prop_assert_eq!(c.dim(), b1.dim() + b2.dim() - v.n0() - v.n1());
    }
}
