use super::*;
use crate::lie2core::{check_lie2_axioms, check_morphism};
use crate::report::Status;
use crate::testing::{cube, e, f2, field, flat, one_form, three_chart, trivial_x};

fn o() -> Oracle {
    Oracle::default()
}

/// Connection-preserving lift `(xi, -i_xi A, i_xi B_i + beta)`, valid when
/// `d beta = i_xi dB`.
fn conn_lift(c: &DeligneCocycle, xi: &VectorField, beta: &Form) -> ConnMultVF {
    let base = horizontal_lift(c, xi).unwrap();
    let a = CechForm::map_overlaps(&c.cover, c.coords(), 1, 1, |i| Ok(c.b.get(i).interior(xi)?.add(beta)?)).unwrap();
    ConnMultVF::new(base, a).unwrap()
}

/// Objects preserving a curving with `dB = dx^dy^dz`.
fn volume_objects(c: &DeligneCocycle) -> Vec<ConnMultVF> {
    let k = c.coords().clone();
    let mut out = vec![
        conn_lift(c, &field(&k, ["1", "0", "0"]), &one_form(&k, ["0", "0", "y"])),
        conn_lift(c, &field(&k, ["0", "1", "0"]), &one_form(&k, ["z", "0", "0"])),
        conn_lift(c, &field(&k, ["0", "0", "1"]), &one_form(&k, ["0", "x", "0"])),
        conn_lift(c, &field(&k, ["-y", "x", "0"]), &one_form(&k, ["0", "0", "-(x^2 + y^2) / 2"])),
    ];
    let u = AlgebroidSection::from_exprs(&k, (0..c.cover.len()).map(|i| (i, e(&format!("x*y + {}", i))))).unwrap();
    out.push(diff_x(c, &u).unwrap());
    out
}

fn sections(c: &DeligneCocycle) -> Vec<AlgebroidSection> {
    let k = c.coords().clone();
    let n = c.cover.len();
    vec![
        AlgebroidSection::from_exprs(&k, (0..n).map(|i| (i, e("x*y")))).unwrap(),
        AlgebroidSection::from_exprs(&k, (0..n).map(|i| (i, e(&format!("sin(z) + {}*x", i))))).unwrap(),
    ]
}

#[test]
fn multvf_cocycle_examples() {
    let t = trivial_x();
    let k = t.coords().clone();
    let v = MultVF::new(field(&k, ["x", "1", "0"]), CechForm::zero(&k, 0, 2)).unwrap();
    assert!(validate_multvf(&t, &v, &o()).passed());

    let c = f2(false);
    let f = CechForm::functions(&k, 2, [(vec![0, 1], e("exp(x) * y"))]).unwrap();
    assert!(validate_multvf(&c, &MultVF::new(field(&k, ["z", "0", "1"]), f).unwrap(), &o()).passed());

    let c3 = three_chart();
    let v = MultVF::new(field(&k, ["0", "0", "1"]), CechForm::zero(&k, 0, 2)).unwrap();
    let r = validate_multvf(&c3, &v, &o());
    assert!(!r.passed());
    assert!((r.get("cocycle(1,2,3)").unwrap().residual - 1.0).abs() < 1e-12);
}

#[test]
fn horizontal_lift_examples() {
    let c = f2(false);
    let k = c.coords().clone();
    let region = cube(-2.0, 2.0);
    let v = horizontal_lift(&c, &field(&k, ["0", "0", "1"])).unwrap();
    assert!(oracle_eq(&v.f.scalar(&[0, 1]), &e("-y"), &region));
    assert!(horizontal_lift(&c, &VectorField::zero(&k)).unwrap().f.entries().is_empty());
    let t = horizontal_lift(&trivial_x(), &field(&k, ["y", "0", "1"])).unwrap();
    assert!(t.f.entries().is_empty());
    for c in [f2(false), three_chart()] {
        let v = horizontal_lift(&c, &field(&k, ["y", "x*z", "1"])).unwrap();
        assert!(validate_multvf(&c, &v, &o()).passed());
    }
}

fn oracle_eq(a: &Expr, b: &Expr, region: &CoordBox) -> bool {
    o().compare_many(&[(a.clone(), b.clone())], region).unwrap().pass
}

#[test]
fn curving_homotopy_examples() {
    let c = f2(false);
    let k = c.coords().clone();
    let region = cube(-2.0, 2.0);
    let u = f_b_homotopy(&c, &field(&k, ["0", "1", "0"]), &field(&k, ["0", "0", "1"])).unwrap();
    assert!(oracle_eq(&u.value(0), &e("-x"), &region));
    let xi = field(&k, ["y", "1", "z"]);
    assert!(f_b_homotopy(&c, &xi, &xi).unwrap().u.compare(&CechForm::zero(&k, 0, 1), &c.cover, &o()).unwrap().pass);
    let zero_b = DeligneCocycle::new(c.cover.clone(), c.phi.clone(), c.a.clone(), CechForm::zero(&k, 2, 1)).unwrap();
    assert!(f_b_homotopy(&zero_b, &xi, &field(&k, ["1", "0", "0"])).unwrap().u.entries().is_empty());
}

#[test]
fn bracket_examples() {
    let t = trivial_x();
    let k = t.coords().clone();
    let dx = ConnMultVF::new(
        MultVF::new(field(&k, ["1", "0", "0"]), CechForm::zero(&k, 0, 2)).unwrap(),
        CechForm::zero(&k, 1, 1),
    )
    .unwrap();
    let dy = ConnMultVF::new(
        MultVF::new(field(&k, ["0", "1", "0"]), CechForm::zero(&k, 0, 2)).unwrap(),
        CechForm::zero(&k, 1, 1),
    )
    .unwrap();
    match bracket_x(&XElement::Object(dx.clone()), &XElement::Object(dy.clone())).unwrap() {
        XElement::Object(b) => assert!(b.xi().compare(&VectorField::zero(&k), &cube(-1.0, 1.0), &o()).unwrap().pass),
        _ => panic!("expected an object"),
    }

    let c = f2(false);
    let x =
        MultVF::new(field(&k, ["0", "0", "1"]), CechForm::functions(&k, 2, [(vec![0, 1], e("-y"))]).unwrap()).unwrap();
    let y = MultVF::new(field(&k, ["0", "1", "0"]), CechForm::zero(&k, 0, 2)).unwrap();
    let b = bracket_mult(&x, &y).unwrap();
    assert!(oracle_eq(&b.f.scalar(&[0, 1]), &e("1"), c.cover.overlap(&[0, 1]).unwrap()));

    let one = AlgebroidSection::from_exprs(&k, [(0, e("1")), (1, e("1"))]).unwrap();
    match bracket_x(&XElement::Object(dx.clone()), &XElement::Section(one.clone())).unwrap() {
        XElement::Section(s) => assert!(s.u.entries().is_empty()),
        _ => panic!("expected a section"),
    }
    assert!(matches!(bracket_x(&XElement::Section(one.clone()), &XElement::Section(one)), Err(Error::DegreeError(_))));
}

#[test]
fn action_on_sections_is_lie_derivative() {
    let c = f2(false);
    let k = c.coords().clone();
    let xi = field(&k, ["y", "x", "z^2"]);
    for s in sections(&c) {
        let got = act_section(&xi, &s).unwrap();
        for i in 0..2 {
            let want = Form::function(&k, s.value(i)).lie_derivative(&xi).unwrap().scalar();
            assert!(oracle_eq(&got.value(i), &want, &c.cover.charts()[i]));
        }
    }
}

#[test]
fn differential_examples() {
    let c = f2(false);
    let k = c.coords().clone();
    let region = c.cover.overlap(&[0, 1]).unwrap().clone();
    let u = AlgebroidSection::from_exprs(&k, [(1, e("x"))]).unwrap();
    let d = diff_x(&c, &u).unwrap();
    assert!(oracle_eq(&d.base.f.scalar(&[0, 1]), &e("-x"), &region));
    assert!(d.a.get(&[0]).is_structurally_zero());
    assert!(d.a.get(&[1]).compare(&Form::dx(&k, 0).neg(), &region, &o()).unwrap().pass);
    // the vertical part is minus the Čech differential of u
    assert!(d.base.f.compare(&cech_delta(&u.u, &c.cover).unwrap().scale(-1.0), &c.cover, &o()).unwrap().pass);

    let konst = AlgebroidSection::from_exprs(&k, [(0, e("2")), (1, e("2"))]).unwrap();
    let z = diff_x(&c, &konst).unwrap();
    assert!(z.base.f.entries().is_empty() && z.a.entries().is_empty());

    let t = trivial_x();
    let d = diff_x(&t, &AlgebroidSection::from_exprs(&k, [(0, e("x"))]).unwrap()).unwrap();
    assert!(d.base.f.entries().is_empty());
    assert!(d.a.get(&[0]).compare(&Form::dx(&k, 0).neg(), &cube(-1.0, 1.0), &o()).unwrap().pass);
}

#[test]
fn connection_preservation_examples() {
    let t = trivial_x();
    let k = t.coords().clone();
    let good = ConnMultVF::new(
        MultVF::new(field(&k, ["1", "0", "0"]), CechForm::zero(&k, 0, 2)).unwrap(),
        CechForm::zero(&k, 1, 1).with(vec![0], one_form(&k, ["0", "0", "y"])).unwrap(),
    )
    .unwrap();
    assert!(validate_connpres(&t, &good, &o(), true).passed());

    for c in [f2(false), three_chart(), trivial_x()] {
        for s in sections(&c) {
            let r = validate_connpres(&c, &diff_x(&c, &s).unwrap(), &o(), true);
            assert!(r.passed(), "{}", r.to_text());
        }
    }

    let bad = ConnMultVF::new(good.base.clone(), CechForm::zero(&k, 1, 1)).unwrap();
    let r = validate_connpres(&t, &bad, &o(), true);
    assert_eq!(r.get("curving(1)").unwrap().status, Status::Fail);
    assert!(validate_connpres(&t, &bad, &o(), false).passed());
}

#[test]
fn lifted_objects_preserve_the_connection() {
    for c in [f2(false), trivial_x()] {
        for v in volume_objects(&c) {
            let r = validate_connpres(&c, &v, &o(), true);
            assert!(r.passed(), "{}", r.to_text());
        }
    }
}

#[test]
fn gerbe_lie2_is_strict_lie2_algebra() {
    for c in [f2(false), trivial_x()] {
        let l = GerbeLie2 { cocycle: c.clone() };
        let r = check_lie2_axioms(&l, &volume_objects(&c), &sections(&c), &o());
        assert!(r.passed(), "{}", r.to_text());
    }
}

#[test]
fn bracket_closes_on_connection_preserving_objects() {
    let c = f2(false);
    let objs = volume_objects(&c);
    for a in &objs {
        for b in &objs {
            let r = validate_connpres(&c, &bracket_conn(a, b).unwrap(), &o(), true);
            assert!(r.passed(), "{}", r.to_text());
        }
    }
}

#[test]
fn morphism_defect_examples() {
    let c = f2(false);
    let k = c.coords().clone();
    let (dx, dy, dz) = (field(&k, ["1", "0", "0"]), field(&k, ["0", "1", "0"]), field(&k, ["0", "0", "1"]));
    let d = morphism_defect(&c, &dx, &dy, &dz).unwrap();
    for i in 0..2 {
        assert!(oracle_eq(&d.value(i), &e("-1"), &c.cover.charts()[i]));
    }
    let (x1, x2, x3) = (field(&k, ["y", "z", "x"]), field(&k, ["x*z", "1", "0"]), field(&k, ["0", "sin(x)", "y"]));
    let want = curvature_contraction(&c, &x1, &x2, &x3).unwrap();
    assert!(morphism_defect(&c, &x1, &x2, &x3).unwrap().u.compare(&want.u, &c.cover, &o()).unwrap().pass);
    let zero = CechForm::zero(&k, 0, 1);
    assert!(morphism_defect(&flat(), &x1, &x2, &x3).unwrap().u.compare(&zero, &c.cover, &o()).unwrap().pass);
    assert!(morphism_defect(&c, &x1, &x1, &x3).unwrap().u.compare(&zero, &c.cover, &o()).unwrap().pass);
}

#[test]
fn horizontal_lift_is_a_morphism_exactly_when_flat() {
    let k = f2(false).coords().clone();
    let x0 = vec![
        field(&k, ["1", "0", "0"]),
        field(&k, ["0", "1", "0"]),
        field(&k, ["0", "0", "1"]),
        field(&k, ["y", "x*z", "0"]),
    ];
    let src = VectorFieldAlgebra { region: cube(-2.0, 2.0), coords: k.clone() };
    for (c, flat_case) in [(flat(), true), (f2(false), false)] {
        let lift = HorizontalLift { cocycle: c.clone() };
        let tgt = MultVFLie2 { cocycle: c };
        let r = check_morphism(&lift, &src, &tgt, &x0, &[()], &o());
        for id in ["chain-map", "skew.homotopy", "homotopy.degree-zero", "homotopy.degree-one"] {
            assert_eq!(r.get(id).unwrap().status, Status::Pass, "{}", r.to_text());
        }
        assert_eq!(r.get("jacobiator").unwrap().status == Status::Pass, flat_case);
    }
}

#[test]
fn vertical_objects_come_from_sections() {
    let c = three_chart();
    for s in sections(&c) {
        let f = diff_x(&c, &s).unwrap().base.f;
        let u = section_from_vertical(&c, &f).unwrap();
        let back = diff_x(&c, &u).unwrap().base.f;
        assert!(back.compare(&f, &c.cover, &o()).unwrap().pass);
    }
}

#[test]
fn same_base_objects_differ_by_closed_global_form() {
    let c = f2(false);
    let k = c.coords().clone();
    let xi = field(&k, ["1", "0", "0"]);
    let v1 = conn_lift(&c, &xi, &one_form(&k, ["0", "0", "y"]));
    let v2 = conn_lift(&c, &xi, &one_form(&k, ["y*z", "x*z", "y + x*y"]));
    let (diff, closed) = connection_difference(&c, &v1, &v2, &o()).unwrap();
    assert!(closed.pass);
    assert!(diff.compare(&one_form(&k, ["y*z", "x*z", "x*y"]), &cube(-2.0, 2.0), &o()).unwrap().pass);
    let other = conn_lift(&c, &field(&k, ["0", "1", "0"]), &one_form(&k, ["z", "0", "0"]));
    assert!(connection_difference(&c, &v1, &other, &o()).is_err());
}
