use super::*;
use proptest::prelude::*;

fn pt(pairs: &[(&str, f64)]) -> Point {
    Point::from_pairs(pairs.iter().map(|(k, v)| (k.to_string(), *v)))
}

fn unit_box() -> CoordBox {
    CoordBox::new(&["x", "y", "z"], &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)])
}

#[test]
fn eval_polynomial() {
    let e = parse("x^2*y").unwrap();
    assert_eq!(e.eval(&pt(&[("x", 2.0), ("y", 3.0)])).unwrap(), 12.0);
}

#[test]
fn eval_sin_zero() {
    assert_eq!(parse("sin(0)").unwrap().eval(&Point::new()).unwrap(), 0.0);
}

#[test]
fn eval_pole_is_domain_error() {
    let e = parse("x/(x-1)").unwrap();
    assert!(matches!(e.eval(&pt(&[("x", 1.0)])), Err(ExprError::DomainError { .. })));
}

#[test]
fn eval_log_nonpositive_is_domain_error() {
    let e = parse("log(x)").unwrap();
    assert!(matches!(e.eval(&pt(&[("x", -1.0)])), Err(ExprError::DomainError { .. })));
}

#[test]
fn eval_missing_variable() {
    let e = parse("x + w").unwrap();
    assert_eq!(e.eval(&pt(&[("x", 1.0)])), Err(ExprError::MissingVariable("w".into())));
}

#[test]
fn diff_power_rule() {
    let d = parse("x^2*y").unwrap().diff("x");
    assert_eq!(d, parse("2*x*y").unwrap());
}

#[test]
fn diff_sin() {
    assert_eq!(parse("sin(x)").unwrap().diff("x"), parse("cos(x)").unwrap());
}

#[test]
fn diff_constant_and_absent_variable() {
    assert!(parse("3.5").unwrap().diff("x").is_zero());
    assert!(parse("y*z + sin(y)").unwrap().diff("x").is_zero());
}

#[test]
fn like_terms_cancel() {
    assert!(parse("x*y - y*x").unwrap().is_zero());
    assert_eq!(parse("x*x").unwrap(), parse("x^2").unwrap());
    assert!(parse("(x+1)^2 - (x+1)*(x+1)").unwrap().is_zero());
}

#[test]
fn square_identity_on_samples() {
    let a = parse("(x+1)^2").unwrap();
    let b = parse("x^2 + 2*x + 1").unwrap();
    let r = equal_on_samples(&a, &b, &unit_box(), 25, 1e-9, 0x5EED).unwrap();
    assert!(r.pass);
    assert!(r.max_residual < 1e-12);
}

#[test]
fn shifted_variable_fails_with_witness() {
    let a = parse("x").unwrap();
    let b = parse("x + 0.001").unwrap();
    let r = equal_on_samples(&a, &b, &unit_box(), 25, 1e-9, 0x5EED).unwrap();
    assert!(!r.pass);
    assert!(r.witness.is_some());
    assert!((r.max_residual - 1e-3).abs() < 1e-12);
}

#[test]
fn pythagorean_identity_on_samples() {
    let a = parse("sin(x)^2 + cos(x)^2").unwrap();
    let r = equal_on_samples(&a, &Expr::one(), &unit_box(), 25, 1e-9, 0x5EED).unwrap();
    assert!(r.pass);
}

#[test]
fn domain_error_carries_witness() {
    let a = parse("log(x)").unwrap();
    let err = equal_on_samples(&a, &Expr::zero(), &unit_box(), 25, 1e-9, 1).unwrap_err();
    match err {
        ExprError::DomainError { at, .. } => assert!(at.contains("x:")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_requests_rejected() {
    let a = parse("x").unwrap();
    assert!(equal_on_samples(&a, &a, &unit_box(), 0, 1e-9, 1).is_err());
    assert!(equal_on_samples(&a, &a, &unit_box(), 3, 0.0, 1).is_err());
    let flat = CoordBox::new(&["x"], &[(1.0, 1.0)]);
    assert!(equal_on_samples(&a, &a, &flat, 3, 1e-9, 1).is_err());
}

#[test]
fn parse_errors_report_offset() {
    match parse("x^2 + * y") {
        Err(ExprError::ParseError { offset, .. }) => assert_eq!(offset, 6),
        other => panic!("unexpected {other:?}"),
    }
    match parse("sin(x") {
        Err(ExprError::ParseError { offset, .. }) => assert_eq!(offset, 5),
        other => panic!("unexpected {other:?}"),
    }
    match parse("foo(x)") {
        Err(ExprError::ParseError { offset, .. }) => assert_eq!(offset, 0),
        other => panic!("unexpected {other:?}"),
    }
    assert!(parse("x^y").is_err());
}

#[test]
fn parse_grammar_samples() {
    let e = parse("x^2*y + sin(z)").unwrap();
    let v = e.eval(&pt(&[("x", 2.0), ("y", 0.5), ("z", 0.3)])).unwrap();
    assert!((v - (2.0 + 0.3f64.sin())).abs() < 1e-15);
    let e = parse("-x^2").unwrap();
    assert_eq!(e.eval(&pt(&[("x", 3.0)])).unwrap(), -9.0);
    let e = parse("2^(-1) * x^(-2)").unwrap();
    assert_eq!(e.eval(&pt(&[("x", 2.0)])).unwrap(), 0.125);
    let e = parse("1.5e-1*exp(0)").unwrap();
    assert!((e.eval(&Point::new()).unwrap() - 0.15).abs() < 1e-15);
}

#[test]
fn poly_round_trip_and_unit_integral() {
    let e = parse("(x + 2*t)^2").unwrap();
    let p = Poly::from_expr(&e).unwrap();
    // integral over t in [0,1] of x^2 + 4xt + 4t^2 = x^2 + 2x + 4/3
    let q = p.integrate_unit("t").to_expr();
    let expect = parse("x^2 + 2*x + 4/3").unwrap();
    let r = equal_on_samples(&q, &expect, &CoordBox::new(&["x"], &[(-2.0, 2.0)]), 10, 1e-12, 3).unwrap();
    assert!(r.pass);
    assert!(Poly::from_expr(&parse("sin(x)").unwrap()).is_none());
}

// random polynomial of degree <= 4 in x, y, z
fn arb_poly() -> impl Strategy<Value = Expr> {
    prop::collection::vec((-3i32..=3, 0u32..=2, 0u32..=2, 0u32..=2), 1..5).prop_map(|terms| {
        Expr::sum(terms.into_iter().filter(|(_, a, b, c)| a + b + c <= 4).map(|(k, a, b, c)| {
            Expr::product([
                Expr::constant(k as f64),
                Expr::pow(&Expr::var("x"), a as i32),
                Expr::pow(&Expr::var("y"), b as i32),
                Expr::pow(&Expr::var("z"), c as i32),
            ])
        }))
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i32..=4).prop_map(|k| Expr::constant(k as f64 * 0.5)),
        prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 0i32..=3).prop_map(|(a, n)| Expr::pow(&a, n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| (a * Expr::constant(0.1)).exp()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule(e in arb_poly(), f in arb_poly()) {
        let lhs = (&e * &f).diff("x");
        let rhs = &e.diff("x") * &f + &e * &f.diff("x");
        let r = equal_on_samples(&lhs, &rhs, &unit_box(), 25, 1e-9, 0x5EED).unwrap();
        prop_assert!(r.pass, "residual {}", r.max_residual);
    }

    #[test]
    fn partials_commute(e in arb_expr()) {
        let a = e.diff("x").diff("y");
        let b = e.diff("y").diff("x");
        let r = equal_on_samples(&a, &b, &unit_box(), 25, 1e-9, 0x5EED).unwrap();
        prop_assert!(r.pass, "residual {}", r.max_residual);
    }

    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        let once = e.normalize();
        prop_assert_eq!(once.normalize(), once);
    }

    #[test]
    fn eval_is_deterministic(e in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = pt(&[("x", x), ("y", y), ("z", 0.25)]);
        let a = e.eval(&p);
        let b = e.eval(&p);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn display_parses_back(e in arb_expr()) {
        let back = parse(&e.to_string()).unwrap();
        let r = equal_on_samples(&e, &back, &unit_box(), 10, 1e-12, 7).unwrap();
        prop_assert!(r.pass, "{} vs {}", e, back);
    }

    #[test]
    fn poly_conversion_preserves_values(e in arb_poly()) {
        let back = Poly::from_expr(&e).unwrap().to_expr();
        let r = equal_on_samples(&e, &back, &unit_box(), 10, 1e-12, 7).unwrap();
        prop_assert!(r.pass);
    }
}
