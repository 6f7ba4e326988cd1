use std::collections::BTreeMap;

use super::{CartanError, Form, VectorField};
use crate::symexpr::{Expr, Poly};

const T: &str = "__homotopy_t";

/// Radial homotopy operator about `center` for polynomial forms:
/// `H(a) = i_R int_0^1 t^(k-1) a(c + t (x - c)) dt` with `R = (x - c) d/dx`.
/// Satisfies `dH + Hd = id` in positive degree, so `d H(a) = a` for closed `a`.
pub fn homotopy_operator(form: &Form, center: &[f64]) -> Result<Form, CartanError> {
    let coords = form.coords().clone();
    if center.len() != coords.len() {
        return Err(CartanError::DimensionMismatch(coords.to_vec(), vec![format!("{} center values", center.len())]));
    }
    let k = form.degree();
    if k == 0 {
        return Ok(Form::zero(&coords, 0));
    }
    let t = Expr::var(T);
    let shift: Vec<Expr> = coords.iter().zip(center).map(|(n, c)| &Expr::var(n) - &Expr::constant(*c)).collect();
    let subst: BTreeMap<String, Expr> =
        coords.iter().zip(center).zip(&shift).map(|((n, c), s)| (n.clone(), &Expr::constant(*c) + &(&t * s))).collect();
    let weight = Expr::pow(&t, k as i32 - 1);
    let mut integrated = Vec::new();
    for (idx, c) in form.terms() {
        let e = &c.substitute(&subst) * &weight;
        let p = Poly::from_expr(&e).ok_or_else(|| CartanError::NotPolynomial(c.to_string()))?;
        integrated.push((idx.clone(), p.integrate_unit(T).to_expr()));
    }
    let g = Form::from_terms(&coords, k, integrated);
    let radial = VectorField::new(&coords, shift)?;
    g.interior(&radial)
}
