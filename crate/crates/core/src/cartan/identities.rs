use super::{CartanError, Form, VectorField};
use crate::report::Report;
use crate::symexpr::{CoordBox, Expr, Oracle};

/// `(L_X a)_I = X^k d_k a_I + sum_r a_{I with i_r -> k} d_{i_r} X^k`, summed
/// over all index tuples without using `d` or contraction.
pub fn lie_derivative_coordinates(a: &Form, x: &VectorField) -> Result<Form, CartanError> {
    if a.coords()[..] != x.coords()[..] {
        return Err(CartanError::DimensionMismatch(a.coords().to_vec(), x.coords().to_vec()));
    }
    let cs = a.coords();
    let n = cs.len();
    let mut terms = Vec::new();
    for (idx, c) in a.terms() {
        let transport = Expr::sum((0..n).map(|k| &x.comps()[k] * &c.diff(&cs[k])));
        terms.push((idx.clone(), transport));
        for r in 0..idx.len() {
            // L_X dx^k = dX^k
            for i in 0..n {
                let mut moved = idx.clone();
                moved[r] = i;
                terms.push((moved, c * &x.comps()[idx[r]].diff(&cs[i])));
            }
        }
    }
    Ok(Form::from_terms(cs, a.degree(), terms))
}

/// Samples `d^2 = 0`, the magic formula against the coordinate Lie
/// derivative, `[L_X, i_Y] = i_[X,Y]` and the graded Leibniz rule on every
/// form, field and pair supplied.
pub fn check_cartan_identities(
    forms: &[Form],
    fields: &[VectorField],
    region: &CoordBox,
    oracle: &Oracle,
) -> Result<Report, CartanError> {
    let mut report = Report::new("cartan");
    for (i, a) in forms.iter().enumerate() {
        report.record(format!("d-squared({})", i + 1), &a.exterior_d().exterior_d().compare_zero(region, oracle)?);
        for (j, x) in fields.iter().enumerate() {
            let magic = a.lie_derivative(x)?;
            report.record(
                format!("magic({},{})", i + 1, j + 1),
                &magic.compare(&lie_derivative_coordinates(a, x)?, region, oracle)?,
            );
            if a.degree() == 0 {
                continue;
            }
            for (k, y) in fields.iter().enumerate() {
                let lhs = a.interior(y)?.lie_derivative(x)?.sub(&magic.interior(y)?)?;
                let rhs = a.interior(&x.bracket(y)?)?;
                report.record(
                    format!("lie-interior({},{},{})", i + 1, j + 1, k + 1),
                    &lhs.compare(&rhs, region, oracle)?,
                );
            }
        }
        for (j, b) in forms.iter().enumerate().skip(i) {
            if a.degree() + b.degree() + 1 > a.dim() {
                continue;
            }
            let lhs = a.wedge(b)?.exterior_d();
            let second = a.wedge(&b.exterior_d())?;
            let second = if a.degree() % 2 == 0 { second } else { second.neg() };
            let rhs = a.exterior_d().wedge(b)?.add(&second)?;
            report.record(format!("leibniz({},{})", i + 1, j + 1), &lhs.compare(&rhs, region, oracle)?);
        }
    }
    Ok(report)
}
