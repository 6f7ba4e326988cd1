use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{CartanError, Form, VectorField};
use crate::symexpr::{CoordBox, Expr, Oracle, Point, SampleOutcome};

/// All strictly increasing index tuples of length `k` below `n`.
pub(crate) fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

struct Flow<'a> {
    field: &'a VectorField,
    jac: Vec<Vec<Expr>>,
}

impl<'a> Flow<'a> {
    fn new(field: &'a VectorField) -> Self {
        let jac = field.comps().iter().map(|c| field.coords().iter().map(|n| c.diff(n)).collect()).collect();
        Flow { field, jac }
    }

    fn point(&self, x: &DVector<f64>) -> Point {
        Point::from_pairs(self.field.coords().iter().cloned().zip(x.iter().copied()))
    }

    // right-hand side of the flow together with its variational equation
    fn rhs(&self, x: &DVector<f64>, m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), CartanError> {
        let n = x.len();
        let p = self.point(x);
        let mut v = DVector::zeros(n);
        let mut dx = DMatrix::zeros(n, n);
        for i in 0..n {
            v[i] = self.field.comps()[i].eval(&p)?;
            for j in 0..n {
                dx[(i, j)] = self.jac[i][j].eval(&p)?;
            }
        }
        Ok((v, dx * m))
    }

    /// One classical Runge-Kutta step of size `h` for the point and the
    /// Jacobian of the flow map.
    fn step(&self, x0: &DVector<f64>, h: f64) -> Result<(DVector<f64>, DMatrix<f64>), CartanError> {
        let n = x0.len();
        let m0 = DMatrix::identity(n, n);
        let (k1, l1) = self.rhs(x0, &m0)?;
        let (k2, l2) = self.rhs(&(x0 + &k1 * (h / 2.0)), &(&m0 + &l1 * (h / 2.0)))?;
        let (k3, l3) = self.rhs(&(x0 + &k2 * (h / 2.0)), &(&m0 + &l2 * (h / 2.0)))?;
        let (k4, l4) = self.rhs(&(x0 + &k3 * h), &(&m0 + &l3 * h))?;
        let x = x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let m = &m0 + (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (h / 6.0);
        Ok((x, m))
    }

    fn pulled_back(&self, form: &Form, x0: &DVector<f64>, h: f64) -> Result<BTreeMap<Vec<usize>, f64>, CartanError> {
        let (x, m) = self.step(x0, h)?;
        let p = self.point(&x);
        let k = form.degree();
        let mut out = BTreeMap::new();
        for i_idx in index_tuples(x0.len(), k) {
            let mut acc = 0.0;
            for (j_idx, c) in form.terms() {
                let det =
                    if k == 0 { 1.0 } else { DMatrix::from_fn(k, k, |r, s| m[(j_idx[r], i_idx[s])]).determinant() };
                acc += c.eval(&p)? * det;
            }
            out.insert(i_idx, acc);
        }
        Ok(out)
    }
}

/// Central finite difference of the pullback of `form` along the flow of
/// `field`, evaluated at `at`; one value per increasing index tuple.
pub fn flow_lie_derivative_at(
    form: &Form,
    field: &VectorField,
    at: &[f64],
    h: f64,
) -> Result<BTreeMap<Vec<usize>, f64>, CartanError> {
    let flow = Flow::new(field);
    let x0 = DVector::from_column_slice(at);
    let plus = flow.pulled_back(form, &x0, h)?;
    let minus = flow.pulled_back(form, &x0, -h)?;
    Ok(plus
        .into_iter()
        .map(|(k, v)| {
            let d = (v - minus[&k]) / (2.0 * h);
            (k, d)
        })
        .collect())
}

/// Compares the symbolic Lie derivative with the flow difference quotient at
/// the oracle's sample points, passing when `|a - b| <= tol (1 + |a|)`.
pub fn check_lie_by_flow(
    form: &Form,
    field: &VectorField,
    region: &CoordBox,
    oracle: &Oracle,
    h: f64,
    tol: f64,
) -> Result<SampleOutcome, CartanError> {
    let symbolic = form.lie_derivative(field)?;
    let mut out = SampleOutcome { pass: true, max_residual: 0.0, witness: None };
    for p in region.sample(oracle.samples, oracle.seed) {
        let at: Vec<f64> = form
            .coords()
            .iter()
            .map(|c| p.get(c).ok_or_else(|| crate::symexpr::ExprError::MissingVariable(c.clone())))
            .collect::<Result<_, _>>()?;
        let numeric = flow_lie_derivative_at(form, field, &at, h)?;
        let mut worst = 0.0f64;
        let mut ok = true;
        for (idx, v) in numeric {
            let a = symbolic.coeff(&idx).eval(&p)?;
            let r = (a - v).abs();
            if r > tol * (1.0 + a.abs()) {
                ok = false;
            }
            worst = worst.max(r);
        }
        out.merge(SampleOutcome { pass: ok, max_residual: worst, witness: Some(p) });
    }
    Ok(out)
}
