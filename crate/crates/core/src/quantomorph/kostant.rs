use crate::cartan::{Form, VectorField};
use crate::error::{Error, Result};
use crate::symexpr::{CoordBox, Expr, Oracle, SampleOutcome};

/// The lift `X = X_f + h d/dtheta` of a function to the trivial circle
/// bundle with connection `A + dtheta`, with the sampled residuals of
/// `L_X gamma = 0` and `i_X gamma = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct KostantLift {
    pub hamiltonian: VectorField,
    pub vertical: Expr,
    pub quantomorphism: SampleOutcome,
    pub contraction: SampleOutcome,
}

fn det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => Expr::sum((0..n).map(|j| {
            let minor: Vec<Vec<Expr>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, e)| e.clone()).collect())
                .collect();
            let t = &m[0][j] * &det(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })),
    }
}

/// Solves `i_{X_f} omega = -df` by Cramer's rule and checks the lift is an
/// infinitesimal quantomorphism on `region`.
pub fn kostant_lift(region: &CoordBox, omega: &Form, a: &Form, f: &Expr, oracle: &Oracle) -> Result<KostantLift> {
    if omega.degree() != 2 || a.degree() != 1 {
        return Err(Error::DegreeError("expected a 2-form and a 1-form".into()));
    }
    let pre = a.exterior_d().compare(omega, region, oracle)?;
    if !pre.pass {
        return Err(Error::PreconditionFailed { hypothesis: "dA = omega".into(), residual: pre.max_residual });
    }
    let coords = omega.coords();
    let n = coords.len();
    let basis: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(coords, i)).collect();
    let mut m = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        let ii = omega.interior(&basis[i])?;
        for j in 0..n {
            m[i][j] = ii.interior(&basis[j])?.scalar();
        }
    }
    // omega(X, d_j) = -d_j f with omega skew gives M X = grad f
    let grad: Vec<Expr> = coords.iter().map(|x| f.diff(x)).collect();
    let d = det(&m).normalize();
    let mut smallest = f64::INFINITY;
    for p in region.sample(oracle.samples, oracle.seed) {
        smallest = smallest.min(d.eval(&p)?.abs());
    }
    if d.is_zero() || smallest <= oracle.tol {
        return Err(Error::NoHamiltonianField(format!("omega is degenerate (|det| = {:e})", smallest.min(1.0))));
    }
    let comps: Vec<Expr> = (0..n)
        .map(|i| {
            let replaced: Vec<Vec<Expr>> = m
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.iter().enumerate().map(|(c, e)| if c == i { grad[r].clone() } else { e.clone() }).collect()
                })
                .collect();
            (&det(&replaced) / &d).normalize()
        })
        .collect();
    let xf = VectorField::new(coords, comps)?;
    let ia = a.interior(&xf)?.scalar();
    let vertical = (f - &ia).normalize();
    let contraction_expr = &ia + &vertical;
    let contraction = oracle.compare_many(&[(contraction_expr.clone(), f.clone())], region)?;
    let lie = Form::function(coords, contraction_expr).exterior_d().add(&omega.interior(&xf)?)?;
    let quantomorphism = lie.compare_zero(region, oracle)?;
    Ok(KostantLift { hamiltonian: xf, vertical, quantomorphism, contraction })
}
