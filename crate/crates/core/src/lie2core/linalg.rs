use nalgebra::{DMatrix, DVector};

const RANK_TOL: f64 = 1e-9;

/// Orthonormal basis of the column span by pivoted Gram-Schmidt with
/// reorthogonalisation; columns below `1e-9 * max(1, largest norm)` after
/// projection count as dependent.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    let mut rest: Vec<DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let scale = rest.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let cut = RANK_TOL * scale;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while !rest.is_empty() && basis.len() < rows {
        let (k, norm) =
            rest.iter()
                .enumerate()
                .map(|(k, c)| (k, c.norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= cut {
            break;
        }
        let mut q = rest.swap_remove(k);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&q);
                q -= b * c;
            }
        }
        let n = q.norm();
        if n <= cut {
            continue;
        }
        q /= n;
        for c in rest.iter_mut() {
            let t = q.dot(c);
            *c -= &q * t;
        }
        basis.push(q);
    }
    if basis.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// Numerical rank, consistent with [`column_basis`].
pub fn rank(m: &DMatrix<f64>) -> usize {
    column_basis(m).ncols()
}

/// Orthonormal basis of the null space as columns.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    let row = column_basis(&m.transpose());
    let id = DMatrix::<f64>::identity(n, n);
    let proj = if row.ncols() == 0 { id.clone() } else { &id - &row * row.transpose() };
    column_basis(&proj)
}

/// Minimum-norm least-squares solution and its residual norm.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let row = column_basis(&a.transpose());
    if row.ncols() == 0 {
        return (DVector::zeros(a.ncols()), b.norm());
    }
    let reduced = a * &row;
    let qr = reduced.qr();
    let q = qr.q();
    let r = qr.r();
    let c = r.solve_upper_triangular(&(q.transpose() * b)).unwrap_or_else(|| DVector::zeros(row.ncols()));
    let x = row * c;
    let res = (a * &x - b).norm();
    (x, res)
}
