use nalgebra::{DMatrix, DVector};

use crate::cartan::{Coords, Form, VectorField};
use crate::error::{Error, Result};
use crate::lie2core::{rank, FinDimLie2, Lie2Morphism};
use crate::plectic::HamPair;
use crate::report::Report;
use crate::symexpr::{CoordBox, Expr, Oracle};

/// A coordinate patch of a Lie group with Maurer–Cartan forms per basis
/// element, a Cartan 3-form, an invariant inner product and structure
/// constants `c[(i*n+j)*n+k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    pub coords: Coords,
    pub region: CoordBox,
    pub theta_left: Vec<Form>,
    pub theta_right: Vec<Form>,
    pub eta: Form,
    pub inner: DMatrix<f64>,
    pub structure: Vec<f64>,
}

/// A box manifold with a 2-form, a map into the group patch and the
/// generating vector fields of the action.
#[derive(Debug, Clone, PartialEq)]
pub struct QHamData {
    pub coords: Coords,
    pub region: CoordBox,
    pub omega: Form,
    pub phi: Vec<Expr>,
    pub generators: Vec<VectorField>,
}

impl GroupModel {
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.structure[(i * n + j) * n + k]
    }

    /// `d eta = 0`, symmetry and ad-invariance of the inner product.
    pub fn validate(&self, oracle: &Oracle) -> Report {
        let mut report = Report::new("group");
        report
            .record_result("eta-closed", self.eta.exterior_d().compare_zero(&self.region, oracle).map_err(Error::from));
        let n = self.dim();
        let asym = (&self.inner - self.inner.transpose()).amax();
        report.check("inner-symmetric", asym <= oracle.tol, asym, "inner product is not symmetric");
        let mut worst = 0.0f64;
        if self.structure.len() == n * n * n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v: f64 = (0..n)
                            .map(|m| self.c(i, j, m) * self.inner[(m, k)] + self.c(i, k, m) * self.inner[(j, m)])
                            .sum();
                        worst = worst.max(v.abs());
                    }
                }
            }
            report.check("inner-invariant", worst <= oracle.tol, worst, "inner product is not ad-invariant");
        } else {
            report.fail("inner-invariant", f64::NAN, None, "structure constants have the wrong length");
        }
        report
    }

    pub fn algebra(&self) -> Result<FinDimLie2> {
        FinDimLie2::lie_algebra(self.dim(), self.structure.clone())
    }
}

impl QHamData {
    pub fn pulled_back_eta(&self, g: &GroupModel) -> Result<Form> {
        Ok(g.eta.pullback(&self.coords, &self.phi)?)
    }

    fn pulled_back(&self, f: &Form) -> Result<Form> {
        Ok(f.pullback(&self.coords, &self.phi)?)
    }
}

/// The three quasi-Hamiltonian axioms: `d omega + Phi^* eta = 0`, the
/// moment condition per basis direction and `ker omega ∩ ker dPhi = 0`.
pub fn validate_qham(g: &GroupModel, d: &QHamData, oracle: &Oracle) -> Report {
    let mut report = Report::new("qham");
    report.absorb("group", g.validate(oracle));
    let closed = (|| {
        let lhs = d.omega.exterior_d().add(&d.pulled_back_eta(g)?)?;
        Ok(lhs.compare_zero(&d.region, oracle)?)
    })();
    report.record_result("closed", closed);

    let n = g.dim();
    if d.generators.len() != n || g.theta_left.len() != n || g.theta_right.len() != n {
        report.fail("moment", f64::NAN, None, "generators and Maurer-Cartan forms must match the algebra dimension");
    } else {
        for (k, xi) in d.generators.iter().enumerate() {
            let r = (|| {
                let mut total = d.omega.interior(xi)?;
                for l in 0..n {
                    let w = 0.5 * g.inner[(l, k)];
                    if w != 0.0 {
                        let theta = d.pulled_back(&g.theta_left[l].add(&g.theta_right[l])?)?;
                        total = total.add(&theta.scale(&Expr::constant(w)))?;
                    }
                }
                Ok(total.compare_zero(&d.region, oracle)?)
            })();
            report.record_result(format!("moment({})", k + 1), r);
        }
    }

    record_nondegenerate(&mut report, d, oracle);
    report
}

/// Rank of the stacked matrix `[omega_x; dPhi_x]` at sample points.
fn record_nondegenerate(report: &mut Report, d: &QHamData, oracle: &Oracle) {
    let n = d.coords.len();
    let m = d.phi.len();
    let r = (|| -> Result<(usize, Option<String>)> {
        let basis: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(&d.coords, i)).collect();
        let mut omega = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            let ii = d.omega.interior(&basis[i])?;
            for j in 0..n {
                omega[i][j] = ii.interior(&basis[j])?.scalar();
            }
        }
        let jac: Vec<Vec<Expr>> = d.phi.iter().map(|p| d.coords.iter().map(|x| p.diff(x)).collect()).collect();
        let mut worst = 0;
        let mut witness = None;
        for p in d.region.sample(oracle.samples, oracle.seed) {
            let mut mat = DMatrix::zeros(n + m, n);
            for i in 0..n {
                for j in 0..n {
                    mat[(i, j)] = omega[i][j].eval(&p)?;
                }
            }
            for a in 0..m {
                for j in 0..n {
                    mat[(n + a, j)] = jac[a][j].eval(&p)?;
                }
            }
            let deficit = n - rank(&mat);
            if deficit > worst {
                worst = deficit;
                witness = Some(p.to_string());
            }
        }
        Ok((worst, witness))
    })();
    match r {
        Ok((0, _)) => report.pass("nondegenerate", 0.0),
        Ok((k, w)) => report.fail("nondegenerate", k as f64, w, "omega and dPhi share a kernel direction"),
        Err(e) => report.fail("nondegenerate", f64::NAN, None, &e.to_string()),
    }
}

/// A linear map from a Lie algebra to Hamiltonian pairs, one pair per basis
/// element, read as a strict morphism.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMap {
    pub algebra: FinDimLie2,
    pub pairs: Vec<HamPair>,
    coords: Coords,
}

impl MomentMap {
    pub fn new(algebra: FinDimLie2, pairs: Vec<HamPair>, coords: &Coords) -> Result<MomentMap> {
        if pairs.len() != algebra.n0() {
            return Err(Error::DimensionMismatch(format!(
                "{} moment pairs for a {}-dimensional algebra",
                pairs.len(),
                algebra.n0()
            )));
        }
        Ok(MomentMap { algebra, pairs, coords: coords.clone() })
    }
}

impl Lie2Morphism<FinDimLie2, crate::plectic::PlecticManifold> for MomentMap {
    fn f0(&self, x: &DVector<f64>) -> Result<HamPair> {
        let mut out = HamPair::zero(&self.coords);
        for (k, h) in self.pairs.iter().enumerate() {
            let c = Expr::constant(x[k]);
            out = HamPair { xi: out.xi.add(&h.xi.scale(&c))?, beta: out.beta.add(&h.beta.scale(&c))? };
        }
        Ok(out)
    }
    fn f1(&self, _h: &DVector<f64>) -> Result<Expr> {
        Ok(Expr::zero())
    }
    fn f2(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> Result<Expr> {
        Ok(Expr::zero())
    }
}
