//! The Poisson Lie 2-algebra of a closed 3-form: Hamiltonian pairs in
//! degree 0, functions in degree 1.

use crate::cartan::{Coords, Form, VectorField};
use crate::error::{Error, Result};
use crate::lie2core::Lie2Structure;
use crate::report::Report;
use crate::symexpr::{CoordBox, Expr, Oracle, SampleOutcome};

/// A box with a closed 3-form; non-degeneracy is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct PlecticManifold {
    region: CoordBox,
    chi: Form,
}

/// `(xi, beta)` with `i_xi chi = -d beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamPair {
    pub xi: VectorField,
    pub beta: Form,
}

impl HamPair {
    pub fn new(xi: VectorField, beta: Form) -> Result<HamPair> {
        if beta.degree() != 1 {
            return Err(Error::DegreeError(format!("beta must be a 1-form, got degree {}", beta.degree())));
        }
        if xi.coords()[..] != beta.coords()[..] {
            return Err(Error::DimensionMismatch("field and form live on different coordinates".into()));
        }
        Ok(HamPair { xi, beta })
    }

    pub fn zero(coords: &Coords) -> HamPair {
        HamPair { xi: VectorField::zero(coords), beta: Form::zero(coords, 1) }
    }
}

impl PlecticManifold {
    /// Checks `d chi = 0` on samples.
    pub fn new(region: CoordBox, chi: Form, oracle: &Oracle) -> Result<PlecticManifold> {
        if chi.degree() != 3 {
            return Err(Error::DegreeError(format!("chi must be a 3-form, got degree {}", chi.degree())));
        }
        if chi.coords().len() != region.dim() {
            return Err(Error::DimensionMismatch("form and region have different dimensions".into()));
        }
        let r = chi.exterior_d().compare_zero(&region, oracle)?;
        if !r.pass {
            return Err(Error::PreconditionFailed { hypothesis: "d chi = 0".into(), residual: r.max_residual });
        }
        Ok(PlecticManifold { region, chi })
    }

    pub fn region(&self) -> &CoordBox {
        &self.region
    }

    pub fn chi(&self) -> &Form {
        &self.chi
    }

    pub fn coords(&self) -> &Coords {
        self.chi.coords()
    }
}

/// Sampled residual of `i_xi chi + d beta`.
pub fn validate_ham_pair(p: &PlecticManifold, h: &HamPair, oracle: &Oracle) -> Report {
    let mut report = Report::new("plectic");
    let r =
        h.xi.embed(p.coords())
            .map_err(Error::from)
            .and_then(|xi| Ok(p.chi.interior(&xi)?.add(&h.beta.exterior_d())?))
            .and_then(|f| Ok(f.compare_zero(&p.region, oracle)?));
    report.record_result("hamiltonian", r);
    report
}

/// `f -> (0, df)`.
pub fn plectic_d(coords: &Coords, f: &Expr) -> HamPair {
    HamPair { xi: VectorField::zero(coords), beta: Form::function(coords, f.clone()).exterior_d() }
}

/// `[(xi1, b1), (xi2, b2)] = ([xi1, xi2], i_xi2 i_xi1 chi)`.
pub fn plectic_bracket(p: &PlecticManifold, h1: &HamPair, h2: &HamPair) -> Result<HamPair> {
    let xi = h1.xi.bracket(&h2.xi)?;
    let beta = p.chi.interior(&h1.xi)?.interior(&h2.xi)?;
    Ok(HamPair { xi, beta })
}

/// `J = -i_xi3 i_xi2 i_xi1 chi`.
pub fn plectic_jacobiator(p: &PlecticManifold, h1: &HamPair, h2: &HamPair, h3: &HamPair) -> Result<Expr> {
    let c = p.chi.interior(&h1.xi)?.interior(&h2.xi)?.interior(&h3.xi)?;
    Ok((-c.scalar()).normalize())
}

impl Lie2Structure for PlecticManifold {
    type V0 = HamPair;
    type V1 = Expr;

    fn d(&self, h: &Expr) -> Result<HamPair> {
        Ok(plectic_d(self.coords(), h))
    }
    fn bracket(&self, x: &HamPair, y: &HamPair) -> Result<HamPair> {
        plectic_bracket(self, x, y)
    }
    fn act(&self, _x: &HamPair, _h: &Expr) -> Result<Expr> {
        Ok(Expr::zero())
    }
    fn jacobiator(&self, x: &HamPair, y: &HamPair, z: &HamPair) -> Result<Expr> {
        plectic_jacobiator(self, x, y, z)
    }
    fn zero0(&self) -> HamPair {
        HamPair::zero(self.coords())
    }
    fn zero1(&self) -> Expr {
        Expr::zero()
    }
    fn add0(&self, a: &HamPair, b: &HamPair) -> Result<HamPair> {
        Ok(HamPair { xi: a.xi.add(&b.xi)?, beta: a.beta.add(&b.beta)? })
    }
    fn add1(&self, a: &Expr, b: &Expr) -> Result<Expr> {
        Ok(a + b)
    }
    fn scale0(&self, s: f64, a: &HamPair) -> Result<HamPair> {
        let c = Expr::constant(s);
        Ok(HamPair { xi: a.xi.scale(&c), beta: a.beta.scale(&c) })
    }
    fn scale1(&self, s: f64, a: &Expr) -> Result<Expr> {
        Ok(a.scale(s))
    }
    fn compare0(&self, a: &HamPair, b: &HamPair, oracle: &Oracle) -> Result<SampleOutcome> {
        let mut r = a.xi.compare(&b.xi, &self.region, oracle)?;
        r.merge(a.beta.compare(&b.beta, &self.region, oracle)?);
        Ok(r)
    }
    fn compare1(&self, a: &Expr, b: &Expr, oracle: &Oracle) -> Result<SampleOutcome> {
        Ok(oracle.compare_many(&[(a.clone(), b.clone())], &self.region)?)
    }
}
