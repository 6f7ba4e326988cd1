use super::{cech_delta, label, restrict, CechForm, Cover};
use crate::cartan::Form;
use crate::error::{Error, Result};
use crate::report::Report;
use crate::symexpr::{CoordBox, Expr, Oracle, Point};

/// Tolerance for integer-valued phase combinations.
const INTEGER_TOL: f64 = 1e-6;

/// Gerbe with connective structure: phases on triple overlaps, connection
/// 1-forms on double overlaps and curvings on charts.
#[derive(Debug, Clone, PartialEq)]
pub struct DeligneCocycle {
    pub cover: Cover,
    pub phi: CechForm,
    pub a: CechForm,
    pub b: CechForm,
}

/// Trivialization data with its error 2-form.
#[derive(Debug, Clone, PartialEq)]
pub struct Trivialization {
    pub psi: CechForm,
    pub eta: CechForm,
    pub omega: Form,
}

impl DeligneCocycle {
    pub fn new(cover: Cover, phi: CechForm, a: CechForm, b: CechForm) -> Result<DeligneCocycle> {
        for (name, c, k, p) in [("phi", &phi, 0, 3), ("A", &a, 1, 2), ("B", &b, 2, 1)] {
            if c.degree() != k || c.depth() != p {
                return Err(Error::DegreeError(format!(
                    "{} must be a ({},{}) cochain, got ({},{})",
                    name,
                    k,
                    p,
                    c.degree(),
                    c.depth()
                )));
            }
        }
        Ok(DeligneCocycle { cover, phi, a, b })
    }

    pub fn coords(&self) -> &crate::cartan::Coords {
        self.cover.coords()
    }
}

/// The trivial gerbe on a single chart with curving `omega`.
pub fn trivial_gerbe(ambient: CoordBox, omega: &Form) -> Result<DeligneCocycle> {
    let cover = Cover::single(ambient)?;
    let c = cover.coords().clone();
    let b = restrict(omega, &cover)?;
    DeligneCocycle::new(cover, CechForm::zero(&c, 0, 3), CechForm::zero(&c, 1, 2), b)
}

/// Worst distance to the nearest integer of `e` at sample points of `region`.
fn integer_residual(e: &Expr, region: &CoordBox, oracle: &Oracle) -> Result<(f64, Option<Point>)> {
    let mut worst = 0.0f64;
    let mut witness = None;
    for p in region.sample(oracle.samples, oracle.seed) {
        let v = e.eval(&p)?;
        let r = (v - v.round()).abs();
        if r > worst || witness.is_none() {
            worst = worst.max(r);
            witness = Some(p);
        }
    }
    Ok((worst, witness))
}

fn record_integer(report: &mut Report, id: String, e: &Expr, region: &CoordBox, oracle: &Oracle) {
    match integer_residual(e, region, oracle) {
        Ok((r, _)) if r <= INTEGER_TOL => report.pass(id, r),
        Ok((r, w)) => report.fail(id, r, w.map(|p| p.to_string()), "not integer-valued"),
        Err(e) => report.fail(id, f64::NAN, None, &e.to_string()),
    }
}

/// Checks the three cocycle conditions on every relevant overlap.
pub fn validate_deligne(c: &DeligneCocycle, oracle: &Oracle) -> Report {
    let mut report = Report::new("deligne");
    match cech_delta(&c.phi, &c.cover) {
        Ok(dphi) => {
            for (idx, region) in c.cover.overlaps(4) {
                record_integer(&mut report, format!("integer{}", label(idx)), &dphi.scalar(idx), region, oracle);
            }
        }
        Err(e) => report.fail("integer", f64::NAN, None, &e.to_string()),
    }
    let conn = cech_delta(&c.a, &c.cover).and_then(|da| {
        let dphi = c.phi.map(1, |f| Ok(f.exterior_d()))?;
        da.compare_per_overlap(&dphi, &c.cover, oracle)
    });
    match conn {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("connection{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("connection", f64::NAN, None, &e.to_string()),
    }
    let curv = cech_delta(&c.b, &c.cover).and_then(|db| {
        let da = c.a.map(2, |f| Ok(f.exterior_d()))?;
        db.compare_per_overlap(&da, &c.cover, oracle)
    });
    match curv {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("curving{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("curving", f64::NAN, None, &e.to_string()),
    }
    if report.entries.is_empty() {
        report.pass("single-chart", 0.0);
    }
    report
}

/// Per-chart `dB_i`, checked to agree on double overlaps; returns the glued
/// closed 3-form.
pub fn three_curvature(c: &DeligneCocycle, oracle: &Oracle) -> Result<Form> {
    let db = c.b.map(3, |f| Ok(f.exterior_d()))?;
    super::glue(&db, &c.cover, oracle, "3-curvature")
}

/// Checks the trivialization conditions against the cocycle.
pub fn validate_trivialization(c: &DeligneCocycle, t: &Trivialization, oracle: &Oracle) -> Report {
    let mut report = Report::new("trivialization");
    // delta(delta eta) = 0 forces delta psi = -phi modulo integers
    match cech_delta(&t.psi, &c.cover).and_then(|d| d.add(&c.phi)) {
        Ok(diff) => {
            for (idx, region) in c.cover.overlaps(3) {
                record_integer(&mut report, format!("phase{}", label(idx)), &diff.scalar(idx), region, oracle);
            }
        }
        Err(e) => report.fail("phase", f64::NAN, None, &e.to_string()),
    }
    let conn = cech_delta(&t.eta, &c.cover).and_then(|de| {
        let rhs = c.a.add(&t.psi.map(1, |f| Ok(f.exterior_d()))?)?;
        de.compare_per_overlap(&rhs, &c.cover, oracle)
    });
    match conn {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("connection{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("connection", f64::NAN, None, &e.to_string()),
    }
    let err = t
        .eta
        .map(2, |f| Ok(f.exterior_d()))
        .and_then(|deta| c.b.sub(&deta))
        .and_then(|lhs| lhs.compare_per_overlap(&restrict(&t.omega, &c.cover)?, &c.cover, oracle));
    match err {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("error-form{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("error-form", f64::NAN, None, &e.to_string()),
    }
    report
}
