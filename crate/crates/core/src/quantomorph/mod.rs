//! The geometric butterflies relating the Poisson Lie 2-algebra of a
//! gerbe's curvature to its connection-preserving symmetries, the
//! trivialization butterfly with its comparison 2-isomorphism, the Kostant
//! lift and quasi-Hamiltonian checks.
//!
//! Both geometric carriers consist of a connection-preserving object `v`
//! with chart functions `g_i` subject to `g_j - g_i = i_xi A_ij + f_ij`.

mod e;
mod kostant;
mod q;
mod qham;
mod trivial;

pub use e::{build_e, lambda_kernel_witness, sigma_section_e, EButterfly, KernelWitness};
pub use kostant::{kostant_lift, KostantLift};
pub use q::{build_q, check_square, composite_samples, phi, sigma_section_q, two_iso_phi, QButterfly, SquareInput};
pub use qham::{validate_qham, GroupModel, MomentMap, QHamData};
pub use trivial::{TrivialToPlectic, Variant};

use crate::cech::{cech_delta, glue, label, CechForm, DeligneCocycle};
use crate::error::Result;
use crate::gerbevf::{diff_x, section_from_vertical, validate_connpres, AlgebroidSection, ConnMultVF, GerbeLie2};
use crate::lie2core::{Butterfly, ButterflySamples, Lie2Structure, SourceV0, SourceV1};
use crate::report::Report;
use crate::symexpr::{Expr, Oracle, SampleOutcome};

/// A connection-preserving object with chart functions.
#[derive(Debug, Clone, PartialEq)]
pub struct EElement {
    pub v: ConnMultVF,
    pub g: CechForm,
}

/// Same carrier as [`EElement`], read against a trivialization.
pub type QElement = EElement;

impl EElement {
    pub fn zero(c: &DeligneCocycle) -> EElement {
        EElement { v: ConnMultVF::zero(c.coords()), g: CechForm::zero(c.coords(), 0, 1) }
    }
}

/// `delta g - (i_xi A + f)` on double overlaps.
fn constraint_defect(c: &DeligneCocycle, e: &EElement) -> Result<CechForm> {
    let ia = c.a.map(0, |a| a.interior(e.v.xi()))?;
    cech_delta(&e.g, &c.cover)?.sub(&ia.add(&e.v.base.f)?)
}

/// The connection-preserving conditions on `v` and the constraint on `g`.
pub fn validate_e_element(c: &DeligneCocycle, e: &EElement, oracle: &Oracle) -> Report {
    let mut report = validate_connpres(c, &e.v, oracle, true);
    report.suite = "carrier".into();
    let r = (|| {
        let d = constraint_defect(c, e)?;
        d.compare_per_overlap(&CechForm::zero(c.coords(), 0, 2), &c.cover, oracle)
    })();
    match r {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("constraint{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("constraint", f64::NAN, None, &e.to_string()),
    }
    report
}

fn add_elements(t: &GerbeLie2, a: &EElement, b: &EElement) -> Result<EElement> {
    Ok(EElement { v: t.add0(&a.v, &b.v)?, g: a.g.add(&b.g)? })
}

fn scale_element(t: &GerbeLie2, s: f64, a: &EElement) -> Result<EElement> {
    Ok(EElement { v: t.scale0(s, &a.v)?, g: a.g.scale(s) })
}

fn compare_elements(t: &GerbeLie2, a: &EElement, b: &EElement, oracle: &Oracle) -> Result<SampleOutcome> {
    let mut r = t.compare0(&a.v, &b.v, oracle)?;
    r.merge(a.g.compare(&b.g, &t.cocycle.cover, oracle)?);
    Ok(r)
}

/// `u -> (diff u, -u)`.
fn lambda_element(c: &DeligneCocycle, u: &AlgebroidSection) -> Result<EElement> {
    Ok(EElement { v: diff_x(c, u)?, g: u.u.scale(-1.0) })
}

/// The same function on every chart.
fn constant_on_charts(c: &DeligneCocycle, h: &Expr) -> Result<CechForm> {
    CechForm::functions(c.coords(), 1, (0..c.cover.len()).map(|i| (vec![i], h.clone())))
}

/// Chart functions `g` with `delta g = i_xi A + f`, completing `v` to a
/// carrier element.
fn rho_section(c: &DeligneCocycle, v: &ConnMultVF) -> Result<EElement> {
    let rhs = c.a.map(0, |a| a.interior(v.xi()))?.add(&v.base.f)?;
    let u = section_from_vertical(c, &rhs.scale(-1.0))?;
    Ok(EElement { v: v.clone(), g: u.u })
}

/// Carriers of the form above mapping onto the gerbe's symmetries, with a
/// section of `sigma` and a way to embed global functions into the source
/// degree-1 space. These drive the exactness witnesses of both wings.
pub trait GerbeCarrier: Butterfly<Target = GerbeLie2, E = EElement> {
    fn cocycle(&self) -> &DeligneCocycle {
        &self.target().cocycle
    }
    fn oracle(&self) -> &Oracle;
    /// A preimage under `sigma`.
    fn section(&self, x: &SourceV0<Self>) -> Result<EElement>;
    /// The source degree-1 element whose `kappa` is `h` on every chart.
    fn global_section(&self, h: &Expr) -> Result<SourceV1<Self>>;
}

fn merged<I: IntoIterator<Item = Result<SampleOutcome>>>(items: I) -> Result<SampleOutcome> {
    let mut out = SampleOutcome { pass: true, max_residual: 0.0, witness: None };
    for r in items {
        out.merge(r?);
    }
    Ok(out)
}

/// Surjectivity of `sigma`, injectivity of `lambda` and exactness at the
/// carrier, each by an explicit witness.
fn sigma_wing<B: GerbeCarrier>(b: &B, s: &ButterflySamples<B>, oracle: &Oracle) -> Result<Report> {
    let mut report = Report::new("exactness");
    let c = b.cocycle();
    report.record_result(
        "sigma-section",
        merged(s.source0.iter().map(|h| {
            let e = b.section(h)?;
            let mut r = b.source().compare0(&b.sigma(&e)?, h, oracle)?;
            let valid = validate_e_element(c, &e, oracle);
            r.pass &= valid.passed();
            r.max_residual = r.max_residual.max(valid.max_residual());
            Ok(r)
        })),
    );
    report.record_result(
        "lambda-injective",
        merged(s.target1.iter().map(|u| {
            let back = AlgebroidSection { u: b.lambda(u)?.g.scale(-1.0) };
            b.target().compare1(&back, u, oracle)
        })),
    );
    report.record_result(
        "kernel",
        merged(s.carrier.iter().map(|e| {
            let k = b.add(e, &b.scale(-1.0, &b.section(&b.sigma(e)?)?)?)?;
            let u = AlgebroidSection { u: k.g.scale(-1.0) };
            b.compare(&b.lambda(&u)?, &k, oracle)
        })),
    );
    Ok(report)
}

/// Injectivity of `kappa`, surjectivity of `rho` and exactness at the
/// carrier for the other wing.
fn rho_wing<B: GerbeCarrier>(b: &B, s: &ButterflySamples<B>, oracle: &Oracle) -> Result<Report> {
    let mut report = Report::new("exactness");
    let c = b.cocycle();
    report.record_result(
        "kappa-injective",
        merged(s.source1.iter().map(|x| {
            let e = b.kappa(x)?;
            let h = glue(&e.g, &c.cover, oracle, "kappa preimage")?.scalar();
            b.source().compare1(&b.global_section(&h)?, x, oracle)
        })),
    );
    report.record_result(
        "rho-section",
        merged(s.target0.iter().map(|w| {
            let e = rho_section(c, w)?;
            let mut r = b.target().compare0(&b.rho(&e)?, w, oracle)?;
            let valid = validate_e_element(c, &e, oracle);
            r.pass &= valid.passed();
            r.max_residual = r.max_residual.max(valid.max_residual());
            Ok(r)
        })),
    );
    report.record_result(
        "rho-kernel",
        merged(s.carrier.iter().map(|e| {
            let k = b.add(e, &b.scale(-1.0, &rho_section(c, &b.rho(e)?)?)?)?;
            let h = glue(&k.g, &c.cover, oracle, "rho kernel")?.scalar();
            b.compare(&b.kappa(&b.global_section(&h)?)?, &k, oracle)
        })),
    );
    Ok(report)
}

/// Carrier samples `section(h_k) + kappa(x_k) + lambda(u_k)`, cycling
/// through the shorter lists.
pub fn carrier_samples<B: GerbeCarrier>(
    b: &B,
    source0: &[SourceV0<B>],
    source1: &[SourceV1<B>],
    target1: &[AlgebroidSection],
) -> Result<Vec<EElement>> {
    let mut out = Vec::with_capacity(source0.len());
    for (k, h) in source0.iter().enumerate() {
        let mut e = b.section(h)?;
        if !source1.is_empty() {
            e = b.add(&e, &b.kappa(&source1[k % source1.len()])?)?;
        }
        if !target1.is_empty() {
            e = b.add(&e, &b.lambda(&target1[(k + 1) % target1.len()])?)?;
        }
        out.push(e);
    }
    Ok(out)
}
