use super::{
    add_elements, compare_elements, constant_on_charts, lambda_element, rho_wing, scale_element, sigma_wing, EElement,
    GerbeCarrier,
};
use crate::cech::{glue, CechForm, DeligneCocycle};
use crate::error::{Error, Result};
use crate::gerbevf::{bracket_conn, horizontal_lift, AlgebroidSection, ConnMultVF, GerbeLie2};
use crate::lie2core::{Butterfly, ButterflySamples, Lie2Structure};
use crate::plectic::{HamPair, PlecticManifold};
use crate::report::Report;
use crate::symexpr::{Expr, Oracle, SampleOutcome};

/// The butterfly from the Poisson Lie 2-algebra of `dB` to the symmetries
/// of the gerbe.
#[derive(Debug, Clone)]
pub struct EButterfly {
    plectic: PlecticManifold,
    gerbe: GerbeLie2,
    oracle: Oracle,
}

/// Requires the glued 3-curvature to equal the plectic form on every chart.
pub fn build_e(c: &DeligneCocycle, p: &PlecticManifold, oracle: &Oracle) -> Result<EButterfly> {
    if c.coords()[..] != p.coords()[..] {
        return Err(Error::DimensionMismatch("gerbe and plectic form use different coordinates".into()));
    }
    for (i, region) in c.cover.charts().iter().enumerate() {
        let r = c.b.get(&[i]).exterior_d().compare(p.chi(), region, oracle)?;
        if !r.pass {
            return Err(Error::CurvatureMismatch { chart: i + 1, residual: r.max_residual });
        }
    }
    Ok(EButterfly { plectic: p.clone(), gerbe: GerbeLie2 { cocycle: c.clone() }, oracle: *oracle })
}

impl EButterfly {
    pub fn cocycle(&self) -> &DeligneCocycle {
        &self.gerbe.cocycle
    }

    pub fn plectic(&self) -> &PlecticManifold {
        &self.plectic
    }

    /// The glued 1-form `a_i - i_xi B_i - d g_i`.
    fn epsilon(&self, e: &EElement) -> Result<crate::cartan::Form> {
        let c = self.cocycle();
        let xi = e.v.xi();
        let eps = CechForm::map_overlaps(&c.cover, c.coords(), 1, 1, |idx| {
            let i = idx[0];
            Ok(e.v.a.get(&[i]).sub(&c.b.get(&[i]).interior(xi)?)?.sub(&e.g.get(&[i]).exterior_d())?)
        })?;
        glue(&eps, &c.cover, &self.oracle, "epsilon")
    }
}

/// A preimage of `h` under `sigma`: horizontal lift, `a_i = i_xi B_i - beta`
/// and vanishing chart functions.
pub fn sigma_section_e(b: &EButterfly, h: &HamPair) -> Result<EElement> {
    let c = b.cocycle();
    let base = horizontal_lift(c, &h.xi)?;
    let a =
        CechForm::map_overlaps(&c.cover, c.coords(), 1, 1, |idx| Ok(c.b.get(idx).interior(&h.xi)?.sub(&h.beta)?))?;
    Ok(EElement { v: ConnMultVF::new(base, a)?, g: CechForm::zero(c.coords(), 0, 1) })
}

/// A `lambda`-preimage of a kernel element of `sigma`, with the sampled
/// discrepancy of the round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWitness {
    pub section: AlgebroidSection,
    pub residual: SampleOutcome,
}

pub fn lambda_kernel_witness(b: &EButterfly, e: &EElement) -> Result<KernelWitness> {
    let s = b.sigma(e)?;
    let r = b.plectic.compare0(&s, &HamPair::zero(b.plectic.coords()), &b.oracle)?;
    if !r.pass {
        return Err(Error::NotInKernel(r.max_residual));
    }
    let section = AlgebroidSection { u: e.g.scale(-1.0) };
    let residual = b.compare(&b.lambda(&section)?, e, &b.oracle)?;
    Ok(KernelWitness { section, residual })
}

impl Butterfly for EButterfly {
    type Source = PlecticManifold;
    type Target = GerbeLie2;
    type E = EElement;

    fn source(&self) -> &PlecticManifold {
        &self.plectic
    }
    fn target(&self) -> &GerbeLie2 {
        &self.gerbe
    }
    fn kappa(&self, h: &Expr) -> Result<EElement> {
        let c = self.cocycle();
        Ok(EElement { v: ConnMultVF::zero(c.coords()), g: constant_on_charts(c, h)? })
    }
    fn lambda(&self, u: &AlgebroidSection) -> Result<EElement> {
        lambda_element(self.cocycle(), u)
    }
    fn sigma(&self, e: &EElement) -> Result<HamPair> {
        Ok(HamPair { xi: e.v.xi().clone(), beta: self.epsilon(e)?.neg() })
    }
    fn rho(&self, e: &EElement) -> Result<ConnMultVF> {
        Ok(e.v.clone())
    }
    fn bracket(&self, x: &EElement, y: &EElement) -> Result<EElement> {
        let c = self.cocycle();
        let (xi, zeta) = (x.v.xi(), y.v.xi());
        let g = CechForm::map_overlaps(&c.cover, c.coords(), 0, 1, |idx| {
            let i = idx[0];
            let t = y.v.a.get(&[i]).interior(xi)?;
            let t = t.sub(&x.v.a.get(&[i]).interior(zeta)?)?;
            Ok(t.add(&c.b.get(&[i]).interior(xi)?.interior(zeta)?)?)
        })?;
        Ok(EElement { v: bracket_conn(&x.v, &y.v)?, g })
    }
    fn zero(&self) -> EElement {
        EElement::zero(self.cocycle())
    }
    fn add(&self, a: &EElement, b: &EElement) -> Result<EElement> {
        add_elements(&self.gerbe, a, b)
    }
    fn scale(&self, s: f64, a: &EElement) -> Result<EElement> {
        scale_element(&self.gerbe, s, a)
    }
    fn compare(&self, a: &EElement, b: &EElement, oracle: &Oracle) -> Result<SampleOutcome> {
        compare_elements(&self.gerbe, a, b, oracle)
    }
    fn check_exactness(&self, samples: &ButterflySamples<Self>, oracle: &Oracle) -> Result<Report> {
        sigma_wing(self, samples, oracle)
    }
    fn check_reverse_exactness(&self, samples: &ButterflySamples<Self>, oracle: &Oracle) -> Result<Report> {
        rho_wing(self, samples, oracle)
    }
}

impl GerbeCarrier for EButterfly {
    fn oracle(&self) -> &Oracle {
        &self.oracle
    }
    fn section(&self, h: &HamPair) -> Result<EElement> {
        sigma_section_e(self, h)
    }
    fn global_section(&self, h: &Expr) -> Result<Expr> {
        Ok(h.clone())
    }
}
