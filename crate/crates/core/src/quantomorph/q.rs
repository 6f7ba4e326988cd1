use super::{
    add_elements, build_e, compare_elements, constant_on_charts, lambda_element, lambda_kernel_witness, merged,
    rho_wing, scale_element, sigma_section_e, sigma_wing, validate_e_element, EButterfly, EElement, GerbeCarrier,
    GroupModel, MomentMap, QHamData,
};
use crate::cech::{
    glue, three_curvature, trivial_gerbe, validate_trivialization, CechForm, DeligneCocycle, Trivialization,
};
use crate::error::{Error, Result};
use crate::gerbevf::{bracket_conn, horizontal_lift, AlgebroidSection, ConnMultVF, GerbeLie2, MultVF};
use crate::lie2core::{check_morphism, Butterfly, ButterflySamples, Composite, Lie2Structure};
use crate::plectic::{HamPair, PlecticManifold};
use crate::report::Report;
use crate::symexpr::{Expr, Oracle, SampleOutcome};

/// The butterfly from the symmetries of the trivial gerbe with curving
/// `omega` to those of a gerbe trivialized with error form `omega`.
#[derive(Debug, Clone)]
pub struct QButterfly {
    trivial: GerbeLie2,
    gerbe: GerbeLie2,
    deta: CechForm,
    oracle: Oracle,
}

/// Requires the trivialization conditions to hold on samples.
pub fn build_q(c: &DeligneCocycle, t: &Trivialization, oracle: &Oracle) -> Result<QButterfly> {
    let check = validate_trivialization(c, t, oracle);
    if !check.passed() {
        return Err(Error::PreconditionFailed { hypothesis: "trivialization".into(), residual: check.max_residual() });
    }
    let trivial = trivial_gerbe(c.cover.ambient().clone(), &t.omega)?;
    Ok(QButterfly {
        trivial: GerbeLie2 { cocycle: trivial },
        gerbe: GerbeLie2 { cocycle: c.clone() },
        deta: t.eta.map(2, |e| Ok(e.exterior_d()))?,
        oracle: *oracle,
    })
}

impl QButterfly {
    pub fn cocycle(&self) -> &DeligneCocycle {
        &self.gerbe.cocycle
    }

    pub fn trivial(&self) -> &DeligneCocycle {
        &self.trivial.cocycle
    }
}

/// A preimage under `sigma`: horizontal lift, `a_i = A + i_xi d eta_i` and
/// vanishing chart functions.
pub fn sigma_section_q(b: &QButterfly, x: &ConnMultVF) -> Result<EElement> {
    let c = b.cocycle();
    let xi = x.xi();
    let a0 = x.a.get(&[0]);
    let a = CechForm::map_overlaps(&c.cover, c.coords(), 1, 1, |idx| Ok(a0.add(&b.deta.get(idx).interior(xi)?)?))?;
    Ok(EElement { v: ConnMultVF::new(horizontal_lift(c, xi)?, a)?, g: CechForm::zero(c.coords(), 0, 1) })
}

impl Butterfly for QButterfly {
    type Source = GerbeLie2;
    type Target = GerbeLie2;
    type E = EElement;

    fn source(&self) -> &GerbeLie2 {
        &self.trivial
    }
    fn target(&self) -> &GerbeLie2 {
        &self.gerbe
    }
    fn kappa(&self, w: &AlgebroidSection) -> Result<EElement> {
        let c = self.cocycle();
        Ok(EElement { v: ConnMultVF::zero(c.coords()), g: constant_on_charts(c, &w.value(0))? })
    }
    fn lambda(&self, u: &AlgebroidSection) -> Result<EElement> {
        lambda_element(self.cocycle(), u)
    }
    fn sigma(&self, e: &EElement) -> Result<ConnMultVF> {
        let c = self.cocycle();
        let xi = e.v.xi();
        let parts = CechForm::map_overlaps(&c.cover, c.coords(), 1, 1, |idx| {
            let i = idx[0];
            Ok(e.v.a.get(&[i]).sub(&self.deta.get(&[i]).interior(xi)?)?.sub(&e.g.get(&[i]).exterior_d())?)
        })?;
        let a = glue(&parts, &c.cover, &self.oracle, "trivialized connection")?;
        let coords = c.coords();
        Ok(ConnMultVF {
            base: MultVF { xi: xi.clone(), f: CechForm::zero(coords, 0, 2) },
            a: CechForm::zero(coords, 1, 1).with(vec![0], a)?,
        })
    }
    fn rho(&self, e: &EElement) -> Result<ConnMultVF> {
        Ok(e.v.clone())
    }
    fn bracket(&self, x: &EElement, y: &EElement) -> Result<EElement> {
        let c = self.cocycle();
        let (xi, zeta) = (x.v.xi(), y.v.xi());
        let g = CechForm::map_overlaps(&c.cover, c.coords(), 0, 1, |idx| {
            let i = idx[0];
            let t = y.g.get(&[i]).lie_derivative(xi)?.sub(&x.g.get(&[i]).lie_derivative(zeta)?)?;
            Ok(t.add(&self.deta.get(&[i]).interior(zeta)?.interior(xi)?)?)
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

impl GerbeCarrier for QButterfly {
    fn oracle(&self) -> &Oracle {
        &self.oracle
    }
    fn section(&self, x: &ConnMultVF) -> Result<EElement> {
        sigma_section_q(self, x)
    }
    fn global_section(&self, h: &Expr) -> Result<AlgebroidSection> {
        AlgebroidSection::from_exprs(self.trivial.cocycle.coords(), [(0, h.clone())])
    }
}

/// `((xi, A; g'), (v; g)) -> (v; g + g')`.
pub fn phi(target: &EButterfly, p: &(EElement, EElement)) -> Result<EElement> {
    let c = target.cocycle();
    Ok(EElement { v: p.1.v.clone(), g: p.1.g.add(&constant_on_charts(c, &p.0.g.scalar(&[0]))?)? })
}

/// Composite representatives `(e', e)` in the fibre: `e'` is a section of a
/// Hamiltonian pair shifted by `kappa`, `e` a section of `rho(e')` shifted
/// by `lambda`, and the pair is moved along the quotient relation.
pub fn composite_samples(
    comp: &Composite<EButterfly, QButterfly>,
    source0: &[HamPair],
    source1: &[Expr],
    middle1: &[AlgebroidSection],
    target1: &[AlgebroidSection],
) -> Result<Vec<(EElement, EElement)>> {
    let (first, second) = (&comp.first, &comp.second);
    let mut out = Vec::with_capacity(source0.len());
    for (k, h) in source0.iter().enumerate() {
        let mut e1 = sigma_section_e(first, h)?;
        if !source1.is_empty() {
            e1 = first.add(&e1, &first.kappa(&source1[k % source1.len()])?)?;
        }
        let mut e2 = sigma_section_q(second, &first.rho(&e1)?)?;
        if !target1.is_empty() {
            e2 = second.add(&e2, &second.lambda(&target1[(k + 2) % target1.len()])?)?;
        }
        let mut p = (e1, e2);
        if !middle1.is_empty() {
            let r = comp.relation(&middle1[(k + 1) % middle1.len()])?;
            p = comp.add(&p, &r)?;
        }
        out.push(p);
    }
    Ok(out)
}

/// Checks that [`phi`] is a morphism of butterflies from the composite to
/// `target`: validity of images, commutation with all four structure maps
/// and the bracket, invariance under the quotient relation and `phi(0) = 0`.
pub fn two_iso_phi(
    comp: &Composite<EButterfly, QButterfly>,
    target: &EButterfly,
    carrier: &[(EElement, EElement)],
    source1: &[Expr],
    middle1: &[AlgebroidSection],
    target1: &[AlgebroidSection],
    oracle: &Oracle,
) -> Result<Report> {
    let mut report = Report::new("phi");
    let c = target.cocycle();
    let source = target.source();
    let gerbe = target.target();

    report.record_result("fibre", merged(carrier.iter().map(|p| comp.fibre_defect(p, oracle))));
    let mut valid = Report::new("image");
    for p in carrier {
        let img = phi(target, p)?;
        valid.absorb("", validate_e_element(c, &img, oracle));
    }
    report.check("image", valid.passed(), valid.max_residual(), "image violates the carrier conditions");
    report.record_result(
        "sigma",
        merged(carrier.iter().map(|p| source.compare0(&target.sigma(&phi(target, p)?)?, &comp.sigma(p)?, oracle))),
    );
    report.record_result(
        "rho",
        merged(carrier.iter().map(|p| gerbe.compare0(&target.rho(&phi(target, p)?)?, &comp.rho(p)?, oracle))),
    );
    report.record_result(
        "kappa",
        merged(source1.iter().map(|h| target.compare(&phi(target, &comp.kappa(h)?)?, &target.kappa(h)?, oracle))),
    );
    report.record_result(
        "lambda",
        merged(target1.iter().map(|u| target.compare(&phi(target, &comp.lambda(u)?)?, &target.lambda(u)?, oracle))),
    );
    let mut pairs = Vec::new();
    for i in 0..carrier.len() {
        for j in i + 1..carrier.len() {
            pairs.push((i, j));
        }
    }
    report.record_result(
        "bracket",
        merged(pairs.iter().map(|&(i, j)| {
            let (a, b) = (&carrier[i], &carrier[j]);
            let lhs = phi(target, &comp.bracket(a, b)?)?;
            let rhs = target.bracket(&phi(target, a)?, &phi(target, b)?)?;
            target.compare(&lhs, &rhs, oracle)
        })),
    );
    report.record_result(
        "quotient",
        merged(carrier.iter().zip(middle1.iter().cycle()).map(|(p, w)| {
            let shifted = comp.add(p, &comp.relation(w)?)?;
            target.compare(&phi(target, &shifted)?, &phi(target, p)?, oracle)
        })),
    );
    report.record_result("zero", target.compare(&phi(target, &comp.zero())?, &target.zero(), oracle));
    Ok(report)
}

/// Inputs for the square and triangle: sample Hamiltonian pairs, functions
/// and gerbe sections, an optional moment map and quasi-Hamiltonian data.
#[derive(Debug, Clone, Default)]
pub struct SquareInput {
    pub pairs: Vec<HamPair>,
    pub functions: Vec<Expr>,
    pub sections: Vec<AlgebroidSection>,
    pub moment: Option<MomentMap>,
    pub qham: Option<(GroupModel, QHamData)>,
}

/// The square comparing the composite through the trivial gerbe with the
/// direct butterfly, plus the moment-map triangle when one is supplied.
/// With quasi-Hamiltonian data the trivialization's error form must be
/// `-omega` and `-d omega = Phi^* eta` is required up front.
pub fn check_square(c: &DeligneCocycle, t: &Trivialization, input: &SquareInput, oracle: &Oracle) -> Result<Report> {
    let mut report = Report::new("square");
    let ambient = c.cover.ambient().clone();
    let chi = t.omega.exterior_d();
    match &input.qham {
        Some((g, d)) => {
            let lhs = d.omega.exterior_d().neg();
            let rhs = d.pulled_back_eta(g)?;
            let r = lhs.compare(&rhs, &d.region, oracle)?;
            if !r.pass {
                return Err(Error::PreconditionFailed {
                    hypothesis: "-d omega = Phi^* eta".into(),
                    residual: r.max_residual,
                });
            }
            report.record("error-form", &t.omega.compare(&d.omega.neg(), &ambient, oracle)?);
        }
        None => {
            let r = chi.compare(&three_curvature(c, oracle)?, &ambient, oracle)?;
            if !r.pass {
                return Err(Error::PreconditionFailed { hypothesis: "d omega = dB".into(), residual: r.max_residual });
            }
        }
    }
    let p = PlecticManifold::new(ambient.clone(), chi, oracle)?;
    let e_triv = build_e(&trivial_gerbe(ambient, &t.omega)?, &p, oracle)?;
    let q = build_q(c, t, oracle)?;
    let e = build_e(c, &p, oracle)?;
    let comp = Composite::new(e_triv, q);

    let mut pairs = input.pairs.clone();
    if let Some(m) = &input.moment {
        pairs.extend(m.pairs.iter().cloned());
    }
    let middle: Vec<AlgebroidSection> =
        input.functions.iter().map(|h| comp.second.global_section(h)).collect::<Result<_>>()?;
    let carrier = composite_samples(&comp, &pairs, &input.functions, &middle, &input.sections)?;
    report.absorb("phi", two_iso_phi(&comp, &e, &carrier, &input.functions, &middle, &input.sections, oracle)?);

    if let Some(m) = &input.moment {
        let (basis, _) = m.algebra.sample_elements(0, 0);
        report.absorb("moment", check_morphism(m, &m.algebra, &p, &basis, &[], oracle));
        for (k, h) in m.pairs.iter().enumerate() {
            let id = |s: &str| format!("triangle.{}({})", s, k + 1);
            let e1 = sigma_section_e(&comp.first, h)?;
            let top = (e1.clone(), sigma_section_q(&comp.second, &comp.first.rho(&e1)?)?);
            let moved = phi(&e, &top)?;
            let direct = sigma_section_e(&e, h)?;
            report.record(id("sigma"), &p.compare0(&e.sigma(&moved)?, h, oracle)?);
            report.record(id("rho"), &e.target().compare0(&e.rho(&moved)?, &comp.rho(&top)?, oracle)?);
            let diff = e.add(&moved, &e.scale(-1.0, &direct)?)?;
            match lambda_kernel_witness(&e, &diff) {
                Ok(w) => report.record(id("kernel"), &w.residual),
                Err(err) => report.fail(id("kernel"), f64::NAN, None, &err.to_string()),
            }
        }
    }
    Ok(report)
}
