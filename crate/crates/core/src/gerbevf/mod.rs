//! Multiplicative vector fields on a Čech-presented gerbe, their
//! connection-preserving refinement and the horizontal lift.
//!
//! Fibre-direction data is stored as real scalars: `f_ij` on double
//! overlaps for objects and `u_i` on charts for sections.

use std::collections::{BTreeMap, VecDeque};

use crate::cartan::{Coords, Form, VectorField};
use crate::cech::{cech_delta, glue, label, CechForm, DeligneCocycle};
use crate::error::{Error, Result};
use crate::lie2core::{Lie2Morphism, Lie2Structure};
use crate::report::Report;
use crate::symexpr::{CoordBox, Expr, Oracle, SampleOutcome};

/// `(xi, {f_ij})` with `f_ik = i_xi d phi_ijk + f_ij + f_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultVF {
    pub xi: VectorField,
    pub f: CechForm,
}

/// Functions `u_i` on the charts.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidSection {
    pub u: CechForm,
}

/// A multiplicative vector field with 1-forms `a_i` such that
/// `L_xi B_i = d a_i` and `a_j - a_i = L_xi A_ij + d f_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnMultVF {
    pub base: MultVF,
    pub a: CechForm,
}

/// An element of either degree, for the mixed bracket.
#[derive(Debug, Clone, PartialEq)]
pub enum XElement {
    Object(ConnMultVF),
    Section(AlgebroidSection),
}

fn shape(c: &CechForm, degree: usize, depth: usize, what: &str) -> Result<()> {
    if c.degree() != degree || c.depth() != depth {
        return Err(Error::DegreeError(format!(
            "{} must be a ({},{}) cochain, got ({},{})",
            what,
            degree,
            depth,
            c.degree(),
            c.depth()
        )));
    }
    Ok(())
}

fn same_coords(a: &Coords, b: &Coords) -> Result<()> {
    if a[..] != b[..] {
        return Err(Error::DimensionMismatch(format!("coordinates {:?} and {:?}", a, b)));
    }
    Ok(())
}

impl MultVF {
    pub fn new(xi: VectorField, f: CechForm) -> Result<MultVF> {
        shape(&f, 0, 2, "f")?;
        same_coords(xi.coords(), f.coords())?;
        Ok(MultVF { xi, f })
    }

    pub fn zero(coords: &Coords) -> MultVF {
        MultVF { xi: VectorField::zero(coords), f: CechForm::zero(coords, 0, 2) }
    }
}

impl AlgebroidSection {
    pub fn new(u: CechForm) -> Result<AlgebroidSection> {
        shape(&u, 0, 1, "u")?;
        Ok(AlgebroidSection { u })
    }

    pub fn zero(coords: &Coords) -> AlgebroidSection {
        AlgebroidSection { u: CechForm::zero(coords, 0, 1) }
    }

    /// Builds a section from expressions indexed by chart (0-based).
    pub fn from_exprs<I: IntoIterator<Item = (usize, Expr)>>(coords: &Coords, items: I) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection { u: CechForm::functions(coords, 1, items.into_iter().map(|(i, e)| (vec![i], e)))? })
    }

    pub fn value(&self, chart: usize) -> Expr {
        self.u.scalar(&[chart])
    }
}

impl ConnMultVF {
    pub fn new(base: MultVF, a: CechForm) -> Result<ConnMultVF> {
        shape(&a, 1, 1, "a")?;
        same_coords(base.xi.coords(), a.coords())?;
        Ok(ConnMultVF { base, a })
    }

    pub fn zero(coords: &Coords) -> ConnMultVF {
        ConnMultVF { base: MultVF::zero(coords), a: CechForm::zero(coords, 1, 1) }
    }

    pub fn xi(&self) -> &VectorField {
        &self.base.xi
    }
}

fn check_cocycle(c: &DeligneCocycle, coords: &Coords) -> Result<()> {
    same_coords(c.coords(), coords)
}

/// Cocycle condition of the vertical components on every triple overlap.
pub fn validate_multvf(c: &DeligneCocycle, v: &MultVF, oracle: &Oracle) -> Report {
    let mut report = Report::new("multvf");
    let residuals = (|| -> Result<Vec<(Vec<usize>, SampleOutcome)>> {
        check_cocycle(c, v.xi.coords())?;
        // (delta f)_ijk = f_jk - f_ik + f_ij must equal -i_xi d phi_ijk
        let df = cech_delta(&v.f, &c.cover)?;
        let rhs = c.phi.map(0, |p| Ok(p.exterior_d().interior(&v.xi)?.neg()))?;
        df.compare_per_overlap(&rhs, &c.cover, oracle)
    })();
    match residuals {
        Ok(rs) if rs.is_empty() => report.pass("cocycle", 0.0),
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("cocycle{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("cocycle", f64::NAN, None, &e.to_string()),
    }
    report
}

/// `f_ij = -i_xi A_ij`.
pub fn horizontal_lift(c: &DeligneCocycle, xi: &VectorField) -> Result<MultVF> {
    check_cocycle(c, xi.coords())?;
    let f = c.a.map(0, |a| a.interior(xi).map(|g| g.neg()))?;
    Ok(MultVF { xi: xi.clone(), f })
}

/// `u_i = i_xi i_zeta B_i`.
pub fn f_b_homotopy(c: &DeligneCocycle, xi: &VectorField, zeta: &VectorField) -> Result<AlgebroidSection> {
    check_cocycle(c, xi.coords())?;
    check_cocycle(c, zeta.coords())?;
    let u = c.b.map(0, |b| b.interior(zeta)?.interior(xi))?;
    Ok(AlgebroidSection { u })
}

/// `L_xi` applied entrywise to a cochain.
fn lie(xi: &VectorField, c: &CechForm) -> Result<CechForm> {
    c.map(c.degree(), |f| f.lie_derivative(xi))
}

/// `([xi, zeta], {xi(g_ij) - zeta(f_ij)})`.
pub fn bracket_mult(x: &MultVF, y: &MultVF) -> Result<MultVF> {
    Ok(MultVF { xi: x.xi.bracket(&y.xi)?, f: lie(&x.xi, &y.f)?.sub(&lie(&y.xi, &x.f)?)? })
}

/// Objects bracket componentwise, with `L_xi b_i - L_zeta a_i` on 1-forms.
pub fn bracket_conn(x: &ConnMultVF, y: &ConnMultVF) -> Result<ConnMultVF> {
    Ok(ConnMultVF { base: bracket_mult(&x.base, &y.base)?, a: lie(x.xi(), &y.a)?.sub(&lie(y.xi(), &x.a)?)? })
}

/// `[x, u] = {xi(u_i)}`.
pub fn act_section(xi: &VectorField, s: &AlgebroidSection) -> Result<AlgebroidSection> {
    Ok(AlgebroidSection { u: lie(xi, &s.u)? })
}

/// The bracket of tagged elements; two sections have no bracket.
pub fn bracket_x(x: &XElement, y: &XElement) -> Result<XElement> {
    match (x, y) {
        (XElement::Object(a), XElement::Object(b)) => Ok(XElement::Object(bracket_conn(a, b)?)),
        (XElement::Object(a), XElement::Section(s)) => Ok(XElement::Section(act_section(a.xi(), s)?)),
        (XElement::Section(s), XElement::Object(a)) => {
            Ok(XElement::Section(AlgebroidSection { u: act_section(a.xi(), s)?.u.scale(-1.0) }))
        }
        (XElement::Section(_), XElement::Section(_)) => {
            Err(Error::DegreeError("bracket of two degree-1 elements is not defined".into()))
        }
    }
}

/// `u -> ((0, {u_i - u_j}), {-d u_i})`.
pub fn diff_x(c: &DeligneCocycle, s: &AlgebroidSection) -> Result<ConnMultVF> {
    let coords = c.coords();
    same_coords(coords, s.u.coords())?;
    let f = cech_delta(&s.u, &c.cover)?.scale(-1.0);
    let a = s.u.map(1, |u| Ok(u.exterior_d().neg()))?;
    Ok(ConnMultVF { base: MultVF { xi: VectorField::zero(coords), f }, a })
}

/// The cocycle condition of the base plus, per chart, `L_xi B_i = d a_i`
/// (skipped when `check_curving` is false) and, per double overlap,
/// `a_j - a_i = L_xi A_ij + d f_ij`.
pub fn validate_connpres(c: &DeligneCocycle, v: &ConnMultVF, oracle: &Oracle, check_curving: bool) -> Report {
    let mut report = validate_multvf(c, &v.base, oracle);
    report.suite = "connpres".into();
    if check_curving {
        let r = (|| {
            let lhs = lie(v.xi(), &c.b)?;
            let rhs = v.a.map(2, |a| Ok(a.exterior_d()))?;
            lhs.compare_per_overlap(&rhs, &c.cover, oracle)
        })();
        match r {
            Ok(rs) => {
                for (idx, r) in rs {
                    report.record(format!("curving{}", label(&idx)), &r);
                }
            }
            Err(e) => report.fail("curving", f64::NAN, None, &e.to_string()),
        }
    }
    let r = (|| {
        let lhs = cech_delta(&v.a, &c.cover)?;
        let rhs = lie(v.xi(), &c.a)?.add(&v.base.f.map(1, |f| Ok(f.exterior_d()))?)?;
        lhs.compare_per_overlap(&rhs, &c.cover, oracle)
    })();
    match r {
        Ok(rs) => {
            for (idx, r) in rs {
                report.record(format!("connection{}", label(&idx)), &r);
            }
        }
        Err(e) => report.fail("connection", f64::NAN, None, &e.to_string()),
    }
    report
}

/// The six-term combination of `F_B` and bracket terms measuring the
/// failure of the horizontal lift to respect Jacobiators.
pub fn morphism_defect(
    c: &DeligneCocycle,
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
) -> Result<AlgebroidSection> {
    let fb = |a: &VectorField, b: &VectorField| f_b_homotopy(c, a, b).map(|s| s.u);
    let terms = [
        fb(x1, &x2.bracket(x3)?)?,
        fb(&x1.bracket(x2)?, x3)?.scale(-1.0),
        fb(x2, &x1.bracket(x3)?)?.scale(-1.0),
        lie(x3, &fb(x1, x2)?)?,
        lie(x1, &fb(x2, x3)?)?,
        lie(x2, &fb(x1, x3)?)?.scale(-1.0),
    ];
    let mut u = CechForm::zero(c.coords(), 0, 1);
    for t in &terms {
        u = u.add(t)?;
    }
    Ok(AlgebroidSection { u })
}

/// `{i_x1 i_x2 i_x3 dB_i}`, the closed form of [`morphism_defect`].
pub fn curvature_contraction(
    c: &DeligneCocycle,
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
) -> Result<AlgebroidSection> {
    let u = c.b.map(0, |b| b.exterior_d().interior(x3)?.interior(x2)?.interior(x1))?;
    Ok(AlgebroidSection { u })
}

/// A section `u` with `diff_x(u)` having vertical part `f`, for `f` a
/// cocycle: walks a spanning tree of the nerve from the first chart.
pub fn section_from_vertical(c: &DeligneCocycle, f: &CechForm) -> Result<AlgebroidSection> {
    shape(f, 0, 2, "f")?;
    let n = c.cover.len();
    let mut u: BTreeMap<usize, Expr> = BTreeMap::new();
    let edges: Vec<Vec<usize>> = c.cover.overlaps(2).map(|(k, _)| k.clone()).collect();
    let mut queue = VecDeque::new();
    for root in 0..n {
        if u.contains_key(&root) {
            continue;
        }
        u.insert(root, Expr::zero());
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for e in &edges {
                let (a, b) = (e[0], e[1]);
                // f_ab = u_a - u_b
                let next = if a == i && !u.contains_key(&b) {
                    Some((b, &u[&a] - &f.scalar(e)))
                } else if b == i && !u.contains_key(&a) {
                    Some((a, &u[&b] + &f.scalar(e)))
                } else {
                    None
                };
                if let Some((k, v)) = next {
                    u.insert(k, v.normalize());
                    queue.push_back(k);
                }
            }
        }
    }
    AlgebroidSection::from_exprs(c.coords(), u)
}

/// For two connection-preserving objects over the same base, the glued
/// difference `a' - a` together with the sampled size of its derivative.
pub fn connection_difference(
    c: &DeligneCocycle,
    v1: &ConnMultVF,
    v2: &ConnMultVF,
    oracle: &Oracle,
) -> Result<(Form, SampleOutcome)> {
    let base = v1.base.xi.compare(&v2.base.xi, c.cover.ambient(), oracle)?;
    let mut fibre = v1.base.f.compare(&v2.base.f, &c.cover, oracle)?;
    fibre.merge(base);
    if !fibre.pass {
        return Err(Error::Invalid("objects have different underlying multiplicative vector fields".into()));
    }
    let diff = glue(&v2.a.sub(&v1.a)?, &c.cover, oracle, "connection difference")?;
    let closed = diff.exterior_d().compare_zero(c.cover.ambient(), oracle)?;
    Ok((diff, closed))
}

/// Vector fields on the base as a Lie algebra with trivial degree 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldAlgebra {
    pub region: CoordBox,
    pub coords: Coords,
}

impl Lie2Structure for VectorFieldAlgebra {
    type V0 = VectorField;
    type V1 = ();

    fn d(&self, _h: &()) -> Result<VectorField> {
        Ok(VectorField::zero(&self.coords))
    }
    fn bracket(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        Ok(x.bracket(y)?)
    }
    fn act(&self, _x: &VectorField, _h: &()) -> Result<()> {
        Ok(())
    }
    fn jacobiator(&self, _x: &VectorField, _y: &VectorField, _z: &VectorField) -> Result<()> {
        Ok(())
    }
    fn zero0(&self) -> VectorField {
        VectorField::zero(&self.coords)
    }
    fn zero1(&self) {}
    fn add0(&self, a: &VectorField, b: &VectorField) -> Result<VectorField> {
        Ok(a.add(b)?)
    }
    fn add1(&self, _a: &(), _b: &()) -> Result<()> {
        Ok(())
    }
    fn scale0(&self, s: f64, a: &VectorField) -> Result<VectorField> {
        Ok(a.scale(&Expr::constant(s)))
    }
    fn scale1(&self, _s: f64, _a: &()) -> Result<()> {
        Ok(())
    }
    fn compare0(&self, a: &VectorField, b: &VectorField, oracle: &Oracle) -> Result<SampleOutcome> {
        Ok(a.compare(b, &self.region, oracle)?)
    }
    fn compare1(&self, _a: &(), _b: &(), _oracle: &Oracle) -> Result<SampleOutcome> {
        Ok(SampleOutcome { pass: true, max_residual: 0.0, witness: None })
    }
}

fn compare_sections(
    c: &DeligneCocycle,
    a: &AlgebroidSection,
    b: &AlgebroidSection,
    o: &Oracle,
) -> Result<SampleOutcome> {
    a.u.compare(&b.u, &c.cover, o)
}

fn compare_mult(c: &DeligneCocycle, a: &MultVF, b: &MultVF, o: &Oracle) -> Result<SampleOutcome> {
    let mut r = a.xi.compare(&b.xi, c.cover.ambient(), o)?;
    r.merge(a.f.compare(&b.f, &c.cover, o)?);
    Ok(r)
}

fn add_mult(a: &MultVF, b: &MultVF) -> Result<MultVF> {
    Ok(MultVF { xi: a.xi.add(&b.xi)?, f: a.f.add(&b.f)? })
}

/// The strict Lie 2-algebra of multiplicative vector fields on the
/// gerbe's groupoid, ignoring the connective structure.
#[derive(Debug, Clone, PartialEq)]
pub struct MultVFLie2 {
    pub cocycle: DeligneCocycle,
}

impl Lie2Structure for MultVFLie2 {
    type V0 = MultVF;
    type V1 = AlgebroidSection;

    fn d(&self, h: &AlgebroidSection) -> Result<MultVF> {
        Ok(diff_x(&self.cocycle, h)?.base)
    }
    fn bracket(&self, x: &MultVF, y: &MultVF) -> Result<MultVF> {
        bracket_mult(x, y)
    }
    fn act(&self, x: &MultVF, h: &AlgebroidSection) -> Result<AlgebroidSection> {
        act_section(&x.xi, h)
    }
    fn jacobiator(&self, _x: &MultVF, _y: &MultVF, _z: &MultVF) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection::zero(self.cocycle.coords()))
    }
    fn zero0(&self) -> MultVF {
        MultVF::zero(self.cocycle.coords())
    }
    fn zero1(&self) -> AlgebroidSection {
        AlgebroidSection::zero(self.cocycle.coords())
    }
    fn add0(&self, a: &MultVF, b: &MultVF) -> Result<MultVF> {
        add_mult(a, b)
    }
    fn add1(&self, a: &AlgebroidSection, b: &AlgebroidSection) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection { u: a.u.add(&b.u)? })
    }
    fn scale0(&self, s: f64, a: &MultVF) -> Result<MultVF> {
        Ok(MultVF { xi: a.xi.scale(&Expr::constant(s)), f: a.f.scale(s) })
    }
    fn scale1(&self, s: f64, a: &AlgebroidSection) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection { u: a.u.scale(s) })
    }
    fn compare0(&self, a: &MultVF, b: &MultVF, o: &Oracle) -> Result<SampleOutcome> {
        compare_mult(&self.cocycle, a, b, o)
    }
    fn compare1(&self, a: &AlgebroidSection, b: &AlgebroidSection, o: &Oracle) -> Result<SampleOutcome> {
        compare_sections(&self.cocycle, a, b, o)
    }
}

/// The strict Lie 2-algebra of connection-preserving multiplicative
/// vector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct GerbeLie2 {
    pub cocycle: DeligneCocycle,
}

impl Lie2Structure for GerbeLie2 {
    type V0 = ConnMultVF;
    type V1 = AlgebroidSection;

    fn d(&self, h: &AlgebroidSection) -> Result<ConnMultVF> {
        diff_x(&self.cocycle, h)
    }
    fn bracket(&self, x: &ConnMultVF, y: &ConnMultVF) -> Result<ConnMultVF> {
        bracket_conn(x, y)
    }
    fn act(&self, x: &ConnMultVF, h: &AlgebroidSection) -> Result<AlgebroidSection> {
        act_section(x.xi(), h)
    }
    fn jacobiator(&self, _x: &ConnMultVF, _y: &ConnMultVF, _z: &ConnMultVF) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection::zero(self.cocycle.coords()))
    }
    fn zero0(&self) -> ConnMultVF {
        ConnMultVF::zero(self.cocycle.coords())
    }
    fn zero1(&self) -> AlgebroidSection {
        AlgebroidSection::zero(self.cocycle.coords())
    }
    fn add0(&self, a: &ConnMultVF, b: &ConnMultVF) -> Result<ConnMultVF> {
        Ok(ConnMultVF { base: add_mult(&a.base, &b.base)?, a: a.a.add(&b.a)? })
    }
    fn add1(&self, a: &AlgebroidSection, b: &AlgebroidSection) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection { u: a.u.add(&b.u)? })
    }
    fn scale0(&self, s: f64, a: &ConnMultVF) -> Result<ConnMultVF> {
        Ok(ConnMultVF {
            base: MultVF { xi: a.base.xi.scale(&Expr::constant(s)), f: a.base.f.scale(s) },
            a: a.a.scale(s),
        })
    }
    fn scale1(&self, s: f64, a: &AlgebroidSection) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection { u: a.u.scale(s) })
    }
    fn compare0(&self, a: &ConnMultVF, b: &ConnMultVF, o: &Oracle) -> Result<SampleOutcome> {
        let mut r = compare_mult(&self.cocycle, &a.base, &b.base, o)?;
        r.merge(a.a.compare(&b.a, &self.cocycle.cover, o)?);
        Ok(r)
    }
    fn compare1(&self, a: &AlgebroidSection, b: &AlgebroidSection, o: &Oracle) -> Result<SampleOutcome> {
        compare_sections(&self.cocycle, a, b, o)
    }
}

/// The horizontal lift with homotopy `F_B`, as a candidate morphism from
/// base vector fields to multiplicative vector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalLift {
    pub cocycle: DeligneCocycle,
}

impl Lie2Morphism<VectorFieldAlgebra, MultVFLie2> for HorizontalLift {
    fn f0(&self, x: &VectorField) -> Result<MultVF> {
        horizontal_lift(&self.cocycle, x)
    }
    fn f1(&self, _h: &()) -> Result<AlgebroidSection> {
        Ok(AlgebroidSection::zero(self.cocycle.coords()))
    }
    fn f2(&self, x: &VectorField, y: &VectorField) -> Result<AlgebroidSection> {
        f_b_homotopy(&self.cocycle, x, y)
    }
}

#[cfg(test)]
mod tests;
