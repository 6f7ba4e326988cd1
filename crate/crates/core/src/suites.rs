//! Named verification suites over a loaded bundle.

use thiserror::Error;

use crate::bundle::{Bundle, MultVfEntry};
use crate::cartan::{check_appendix_identity, check_cartan_identities, random_appendix_instance, Form, VectorField};
use crate::cech::{label, three_curvature, trivial_gerbe, validate_deligne, validate_trivialization};
use crate::error::Result;
use crate::gerbevf::{
    curvature_contraction, diff_x, horizontal_lift, morphism_defect, validate_connpres, validate_multvf,
    AlgebroidSection, ConnMultVF, GerbeLie2, MultVFLie2,
};
use crate::lie2core::{check_invertible, check_lie2_axioms, tuples, Butterfly, ButterflySamples, Lie2Structure};
use crate::plectic::{plectic_d, validate_ham_pair, HamPair, PlecticManifold};
use crate::quantomorph::{
    build_e, build_q, carrier_samples, check_square, sigma_section_e, validate_qham, EButterfly, GerbeCarrier,
    MomentMap, QButterfly, SquareInput,
};
use crate::report::Report;
use crate::symexpr::{parse, Expr, Oracle};

pub const SUITES: [&str; 10] =
    ["cartan", "deligne", "multvf", "lie2", "plectic", "butterflyE", "butterflyQ", "square", "qham", "all"];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (expected one of {list})", list = SUITES.join(", "))]
    UnknownSuite(String),
}

/// Runs one suite, or every suite for `all` with entries prefixed by the
/// suite name. Entries are sorted by id.
pub fn run_suite(b: &Bundle, suite: &str, oracle: &Oracle) -> Result<Report, SuiteError> {
    let mut report = if suite == "all" {
        let mut all = Report::new("all");
        for s in &SUITES[..SUITES.len() - 1] {
            all.absorb(s, single(b, s, oracle).expect("listed suite"));
        }
        all
    } else {
        single(b, suite, oracle)?
    };
    report.sort();
    Ok(report)
}

fn single(b: &Bundle, suite: &str, oracle: &Oracle) -> Result<Report, SuiteError> {
    let s = Samples::new(b);
    let mut report = Report::new(suite);
    let run = match suite {
        "cartan" => cartan(b, &s, oracle, &mut report),
        "deligne" => deligne(b, oracle, &mut report),
        "multvf" => multvf(b, &s, oracle, &mut report),
        "lie2" => lie2(b, &s, oracle, &mut report),
        "plectic" => plectic(b, &s, oracle, &mut report),
        "butterflyE" => butterfly_e(b, &s, oracle, &mut report),
        "butterflyQ" => butterfly_q(b, &s, oracle, &mut report),
        "square" => square(b, &s, oracle, &mut report),
        "qham" => qham(b, oracle, &mut report),
        other => return Err(SuiteError::UnknownSuite(other.to_string())),
    };
    if let Err(e) = run {
        report.fail("error", f64::NAN, None, &e.to_string());
    }
    Ok(report)
}

/// Sample functions, chart sections and vector fields built from the
/// coordinate names.
struct Samples {
    functions: Vec<Expr>,
    sections: Vec<AlgebroidSection>,
    fields: Vec<VectorField>,
}

impl Samples {
    fn new(b: &Bundle) -> Samples {
        let k = b.coords();
        let first = &k[0];
        let second = k.get(1).unwrap_or(first);
        let last = &k[k.len() - 1];
        let e = |s: String| parse(&s).expect("generated expression parses");
        let functions = vec![e(format!("{}*{}", first, second)), e(format!("{}^2 - {}", last, first)), Expr::one()];
        let n = b.cocycle.cover.len();
        let section = |f: &dyn Fn(usize) -> String| {
            AlgebroidSection::from_exprs(k, (0..n).map(|i| (i, e(f(i))))).expect("chart sections")
        };
        let sections = vec![
            section(&|i| format!("{}*{} + {}", first, second, i)),
            section(&|i| format!("sin({}) + {}*{}", last, i, first)),
        ];
        let mut fields: Vec<VectorField> = (0..k.len()).map(|i| VectorField::coordinate(k, i)).collect();
        if k.len() >= 2 {
            let mut comps = vec![Expr::zero(); k.len()];
            comps[0] = -Expr::var(second);
            comps[1] = Expr::var(first);
            fields.push(VectorField::new(k, comps).expect("rotation field"));
        }
        fields.extend(b.ham_pairs.iter().map(|h| h.xi.clone()));
        Samples { functions, sections, fields }
    }

    /// Hamiltonian pairs of the bundle together with `d f` for the sample
    /// functions.
    fn pairs(&self, b: &Bundle) -> Vec<HamPair> {
        let mut out = b.ham_pairs.clone();
        out.extend(self.functions.iter().map(|f| plectic_d(b.coords(), f)));
        out
    }
}

fn guard(report: &mut Report, prefix: &str, r: Result<Report>) {
    match r {
        Ok(sub) => report.absorb(prefix, sub),
        Err(e) => report.fail(if prefix.is_empty() { "error" } else { prefix }, f64::NAN, None, &e.to_string()),
    }
}

fn cartan(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let c = &b.cocycle;
    let fields = &s.fields[..s.fields.len().min(3)];
    let mut global: Vec<Form> = b.plectic_form.iter().cloned().collect();
    global.extend(b.ham_pairs.iter().map(|h| h.beta.clone()));
    if let Some(t) = &b.trivialization {
        global.push(t.omega.clone());
    }
    global.extend(s.functions.iter().map(|f| Form::function(c.coords(), f.clone())));
    guard(report, "manifold", check_cartan_identities(&global, fields, b.region(), o).map_err(Into::into));
    for (idx, region) in c.cover.overlaps(1).chain(c.cover.overlaps(2)) {
        let mut forms = if idx.len() == 1 { vec![c.b.get(idx)] } else { vec![c.a.get(idx)] };
        if let Some(t) = &b.trivialization {
            forms.push(if idx.len() == 1 { t.eta.get(idx) } else { t.psi.get(idx) });
        }
        forms.retain(|f| !f.terms().is_empty());
        guard(
            report,
            &format!("chart{}", label(idx)),
            check_cartan_identities(&forms, fields, region, o).map_err(Into::into),
        );
    }
    let inst = random_appendix_instance(o.seed)?;
    let [x, y, z] = &inst.fields;
    let [a1, a2, a3] = &inst.potentials;
    let r = check_appendix_identity(&inst.b, x, y, z, a1, a2, a3, &inst.region, o)?;
    report.record("appendix", &r.outcome);
    Ok(())
}

fn deligne(b: &Bundle, o: &Oracle, report: &mut Report) -> Result<()> {
    let c = &b.cocycle;
    report.absorb("", validate_deligne(c, o));
    match three_curvature(c, o) {
        Ok(chi) => match &b.plectic_form {
            Some(p) => report.record("three-curvature", &chi.compare(p, b.region(), o)?),
            None => report.pass("three-curvature", 0.0),
        },
        Err(e) => report.fail("three-curvature", f64::NAN, None, &e.to_string()),
    }
    match &b.trivialization {
        Some(t) => report.absorb("trivialization", validate_trivialization(c, t, o)),
        None => report.skip("trivialization", "bundle has no trivialization"),
    }
    Ok(())
}

fn multvf(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let c = &b.cocycle;
    if b.mult_vf.is_empty() {
        report.skip("mult_vf", "bundle has no multiplicative vector fields");
    }
    for (k, v) in b.mult_vf.iter().enumerate() {
        report.absorb(&format!("mult_vf({})", k + 1), validate_multvf(c, v.base(), o));
        if let MultVfEntry::Connective(v) = v {
            report.absorb(&format!("mult_vf({}).connective", k + 1), validate_connpres(c, v, o, true));
        }
    }
    for (k, x) in s.fields.iter().enumerate() {
        report.absorb(&format!("lift({})", k + 1), validate_multvf(c, &horizontal_lift(c, x)?, o));
    }
    for (k, u) in s.sections.iter().enumerate() {
        report.absorb(&format!("diff({})", k + 1), validate_connpres(c, &diff_x(c, u)?, o, true));
    }
    for t in tuples(s.fields.len(), 3, 20) {
        let [x1, x2, x3] = [&s.fields[t[0]], &s.fields[t[1]], &s.fields[t[2]]];
        let lhs = morphism_defect(c, x1, x2, x3)?;
        let rhs = curvature_contraction(c, x1, x2, x3)?;
        report.record(format!("defect({},{},{})", t[0] + 1, t[1] + 1, t[2] + 1), &lhs.u.compare(&rhs.u, &c.cover, o)?);
    }
    Ok(())
}

fn connective_samples(b: &Bundle, s: &Samples, o: &Oracle) -> Result<Vec<ConnMultVF>> {
    let c = &b.cocycle;
    let mut x0: Vec<ConnMultVF> = b
        .mult_vf
        .iter()
        .filter_map(|v| match v {
            MultVfEntry::Connective(v) => Some(v.clone()),
            MultVfEntry::Plain(_) => None,
        })
        .collect();
    for u in &s.sections {
        x0.push(diff_x(c, u)?);
    }
    for f in &s.functions {
        let u = AlgebroidSection::from_exprs(c.coords(), (0..c.cover.len()).map(|i| (i, f.clone())))?;
        x0.push(diff_x(c, &u)?);
    }
    if let Some(e) = curvature_butterfly(b, o).ok().flatten() {
        for h in &b.ham_pairs {
            x0.push(sigma_section_e(&e, h)?.v);
        }
    }
    Ok(x0)
}

fn lie2(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let c = &b.cocycle;
    let gerbe = GerbeLie2 { cocycle: c.clone() };
    let x0 = connective_samples(b, s, o)?;
    report.absorb("connective", check_lie2_axioms(&gerbe, &x0, &s.sections, o));
    let mult = MultVFLie2 { cocycle: c.clone() };
    let mut m0: Vec<_> = x0.iter().map(|v| v.base.clone()).collect();
    for x in s.fields.iter().take(3) {
        m0.push(horizontal_lift(c, x)?);
    }
    report.absorb("multiplicative", check_lie2_axioms(&mult, &m0, &s.sections, o));
    match &b.findim {
        Some(l) => {
            let (x0, x1) = l.sample_elements(2, o.seed);
            report.absorb("findim", check_lie2_axioms(l, &x0, &x1, o));
        }
        None => report.skip("findim", "bundle has no finite-dimensional Lie 2-algebra"),
    }
    Ok(())
}

fn plectic_manifold(b: &Bundle, o: &Oracle) -> Option<Result<PlecticManifold>> {
    b.plectic_form.as_ref().map(|chi| PlecticManifold::new(b.region().clone(), chi.clone(), o))
}

fn plectic(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let Some(p) = plectic_manifold(b, o) else {
        report.skip("plectic", "bundle has no plectic form");
        return Ok(());
    };
    let p = p?;
    let pairs = s.pairs(b);
    for (k, h) in pairs.iter().enumerate() {
        report.absorb(&format!("ham({})", k + 1), validate_ham_pair(&p, h, o));
    }
    report.absorb("axioms", check_lie2_axioms(&p, &pairs, &s.functions, o));
    Ok(())
}

/// The curvature butterfly, `None` without a plectic form.
fn curvature_butterfly(b: &Bundle, o: &Oracle) -> Result<Option<EButterfly>> {
    match plectic_manifold(b, o) {
        Some(p) => Ok(Some(build_e(&b.cocycle, &p?, o)?)),
        None => Ok(None),
    }
}

fn e_samples(e: &EButterfly, pairs: &[HamPair], s: &Samples) -> Result<ButterflySamples<EButterfly>> {
    let carrier = carrier_samples(e, pairs, &s.functions, &s.sections)?;
    let target0 = carrier.iter().map(|x| x.v.clone()).collect();
    Ok(ButterflySamples {
        carrier,
        source1: s.functions.clone(),
        target1: s.sections.clone(),
        source0: pairs.to_vec(),
        target0,
    })
}

fn butterfly_e(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let e = match curvature_butterfly(b, o) {
        Ok(Some(e)) => e,
        Ok(None) => {
            report.skip("build", "bundle has no plectic form");
            return Ok(());
        }
        Err(err) => {
            report.fail("build", f64::NAN, None, &err.to_string());
            return Ok(());
        }
    };
    report.pass("build", 0.0);
    let pairs = s.pairs(b);
    guard(report, "", check_invertible(&e, &e_samples(&e, &pairs, s)?, o));
    for (k, h) in pairs.iter().enumerate() {
        let back = e.sigma(&e.section(h)?)?;
        report.record(format!("section({})", k + 1), &e.source().compare0(&back, h, o)?);
    }
    Ok(())
}

fn butterfly_q(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let Some(t) = &b.trivialization else {
        report.skip("build", "bundle has no trivialization");
        return Ok(());
    };
    let q: QButterfly = match build_q(&b.cocycle, t, o) {
        Ok(q) => q,
        Err(err) => {
            report.fail("build", f64::NAN, None, &err.to_string());
            return Ok(());
        }
    };
    report.pass("build", 0.0);
    let p = PlecticManifold::new(b.region().clone(), t.omega.exterior_d(), o)?;
    let triv = build_e(&trivial_gerbe(b.region().clone(), &t.omega)?, &p, o)?;
    let target = build_e(&b.cocycle, &p, o)?;
    let pairs = s.pairs(b);
    let source0: Vec<ConnMultVF> =
        pairs.iter().map(|h| triv.rho(&sigma_section_e(&triv, h)?)).collect::<Result<_>>()?;
    let source1: Vec<AlgebroidSection> = s.functions.iter().map(|h| q.global_section(h)).collect::<Result<_>>()?;
    let target0 = e_samples(&target, &pairs, s)?.target0;
    let carrier = carrier_samples(&q, &source0, &source1, &s.sections)?;
    let samples = ButterflySamples { carrier, source1, target1: s.sections.clone(), source0, target0 };
    guard(report, "", check_invertible(&q, &samples, o));
    Ok(())
}

fn square(b: &Bundle, s: &Samples, o: &Oracle, report: &mut Report) -> Result<()> {
    let Some(t) = &b.trivialization else {
        report.skip("square", "bundle has no trivialization");
        return Ok(());
    };
    let qham = match (&b.group_model, &b.qham) {
        (Some(g), Some(d)) => Some((g.clone(), d.clone())),
        _ => None,
    };
    let moment = match (&b.moment_map, &b.group_model) {
        (Some(pairs), Some(g)) => Some(MomentMap::new(g.algebra()?, pairs.clone(), b.coords())?),
        (Some(_), None) => {
            report.skip("moment", "moment map given without a group model");
            None
        }
        _ => None,
    };
    let input =
        SquareInput { pairs: s.pairs(b), functions: s.functions.clone(), sections: s.sections.clone(), moment, qham };
    guard(report, "", check_square(&b.cocycle, t, &input, o));
    Ok(())
}

fn qham(b: &Bundle, o: &Oracle, report: &mut Report) -> Result<()> {
    match (&b.group_model, &b.qham) {
        (Some(g), Some(d)) => report.absorb("", validate_qham(g, d, o)),
        (None, _) => report.skip("qham", "bundle has no group_model"),
        (_, None) => report.skip("qham", "bundle has no qham data"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::parse_bundle;
    use crate::report::Status;

    fn fixture(name: &str) -> Bundle {
        let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
        crate::bundle::load_bundle(path).unwrap()
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let b = fixture("flat.json");
        assert_eq!(run_suite(&b, "nope", &Oracle::default()), Err(SuiteError::UnknownSuite("nope".into())));
    }

    #[test]
    fn all_is_the_union_of_the_suites() {
        let b = fixture("f2.json");
        let o = Oracle::default();
        let all = run_suite(&b, "all", &o).unwrap();
        assert!(all.passed(), "{}", all.to_text());
        let mut n = 0;
        for s in &SUITES[..SUITES.len() - 1] {
            let r = run_suite(&b, s, &o).unwrap();
            n += r.entries.len();
            for e in &r.entries {
                let id = format!("{}.{}", s, e.id);
                assert_eq!(all.get(&id).map(|x| x.status), Some(e.status), "{}", id);
            }
        }
        assert_eq!(n, all.entries.len());
        let ids: Vec<&str> = all.entries.iter().map(|e| e.id.as_str()).collect();
        assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn curvature_mismatch_is_a_failure_entry() {
        let mut v: serde_json::Value = serde_json::from_str(include_str!("../fixtures/f2.json")).unwrap();
        v["plectic_form"]["terms"][0]["coefficient"] = "2".into();
        let b = parse_bundle(&v.to_string()).unwrap();
        let r = run_suite(&b, "butterflyE", &Oracle::default()).unwrap();
        let e = r.get("build").unwrap();
        assert_eq!(e.status, Status::Fail);
        assert!(e.note.as_deref().unwrap().contains("3-curvature differs"), "{:?}", e.note);
    }

    #[test]
    fn qham_without_group_model_skips() {
        let r = run_suite(&fixture("f2.json"), "qham", &Oracle::default()).unwrap();
        assert!(r.passed());
        assert!(r.entries.iter().all(|e| e.status == Status::Skip));
        let r = run_suite(&fixture("abelian_qham.json"), "qham", &Oracle::default()).unwrap();
        assert!(r.passed() && r.get("moment(1)").unwrap().status == Status::Pass, "{}", r.to_text());
    }

    #[test]
    fn broken_curving_fails_with_unit_residual() {
        let r = run_suite(&fixture("f2_broken.json"), "deligne", &Oracle::default()).unwrap();
        let fails: Vec<_> = r.failures().collect();
        assert_eq!(fails.len(), 1);
        assert!((fails[0].residual - 1.0).abs() <= 1e-9);
        assert!(fails[0].witness.is_some());
    }

    #[test]
    fn reports_are_deterministic() {
        let b = fixture("three_chart.json");
        let o = Oracle::default();
        let a = run_suite(&b, "all", &o).unwrap();
        let c = run_suite(&b, "all", &o).unwrap();
        assert_eq!(a.to_json_lines(), c.to_json_lines());
        assert_eq!(a.to_text(), c.to_text());
    }
}
