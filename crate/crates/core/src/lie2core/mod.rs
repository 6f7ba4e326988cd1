//! Two-term L-infinity algebras, their morphisms and butterflies, with
//! sampled checkers for every axiom and a finite-dimensional numeric model.

mod adapters;
mod findim;
mod linalg;

pub use adapters::{Composite, Flip};
pub use findim::{
    butterfly_of_morphism, compose_butterflies, find_2iso, identity_butterfly, random_strict_chain, ButterflyIso,
    FinDimButterfly, FinDimLie2, FinDimMorphism, StrictMorphism,
};
pub use linalg::{column_basis, lstsq, null_space, rank};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::symexpr::{Oracle, SampleOutcome};

/// A Lie 2-algebra `d: V1 -> V0` with bracket, action of `V0` on `V1`,
/// Jacobiator, linear structure and a sampled equality oracle.
pub trait Lie2Structure {
    type V0: Clone;
    type V1: Clone;

    fn d(&self, h: &Self::V1) -> Result<Self::V0>;
    /// `[x, y]` on degree 0.
    fn bracket(&self, x: &Self::V0, y: &Self::V0) -> Result<Self::V0>;
    /// `[x, h]` for `x` of degree 0 and `h` of degree 1.
    fn act(&self, x: &Self::V0, h: &Self::V1) -> Result<Self::V1>;
    fn jacobiator(&self, x: &Self::V0, y: &Self::V0, z: &Self::V0) -> Result<Self::V1>;

    fn zero0(&self) -> Self::V0;
    fn zero1(&self) -> Self::V1;
    fn add0(&self, a: &Self::V0, b: &Self::V0) -> Result<Self::V0>;
    fn add1(&self, a: &Self::V1, b: &Self::V1) -> Result<Self::V1>;
    fn scale0(&self, s: f64, a: &Self::V0) -> Result<Self::V0>;
    fn scale1(&self, s: f64, a: &Self::V1) -> Result<Self::V1>;

    fn compare0(&self, a: &Self::V0, b: &Self::V0, oracle: &Oracle) -> Result<SampleOutcome>;
    fn compare1(&self, a: &Self::V1, b: &Self::V1, oracle: &Oracle) -> Result<SampleOutcome>;

    fn sub0(&self, a: &Self::V0, b: &Self::V0) -> Result<Self::V0> {
        self.add0(a, &self.scale0(-1.0, b)?)
    }

    fn sub1(&self, a: &Self::V1, b: &Self::V1) -> Result<Self::V1> {
        self.add1(a, &self.scale1(-1.0, b)?)
    }

    fn sum0(&self, items: &[Self::V0]) -> Result<Self::V0> {
        let mut acc = self.zero0();
        for i in items {
            acc = self.add0(&acc, i)?;
        }
        Ok(acc)
    }

    fn sum1(&self, items: &[Self::V1]) -> Result<Self::V1> {
        let mut acc = self.zero1();
        for i in items {
            acc = self.add1(&acc, i)?;
        }
        Ok(acc)
    }
}

/// A morphism `(F0, F1, F2)` between Lie 2-algebras.
pub trait Lie2Morphism<S: Lie2Structure, T: Lie2Structure> {
    fn f0(&self, x: &S::V0) -> Result<T::V0>;
    fn f1(&self, h: &S::V1) -> Result<T::V1>;
    /// The chain homotopy from `F[x,y]` to `[Fx,Fy]`.
    fn f2(&self, x: &S::V0, y: &S::V0) -> Result<T::V1>;
}

/// Butterfly `source --> target` with carrier `E`.
pub trait Butterfly {
    type Source: Lie2Structure;
    type Target: Lie2Structure;
    type E: Clone;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;

    fn kappa(&self, x: &<Self::Source as Lie2Structure>::V1) -> Result<Self::E>;
    fn lambda(&self, u: &<Self::Target as Lie2Structure>::V1) -> Result<Self::E>;
    fn sigma(&self, e: &Self::E) -> Result<<Self::Source as Lie2Structure>::V0>;
    fn rho(&self, e: &Self::E) -> Result<<Self::Target as Lie2Structure>::V0>;
    fn bracket(&self, a: &Self::E, b: &Self::E) -> Result<Self::E>;

    fn zero(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Result<Self::E>;
    fn scale(&self, s: f64, a: &Self::E) -> Result<Self::E>;
    fn compare(&self, a: &Self::E, b: &Self::E, oracle: &Oracle) -> Result<SampleOutcome>;

    /// Short exactness of `0 -> W1 -> E -> V0 -> 0`.
    fn check_exactness(&self, _samples: &ButterflySamples<Self>, _oracle: &Oracle) -> Result<Report> {
        Err(Error::UnsupportedExactnessCheck)
    }

    /// Short exactness of `0 -> V1 -> E -> W0 -> 0`, i.e. invertibility.
    fn check_reverse_exactness(&self, _samples: &ButterflySamples<Self>, _oracle: &Oracle) -> Result<Report> {
        Err(Error::UnsupportedExactnessCheck)
    }
}

pub type SourceV0<B> = <<B as Butterfly>::Source as Lie2Structure>::V0;
pub type SourceV1<B> = <<B as Butterfly>::Source as Lie2Structure>::V1;
pub type TargetV0<B> = <<B as Butterfly>::Target as Lie2Structure>::V0;
pub type TargetV1<B> = <<B as Butterfly>::Target as Lie2Structure>::V1;

/// Sample elements for butterfly checks.
pub struct ButterflySamples<B: Butterfly + ?Sized> {
    pub carrier: Vec<B::E>,
    pub source1: Vec<SourceV1<B>>,
    pub target1: Vec<TargetV1<B>>,
    pub source0: Vec<SourceV0<B>>,
    pub target0: Vec<TargetV0<B>>,
}

impl<B: Butterfly + ?Sized> Clone for ButterflySamples<B> {
    fn clone(&self) -> Self {
        ButterflySamples {
            carrier: self.carrier.clone(),
            source1: self.source1.clone(),
            target1: self.target1.clone(),
            source0: self.source0.clone(),
            target0: self.target0.clone(),
        }
    }
}

/// Index tuples with repetition, thinned to at most `cap` by a fixed stride.
pub(crate) fn tuples(n: usize, arity: usize, cap: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let total = n.pow(arity as u32);
    let stride = total.div_ceil(cap.max(1)).max(1);
    // odd strides coprime to n keep the selection spread over all slots
    let stride = if stride > 1 && n.is_multiple_of(2) && stride.is_multiple_of(2) { stride + 1 } else { stride };
    let mut out = Vec::new();
    let mut t = 0;
    while t < total && out.len() < cap {
        let mut rest = t;
        let mut tup = Vec::with_capacity(arity);
        for _ in 0..arity {
            tup.push(rest % n);
            rest /= n;
        }
        out.push(tup);
        t += stride;
    }
    out
}

struct Acc {
    outcome: SampleOutcome,
    error: Option<Error>,
}

impl Acc {
    fn new() -> Acc {
        Acc { outcome: SampleOutcome { pass: true, max_residual: 0.0, witness: None }, error: None }
    }

    fn add(&mut self, r: Result<SampleOutcome>) {
        match r {
            Ok(o) => self.outcome.merge(o),
            Err(e) => {
                if self.error.is_none() {
                    self.error = Some(e);
                }
            }
        }
    }

    fn finish(self, report: &mut Report, id: &str) {
        match self.error {
            Some(e) => report.fail(id, f64::NAN, None, &e.to_string()),
            None => report.record(id, &self.outcome),
        }
    }
}

const CAP3: usize = 48;
const CAP4: usize = 64;

/// Checks the Lie 2-algebra axioms on sample elements: the bracket is a
/// skew chain map, `J` is skew and a chain homotopy from `[x,[y,z]]` to
/// `[[x,y],z] + [y,[x,z]]`, and the quartic coherence law holds.
pub fn check_lie2_axioms<L: Lie2Structure>(l: &L, x0: &[L::V0], x1: &[L::V1], oracle: &Oracle) -> Report {
    let mut report = Report::new("lie2");
    if x0.len() < 4 || x1.len() < 2 {
        report.fail("samples", f64::NAN, None, "need at least four degree-0 and two degree-1 samples");
        return report;
    }

    let mut acc = Acc::new();
    for x in x0 {
        for h in x1 {
            acc.add((|| {
                let lhs = l.d(&l.act(x, h)?)?;
                let rhs = l.bracket(x, &l.d(h)?)?;
                l.compare0(&lhs, &rhs, oracle)
            })());
        }
    }
    acc.finish(&mut report, "chain.d-of-action");

    let mut acc = Acc::new();
    for h in x1 {
        for k in x1 {
            acc.add((|| {
                let s = l.add1(&l.act(&l.d(h)?, k)?, &l.act(&l.d(k)?, h)?)?;
                l.compare1(&s, &l.zero1(), oracle)
            })());
        }
    }
    acc.finish(&mut report, "chain.degree-two");

    let mut acc = Acc::new();
    for x in x0 {
        for y in x0 {
            acc.add((|| {
                let s = l.add0(&l.bracket(x, y)?, &l.bracket(y, x)?)?;
                l.compare0(&s, &l.zero0(), oracle)
            })());
        }
    }
    acc.finish(&mut report, "skew.bracket");

    let triples = tuples(x0.len(), 3, CAP3);
    let mut acc = Acc::new();
    for t in &triples {
        let (x, y, z) = (&x0[t[0]], &x0[t[1]], &x0[t[2]]);
        acc.add((|| {
            let j = l.jacobiator(x, y, z)?;
            let a = l.add1(&j, &l.jacobiator(y, x, z)?)?;
            let b = l.add1(&j, &l.jacobiator(x, z, y)?)?;
            let mut o = l.compare1(&a, &l.zero1(), oracle)?;
            o.merge(l.compare1(&b, &l.zero1(), oracle)?);
            Ok(o)
        })());
    }
    acc.finish(&mut report, "skew.jacobiator");

    let mut acc = Acc::new();
    for t in &triples {
        let (x, y, z) = (&x0[t[0]], &x0[t[1]], &x0[t[2]]);
        acc.add((|| {
            let lhs = l.d(&l.jacobiator(x, y, z)?)?;
            let rhs = l.sum0(&[
                l.bracket(x, &l.bracket(y, z)?)?,
                l.scale0(-1.0, &l.bracket(&l.bracket(x, y)?, z)?)?,
                l.scale0(-1.0, &l.bracket(y, &l.bracket(x, z)?)?)?,
            ])?;
            l.compare0(&lhs, &rhs, oracle)
        })());
    }
    acc.finish(&mut report, "homotopy.degree-zero");

    let mut acc = Acc::new();
    for t in tuples(x0.len(), 2, CAP3) {
        for h in x1 {
            let (x, y) = (&x0[t[0]], &x0[t[1]]);
            acc.add((|| {
                let lhs = l.jacobiator(x, y, &l.d(h)?)?;
                let rhs = l.sum1(&[
                    l.act(x, &l.act(y, h)?)?,
                    l.scale1(-1.0, &l.act(&l.bracket(x, y)?, h)?)?,
                    l.scale1(-1.0, &l.act(y, &l.act(x, h)?)?)?,
                ])?;
                l.compare1(&lhs, &rhs, oracle)
            })());
        }
    }
    acc.finish(&mut report, "homotopy.degree-one");

    let mut acc = Acc::new();
    for t in tuples(x0.len(), 4, CAP4) {
        let (x, y, z, w) = (&x0[t[0]], &x0[t[1]], &x0[t[2]], &x0[t[3]]);
        acc.add((|| {
            let j = |a: &L::V0, b: &L::V0, c: &L::V0| l.jacobiator(a, b, c);
            let br = |a: &L::V0, b: &L::V0| l.bracket(a, b);
            // [J(x,y,z), w] = -[w, J(x,y,z)]
            let lhs = l.sum1(&[
                l.act(x, &j(y, z, w)?)?,
                j(x, &br(y, z)?, w)?,
                j(x, z, &br(y, w)?)?,
                l.scale1(-1.0, &l.act(w, &j(x, y, z)?)?)?,
                l.act(z, &j(x, y, w)?)?,
            ])?;
            let rhs = l.sum1(&[
                j(x, y, &br(z, w)?)?,
                j(&br(x, y)?, z, w)?,
                l.act(y, &j(x, z, w)?)?,
                j(y, &br(x, z)?, w)?,
                j(y, z, &br(x, w)?)?,
            ])?;
            l.compare1(&lhs, &rhs, oracle)
        })());
    }
    acc.finish(&mut report, "coherence");
    report
}

/// Checks that `(F0, F1, F2)` is a morphism: chain map, `F2` a skew chain
/// homotopy from `F[x,y]` to `[Fx,Fy]`, and compatibility with Jacobiators.
pub fn check_morphism<S, T, M>(f: &M, source: &S, target: &T, x0: &[S::V0], x1: &[S::V1], oracle: &Oracle) -> Report
where
    S: Lie2Structure,
    T: Lie2Structure,
    M: Lie2Morphism<S, T>,
{
    let mut report = Report::new("morphism");

    let mut acc = Acc::new();
    for h in x1 {
        acc.add((|| target.compare0(&f.f0(&source.d(h)?)?, &target.d(&f.f1(h)?)?, oracle))());
    }
    acc.finish(&mut report, "chain-map");

    let mut acc = Acc::new();
    for x in x0 {
        for y in x0 {
            acc.add((|| {
                let s = target.add1(&f.f2(x, y)?, &f.f2(y, x)?)?;
                target.compare1(&s, &target.zero1(), oracle)
            })());
        }
    }
    acc.finish(&mut report, "skew.homotopy");

    let mut acc = Acc::new();
    for x in x0 {
        for y in x0 {
            acc.add((|| {
                let lhs = target.d(&f.f2(x, y)?)?;
                let rhs = target.sub0(&f.f0(&source.bracket(x, y)?)?, &target.bracket(&f.f0(x)?, &f.f0(y)?)?)?;
                target.compare0(&lhs, &rhs, oracle)
            })());
        }
    }
    acc.finish(&mut report, "homotopy.degree-zero");

    let mut acc = Acc::new();
    for x in x0 {
        for h in x1 {
            acc.add((|| {
                let lhs = f.f2(x, &source.d(h)?)?;
                let rhs = target.sub1(&f.f1(&source.act(x, h)?)?, &target.act(&f.f0(x)?, &f.f1(h)?)?)?;
                target.compare1(&lhs, &rhs, oracle)
            })());
        }
    }
    acc.finish(&mut report, "homotopy.degree-one");

    let mut acc = Acc::new();
    for t in tuples(x0.len(), 3, CAP3) {
        let (x, y, z) = (&x0[t[0]], &x0[t[1]], &x0[t[2]]);
        acc.add((|| {
            let (fx, fy, fz) = (f.f0(x)?, f.f0(y)?, f.f0(z)?);
            let lhs = target.sub1(&f.f1(&source.jacobiator(x, y, z)?)?, &target.jacobiator(&fx, &fy, &fz)?)?;
            // [F2(x,y), F0 z] = -[F0 z, F2(x,y)]
            let rhs = target.sum1(&[
                f.f2(x, &source.bracket(y, z)?)?,
                target.scale1(-1.0, &f.f2(&source.bracket(x, y)?, z)?)?,
                target.scale1(-1.0, &f.f2(y, &source.bracket(x, z)?)?)?,
                target.act(&fz, &f.f2(x, y)?)?,
                target.act(&fx, &f.f2(y, z)?)?,
                target.scale1(-1.0, &target.act(&fy, &f.f2(x, z)?)?)?,
            ])?;
            target.compare1(&lhs, &rhs, oracle)
        })());
    }
    acc.finish(&mut report, "jacobiator");
    report
}

/// Checks the butterfly conditions on samples: commutation of both wings,
/// `rho kappa = 0`, bracket preservation by `sigma` and `rho`, the two
/// equivariance laws, the Jacobiator law and short exactness of the
/// `W1 -> E -> V0` wing.
pub fn check_butterfly<B: Butterfly>(b: &B, samples: &ButterflySamples<B>, oracle: &Oracle) -> Result<Report> {
    let s = b.source();
    let t = b.target();
    let mut report = Report::new("butterfly");

    let mut acc = Acc::new();
    for x in &samples.source1 {
        acc.add((|| s.compare0(&b.sigma(&b.kappa(x)?)?, &s.d(x)?, oracle))());
    }
    acc.finish(&mut report, "diagram.sigma-kappa");

    let mut acc = Acc::new();
    for u in &samples.target1 {
        acc.add((|| t.compare0(&b.rho(&b.lambda(u)?)?, &t.d(u)?, oracle))());
    }
    acc.finish(&mut report, "diagram.rho-lambda");

    let mut acc = Acc::new();
    for x in &samples.source1 {
        acc.add((|| t.compare0(&b.rho(&b.kappa(x)?)?, &t.zero0(), oracle))());
    }
    acc.finish(&mut report, "wing.rho-kappa");

    let es = &samples.carrier;
    let mut acc = Acc::new();
    for p in tuples(es.len(), 2, CAP3) {
        acc.add((|| {
            let sum = b.add(&b.bracket(&es[p[0]], &es[p[1]])?, &b.bracket(&es[p[1]], &es[p[0]])?)?;
            b.compare(&sum, &b.zero(), oracle)
        })());
    }
    acc.finish(&mut report, "skew");

    let mut acc_s = Acc::new();
    let mut acc_r = Acc::new();
    for p in tuples(es.len(), 2, CAP3) {
        let (x, y) = (&es[p[0]], &es[p[1]]);
        let br = b.bracket(x, y);
        acc_s.add((|| {
            let br = br.clone()?;
            s.compare0(&b.sigma(&br)?, &s.bracket(&b.sigma(x)?, &b.sigma(y)?)?, oracle)
        })());
        acc_r.add((|| {
            let br = br.clone()?;
            t.compare0(&b.rho(&br)?, &t.bracket(&b.rho(x)?, &b.rho(y)?)?, oracle)
        })());
    }
    acc_s.finish(&mut report, "bracket.sigma");
    acc_r.finish(&mut report, "bracket.rho");

    let mut acc = Acc::new();
    for e in es {
        for u in &samples.target1 {
            acc.add((|| b.compare(&b.bracket(e, &b.lambda(u)?)?, &b.lambda(&t.act(&b.rho(e)?, u)?)?, oracle))());
        }
    }
    acc.finish(&mut report, "equivariance.lambda");

    let mut acc = Acc::new();
    for e in es {
        for x in &samples.source1 {
            acc.add((|| b.compare(&b.bracket(e, &b.kappa(x)?)?, &b.kappa(&s.act(&b.sigma(e)?, x)?)?, oracle))());
        }
    }
    acc.finish(&mut report, "equivariance.kappa");

    let mut acc = Acc::new();
    for tr in tuples(es.len(), 3, CAP3) {
        let (x, y, z) = (&es[tr[0]], &es[tr[1]], &es[tr[2]]);
        acc.add((|| {
            let lhs = b.add(
                &b.lambda(&t.jacobiator(&b.rho(x)?, &b.rho(y)?, &b.rho(z)?)?)?,
                &b.kappa(&s.jacobiator(&b.sigma(x)?, &b.sigma(y)?, &b.sigma(z)?)?)?,
            )?;
            let rhs = b.add(
                &b.add(&b.bracket(x, &b.bracket(y, z)?)?, &b.bracket(y, &b.bracket(z, x)?)?)?,
                &b.bracket(z, &b.bracket(x, y)?)?,
            )?;
            b.compare(&lhs, &rhs, oracle)
        })());
    }
    acc.finish(&mut report, "jacobiator");

    match b.check_exactness(samples, oracle) {
        Ok(r) => report.absorb("exactness", r),
        Err(Error::UnsupportedExactnessCheck) => report.skip("exactness", "no exactness check for this carrier"),
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Additionally checks the `V1 -> E -> W0` wing, i.e. invertibility.
pub fn check_invertible<B: Butterfly>(b: &B, samples: &ButterflySamples<B>, oracle: &Oracle) -> Result<Report> {
    let mut r = check_butterfly(b, samples, oracle)?;
    r.absorb("reverse-exactness", b.check_reverse_exactness(samples, oracle)?);
    Ok(r)
}

#[cfg(test)]
mod tests;
