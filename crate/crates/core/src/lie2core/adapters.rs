use super::{Butterfly, ButterflySamples, Lie2Structure, SourceV1, TargetV1};
use crate::error::Result;
use crate::report::Report;
use crate::symexpr::{Oracle, SampleOutcome};

/// The mirror image of a butterfly: source and target, `kappa` and
/// `lambda`, `sigma` and `rho` swap roles.
pub struct Flip<B>(pub B);

fn flip_samples<B: Butterfly>(s: &ButterflySamples<Flip<B>>) -> ButterflySamples<B> {
    ButterflySamples {
        carrier: s.carrier.clone(),
        source1: s.target1.clone(),
        target1: s.source1.clone(),
        source0: s.target0.clone(),
        target0: s.source0.clone(),
    }
}

impl<B: Butterfly> Butterfly for Flip<B> {
    type Source = B::Target;
    type Target = B::Source;
    type E = B::E;

    fn source(&self) -> &B::Target {
        self.0.target()
    }
    fn target(&self) -> &B::Source {
        self.0.source()
    }
    fn kappa(&self, x: &TargetV1<B>) -> Result<B::E> {
        self.0.lambda(x)
    }
    fn lambda(&self, u: &SourceV1<B>) -> Result<B::E> {
        self.0.kappa(u)
    }
    fn sigma(&self, e: &B::E) -> Result<<B::Target as Lie2Structure>::V0> {
        self.0.rho(e)
    }
    fn rho(&self, e: &B::E) -> Result<<B::Source as Lie2Structure>::V0> {
        self.0.sigma(e)
    }
    fn bracket(&self, a: &B::E, b: &B::E) -> Result<B::E> {
        self.0.bracket(a, b)
    }
    fn zero(&self) -> B::E {
        self.0.zero()
    }
    fn add(&self, a: &B::E, b: &B::E) -> Result<B::E> {
        self.0.add(a, b)
    }
    fn scale(&self, s: f64, a: &B::E) -> Result<B::E> {
        self.0.scale(s, a)
    }
    fn compare(&self, a: &B::E, b: &B::E, oracle: &Oracle) -> Result<SampleOutcome> {
        self.0.compare(a, b, oracle)
    }
    fn check_exactness(&self, samples: &ButterflySamples<Self>, oracle: &Oracle) -> Result<Report> {
        self.0.check_reverse_exactness(&flip_samples(samples), oracle)
    }
    fn check_reverse_exactness(&self, samples: &ButterflySamples<Self>, oracle: &Oracle) -> Result<Report> {
        self.0.check_exactness(&flip_samples(samples), oracle)
    }
}

/// Composite `U --> V --> W` with carrier pairs `(e, e')` satisfying
/// `rho(e) = sigma'(e')`, taken modulo `(lambda(v), kappa'(v))` for `v` in
/// `V1`. Elements are handled through representatives: `compare` is the
/// componentwise comparison of representatives and `relation` produces the
/// generators of the quotient.
pub struct Composite<B1, B2> {
    pub first: B1,
    pub second: B2,
}

type Mid<B1> = <B1 as Butterfly>::Target;

impl<B1, B2> Composite<B1, B2>
where
    B1: Butterfly,
    B2: Butterfly<Source = Mid<B1>>,
{
    pub fn new(first: B1, second: B2) -> Self {
        Composite { first, second }
    }

    /// The quotient generator `(lambda(v), kappa'(v))`.
    pub fn relation(&self, v: &<Mid<B1> as Lie2Structure>::V1) -> Result<(B1::E, B2::E)> {
        Ok((self.first.lambda(v)?, self.second.kappa(v)?))
    }

    /// Sampled discrepancy of the fibre condition `rho(e) = sigma'(e')`.
    pub fn fibre_defect(&self, p: &(B1::E, B2::E), oracle: &Oracle) -> Result<SampleOutcome> {
        self.first.target().compare0(&self.first.rho(&p.0)?, &self.second.sigma(&p.1)?, oracle)
    }
}

impl<B1, B2> Butterfly for Composite<B1, B2>
where
    B1: Butterfly,
    B2: Butterfly<Source = Mid<B1>>,
{
    type Source = B1::Source;
    type Target = B2::Target;
    type E = (B1::E, B2::E);

    fn source(&self) -> &B1::Source {
        self.first.source()
    }
    fn target(&self) -> &B2::Target {
        self.second.target()
    }
    fn kappa(&self, x: &SourceV1<B1>) -> Result<Self::E> {
        Ok((self.first.kappa(x)?, self.second.zero()))
    }
    fn lambda(&self, u: &TargetV1<B2>) -> Result<Self::E> {
        Ok((self.first.zero(), self.second.lambda(u)?))
    }
    fn sigma(&self, e: &Self::E) -> Result<<B1::Source as Lie2Structure>::V0> {
        self.first.sigma(&e.0)
    }
    fn rho(&self, e: &Self::E) -> Result<<B2::Target as Lie2Structure>::V0> {
        self.second.rho(&e.1)
    }
    fn bracket(&self, a: &Self::E, b: &Self::E) -> Result<Self::E> {
        Ok((self.first.bracket(&a.0, &b.0)?, self.second.bracket(&a.1, &b.1)?))
    }
    fn zero(&self) -> Self::E {
        (self.first.zero(), self.second.zero())
    }
    fn add(&self, a: &Self::E, b: &Self::E) -> Result<Self::E> {
        Ok((self.first.add(&a.0, &b.0)?, self.second.add(&a.1, &b.1)?))
    }
    fn scale(&self, s: f64, a: &Self::E) -> Result<Self::E> {
        Ok((self.first.scale(s, &a.0)?, self.second.scale(s, &a.1)?))
    }
    fn compare(&self, a: &Self::E, b: &Self::E, oracle: &Oracle) -> Result<SampleOutcome> {
        let mut o = self.first.compare(&a.0, &b.0, oracle)?;
        o.merge(self.second.compare(&a.1, &b.1, oracle)?);
        Ok(o)
    }
}
