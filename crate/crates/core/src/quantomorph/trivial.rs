use crate::cartan::Form;
use crate::error::Result;
use crate::gerbevf::{AlgebroidSection, ConnMultVF, GerbeLie2};
use crate::lie2core::Lie2Morphism;
use crate::plectic::{HamPair, PlecticManifold};
use crate::symexpr::Expr;

/// Which degree-0 map to use: `(xi, A) -> (xi, i_xi omega - A)` lands in
/// Hamiltonian pairs of `d omega`; `(xi, A) -> (xi, i_xi omega + A)` does
/// not unless `L_xi omega = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Corrected,
    Literal,
}

/// The comparison morphism from symmetries of the trivial gerbe with
/// curving `omega` to the Poisson Lie 2-algebra of `d omega`, identity in
/// degree 1 and homotopy `i_x1 i_x2 omega - i_x1 A_2 + i_x2 A_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivialToPlectic {
    pub omega: Form,
    pub variant: Variant,
}

impl TrivialToPlectic {
    pub fn new(omega: Form, variant: Variant) -> TrivialToPlectic {
        TrivialToPlectic { omega, variant }
    }
}

impl Lie2Morphism<GerbeLie2, PlecticManifold> for TrivialToPlectic {
    fn f0(&self, x: &ConnMultVF) -> Result<HamPair> {
        let a = x.a.get(&[0]);
        let io = self.omega.interior(x.xi())?;
        let beta = match self.variant {
            Variant::Corrected => io.sub(&a)?,
            Variant::Literal => io.add(&a)?,
        };
        Ok(HamPair { xi: x.xi().clone(), beta })
    }
    fn f1(&self, u: &AlgebroidSection) -> Result<Expr> {
        Ok(u.value(0))
    }
    fn f2(&self, x: &ConnMultVF, y: &ConnMultVF) -> Result<Expr> {
        let (x1, x2) = (x.xi(), y.xi());
        let t = self.omega.interior(x2)?.interior(x1)?;
        let t = t.sub(&y.a.get(&[0]).interior(x1)?)?.add(&x.a.get(&[0]).interior(x2)?)?;
        Ok(t.scalar().normalize())
    }
}
