use std::collections::BTreeMap;

use super::{Expr, Node};

type Monomial = Vec<(String, u32)>;

/// Sparse multivariate polynomial with real coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, f64>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (v, k) in b {
        *m.entry(v.clone()).or_insert(0) += k;
    }
    m.into_iter().collect()
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Poly::zero();
        if c != 0.0 {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(name.to_string(), 1)], 1.0);
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_insert(0.0) += c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *out.terms.entry(mono_mul(ma, mb)).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn powu(&self, n: u32) -> Poly {
        let mut out = Poly::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Converts an expression that is polynomial in its variables.
    pub fn from_expr(e: &Expr) -> Option<Poly> {
        match e.node() {
            Node::Const(c) => Some(Poly::constant(*c)),
            Node::Var(v) => Some(Poly::var(v)),
            Node::Add(ts) => {
                let mut acc = Poly::zero();
                for t in ts {
                    acc = acc.add(&Poly::from_expr(t)?);
                }
                Some(acc)
            }
            Node::Mul(fs) => {
                let mut acc = Poly::constant(1.0);
                for f in fs {
                    acc = acc.mul(&Poly::from_expr(f)?);
                }
                Some(acc)
            }
            Node::Pow(b, n) if *n >= 0 => Some(Poly::from_expr(b)?.powu(*n as u32)),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::sum(self.terms.iter().map(|(m, c)| {
            let mut fs = vec![Expr::constant(*c)];
            for (v, k) in m {
                fs.push(Expr::pow(&Expr::var(v), *k as i32));
            }
            Expr::product(fs)
        }))
    }

    /// Integrates over `var` from 0 to 1, removing that variable.
    pub fn integrate_unit(&self, var: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let k = m.iter().find(|(v, _)| v == var).map(|(_, k)| *k).unwrap_or(0);
            let rest: Monomial = m.iter().filter(|(v, _)| v != var).cloned().collect();
            *out.terms.entry(rest).or_insert(0.0) += c / (k as f64 + 1.0);
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|(_, k)| k).sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
