use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{ExprError, Point};

/// Symbolic scalar expression over named coordinates.
///
/// Values are kept in a canonical shape by the smart constructors: sums and
/// products are flat and sorted, constants are folded, like terms and equal
/// powers are merged. Division is stored as a power with exponent -1.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Debug)]
pub enum Node {
    Const(f64),
    Var(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i32),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Log(Expr),
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Pow(..) => 2,
            Node::Mul(_) => 3,
            Node::Add(_) => 4,
            Node::Sin(_) => 5,
            Node::Cos(_) => 6,
            Node::Exp(_) => 7,
            Node::Log(_) => 8,
        }
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let c = x.cmp(y);
        if c != Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (&*self.0, &*other.0);
        match a.rank().cmp(&b.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (a, b) {
            (Node::Const(x), Node::Const(y)) => x.total_cmp(y),
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => cmp_slices(x, y),
            (Node::Pow(x, m), Node::Pow(y, n)) => x.cmp(y).then(m.cmp(n)),
            (Node::Sin(x), Node::Sin(y))
            | (Node::Cos(x), Node::Cos(y))
            | (Node::Exp(x), Node::Exp(y))
            | (Node::Log(x), Node::Log(y)) => x.cmp(y),
            _ => Ordering::Equal,
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::wrap(Node::Const(if c == 0.0 { 0.0 } else { c }))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(name: &str) -> Expr {
        Expr::wrap(Node::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Splits a canonical term into its numeric coefficient and the rest.
    fn split_coeff(&self) -> (f64, Vec<Expr>) {
        match &*self.0 {
            Node::Const(c) => (*c, Vec::new()),
            Node::Mul(fs) => match fs.first().and_then(|f| f.as_const()) {
                Some(c) => (c, fs[1..].to_vec()),
                None => (1.0, fs.clone()),
            },
            _ => (1.0, vec![self.clone()]),
        }
    }

    fn split_pow(&self) -> (Expr, i32) {
        match &*self.0 {
            Node::Pow(b, n) => (b.clone(), *n),
            _ => (self.clone(), 1),
        }
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut flat = Vec::new();
        for t in terms {
            match &*t.0 {
                Node::Add(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(t),
            }
        }
        let mut constant = 0.0;
        let mut groups: BTreeMap<Vec<Expr>, f64> = BTreeMap::new();
        for t in flat {
            let (c, rest) = t.split_coeff();
            if rest.is_empty() {
                constant += c;
            } else {
                *groups.entry(rest).or_insert(0.0) += c;
            }
        }
        let mut out = Vec::new();
        for (rest, c) in groups {
            if c == 0.0 {
                continue;
            }
            out.push(Expr::rebuild_term(c, rest));
        }
        out.sort();
        if constant != 0.0 {
            out.insert(0, Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::wrap(Node::Add(out)),
        }
    }

    fn rebuild_term(c: f64, mut rest: Vec<Expr>) -> Expr {
        if c == 1.0 && rest.len() == 1 {
            return rest.pop().unwrap();
        }
        if c != 1.0 {
            rest.insert(0, Expr::constant(c));
        }
        Expr::wrap(Node::Mul(rest))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut flat = Vec::new();
        for f in factors {
            match &*f.0 {
                Node::Mul(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(f),
            }
        }
        let mut constant = 1.0;
        let mut powers: BTreeMap<Expr, i32> = BTreeMap::new();
        for f in flat {
            if let Some(c) = f.as_const() {
                constant *= c;
                continue;
            }
            let (b, n) = f.split_pow();
            *powers.entry(b).or_insert(0) += n;
        }
        if constant == 0.0 {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = powers.into_iter().filter(|(_, n)| *n != 0).map(|(b, n)| Expr::pow(&b, n)).collect();
        // pow of a constant base can fold back into a constant
        let mut extra = 1.0;
        out.retain(|e| match e.as_const() {
            Some(c) => {
                extra *= c;
                false
            }
            None => true,
        });
        constant *= extra;
        out.sort();
        if out.is_empty() {
            return Expr::constant(constant);
        }
        if constant == 1.0 && out.len() == 1 {
            return out.pop().unwrap();
        }
        if constant != 1.0 {
            out.insert(0, Expr::constant(constant));
        }
        Expr::wrap(Node::Mul(out))
    }

    pub fn pow(base: &Expr, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return base.clone();
        }
        match &*base.0 {
            Node::Const(c) => {
                let v = c.powi(n);
                if v.is_finite() {
                    Expr::constant(v)
                } else {
                    Expr::wrap(Node::Pow(base.clone(), n))
                }
            }
            Node::Pow(b, m) => Expr::pow(b, m * n),
            _ => Expr::wrap(Node::Pow(base.clone(), n)),
        }
    }

    pub fn recip(&self) -> Expr {
        Expr::pow(self, -1)
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::wrap(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c > 0.0 => Expr::constant(c.ln()),
            _ => Expr::wrap(Node::Log(self.clone())),
        }
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::product([Expr::constant(c), self.clone()])
    }

    /// Rebuilds the tree bottom-up through the canonicalizing constructors.
    pub fn normalize(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(*c),
            Node::Var(_) => self.clone(),
            Node::Add(ts) => Expr::sum(ts.iter().map(|t| t.normalize())),
            Node::Mul(fs) => Expr::product(fs.iter().map(|f| f.normalize())),
            Node::Pow(b, n) => Expr::pow(&b.normalize(), *n),
            Node::Sin(a) => a.normalize().sin(),
            Node::Cos(a) => a.normalize().cos(),
            Node::Exp(a) => a.normalize().exp(),
            Node::Log(a) => a.normalize().ln(),
        }
    }

    pub fn eval(&self, p: &Point) -> Result<f64, ExprError> {
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(name) => p.get(name).ok_or_else(|| ExprError::MissingVariable(name.to_string()))?,
            Node::Add(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.eval(p)?;
                }
                s
            }
            Node::Mul(fs) => {
                let mut s = 1.0;
                for f in fs {
                    s *= f.eval(p)?;
                }
                s
            }
            Node::Pow(b, n) => {
                let x = b.eval(p)?;
                if *n < 0 && x == 0.0 {
                    return Err(ExprError::DomainError { message: "division by zero".into(), at: p.to_string() });
                }
                x.powi(*n)
            }
            Node::Sin(a) => a.eval(p)?.sin(),
            Node::Cos(a) => a.eval(p)?.cos(),
            Node::Exp(a) => a.eval(p)?.exp(),
            Node::Log(a) => {
                let x = a.eval(p)?;
                if x <= 0.0 {
                    return Err(ExprError::DomainError {
                        message: "log of non-positive value".into(),
                        at: p.to_string(),
                    });
                }
                x.ln()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::DomainError { message: "non-finite value".into(), at: p.to_string() })
        }
    }

    pub fn diff(&self, v: &str) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(name) => {
                if &**name == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => Expr::sum(ts.iter().map(|t| t.diff(v))),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.diff(v);
                    if df.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, g) in fs.iter().enumerate() {
                        parts.push(if i == j { df.clone() } else { g.clone() });
                    }
                    terms.push(Expr::product(parts));
                }
                Expr::sum(terms)
            }
            Node::Pow(b, n) => {
                let db = b.diff(v);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([Expr::constant(*n as f64), Expr::pow(b, n - 1), db])
            }
            Node::Sin(a) => Expr::product([a.cos(), a.diff(v)]),
            Node::Cos(a) => Expr::product([Expr::constant(-1.0), a.sin(), a.diff(v)]),
            Node::Exp(a) => Expr::product([self.clone(), a.diff(v)]),
            Node::Log(a) => Expr::product([a.recip(), a.diff(v)]),
        }
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_vars(&mut out);
        out.into_iter().collect()
    }

    fn collect_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Var(n) => {
                out.insert(n.to_string());
            }
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Log(a) => a.collect_vars(out),
        }
    }

    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(n) => map.get(&**n).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(ts) => Expr::sum(ts.iter().map(|t| t.substitute(map))),
            Node::Mul(fs) => Expr::product(fs.iter().map(|f| f.substitute(map))),
            Node::Pow(b, n) => Expr::pow(&b.substitute(map), *n),
            Node::Sin(a) => a.substitute(map).sin(),
            Node::Cos(a) => a.substitute(map).cos(),
            Node::Exp(a) => a.substitute(map).exp(),
            Node::Log(a) => a.substitute(map).ln(),
        }
    }

    pub fn node_count(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(xs) | Node::Mul(xs) => 1 + xs.iter().map(|x| x.node_count()).sum::<usize>(),
            Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Log(a) => 1 + a.node_count(),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.scale(-1.0)])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.recip()])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

fn fmt_num(c: f64) -> String {
    format!("{}", c)
}

impl Expr {
    // precedence: 0 sum, 1 product, 2 unary minus, 3 power base
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if *c < 0.0 && prec > 0 {
                    write!(f, "({})", fmt_num(*c))
                } else {
                    write!(f, "{}", fmt_num(*c))
                }
            }
            Node::Var(n) => write!(f, "{}", n),
            Node::Add(ts) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                for (i, t) in ts.iter().enumerate() {
                    let (c, rest) = t.split_coeff();
                    if i > 0 {
                        if c < 0.0 {
                            write!(f, " - ")?;
                            Expr::rebuild_or_const(-c, rest).fmt_prec(f, 1)?;
                        } else {
                            write!(f, " + ")?;
                            t.fmt_prec(f, 1)?;
                        }
                    } else {
                        t.fmt_prec(f, 1)?;
                    }
                }
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Node::Mul(fs) => {
                let wrap = prec > 1;
                if wrap {
                    write!(f, "(")?;
                }
                let mut start = 0;
                if let Some(c) = fs[0].as_const() {
                    if c == -1.0 {
                        write!(f, "-")?;
                    } else {
                        write!(f, "{}*", fmt_num(c))?;
                    }
                    start = 1;
                }
                for (i, x) in fs[start..].iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    x.fmt_prec(f, 2)?;
                }
                if wrap {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Node::Pow(b, n) => {
                b.fmt_prec(f, 3)?;
                if *n < 0 {
                    write!(f, "^({})", n)
                } else {
                    write!(f, "^{}", n)
                }
            }
            Node::Sin(a) => write!(f, "sin({})", a),
            Node::Cos(a) => write!(f, "cos({})", a),
            Node::Exp(a) => write!(f, "exp({})", a),
            Node::Log(a) => write!(f, "log({})", a),
        }
    }

    fn rebuild_or_const(c: f64, rest: Vec<Expr>) -> Expr {
        if rest.is_empty() {
            Expr::constant(c)
        } else {
            Expr::rebuild_term(c, rest)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
