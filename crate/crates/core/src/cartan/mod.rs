//! Differential forms and vector fields on a coordinate box with the Cartan
//! calculus: wedge, d, contraction, Lie derivative and the bracket of fields.

mod appendix;
mod flow;
mod homotopy;
mod identities;

pub use appendix::{check_appendix_identity, random_appendix_instance, AppendixInstance, AppendixOutcome};
pub use flow::{check_lie_by_flow, flow_lie_derivative_at};
pub use homotopy::homotopy_operator;
pub use identities::{check_cartan_identities, lie_derivative_coordinates};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::symexpr::{CoordBox, Expr, ExprError, Oracle, SampleOutcome};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CartanError {
    #[error("coordinate systems differ: {0:?} vs {1:?}")]
    DimensionMismatch(Vec<String>, Vec<String>),
    #[error("contraction of a degree-0 form")]
    DegreeError,
    #[error("coefficient is not polynomial: {0}")]
    NotPolynomial(String),
    #[error("precondition `{hypothesis}` failed (residual {residual:e})")]
    PreconditionFailed { hypothesis: String, residual: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Coords = Arc<[String]>;

pub fn coords<S: AsRef<str>>(names: &[S]) -> Coords {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

/// Differential form of fixed degree; coefficients are stored only for
/// strictly increasing index tuples, absent entries are zero.
#[derive(Clone, PartialEq)]
pub struct Form {
    coords: Coords,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

/// Vector field given by one component per coordinate.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    coords: Coords,
    comps: Vec<Expr>,
}

fn check_same(a: &Coords, b: &Coords) -> Result<(), CartanError> {
    if Arc::ptr_eq(a, b) || a[..] == b[..] {
        Ok(())
    } else {
        Err(CartanError::DimensionMismatch(a.to_vec(), b.to_vec()))
    }
}

/// Accumulates coefficient contributions and sums each index once.
#[derive(Default)]
struct Accum {
    parts: BTreeMap<Vec<usize>, Vec<Expr>>,
}

impl Accum {
    fn push(&mut self, idx: Vec<usize>, c: Expr) {
        if !c.is_zero() {
            self.parts.entry(idx).or_default().push(c);
        }
    }

    fn finish(self, coords: Coords, degree: usize) -> Form {
        let mut terms = BTreeMap::new();
        for (idx, cs) in self.parts {
            let s = Expr::sum(cs);
            if !s.is_zero() {
                terms.insert(idx, s);
            }
        }
        Form { coords, degree, terms }
    }
}

/// Sign of sorting the concatenation of two increasing tuples, or None if
/// they share an index.
fn merge_sign(a: &[usize], b: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut idx: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    idx.sort_unstable();
    Some((if inversions.is_multiple_of(2) { 1.0 } else { -1.0 }, idx))
}

impl Form {
    pub fn zero(coords: &Coords, degree: usize) -> Form {
        Form { coords: coords.clone(), degree, terms: BTreeMap::new() }
    }

    pub fn function(coords: &Coords, f: Expr) -> Form {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(Vec::new(), f);
        }
        Form { coords: coords.clone(), degree: 0, terms }
    }

    /// Builds a form from `(indices, coefficient)` pairs in any order;
    /// repeated indices vanish and unsorted tuples pick up the sign of the
    /// sorting permutation.
    pub fn from_terms<I: IntoIterator<Item = (Vec<usize>, Expr)>>(coords: &Coords, degree: usize, terms: I) -> Form {
        let mut acc = Accum::default();
        for (idx, c) in terms {
            assert_eq!(idx.len(), degree, "index tuple length must equal the degree");
            if let Some((s, sorted)) = sort_sign(&idx) {
                if sorted.iter().all(|&i| i < coords.len()) {
                    acc.push(sorted, c.scale(s));
                }
            }
        }
        acc.finish(coords.clone(), degree)
    }

    /// Like `from_terms` but with coordinate names as indices.
    pub fn from_named<S: AsRef<str>>(
        coords: &Coords,
        degree: usize,
        terms: &[(&[S], Expr)],
    ) -> Result<Form, CartanError> {
        let mut out = Vec::new();
        for (names, c) in terms {
            let mut idx = Vec::new();
            for n in names.iter() {
                let i = coords
                    .iter()
                    .position(|c| c == n.as_ref())
                    .ok_or_else(|| CartanError::DimensionMismatch(coords.to_vec(), vec![n.as_ref().to_string()]))?;
                idx.push(i);
            }
            out.push((idx, c.clone()));
        }
        Ok(Form::from_terms(coords, degree, out))
    }

    /// The coordinate differential `dx_i`.
    pub fn dx(coords: &Coords, i: usize) -> Form {
        Form::from_terms(coords, 1, [(vec![i], Expr::one())])
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Expr> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[usize]) -> Expr {
        self.terms.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    /// The coefficient of a 0-form.
    pub fn scalar(&self) -> Expr {
        self.coeff(&[])
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Form) -> Result<Form, CartanError> {
        check_same(&self.coords, &other.coords)?;
        if self.degree != other.degree {
            return Err(CartanError::DimensionMismatch(
                vec![format!("degree {}", self.degree)],
                vec![format!("degree {}", other.degree)],
            ));
        }
        let mut acc = Accum::default();
        for (k, v) in self.terms.iter().chain(other.terms.iter()) {
            acc.push(k.clone(), v.clone());
        }
        Ok(acc.finish(self.coords.clone(), self.degree))
    }

    pub fn sub(&self, other: &Form) -> Result<Form, CartanError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&Expr::constant(-1.0))
    }

    pub fn scale(&self, f: &Expr) -> Form {
        let mut acc = Accum::default();
        for (k, v) in &self.terms {
            acc.push(k.clone(), v * f);
        }
        acc.finish(self.coords.clone(), self.degree)
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Form>>(
        coords: &Coords,
        degree: usize,
        forms: I,
    ) -> Result<Form, CartanError> {
        let mut acc = Accum::default();
        for f in forms {
            check_same(coords, &f.coords)?;
            if f.degree != degree {
                return Err(CartanError::DimensionMismatch(
                    vec![format!("degree {}", degree)],
                    vec![format!("degree {}", f.degree)],
                ));
            }
            for (k, v) in &f.terms {
                acc.push(k.clone(), v.clone());
            }
        }
        Ok(acc.finish(coords.clone(), degree))
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, CartanError> {
        check_same(&self.coords, &other.coords)?;
        let degree = self.degree + other.degree;
        let mut acc = Accum::default();
        if degree <= self.dim() {
            for (i, a) in &self.terms {
                for (j, b) in &other.terms {
                    if let Some((s, idx)) = merge_sign(i, j) {
                        acc.push(idx, Expr::product([Expr::constant(s), a.clone(), b.clone()]));
                    }
                }
            }
        }
        Ok(acc.finish(self.coords.clone(), degree))
    }

    pub fn exterior_d(&self) -> Form {
        let mut acc = Accum::default();
        for (idx, c) in &self.terms {
            for (j, name) in self.coords.iter().enumerate() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = c.diff(name);
                if dc.is_zero() {
                    continue;
                }
                let before = idx.iter().filter(|&&i| i < j).count();
                let mut new_idx = idx.clone();
                new_idx.push(j);
                new_idx.sort_unstable();
                let s = if before % 2 == 0 { 1.0 } else { -1.0 };
                acc.push(new_idx, dc.scale(s));
            }
        }
        acc.finish(self.coords.clone(), self.degree + 1)
    }

    /// Contraction with the sign rule
    /// `i_X(a ^ b) = (i_X a) ^ b + (-1)^|a| a ^ i_X b`.
    pub fn interior(&self, x: &VectorField) -> Result<Form, CartanError> {
        check_same(&self.coords, &x.coords)?;
        if self.degree == 0 {
            return Err(CartanError::DegreeError);
        }
        let mut acc = Accum::default();
        for (idx, c) in &self.terms {
            for (r, &i) in idx.iter().enumerate() {
                let xi = &x.comps[i];
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(r);
                let s = if r % 2 == 0 { 1.0 } else { -1.0 };
                acc.push(rest, Expr::product([Expr::constant(s), xi.clone(), c.clone()]));
            }
        }
        Ok(acc.finish(self.coords.clone(), self.degree - 1))
    }

    /// Contraction that sends 0-forms to the zero form of degree 0.
    pub fn contract(&self, x: &VectorField) -> Result<Form, CartanError> {
        if self.degree == 0 {
            check_same(&self.coords, &x.coords)?;
            return Ok(Form::zero(&self.coords, 0));
        }
        self.interior(x)
    }

    /// `L_X a = i_X da + d i_X a`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<Form, CartanError> {
        check_same(&self.coords, &x.coords)?;
        let first = if self.degree < self.dim() {
            self.exterior_d().interior(x)?
        } else {
            Form::zero(&self.coords, self.degree)
        };
        if self.degree == 0 {
            return Ok(first);
        }
        let second = self.interior(x)?.exterior_d();
        first.add(&second)
    }

    pub fn normalize(&self) -> Form {
        let mut acc = Accum::default();
        for (k, v) in &self.terms {
            acc.push(k.clone(), v.normalize());
        }
        acc.finish(self.coords.clone(), self.degree)
    }

    /// Sampled coefficientwise comparison.
    pub fn compare(&self, other: &Form, region: &CoordBox, oracle: &Oracle) -> Result<SampleOutcome, CartanError> {
        check_same(&self.coords, &other.coords)?;
        if self.degree != other.degree {
            return Err(CartanError::DimensionMismatch(
                vec![format!("degree {}", self.degree)],
                vec![format!("degree {}", other.degree)],
            ));
        }
        let mut keys: Vec<&Vec<usize>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        let pairs: Vec<(Expr, Expr)> = keys.into_iter().map(|k| (self.coeff(k), other.coeff(k))).collect();
        Ok(oracle.compare_many(&pairs, region)?)
    }

    pub fn compare_zero(&self, region: &CoordBox, oracle: &Oracle) -> Result<SampleOutcome, CartanError> {
        self.compare(&Form::zero(&self.coords, self.degree), region, oracle)
    }

    /// Pulls back along a map whose components (one per coordinate of this
    /// form) are expressions in the source coordinates.
    pub fn pullback(&self, source: &Coords, map: &[Expr]) -> Result<Form, CartanError> {
        if map.len() != self.dim() {
            return Err(CartanError::DimensionMismatch(self.coords.to_vec(), source.to_vec()));
        }
        let subst: BTreeMap<String, Expr> = self.coords.iter().cloned().zip(map.iter().cloned()).collect();
        let differentials: Vec<Form> = map
            .iter()
            .map(|m| Form::from_terms(source, 1, source.iter().enumerate().map(|(j, s)| (vec![j], m.diff(s)))))
            .collect();
        let mut parts = Vec::new();
        for (idx, c) in &self.terms {
            let mut f = Form::function(source, c.substitute(&subst));
            for &i in idx {
                f = f.wedge(&differentials[i])?;
            }
            parts.push(f);
        }
        Form::sum(source, self.degree, parts.iter())
    }

    /// Re-expresses the form in a larger coordinate system that contains
    /// every coordinate of this one.
    pub fn embed(&self, target: &Coords) -> Result<Form, CartanError> {
        let mut map = Vec::new();
        for c in self.coords.iter() {
            map.push(
                target
                    .iter()
                    .position(|t| t == c)
                    .ok_or_else(|| CartanError::DimensionMismatch(self.coords.to_vec(), target.to_vec()))?,
            );
        }
        Ok(Form::from_terms(
            target,
            self.degree,
            self.terms.iter().map(|(k, v)| (k.iter().map(|&i| map[i]).collect(), v.clone())),
        ))
    }
}

fn sort_sign(idx: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

impl VectorField {
    pub fn new(coords: &Coords, comps: Vec<Expr>) -> Result<VectorField, CartanError> {
        if comps.len() != coords.len() {
            return Err(CartanError::DimensionMismatch(coords.to_vec(), vec![format!("{} components", comps.len())]));
        }
        Ok(VectorField { coords: coords.clone(), comps })
    }

    pub fn zero(coords: &Coords) -> VectorField {
        VectorField { coords: coords.clone(), comps: vec![Expr::zero(); coords.len()] }
    }

    /// The coordinate field `d/dx_i`.
    pub fn coordinate(coords: &Coords, i: usize) -> VectorField {
        let mut v = VectorField::zero(coords);
        v.comps[i] = Expr::one();
        v
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(self.coords.iter().zip(&self.comps).filter(|(_, c)| !c.is_zero()).map(|(n, c)| c * &f.diff(n)))
    }

    /// Components `X(Y^i) - Y(X^i)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, CartanError> {
        check_same(&self.coords, &other.coords)?;
        let comps =
            (0..self.comps.len()).map(|i| &self.apply(&other.comps[i]) - &other.apply(&self.comps[i])).collect();
        Ok(VectorField { coords: self.coords.clone(), comps })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, CartanError> {
        check_same(&self.coords, &other.coords)?;
        Ok(VectorField {
            coords: self.coords.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, CartanError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VectorField {
        self.scale(&Expr::constant(-1.0))
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField { coords: self.coords.clone(), comps: self.comps.iter().map(|c| c * f).collect() }
    }

    pub fn compare(
        &self,
        other: &VectorField,
        region: &CoordBox,
        oracle: &Oracle,
    ) -> Result<SampleOutcome, CartanError> {
        check_same(&self.coords, &other.coords)?;
        let pairs: Vec<(Expr, Expr)> = self.comps.iter().cloned().zip(other.comps.iter().cloned()).collect();
        Ok(oracle.compare_many(&pairs, region)?)
    }

    pub fn embed(&self, target: &Coords) -> Result<VectorField, CartanError> {
        let mut comps = vec![Expr::zero(); target.len()];
        for (c, e) in self.coords.iter().zip(&self.comps) {
            let j = target
                .iter()
                .position(|t| t == c)
                .ok_or_else(|| CartanError::DimensionMismatch(self.coords.to_vec(), target.to_vec()))?;
            comps[j] = e.clone();
        }
        Ok(VectorField { coords: target.clone(), comps })
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if idx.is_empty() {
                write!(f, "({})", c)?;
            } else {
                let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", self.coords[i])).collect();
                write!(f, "({}) {}", c, basis.join("^"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{}]({})", self.degree, self)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(&self.comps)
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| format!("({}) d/d{}", c, n))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({})", self)
    }
}
