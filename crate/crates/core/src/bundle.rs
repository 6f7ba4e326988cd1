//! Geometry-bundle files: JSON documents describing a cover, Deligne data
//! and the optional plectic, trivialization and group-action data.
//!
//! Forms are written `{"degree": k, "terms": [{"indices": ["y", "z"],
//! "coefficient": "x"}]}`; chart and overlap labels are 1-based.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::Value;
use thiserror::Error;

use crate::cartan::{coords, Coords, Form, VectorField};
use crate::cech::{CechForm, Cover, DeligneCocycle, Trivialization};
use crate::error::Error;
use crate::gerbevf::{ConnMultVF, MultVF};
use crate::lie2core::FinDimLie2;
use crate::plectic::HamPair;
use crate::quantomorph::{GroupModel, QHamData};
use crate::symexpr::{parse, CoordBox, Expr, ExprError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BundleError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed document at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("missing key `{0}`")]
    Schema(String),
    #[error("cannot parse expression at `{key}`, offset {offset}: {message}")]
    Parse { key: String, offset: usize, message: String },
    #[error("invalid value at `{key}`: {message}")]
    Invalid { key: String, message: String },
}

/// A multiplicative vector field from the file, with or without its
/// connection 1-forms.
#[derive(Debug, Clone, PartialEq)]
pub enum MultVfEntry {
    Plain(MultVF),
    Connective(ConnMultVF),
}

impl MultVfEntry {
    pub fn base(&self) -> &MultVF {
        match self {
            MultVfEntry::Plain(v) => v,
            MultVfEntry::Connective(v) => &v.base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub cocycle: DeligneCocycle,
    pub trivialization: Option<Trivialization>,
    pub plectic_form: Option<Form>,
    pub ham_pairs: Vec<HamPair>,
    pub mult_vf: Vec<MultVfEntry>,
    pub moment_map: Option<Vec<HamPair>>,
    pub group_model: Option<GroupModel>,
    pub qham: Option<QHamData>,
    pub findim: Option<FinDimLie2>,
}

impl Bundle {
    pub fn coords(&self) -> &Coords {
        self.cocycle.coords()
    }

    pub fn region(&self) -> &CoordBox {
        self.cocycle.cover.ambient()
    }
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<Bundle, BundleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| BundleError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_bundle(&text)
}

pub fn parse_bundle(text: &str) -> Result<Bundle, BundleError> {
    let v: Value = serde_json::from_str(text).map_err(|e| BundleError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    bundle(&Node::root(&v))
}

#[derive(Clone)]
struct Node<'a> {
    v: &'a Value,
    path: String,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{}.{}", path, key)
    }
}

impl<'a> Node<'a> {
    fn root(v: &'a Value) -> Node<'a> {
        Node { v, path: String::new() }
    }

    fn invalid(&self, message: impl Into<String>) -> BundleError {
        BundleError::Invalid {
            key: if self.path.is_empty() { "<root>".into() } else { self.path.clone() },
            message: message.into(),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.v.get(key).filter(|v| !v.is_null())
    }

    fn child(&self, key: &str) -> Result<Node<'a>, BundleError> {
        let path = join(&self.path, key);
        match self.get(key) {
            Some(v) => Ok(Node { v, path }),
            None => Err(BundleError::Schema(path)),
        }
    }

    fn optional(&self, key: &str) -> Option<Node<'a>> {
        self.get(key).map(|v| Node { v, path: join(&self.path, key) })
    }

    fn items(&self) -> Result<Vec<Node<'a>>, BundleError> {
        Ok(self.array()?.iter().enumerate().map(|(i, v)| Node { v, path: format!("{}[{}]", self.path, i) }).collect())
    }

    fn array(&self) -> Result<&'a Vec<Value>, BundleError> {
        self.v.as_array().ok_or_else(|| self.invalid("expected a list"))
    }

    fn f64(&self) -> Result<f64, BundleError> {
        self.v.as_f64().ok_or_else(|| self.invalid("expected a number"))
    }

    fn usize(&self) -> Result<usize, BundleError> {
        self.v.as_u64().map(|n| n as usize).ok_or_else(|| self.invalid("expected a non-negative integer"))
    }

    fn str(&self) -> Result<&'a str, BundleError> {
        self.v.as_str().ok_or_else(|| self.invalid("expected a string"))
    }

    fn expr(&self) -> Result<Expr, BundleError> {
        if let Some(x) = self.v.as_f64() {
            return Ok(Expr::constant(x));
        }
        parse(self.str()?).map_err(|e| match e {
            ExprError::ParseError { offset, message } => BundleError::Parse { key: self.path.clone(), offset, message },
            other => self.invalid(other.to_string()),
        })
    }
}

fn strings(n: &Node) -> Result<Vec<String>, BundleError> {
    n.items()?.iter().map(|c| c.str().map(str::to_string)).collect()
}

fn coord_box(names: &[String], n: &Node) -> Result<CoordBox, BundleError> {
    let rows = n.items()?;
    if rows.len() != names.len() {
        return Err(n.invalid(format!("expected {} intervals, got {}", names.len(), rows.len())));
    }
    let mut bounds = Vec::new();
    for r in &rows {
        let pair = r.items()?;
        if pair.len() != 2 {
            return Err(r.invalid("expected [lo, hi]"));
        }
        let (lo, hi) = (pair[0].f64()?, pair[1].f64()?);
        if lo >= hi {
            return Err(r.invalid("empty interval"));
        }
        bounds.push((lo, hi));
    }
    Ok(CoordBox::new(names, &bounds))
}

fn form(cs: &Coords, n: &Node) -> Result<Form, BundleError> {
    let degree = n.child("degree")?.usize()?;
    let mut terms = Vec::new();
    for t in n.child("terms")?.items()? {
        let idx_node = t.child("indices")?;
        let mut idx = Vec::new();
        for name in idx_node.items()? {
            let s = name.str()?;
            let i =
                cs.iter().position(|c| c == s).ok_or_else(|| name.invalid(format!("unknown coordinate `{}`", s)))?;
            idx.push(i);
        }
        if idx.len() != degree {
            return Err(idx_node.invalid(format!("expected {} indices", degree)));
        }
        terms.push((idx, t.child("coefficient")?.expr()?));
    }
    Ok(Form::from_terms(cs, degree, terms))
}

fn form_of_degree(cs: &Coords, n: &Node, degree: usize) -> Result<Form, BundleError> {
    let f = form(cs, n)?;
    if f.degree() != degree {
        return Err(n.invalid(format!("expected a {}-form, got degree {}", degree, f.degree())));
    }
    Ok(f)
}

fn field(cs: &Coords, n: &Node) -> Result<VectorField, BundleError> {
    let comps: Vec<Expr> = n.items()?.iter().map(|c| c.expr()).collect::<Result<_, _>>()?;
    if comps.len() != cs.len() {
        return Err(n.invalid(format!("expected {} components, got {}", cs.len(), comps.len())));
    }
    VectorField::new(cs, comps).map_err(|e| n.invalid(e.to_string()))
}

/// A 1-based overlap label, either a list `[1, 2]` or a string `"1,2"`.
fn overlap(cover: &Cover, n: &Node, depth: usize) -> Result<Vec<usize>, BundleError> {
    let labels: Vec<usize> = match n.v {
        Value::String(s) => s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| n.invalid(format!("bad chart label `{}`", p))))
            .collect::<Result<_, _>>()?,
        Value::Number(_) => vec![n.usize()?],
        _ => n.items()?.iter().map(|c| c.usize()).collect::<Result<_, _>>()?,
    };
    if labels.len() != depth {
        return Err(n.invalid(format!("expected {} chart labels", depth)));
    }
    if labels.iter().any(|&l| l == 0 || l > cover.len()) || labels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(n.invalid("chart labels must be increasing and within the cover"));
    }
    let idx: Vec<usize> = labels.iter().map(|l| l - 1).collect();
    if cover.overlap(&idx).is_none() {
        return Err(n.invalid("charts do not overlap"));
    }
    Ok(idx)
}

/// A list of `{label_key: overlap, value_key: form or expression}`.
fn cochain(
    cover: &Cover,
    n: &Node,
    (label_key, value_key): (&str, &str),
    degree: usize,
    depth: usize,
) -> Result<CechForm, BundleError> {
    let cs = cover.coords();
    let mut out = CechForm::zero(cs, degree, depth);
    for item in n.items()? {
        let idx = overlap(cover, &item.child(label_key)?, depth)?;
        let value = item.child(value_key)?;
        let f =
            if value_key == "expr" { Form::function(cs, value.expr()?) } else { form_of_degree(cs, &value, degree)? };
        out.insert(idx, f).map_err(|e| item.invalid(e.to_string()))?;
    }
    Ok(out)
}

/// A map `{"i,j": value}` keyed by overlap labels.
fn keyed(cover: &Cover, n: &Node, degree: usize, depth: usize) -> Result<CechForm, BundleError> {
    let cs = cover.coords();
    let obj = n.v.as_object().ok_or_else(|| n.invalid("expected a map keyed by chart labels"))?;
    let mut out = CechForm::zero(cs, degree, depth);
    for (k, v) in obj {
        let key = Node { v, path: join(&n.path, k) };
        let label = Value::String(k.clone());
        let idx = overlap(cover, &Node { v: &label, path: key.path.clone() }, depth)?;
        let f = if degree == 0 { Form::function(cs, key.expr()?) } else { form_of_degree(cs, &key, degree)? };
        out.insert(idx, f).map_err(|e| key.invalid(e.to_string()))?;
    }
    Ok(out)
}

fn pairs(cs: &Coords, n: &Node) -> Result<Vec<HamPair>, BundleError> {
    n.items()?
        .iter()
        .map(|p| {
            let xi = field(cs, &p.child("xi")?)?;
            let beta = form_of_degree(cs, &p.child("beta")?, 1)?;
            HamPair::new(xi, beta).map_err(|e| p.invalid(e.to_string()))
        })
        .collect()
}

fn matrix(n: &Node, rows: usize, cols: usize) -> Result<DMatrix<f64>, BundleError> {
    let r = n.items()?;
    if r.len() != rows {
        return Err(n.invalid(format!("expected {} rows", rows)));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in r.iter().enumerate() {
        let vals = row.items()?;
        if vals.len() != cols {
            return Err(row.invalid(format!("expected {} columns", cols)));
        }
        for (j, v) in vals.iter().enumerate() {
            m[(i, j)] = v.f64()?;
        }
    }
    Ok(m)
}

fn numbers(n: &Node, len: usize) -> Result<Vec<f64>, BundleError> {
    let v: Vec<f64> = n.items()?.iter().map(|x| x.f64()).collect::<Result<_, _>>()?;
    if v.len() != len {
        return Err(n.invalid(format!("expected {} numbers, got {}", len, v.len())));
    }
    Ok(v)
}

fn bundle(root: &Node) -> Result<Bundle, BundleError> {
    let manifold = root.child("manifold")?;
    let names = strings(&manifold.child("coords")?)?;
    let cs = coords(&names);
    let ambient = coord_box(&names, &manifold.child("box")?)?;
    let cover = match root.optional("cover") {
        Some(n) => {
            let charts = n.items()?.iter().map(|b| coord_box(&names, b)).collect::<Result<_, _>>()?;
            Cover::new(ambient.clone(), charts).map_err(|e| n.invalid(e.to_string()))?
        }
        None => Cover::single(ambient.clone()).map_err(|e| manifold.invalid(e.to_string()))?,
    };

    let deligne = root.child("deligne")?;
    let phi = match deligne.optional("phi") {
        Some(n) => cochain(&cover, &n, ("overlap", "expr"), 0, 3)?,
        None => CechForm::zero(&cs, 0, 3),
    };
    let a = match deligne.optional("A") {
        Some(n) => cochain(&cover, &n, ("overlap", "form"), 1, 2)?,
        None => CechForm::zero(&cs, 1, 2),
    };
    let b = cochain(&cover, &deligne.child("B")?, ("chart", "form"), 2, 1)?;
    let cocycle = DeligneCocycle::new(cover.clone(), phi, a, b).map_err(|e| deligne.invalid(e.to_string()))?;

    let trivialization = match root.optional("trivialization") {
        Some(t) => Some(Trivialization {
            psi: match t.optional("psi") {
                Some(n) => cochain(&cover, &n, ("overlap", "expr"), 0, 2)?,
                None => CechForm::zero(&cs, 0, 2),
            },
            eta: match t.optional("eta") {
                Some(n) => cochain(&cover, &n, ("chart", "form"), 1, 1)?,
                None => CechForm::zero(&cs, 1, 1),
            },
            omega: form_of_degree(&cs, &t.child("omega")?, 2)?,
        }),
        None => None,
    };

    let plectic_form = root.optional("plectic_form").map(|n| form_of_degree(&cs, &n, 3)).transpose()?;
    let ham_pairs = root.optional("ham_pairs").map(|n| pairs(&cs, &n)).transpose()?.unwrap_or_default();
    let moment_map = root.optional("moment_map").map(|n| pairs(&cs, &n)).transpose()?;

    let mut mult_vf = Vec::new();
    if let Some(n) = root.optional("mult_vf") {
        for item in n.items()? {
            let xi = field(&cs, &item.child("xi")?)?;
            let f = match item.optional("f") {
                Some(f) => keyed(&cover, &f, 0, 2)?,
                None => CechForm::zero(&cs, 0, 2),
            };
            let base = MultVF::new(xi, f).map_err(|e| item.invalid(e.to_string()))?;
            mult_vf.push(match item.optional("a") {
                Some(a) => {
                    let a = keyed(&cover, &a, 1, 1)?;
                    MultVfEntry::Connective(ConnMultVF::new(base, a).map_err(|e| item.invalid(e.to_string()))?)
                }
                None => MultVfEntry::Plain(base),
            });
        }
    }

    let group_model = root.optional("group_model").map(|n| group_model(&n)).transpose()?;
    let qham = match root.optional("qham") {
        Some(n) => {
            let omega = form_of_degree(&cs, &n.child("omega")?, 2)?;
            let phi = n.child("phi")?.items()?.iter().map(|p| p.expr()).collect::<Result<_, _>>()?;
            let generators = n.child("generators")?.items()?.iter().map(|g| field(&cs, g)).collect::<Result<_, _>>()?;
            Some(QHamData { coords: cs.clone(), region: ambient.clone(), omega, phi, generators })
        }
        None => None,
    };
    let findim = root.optional("findim_lie2").map(|n| findim(&n)).transpose()?;

    Ok(Bundle { cocycle, trivialization, plectic_form, ham_pairs, mult_vf, moment_map, group_model, qham, findim })
}

fn group_model(n: &Node) -> Result<GroupModel, BundleError> {
    let names = strings(&n.child("coords")?)?;
    let gc = coords(&names);
    let region = coord_box(&names, &n.child("box")?)?;
    let forms = |key: &str| -> Result<Vec<Form>, BundleError> {
        (n.child(key)?).items()?.iter().map(|f| form_of_degree(&gc, f, 1)).collect()
    };
    let theta_left = forms("theta_left")?;
    let theta_right = forms("theta_right")?;
    let dim = theta_left.len();
    if theta_right.len() != dim {
        return Err(n.invalid("theta_left and theta_right have different lengths"));
    }
    let eta = form_of_degree(&gc, &n.child("eta")?, 3)?;
    let inner = matrix(&n.child("inner_product")?, dim, dim)?;
    let structure = numbers(&n.child("structure_constants")?, dim * dim * dim)?;
    Ok(GroupModel { coords: gc, region, theta_left, theta_right, eta, inner, structure })
}

fn findim(n: &Node) -> Result<FinDimLie2, BundleError> {
    let n0 = n.child("n0")?.usize()?;
    let n1 = n.child("n1")?.usize()?;
    let d = matrix(&n.child("d")?, n0, n1)?;
    let c = numbers(&n.child("bracket")?, n0 * n0 * n0)?;
    let m = numbers(&n.child("action")?, n0 * n1 * n1)?;
    let j = numbers(&n.child("jacobiator")?, n0 * n0 * n0 * n1)?;
    FinDimLie2::new(n0, n1, d, c, m, j).map_err(|e: Error| n.invalid(e.to_string()))
}
