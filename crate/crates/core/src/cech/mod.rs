//! Box covers, Čech cochains of differential forms and the simplicial
//! differential, Deligne 2-cocycles and trivializations.

mod deligne;

pub use deligne::{
    three_curvature, trivial_gerbe, validate_deligne, validate_trivialization, DeligneCocycle, Trivialization,
};

use std::collections::BTreeMap;

use crate::cartan::{Coords, Form};
use crate::error::{Error, Result};
use crate::symexpr::{CoordBox, Oracle, Point, SampleOutcome};

/// Deepest supported overlap order.
pub const MAX_DEPTH: usize = 4;

/// Human-readable 1-based overlap label, e.g. `(1,2)`.
pub fn label(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(","))
}

/// Open cover of an ambient box by sub-boxes, with every nonempty
/// overlap up to depth four precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    coords: Coords,
    ambient: CoordBox,
    charts: Vec<CoordBox>,
    overlaps: BTreeMap<Vec<usize>, CoordBox>,
}

impl Cover {
    pub fn new(ambient: CoordBox, charts: Vec<CoordBox>) -> Result<Cover> {
        if ambient.is_degenerate() {
            return Err(Error::Invalid("ambient box is degenerate".into()));
        }
        if charts.is_empty() {
            return Err(Error::Invalid("cover has no charts".into()));
        }
        let mut clipped = Vec::new();
        for (i, c) in charts.iter().enumerate() {
            if c.coords != ambient.coords {
                return Err(Error::DimensionMismatch(format!(
                    "chart {} uses coordinates {:?}, manifold uses {:?}",
                    i + 1,
                    c.coords,
                    ambient.coords
                )));
            }
            let b =
                c.intersect(&ambient).ok_or_else(|| Error::Invalid(format!("chart {} misses the manifold", i + 1)))?;
            clipped.push(b);
        }
        let mut overlaps = BTreeMap::new();
        let mut stack: Vec<(Vec<usize>, CoordBox)> =
            clipped.iter().enumerate().map(|(i, b)| (vec![i], b.clone())).collect();
        while let Some((idx, b)) = stack.pop() {
            if idx.len() < MAX_DEPTH {
                for (j, cj) in clipped.iter().enumerate().skip(idx[idx.len() - 1] + 1) {
                    if let Some(nb) = b.intersect(cj) {
                        let mut ni = idx.clone();
                        ni.push(j);
                        stack.push((ni, nb));
                    }
                }
            }
            overlaps.insert(idx, b);
        }
        let coords = crate::cartan::coords(&ambient.coords);
        let cover = Cover { coords, ambient, charts: clipped, overlaps };
        if let Some(p) = cover.uncovered_point(6) {
            return Err(Error::Invalid(format!("charts do not cover the manifold near {}", p)));
        }
        Ok(cover)
    }

    /// The one-chart cover.
    pub fn single(ambient: CoordBox) -> Result<Cover> {
        Cover::new(ambient.clone(), vec![ambient])
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn ambient(&self) -> &CoordBox {
        &self.ambient
    }

    pub fn charts(&self) -> &[CoordBox] {
        &self.charts
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn overlap(&self, idx: &[usize]) -> Option<&CoordBox> {
        self.overlaps.get(idx)
    }

    /// Nonempty overlaps with `depth` strictly increasing chart indices.
    pub fn overlaps(&self, depth: usize) -> impl Iterator<Item = (&Vec<usize>, &CoordBox)> {
        self.overlaps.iter().filter(move |(k, _)| k.len() == depth)
    }

    /// First cell centre of an `n`-per-axis grid not inside any chart.
    pub fn uncovered_point(&self, n: usize) -> Option<Point> {
        let d = self.ambient.dim();
        let total = n.pow(d as u32);
        for cell in 0..total {
            let mut p = Point::new();
            let mut rest = cell;
            for k in 0..d {
                let i = rest % n;
                rest /= n;
                let (lo, hi) = (self.ambient.lo[k], self.ambient.hi[k]);
                p.set(&self.ambient.coords[k], lo + (i as f64 + 0.5) * (hi - lo) / n as f64);
            }
            if !self.charts.iter().any(|c| c.contains(&p)) {
                return Some(p);
            }
        }
        None
    }
}

/// Degree-`k` forms assigned to the depth-`p` overlaps; absent entries are
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CechForm {
    coords: Coords,
    degree: usize,
    depth: usize,
    forms: BTreeMap<Vec<usize>, Form>,
}

impl CechForm {
    pub fn zero(coords: &Coords, degree: usize, depth: usize) -> CechForm {
        CechForm { coords: coords.clone(), degree, depth, forms: BTreeMap::new() }
    }

    pub fn insert(&mut self, idx: Vec<usize>, form: Form) -> Result<()> {
        if idx.len() != self.depth || idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!("overlap {} is not an increasing {}-tuple", label(&idx), self.depth)));
        }
        if form.degree() != self.degree || form.coords()[..] != self.coords[..] {
            return Err(Error::DegreeError(format!(
                "expected a {}-form on {:?}, got degree {}",
                self.degree,
                self.coords,
                form.degree()
            )));
        }
        self.forms.insert(idx, form);
        Ok(())
    }

    pub fn with(mut self, idx: Vec<usize>, form: Form) -> Result<CechForm> {
        self.insert(idx, form)?;
        Ok(self)
    }

    /// Builds a cochain of functions from per-overlap expressions.
    pub fn functions<I: IntoIterator<Item = (Vec<usize>, crate::symexpr::Expr)>>(
        coords: &Coords,
        depth: usize,
        items: I,
    ) -> Result<CechForm> {
        let mut c = CechForm::zero(coords, 0, depth);
        for (idx, e) in items {
            c.insert(idx, Form::function(coords, e))?;
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Form> {
        &self.forms
    }

    pub fn get(&self, idx: &[usize]) -> Form {
        self.forms.get(idx).cloned().unwrap_or_else(|| Form::zero(&self.coords, self.degree))
    }

    /// Coefficient of a function cochain on an overlap.
    pub fn scalar(&self, idx: &[usize]) -> crate::symexpr::Expr {
        self.get(idx).scalar()
    }

    /// Applies `f` to every overlap of the cochain's depth in `cover`.
    pub fn map_overlaps<F>(cover: &Cover, coords: &Coords, degree: usize, depth: usize, mut f: F) -> Result<CechForm>
    where
        F: FnMut(&[usize]) -> Result<Form>,
    {
        let mut c = CechForm::zero(coords, degree, depth);
        for (idx, _) in cover.overlaps(depth) {
            let form = f(idx)?;
            if !form.is_structurally_zero() {
                c.insert(idx.clone(), form)?;
            }
        }
        Ok(c)
    }

    pub fn add(&self, other: &CechForm) -> Result<CechForm> {
        self.combine(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &CechForm) -> Result<CechForm> {
        self.combine(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: f64) -> CechForm {
        let factor = crate::symexpr::Expr::constant(s);
        CechForm {
            coords: self.coords.clone(),
            degree: self.degree,
            depth: self.depth,
            forms: self
                .forms
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(&factor)))
                .filter(|(_, v)| !v.is_structurally_zero())
                .collect(),
        }
    }

    fn combine<F>(&self, other: &CechForm, f: F) -> Result<CechForm>
    where
        F: Fn(&Form, &Form) -> Result<Form, crate::cartan::CartanError>,
    {
        if self.degree != other.degree || self.depth != other.depth {
            return Err(Error::DegreeError(format!(
                "cannot combine ({},{}) with ({},{}) cochains",
                self.degree, self.depth, other.degree, other.depth
            )));
        }
        let mut keys: Vec<&Vec<usize>> = self.forms.keys().chain(other.forms.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut out = CechForm::zero(&self.coords, self.degree, self.depth);
        for k in keys {
            let v = f(&self.get(k), &other.get(k))?;
            if !v.is_structurally_zero() {
                out.forms.insert(k.clone(), v);
            }
        }
        Ok(out)
    }

    /// Applies a form operation entrywise.
    pub fn map<F>(&self, degree: usize, f: F) -> Result<CechForm>
    where
        F: Fn(&Form) -> Result<Form, crate::cartan::CartanError>,
    {
        let mut out = CechForm::zero(&self.coords, degree, self.depth);
        for (k, v) in &self.forms {
            let w = f(v)?;
            if !w.is_structurally_zero() {
                out.insert(k.clone(), w)?;
            }
        }
        Ok(out)
    }

    /// Worst sampled discrepancy per overlap, each on its own overlap box.
    pub fn compare_per_overlap(
        &self,
        other: &CechForm,
        cover: &Cover,
        oracle: &Oracle,
    ) -> Result<Vec<(Vec<usize>, SampleOutcome)>> {
        if self.degree != other.degree || self.depth != other.depth {
            return Err(Error::DegreeError("cochains of different shape".into()));
        }
        let mut out = Vec::new();
        for (idx, region) in cover.overlaps(self.depth) {
            let r = self.get(idx).compare(&other.get(idx), region, oracle)?;
            out.push((idx.clone(), r));
        }
        Ok(out)
    }

    pub fn compare(&self, other: &CechForm, cover: &Cover, oracle: &Oracle) -> Result<SampleOutcome> {
        let mut total = SampleOutcome { pass: true, max_residual: 0.0, witness: None };
        for (_, r) in self.compare_per_overlap(other, cover, oracle)? {
            total.merge(r);
        }
        Ok(total)
    }
}

/// Simplicial differential `(df)_{i0..ip} = sum_r (-1)^r f_{i0..^ir..ip}`,
/// so functions on charts map to `g_j - g_i` on `(i,j)`.
pub fn cech_delta(f: &CechForm, cover: &Cover) -> Result<CechForm> {
    let depth = f.depth + 1;
    if depth > MAX_DEPTH {
        return Err(Error::DepthExceeded(depth));
    }
    CechForm::map_overlaps(cover, &f.coords, f.degree, depth, |idx| {
        let parts: Vec<Form> = (0..idx.len())
            .map(|r| {
                let mut face = idx.to_vec();
                face.remove(r);
                let g = f.get(&face);
                if r % 2 == 0 {
                    g
                } else {
                    g.neg()
                }
            })
            .collect();
        Ok(Form::sum(&f.coords, f.degree, parts.iter())?)
    })
}

/// Glues a depth-one cochain whose differential vanishes: checks agreement
/// on every double overlap and returns the per-chart representatives. The
/// coefficients are analytic expressions, so agreement on an open overlap
/// makes any representative valid on the whole manifold.
pub fn glue(zeta: &CechForm, cover: &Cover, oracle: &Oracle, what: &str) -> Result<Form> {
    if zeta.depth != 1 {
        return Err(Error::Invalid(format!("{} must be a chart cochain", what)));
    }
    let d = cech_delta(zeta, cover)?;
    for (idx, region) in cover.overlaps(2) {
        let r = d.get(idx).compare_zero(region, oracle)?;
        if !r.pass {
            return Err(Error::GluingMismatch {
                what: what.to_string(),
                overlap: idx.iter().map(|i| i + 1).collect(),
                residual: r.max_residual,
                witness: r.witness.map(|p| p.to_string()).unwrap_or_default(),
            });
        }
    }
    Ok(zeta.get(&[0]))
}

/// Restricts a global form to every chart.
pub fn restrict(form: &Form, cover: &Cover) -> Result<CechForm> {
    CechForm::map_overlaps(cover, form.coords(), form.degree(), 1, |_| Ok(form.clone()))
}
