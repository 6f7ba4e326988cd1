use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, ExprError};

/// Assignment of real values to coordinate names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point {
    entries: Vec<(String, f64)>,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }

    pub fn from_pairs<S: Into<String>, I: IntoIterator<Item = (S, f64)>>(pairs: I) -> Self {
        let mut p = Point::new();
        for (k, v) in pairs {
            p.set(&k.into(), v);
        }
        p
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.entries.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {:.6}", k, v)?;
        }
        write!(f, "}}")
    }
}

/// Axis-aligned box with named coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub coords: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoordBox {
    pub fn new<S: AsRef<str>>(coords: &[S], bounds: &[(f64, f64)]) -> Self {
        CoordBox {
            coords: coords.iter().map(|s| s.as_ref().to_string()).collect(),
            lo: bounds.iter().map(|b| b.0).collect(),
            hi: bounds.iter().map(|b| b.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h.partial_cmp(l) != Some(std::cmp::Ordering::Greater))
    }

    pub fn intersect(&self, other: &CoordBox) -> Option<CoordBox> {
        if self.coords != other.coords {
            return None;
        }
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        let b = CoordBox { coords: self.coords.clone(), lo, hi };
        if b.is_degenerate() {
            None
        } else {
            Some(b)
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.coords.iter().enumerate().all(|(i, c)| match p.get(c) {
            Some(v) => v > self.lo[i] && v < self.hi[i],
            None => false,
        })
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Seeded uniform points strictly inside the box.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut p = Point::new();
                for (i, c) in self.coords.iter().enumerate() {
                    let mut u: f64 = rng.gen();
                    if u == 0.0 {
                        u = 0.5;
                    }
                    p.set(c, self.lo[i] + u * (self.hi[i] - self.lo[i]));
                }
                p
            })
            .collect()
    }
}

/// Parameters of the sampling equality oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oracle {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { samples: 25, tol: 1e-9, seed: 0x5EED }
    }
}

impl Oracle {
    pub fn with_samples(self, samples: usize) -> Self {
        Oracle { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Oracle { seed, ..self }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Oracle { tol, ..self }
    }

    /// Compares pairs of expressions componentwise at the sample points.
    /// The residual at a point is the largest `|a - b|`; a point passes when
    /// every pair satisfies `|a - b| <= tol * (1 + |a|)`.
    pub fn compare_many(&self, pairs: &[(Expr, Expr)], region: &CoordBox) -> Result<SampleOutcome, ExprError> {
        if self.samples == 0 || self.tol.is_nan() || self.tol <= 0.0 || region.is_degenerate() {
            return Err(ExprError::InvalidRequest(format!(
                "samples={}, tol={}, box degenerate={}",
                self.samples,
                self.tol,
                region.is_degenerate()
            )));
        }
        let mut out = SampleOutcome { pass: true, max_residual: 0.0, witness: None };
        if pairs.is_empty() {
            return Ok(out);
        }
        for p in region.sample(self.samples, self.seed) {
            let mut worst = 0.0f64;
            let mut ok = true;
            for (a, b) in pairs {
                let va = a.eval(&p)?;
                let vb = b.eval(&p)?;
                let r = (va - vb).abs();
                if r > self.tol * (1.0 + va.abs()) {
                    ok = false;
                }
                worst = worst.max(r);
            }
            if !ok {
                out.pass = false;
            }
            if worst > out.max_residual || out.witness.is_none() {
                out.max_residual = worst;
                out.witness = Some(p);
            }
        }
        Ok(out)
    }
}

/// Result of a sampled comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub pass: bool,
    pub max_residual: f64,
    pub witness: Option<Point>,
}

impl SampleOutcome {
    pub fn merge(&mut self, other: SampleOutcome) {
        self.pass &= other.pass;
        if other.max_residual > self.max_residual || self.witness.is_none() {
            self.max_residual = self.max_residual.max(other.max_residual);
            if other.witness.is_some() {
                self.witness = other.witness;
            }
        }
    }
}

pub fn equal_on_samples(
    a: &Expr,
    b: &Expr,
    region: &CoordBox,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<SampleOutcome, ExprError> {
    Oracle { samples: n, tol, seed }.compare_many(&[(a.clone(), b.clone())], region)
}
