use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{column_basis, lstsq, null_space, rank};
use super::{Butterfly, ButterflySamples, Lie2Morphism, Lie2Structure};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::symexpr::{Oracle, Point, SampleOutcome};

/// Numeric Lie 2-algebra with dense coefficient tensors: `[e_i, e_j] =
/// c[i,j,k] e_k`, `[e_i, f_a] = m[i,a,b] f_b`, `J(e_i,e_j,e_k) = j[i,j,k,a] f_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinDimLie2 {
    n0: usize,
    n1: usize,
    d: DMatrix<f64>,
    c: Vec<f64>,
    m: Vec<f64>,
    j: Vec<f64>,
}

fn compare_vec(a: &DVector<f64>, b: &DVector<f64>, oracle: &Oracle) -> Result<SampleOutcome> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let mut out = SampleOutcome { pass: true, max_residual: 0.0, witness: None };
    for (i, (x, y)) in a.iter().zip(b.iter()).enumerate() {
        let r = (x - y).abs();
        if r > oracle.tol * (1.0 + x.abs()) {
            out.pass = false;
        }
        if r > out.max_residual {
            out.max_residual = r;
            out.witness = Some(Point::from_pairs([(format!("component{}", i), *x)]));
        }
    }
    if out.pass {
        out.witness = None;
    }
    Ok(out)
}

fn basis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn check_len(v: &DVector<f64>, n: usize, what: &str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{} has length {}, expected {}", what, v.len(), n)))
    }
}

impl FinDimLie2 {
    /// Builds an instance from dense tensors and checks the skew-symmetry
    /// of the bracket and the Jacobiator.
    pub fn new(n0: usize, n1: usize, d: DMatrix<f64>, c: Vec<f64>, m: Vec<f64>, j: Vec<f64>) -> Result<FinDimLie2> {
        let l = FinDimLie2::unchecked(n0, n1, d, c, m, j)?;
        for i in 0..n0 {
            for k in 0..n0 {
                for r in 0..n0 {
                    if (l.c[l.ci(i, k, r)] + l.c[l.ci(k, i, r)]).abs() > 1e-12 {
                        return Err(Error::Invalid(format!("bracket is not skew on ({},{})", i, k)));
                    }
                }
            }
        }
        for a in 0..n0 {
            for b in 0..n0 {
                for c in 0..n0 {
                    for s in 0..n1 {
                        let v = l.j[l.ji(a, b, c, s)];
                        if (v + l.j[l.ji(b, a, c, s)]).abs() > 1e-12 || (v + l.j[l.ji(a, c, b, s)]).abs() > 1e-12 {
                            return Err(Error::Invalid(format!("Jacobiator is not skew on ({},{},{})", a, b, c)));
                        }
                    }
                }
            }
        }
        Ok(l)
    }

    /// Builds an instance without the skew-symmetry checks, so that the
    /// axiom checker can be run on defective data.
    pub fn unchecked(
        n0: usize,
        n1: usize,
        d: DMatrix<f64>,
        c: Vec<f64>,
        m: Vec<f64>,
        j: Vec<f64>,
    ) -> Result<FinDimLie2> {
        if d.nrows() != n0 || d.ncols() != n1 {
            return Err(Error::DimensionMismatch(format!("d is {}x{}, expected {}x{}", d.nrows(), d.ncols(), n0, n1)));
        }
        if c.len() != n0 * n0 * n0 || m.len() != n0 * n1 * n1 || j.len() != n0 * n0 * n0 * n1 {
            return Err(Error::DimensionMismatch("tensor sizes do not match the dimensions".into()));
        }
        Ok(FinDimLie2 { n0, n1, d, c, m, j })
    }

    /// Copy with the single Jacobiator coefficient `J(e_i,e_j,e_k)_a`
    /// multiplied by `factor`; the result is generally not skew.
    pub fn with_scaled_jacobiator_entry(&self, (i, j, k, a): (usize, usize, usize, usize), factor: f64) -> FinDimLie2 {
        let mut out = self.clone();
        let idx = self.ji(i, j, k, a);
        out.j[idx] *= factor;
        out
    }

    /// Tabulates the tensors of bilinear and trilinear maps given as closures.
    pub fn from_maps<D, B, A, J>(n0: usize, n1: usize, d: D, br: B, act: A, jac: J) -> Result<FinDimLie2>
    where
        D: Fn(&DVector<f64>) -> DVector<f64>,
        B: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
        A: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
        J: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>,
    {
        let dm = DMatrix::from_fn(n0, n1, |r, s| d(&basis(n1, s))[r]);
        let mut c = vec![0.0; n0 * n0 * n0];
        let mut m = vec![0.0; n0 * n1 * n1];
        let mut j = vec![0.0; n0 * n0 * n0 * n1];
        for a in 0..n0 {
            for b in 0..n0 {
                let v = br(&basis(n0, a), &basis(n0, b));
                for k in 0..n0 {
                    c[(a * n0 + b) * n0 + k] = v[k];
                }
                for e in 0..n0 {
                    let w = jac(&basis(n0, a), &basis(n0, b), &basis(n0, e));
                    for s in 0..n1 {
                        j[((a * n0 + b) * n0 + e) * n1 + s] = w[s];
                    }
                }
            }
            for s in 0..n1 {
                let v = act(&basis(n0, a), &basis(n1, s));
                for t in 0..n1 {
                    m[(a * n1 + s) * n1 + t] = v[t];
                }
            }
        }
        FinDimLie2::new(n0, n1, dm, c, m, j)
    }

    /// A Lie algebra from structure constants `c[i][j][k]`, as `0 -> g`.
    pub fn lie_algebra(n: usize, c: Vec<f64>) -> Result<FinDimLie2> {
        FinDimLie2::new(n, 0, DMatrix::zeros(n, 0), c, Vec::new(), Vec::new())
    }

    /// The cross-product algebra on R^3.
    pub fn cross_product() -> FinDimLie2 {
        FinDimLie2::from_maps(3, 0, |_| DVector::zeros(3), cross, |_, _| DVector::zeros(0), |_, _, _| DVector::zeros(0))
            .expect("cross product is a Lie algebra")
    }

    /// `R --0--> R^3` with the cross product, trivial action and Jacobiator
    /// `J(x,y,z) = x . (y x z)`.
    pub fn string_type() -> FinDimLie2 {
        FinDimLie2::from_maps(
            3,
            1,
            |_| DVector::zeros(3),
            cross,
            |_, _| DVector::zeros(1),
            |x, y, z| DVector::from_vec(vec![x.dot(&cross(y, z))]),
        )
        .expect("string-type instance is well formed")
    }

    /// Strict instance `R^3 --s--> R^3` with the cross product acting by
    /// the adjoint action.
    pub fn adjoint(s: f64) -> FinDimLie2 {
        FinDimLie2::from_maps(3, 3, |h| h * s, cross, cross, |_, _, _| DVector::zeros(3))
            .expect("adjoint instance is well formed")
    }

    /// The same algebra written in new bases: old coordinates are `p0 x'`
    /// and `p1 h'`.
    pub fn change_basis(&self, p0: &DMatrix<f64>, p1: &DMatrix<f64>) -> Result<FinDimLie2> {
        let q0 = p0.clone().try_inverse().ok_or_else(|| Error::Invalid("singular basis change".into()))?;
        let q1 = if self.n1 == 0 {
            DMatrix::zeros(0, 0)
        } else {
            p1.clone().try_inverse().ok_or_else(|| Error::Invalid("singular basis change".into()))?
        };
        FinDimLie2::from_maps(
            self.n0,
            self.n1,
            |h| &q0 * (&self.d * (p1 * h)),
            |x, y| &q0 * self.br(&(p0 * x), &(p0 * y)),
            |x, h| &q1 * self.ac(&(p0 * x), &(p1 * h)),
            |x, y, z| &q1 * self.jc(&(p0 * x), &(p0 * y), &(p0 * z)),
        )
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn d_matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    fn ci(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n0 + j) * self.n0 + k
    }

    fn ji(&self, i: usize, j: usize, k: usize, a: usize) -> usize {
        ((i * self.n0 + j) * self.n0 + k) * self.n1 + a
    }

    fn br(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n0);
        for i in 0..self.n0 {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.n0 {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..self.n0 {
                    out[k] += w * self.c[self.ci(i, j, k)];
                }
            }
        }
        out
    }

    fn ac(&self, x: &DVector<f64>, h: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n1);
        for i in 0..self.n0 {
            for a in 0..self.n1 {
                let w = x[i] * h[a];
                if w == 0.0 {
                    continue;
                }
                for b in 0..self.n1 {
                    out[b] += w * self.m[(i * self.n1 + a) * self.n1 + b];
                }
            }
        }
        out
    }

    fn jc(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n1);
        for i in 0..self.n0 {
            for j in 0..self.n0 {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..self.n0 {
                    let w = w * z[k];
                    if w == 0.0 {
                        continue;
                    }
                    for a in 0..self.n1 {
                        out[a] += w * self.j[self.ji(i, j, k, a)];
                    }
                }
            }
        }
        out
    }

    /// Basis vectors followed by seeded random combinations.
    pub fn sample_elements(&self, extra: usize, seed: u64) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x0: Vec<DVector<f64>> = (0..self.n0).map(|i| basis(self.n0, i)).collect();
        let mut x1: Vec<DVector<f64>> = (0..self.n1).map(|i| basis(self.n1, i)).collect();
        for _ in 0..extra {
            x0.push(DVector::from_fn(self.n0, |_, _| rng.gen_range(-1.0..1.0)));
            x1.push(DVector::from_fn(self.n1, |_, _| rng.gen_range(-1.0..1.0)));
        }
        (x0, x1)
    }
}

fn cross(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]])
}

impl Lie2Structure for FinDimLie2 {
    type V0 = DVector<f64>;
    type V1 = DVector<f64>;

    fn d(&self, h: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(h, self.n1, "degree-1 element")?;
        Ok(&self.d * h)
    }
    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(x, self.n0, "degree-0 element")?;
        check_len(y, self.n0, "degree-0 element")?;
        Ok(self.br(x, y))
    }
    fn act(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(x, self.n0, "degree-0 element")?;
        check_len(h, self.n1, "degree-1 element")?;
        Ok(self.ac(x, h))
    }
    fn jacobiator(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
        for v in [x, y, z] {
            check_len(v, self.n0, "degree-0 element")?;
        }
        Ok(self.jc(x, y, z))
    }
    fn zero0(&self) -> DVector<f64> {
        DVector::zeros(self.n0)
    }
    fn zero1(&self) -> DVector<f64> {
        DVector::zeros(self.n1)
    }
    fn add0(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(a, self.n0, "degree-0 element")?;
        check_len(b, self.n0, "degree-0 element")?;
        Ok(a + b)
    }
    fn add1(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(a, self.n1, "degree-1 element")?;
        check_len(b, self.n1, "degree-1 element")?;
        Ok(a + b)
    }
    fn scale0(&self, s: f64, a: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(a * s)
    }
    fn scale1(&self, s: f64, a: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(a * s)
    }
    fn compare0(&self, a: &DVector<f64>, b: &DVector<f64>, oracle: &Oracle) -> Result<SampleOutcome> {
        compare_vec(a, b, oracle)
    }
    fn compare1(&self, a: &DVector<f64>, b: &DVector<f64>, oracle: &Oracle) -> Result<SampleOutcome> {
        compare_vec(a, b, oracle)
    }
}

/// Linear morphism `(F0, F1)` with bilinear homotopy `F2[i,j,a]`
/// (empty for strict morphisms).
#[derive(Debug, Clone, PartialEq)]
pub struct FinDimMorphism {
    pub f0: DMatrix<f64>,
    pub f1: DMatrix<f64>,
    pub f2: Vec<f64>,
}

/// Strict morphisms carry no homotopy.
pub type StrictMorphism = FinDimMorphism;

impl FinDimMorphism {
    pub fn strict(f0: DMatrix<f64>, f1: DMatrix<f64>) -> FinDimMorphism {
        FinDimMorphism { f0, f1, f2: Vec::new() }
    }

    pub fn identity(l: &FinDimLie2) -> FinDimMorphism {
        FinDimMorphism::strict(DMatrix::identity(l.n0, l.n0), DMatrix::identity(l.n1, l.n1))
    }

    /// `self` after `first`; only strict morphisms compose here.
    pub fn after(&self, first: &FinDimMorphism) -> Result<FinDimMorphism> {
        if !self.f2.is_empty() || !first.f2.is_empty() {
            return Err(Error::Invalid("composition of morphisms with homotopies is not supported".into()));
        }
        Ok(FinDimMorphism::strict(&self.f0 * &first.f0, &self.f1 * &first.f1))
    }

    fn homotopy(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n1 = self.f1.nrows();
        let n0 = self.f0.ncols();
        let mut out = DVector::zeros(n1);
        if self.f2.is_empty() {
            return out;
        }
        for i in 0..n0 {
            for j in 0..n0 {
                let w = x[i] * y[j];
                for a in 0..n1 {
                    out[a] += w * self.f2[(i * n0 + j) * n1 + a];
                }
            }
        }
        out
    }
}

impl Lie2Morphism<FinDimLie2, FinDimLie2> for FinDimMorphism {
    fn f0(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(x, self.f0.ncols(), "degree-0 element")?;
        Ok(&self.f0 * x)
    }
    fn f1(&self, h: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(h, self.f1.ncols(), "degree-1 element")?;
        Ok(&self.f1 * h)
    }
    fn f2(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.homotopy(x, y))
    }
}

/// Butterfly with finite-dimensional carrier and matrix structure maps.
#[derive(Debug, Clone, PartialEq)]
pub struct FinDimButterfly {
    pub source: FinDimLie2,
    pub target: FinDimLie2,
    pub kappa: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub rho: DMatrix<f64>,
    /// `[e_a, e_b] = bracket[a,b,c] e_c`
    pub bracket: Vec<f64>,
}

/// A structure-preserving linear map between butterfly carriers.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyIso {
    pub map: DMatrix<f64>,
    pub residual: f64,
}

impl FinDimButterfly {
    pub fn dim(&self) -> usize {
        self.kappa.nrows()
    }

    fn tabulate<F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>>(n: usize, f: F) -> Vec<f64> {
        let mut t = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let v = f(&basis(n, a), &basis(n, b));
                for c in 0..n {
                    t[(a * n + b) * n + c] = v[c];
                }
            }
        }
        t
    }

    fn br(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                let w = x[a] * y[b];
                if w == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[c] += w * self.bracket[(a * n + b) * n + c];
                }
            }
        }
        out
    }

    /// The mirror butterfly `target --> source`.
    pub fn flipped(&self) -> FinDimButterfly {
        FinDimButterfly {
            source: self.target.clone(),
            target: self.source.clone(),
            kappa: self.lambda.clone(),
            lambda: self.kappa.clone(),
            sigma: self.rho.clone(),
            rho: self.sigma.clone(),
            bracket: self.bracket.clone(),
        }
    }

    /// Basis elements of every space plus seeded random carrier elements.
    pub fn samples(&self, extra: usize, seed: u64) -> ButterflySamples<FinDimButterfly> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut carrier: Vec<DVector<f64>> = (0..n).map(|i| basis(n, i)).collect();
        for _ in 0..extra {
            carrier.push(DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)));
        }
        let (source0, source1) = self.source.sample_elements(2, seed ^ 1);
        let (target0, target1) = self.target.sample_elements(2, seed ^ 2);
        ButterflySamples { carrier, source1, target1, source0, target0 }
    }
}

impl Butterfly for FinDimButterfly {
    type Source = FinDimLie2;
    type Target = FinDimLie2;
    type E = DVector<f64>;

    fn source(&self) -> &FinDimLie2 {
        &self.source
    }
    fn target(&self) -> &FinDimLie2 {
        &self.target
    }
    fn kappa(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(x, self.kappa.ncols(), "source degree-1 element")?;
        Ok(&self.kappa * x)
    }
    fn lambda(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(u, self.lambda.ncols(), "target degree-1 element")?;
        Ok(&self.lambda * u)
    }
    fn sigma(&self, e: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(e, self.dim(), "carrier element")?;
        Ok(&self.sigma * e)
    }
    fn rho(&self, e: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(e, self.dim(), "carrier element")?;
        Ok(&self.rho * e)
    }
    fn bracket(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(a, self.dim(), "carrier element")?;
        check_len(b, self.dim(), "carrier element")?;
        Ok(self.br(a, b))
    }
    fn zero(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }
    fn add(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(a + b)
    }
    fn scale(&self, s: f64, a: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(a * s)
    }
    fn compare(&self, a: &DVector<f64>, b: &DVector<f64>, oracle: &Oracle) -> Result<SampleOutcome> {
        compare_vec(a, b, oracle)
    }

    fn check_exactness(&self, _s: &ButterflySamples<Self>, _o: &Oracle) -> Result<Report> {
        Ok(wing_ranks(&self.lambda, &self.sigma, self.dim()))
    }

    fn check_reverse_exactness(&self, _s: &ButterflySamples<Self>, _o: &Oracle) -> Result<Report> {
        Ok(wing_ranks(&self.kappa, &self.rho, self.dim()))
    }
}

/// Rank conditions for `0 -> A --inj--> E --surj--> B -> 0`.
fn wing_ranks(inj: &DMatrix<f64>, surj: &DMatrix<f64>, dim: usize) -> Report {
    let mut r = Report::new("exactness");
    let ri = rank(inj);
    let rs = rank(surj);
    r.check("injective", ri == inj.ncols(), (inj.ncols() - ri) as f64, "map into the carrier has a kernel");
    r.check("surjective", rs == surj.nrows(), (surj.nrows() - rs) as f64, "map out of the carrier is not onto");
    let comp = if inj.ncols() == 0 || surj.nrows() == 0 { 0.0 } else { (surj * inj).amax() };
    r.check(
        "middle",
        comp <= 1e-9 && ri + rs == dim,
        comp.max((dim as f64 - (ri + rs) as f64).abs()),
        "image and kernel differ",
    );
    r
}

/// The butterfly `E = V0 + W1` of a morphism `F: V -> W`:
/// `kappa(x) = (dx, -F1 x)`, `lambda(w) = (0, w)`, `sigma(a, w) = a`,
/// `rho(a, w) = F0 a + dw`, and bracket
/// `([a,b], [F0 a, w'] - [F0 b, w] + [dw, w'] - F2(a,b))`.
pub fn butterfly_of_morphism(f: &FinDimMorphism, v: &FinDimLie2, w: &FinDimLie2) -> Result<FinDimButterfly> {
    if f.f0.nrows() != w.n0 || f.f0.ncols() != v.n0 || f.f1.nrows() != w.n1 || f.f1.ncols() != v.n1 {
        return Err(Error::DimensionMismatch("morphism does not match source and target".into()));
    }
    let (n0, m1) = (v.n0, w.n1);
    let n = n0 + m1;
    let split = |e: &DVector<f64>| (e.rows(0, n0).into_owned(), e.rows(n0, m1).into_owned());
    let mut kappa = DMatrix::zeros(n, v.n1);
    kappa.view_mut((0, 0), (n0, v.n1)).copy_from(&v.d);
    kappa.view_mut((n0, 0), (m1, v.n1)).copy_from(&(-&f.f1));
    let mut lambda = DMatrix::zeros(n, m1);
    lambda.view_mut((n0, 0), (m1, m1)).copy_from(&DMatrix::identity(m1, m1));
    let mut sigma = DMatrix::zeros(n0, n);
    sigma.view_mut((0, 0), (n0, n0)).copy_from(&DMatrix::identity(n0, n0));
    let mut rho = DMatrix::zeros(w.n0, n);
    rho.view_mut((0, 0), (w.n0, n0)).copy_from(&f.f0);
    rho.view_mut((0, n0), (w.n0, m1)).copy_from(&w.d);
    let bracket = FinDimButterfly::tabulate(n, |x, y| {
        let (a, wa) = split(x);
        let (b, wb) = split(y);
        let top = v.br(&a, &b);
        let bottom =
            w.ac(&(&f.f0 * &a), &wb) - w.ac(&(&f.f0 * &b), &wa) + w.ac(&(&w.d * &wa), &wb) - f.homotopy(&a, &b);
        let mut out = DVector::zeros(n);
        out.rows_mut(0, n0).copy_from(&top);
        out.rows_mut(n0, m1).copy_from(&bottom);
        out
    });
    Ok(FinDimButterfly { source: v.clone(), target: w.clone(), kappa, lambda, sigma, rho, bracket })
}

pub fn identity_butterfly(v: &FinDimLie2) -> FinDimButterfly {
    butterfly_of_morphism(&FinDimMorphism::identity(v), v, v).expect("identity has matching dimensions")
}

/// Composite `U --> V --> W`: the fibre product over `V0` modulo the image
/// of `V1` under `(lambda, kappa')`, realised on an orthonormal complement
/// of that image.
pub fn compose_butterflies(b1: &FinDimButterfly, b2: &FinDimButterfly) -> Result<FinDimButterfly> {
    if b1.target.n0 != b2.source.n0 || b1.target.n1 != b2.source.n1 {
        return Err(Error::DimensionMismatch(format!(
            "middle algebras differ: ({},{}) vs ({},{})",
            b1.target.n1, b1.target.n0, b2.source.n1, b2.source.n0
        )));
    }
    let (d1, d2) = (b1.dim(), b2.dim());
    let mid0 = b1.target.n0;
    let mut fibre = DMatrix::zeros(mid0, d1 + d2);
    fibre.view_mut((0, 0), (mid0, d1)).copy_from(&b1.rho);
    fibre.view_mut((0, d1), (mid0, d2)).copy_from(&(-&b2.sigma));
    let p = null_space(&fibre);
    let mut rel = DMatrix::zeros(d1 + d2, b1.target.n1);
    rel.view_mut((0, 0), (d1, b1.target.n1)).copy_from(&b1.lambda);
    rel.view_mut((d1, 0), (d2, b1.target.n1)).copy_from(&b2.kappa);
    let r = column_basis(&rel);
    let projected = if r.ncols() == 0 { p.clone() } else { &p - &r * (r.transpose() * &p) };
    let b = column_basis(&projected);
    let n = b.ncols();
    let bt = b.transpose();
    let top = |m: &DMatrix<f64>| m.rows(0, d1).into_owned();
    let bottom = |m: &DMatrix<f64>| m.rows(d1, d2).into_owned();

    let mut kin = DMatrix::zeros(d1 + d2, b1.source.n1);
    kin.view_mut((0, 0), (d1, b1.source.n1)).copy_from(&b1.kappa);
    let mut lin = DMatrix::zeros(d1 + d2, b2.target.n1);
    lin.view_mut((d1, 0), (d2, b2.target.n1)).copy_from(&b2.lambda);
    let kappa = &bt * kin;
    let lambda = &bt * lin;
    let sigma = &b1.sigma * top(&b);
    let rho = &b2.rho * bottom(&b);
    let bracket = FinDimButterfly::tabulate(n, |x, y| {
        let ex = &b * x;
        let ey = &b * y;
        let (x1, x2) = (ex.rows(0, d1).into_owned(), ex.rows(d1, d2).into_owned());
        let (y1, y2) = (ey.rows(0, d1).into_owned(), ey.rows(d1, d2).into_owned());
        let mut z = DVector::zeros(d1 + d2);
        z.rows_mut(0, d1).copy_from(&b1.br(&x1, &y1));
        z.rows_mut(d1, d2).copy_from(&b2.br(&x2, &y2));
        &bt * z
    });
    Ok(FinDimButterfly { source: b1.source.clone(), target: b2.target.clone(), kappa, lambda, sigma, rho, bracket })
}

const ISO_TOL: f64 = 1e-8;

/// Searches for an invertible linear map between carriers commuting with
/// all structure maps and brackets: least squares for the linear
/// conditions, then Gauss-Newton on the bracket equations over the affine
/// solution space.
pub fn find_2iso(b1: &FinDimButterfly, b2: &FinDimButterfly) -> Option<ButterflyIso> {
    let n = b1.dim();
    if n != b2.dim()
        || b1.kappa.ncols() != b2.kappa.ncols()
        || b1.lambda.ncols() != b2.lambda.ncols()
        || b1.sigma.nrows() != b2.sigma.nrows()
        || b1.rho.nrows() != b2.rho.nrows()
    {
        return None;
    }
    let id = DMatrix::<f64>::identity(n, n);
    // vec(T X) = (X^T kron I) vec T and vec(Y T) = (I kron Y) vec T
    let blocks: Vec<(DMatrix<f64>, DMatrix<f64>)> = vec![
        (b1.kappa.transpose().kronecker(&id), b2.kappa.clone()),
        (b1.lambda.transpose().kronecker(&id), b2.lambda.clone()),
        (id.kronecker(&b2.sigma), b1.sigma.clone()),
        (id.kronecker(&b2.rho), b1.rho.clone()),
    ];
    let rows: usize = blocks.iter().map(|(a, _)| a.nrows()).sum();
    let mut a = DMatrix::zeros(rows, n * n);
    let mut rhs = DVector::zeros(rows);
    let mut at = 0;
    for (m, target) in &blocks {
        a.view_mut((at, 0), (m.nrows(), n * n)).copy_from(m);
        rhs.rows_mut(at, m.nrows()).copy_from(&DVector::from_column_slice(target.as_slice()));
        at += m.nrows();
    }
    let (t0, lin_res) = lstsq(&a, &rhs);
    if lin_res > ISO_TOL {
        return None;
    }
    let null = null_space(&a);
    let k = null.ncols();
    let to_map = |z: &DVector<f64>| {
        let v = if k == 0 { t0.clone() } else { &t0 + &null * z };
        DMatrix::from_column_slice(n, n, v.as_slice())
    };
    let residual = |t: &DMatrix<f64>| {
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in (i + 1)..n {
                let ei = basis(n, i);
                let ej = basis(n, j);
                let lhs = t * b1.br(&ei, &ej);
                let rhs = b2.br(&(t * &ei), &(t * &ej));
                out.extend((lhs - rhs).iter().copied());
            }
        }
        DVector::from_vec(out)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x150);
    for attempt in 0..6 {
        let mut z = if attempt == 0 { DVector::zeros(k) } else { DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0)) };
        for _ in 0..60 {
            let r = residual(&to_map(&z));
            if r.amax() <= 1e-13 || k == 0 {
                break;
            }
            let h = 1e-4;
            let mut jac = DMatrix::zeros(r.len(), k);
            for c in 0..k {
                let mut zp = z.clone();
                zp[c] += h;
                let mut zm = z.clone();
                zm[c] -= h;
                let col = (residual(&to_map(&zp)) - residual(&to_map(&zm))) / (2.0 * h);
                jac.set_column(c, &col);
            }
            let (step, _) = lstsq(&jac, &(-&r));
            z += step;
        }
        let t = to_map(&z);
        let res = residual(&t).amax().max(lin_res);
        if res <= ISO_TOL && rank(&t) == n {
            return Some(ButterflyIso { map: t, residual: res });
        }
    }
    None
}

/// A seeded random strict instance `R^3 --s--> R^3` in random bases,
/// together with the change of basis from standard coordinates.
pub(crate) fn random_adjoint(rng: &mut ChaCha8Rng) -> (FinDimLie2, DMatrix<f64>, DMatrix<f64>, f64) {
    let s = rng.gen_range(0.5..2.0);
    let mut mk = || DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.3..0.3));
    let p0 = mk();
    let p1 = mk();
    let l = FinDimLie2::adjoint(s).change_basis(&p0, &p1).expect("well-conditioned basis change");
    (l, p0, p1, s)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let axis = nalgebra::Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let angle = rng.gen_range(-3.0..3.0);
    let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
    DMatrix::from_iterator(3, 3, r.matrix().iter().copied())
}

/// Three random strict instances `U, V, W` with strict isomorphisms
/// `F: U -> V` and `G: V -> W`.
pub fn random_strict_chain(seed: u64) -> (FinDimLie2, FinDimLie2, FinDimLie2, FinDimMorphism, FinDimMorphism) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u, pu0, pu1, su) = random_adjoint(&mut rng);
    let (v, pv0, pv1, sv) = random_adjoint(&mut rng);
    let (w, pw0, pw1, sw) = random_adjoint(&mut rng);
    let mut hom = |pa0: &DMatrix<f64>, pa1: &DMatrix<f64>, sa: f64, pb0: &DMatrix<f64>, pb1: &DMatrix<f64>, sb: f64| {
        let r = random_rotation(&mut rng);
        let f0 = pb0.clone().try_inverse().unwrap() * &r * pa0;
        let f1 = pb1.clone().try_inverse().unwrap() * (&r * (sa / sb)) * pa1;
        FinDimMorphism::strict(f0, f1)
    };
    let f = hom(&pu0, &pu1, su, &pv0, &pv1, sv);
    let g = hom(&pv0, &pv1, sv, &pw0, &pw1, sw);
    (u, v, w, f, g)
}
