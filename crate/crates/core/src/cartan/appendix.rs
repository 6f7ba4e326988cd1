use super::{coords, homotopy_operator, CartanError, Form, VectorField};
use crate::symexpr::{CoordBox, Expr, Oracle, SampleOutcome};

/// Both sides of the Jacobiator identity together with the sampled comparison.
#[derive(Debug, Clone)]
pub struct AppendixOutcome {
    pub lhs: Form,
    pub rhs: Form,
    pub outcome: SampleOutcome,
}

fn cyclic_term(
    b: &Form,
    (x, a): (&VectorField, &Form),
    (y, by): (&VectorField, &Form),
    (z, cz): (&VectorField, &Form),
) -> Result<Form, CartanError> {
    let yz = y.bracket(z)?;
    let inner = cz.lie_derivative(y)?.sub(&by.lie_derivative(z)?)?;
    let t1 = inner.interior(x)?;
    let t2 = a.interior(&yz)?;
    let t3 = b.interior(x)?.interior(&yz)?;
    t1.sub(&t2)?.add(&t3)
}

/// For fields `X, Y, Z` preserving `B` up to the exact forms `da, db, dc`,
/// checks `-i_Z i_Y i_X dB = i_X(L_Y c - L_Z b) - i_[Y,Z] a + i_[Y,Z] i_X B`
/// summed over cyclic permutations of `(X,a), (Y,b), (Z,c)`.
#[allow(clippy::too_many_arguments)]
pub fn check_appendix_identity(
    b: &Form,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    a: &Form,
    bb: &Form,
    c: &Form,
    region: &CoordBox,
    oracle: &Oracle,
) -> Result<AppendixOutcome, CartanError> {
    for (name, field, pot) in [("L_X B = da", x, a), ("L_Y B = db", y, bb), ("L_Z B = dc", z, c)] {
        let r = b.lie_derivative(field)?.compare(&pot.exterior_d(), region, oracle)?;
        if !r.pass {
            return Err(CartanError::PreconditionFailed { hypothesis: name.to_string(), residual: r.max_residual });
        }
    }
    let lhs = b.exterior_d().interior(x)?.interior(y)?.interior(z)?.neg();
    let rhs = Form::sum(
        b.coords(),
        0,
        [
            cyclic_term(b, (x, a), (y, bb), (z, c))?,
            cyclic_term(b, (y, bb), (z, c), (x, a))?,
            cyclic_term(b, (z, c), (x, a), (y, bb))?,
        ]
        .iter(),
    )?;
    let outcome = lhs.compare(&rhs, region, oracle)?;
    Ok(AppendixOutcome { lhs, rhs, outcome })
}

/// A polynomial instance of the identity's hypotheses on the cube `[-1,1]^3`.
#[derive(Debug, Clone)]
pub struct AppendixInstance {
    pub region: CoordBox,
    pub b: Form,
    pub fields: [VectorField; 3],
    pub potentials: [Form; 3],
}

fn random_poly(rng: &mut impl rand::Rng, vars: &[Expr], max_degree: u32) -> Expr {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let coeff = rng.gen_range(-3i32..=3) as f64 * 0.5;
        let mut fs = vec![Expr::constant(coeff)];
        let mut left = max_degree;
        for v in vars {
            let k = rng.gen_range(0..=left);
            left -= k;
            fs.push(Expr::pow(v, k as i32));
        }
        terms.push(Expr::product(fs));
    }
    Expr::sum(terms)
}

/// Builds divergence-free fields `X = curl P` and `B = H(k vol) + d theta`, so
/// `dB = k vol` and each `L_X B` is exact; the potentials are
/// `i_X B + H(i_X dB)`.
pub fn random_appendix_instance(seed: u64) -> Result<AppendixInstance, CartanError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cs = coords(&["x", "y", "z"]);
    let region = CoordBox::new(&["x", "y", "z"], &[(-1.0, 1.0); 3]);
    let center = [0.0; 3];
    let vars: Vec<Expr> = cs.iter().map(|n| Expr::var(n)).collect();

    let k = rng.gen_range(1i32..=4) as f64 * 0.5;
    let vol = Form::from_terms(&cs, 3, [(vec![0, 1, 2], Expr::constant(k))]);
    let theta = Form::from_terms(&cs, 1, (0..3).map(|i| (vec![i], random_poly(&mut rng, &vars, 2))));
    let b = homotopy_operator(&vol, &center)?.add(&theta.exterior_d())?;
    let db = b.exterior_d();

    let mut fields = Vec::new();
    let mut potentials = Vec::new();
    for _ in 0..3 {
        let p: Vec<Expr> = (0..3).map(|_| random_poly(&mut rng, &vars, 2)).collect();
        let d = |e: &Expr, i: usize| e.diff(&cs[i]);
        let comps = vec![&d(&p[2], 1) - &d(&p[1], 2), &d(&p[0], 2) - &d(&p[2], 0), &d(&p[1], 0) - &d(&p[0], 1)];
        let x = VectorField::new(&cs, comps)?;
        let a = b.interior(&x)?.add(&homotopy_operator(&db.interior(&x)?, &center)?)?;
        fields.push(x);
        potentials.push(a);
    }
    let fields: [VectorField; 3] = fields.try_into().expect("three fields");
    let potentials: [Form; 3] = potentials.try_into().expect("three potentials");
    Ok(AppendixInstance { region, b, fields, potentials })
}
