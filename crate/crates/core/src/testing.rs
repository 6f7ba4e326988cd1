//! Shared fixtures for unit tests.

use crate::cartan::{Coords, Form, VectorField};
use crate::cech::{trivial_gerbe, CechForm, Cover, DeligneCocycle, Trivialization};
use crate::symexpr::{parse, CoordBox, Expr};

pub fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

pub fn cube(lo: f64, hi: f64) -> CoordBox {
    CoordBox::new(&["x", "y", "z"], &[(lo, hi); 3])
}

fn slab(x0: f64, x1: f64) -> CoordBox {
    CoordBox::new(&["x", "y", "z"], &[(x0, x1), (-2.0, 2.0), (-2.0, 2.0)])
}

pub fn field(c: &Coords, comps: [&str; 3]) -> VectorField {
    VectorField::new(c, comps.iter().map(|s| e(s)).collect()).unwrap()
}

pub fn one_form(c: &Coords, comps: [&str; 3]) -> Form {
    Form::from_terms(c, 1, (0..3).map(|i| (vec![i], e(comps[i]))))
}

/// Two slabs of `[-2,2]^3` with `A_12 = y dz`, `B_1 = x dy^dz`,
/// `B_2 = (x+1) dy^dz`; the broken variant has `B_2 = B_1`.
pub fn f2(broken: bool) -> DeligneCocycle {
    let cover = Cover::new(cube(-2.0, 2.0), vec![slab(-2.0, 1.0), slab(-1.0, 2.0)]).unwrap();
    let c = cover.coords().clone();
    let a = CechForm::zero(&c, 1, 2).with(vec![0, 1], Form::from_terms(&c, 1, [(vec![2], e("y"))])).unwrap();
    let b1 = Form::from_terms(&c, 2, [(vec![1, 2], e("x"))]);
    let b2 = if broken { b1.clone() } else { Form::from_terms(&c, 2, [(vec![1, 2], e("x + 1"))]) };
    let b = CechForm::zero(&c, 2, 1).with(vec![0], b1).unwrap().with(vec![1], b2).unwrap();
    DeligneCocycle::new(cover, CechForm::zero(&c, 0, 3), a, b).unwrap()
}

/// Three slabs with `phi_123 = z`, `A_23 = dz` and equal closed-free
/// curvings `B_i = x dy^dz`.
pub fn three_chart() -> DeligneCocycle {
    let cover = Cover::new(cube(-2.0, 2.0), vec![slab(-2.0, 0.5), slab(-1.0, 1.5), slab(0.0, 2.0)]).unwrap();
    let c = cover.coords().clone();
    let phi = CechForm::functions(&c, 3, [(vec![0, 1, 2], e("z"))]).unwrap();
    let a = CechForm::zero(&c, 1, 2).with(vec![1, 2], Form::dx(&c, 2)).unwrap();
    let bx = Form::from_terms(&c, 2, [(vec![1, 2], e("x"))]);
    let mut b = CechForm::zero(&c, 2, 1);
    for i in 0..3 {
        b.insert(vec![i], bx.clone()).unwrap();
    }
    DeligneCocycle::new(cover, phi, a, b).unwrap()
}

/// Two slabs with closed curvings `B_1 = B_2 = dx^dy` and `A_12 = 0`.
pub fn flat() -> DeligneCocycle {
    let cover = Cover::new(cube(-2.0, 2.0), vec![slab(-2.0, 1.0), slab(-1.0, 2.0)]).unwrap();
    let c = cover.coords().clone();
    let bx = Form::from_terms(&c, 2, [(vec![0, 1], e("1"))]);
    let b = CechForm::zero(&c, 2, 1).with(vec![0], bx.clone()).unwrap().with(vec![1], bx).unwrap();
    DeligneCocycle::new(cover, CechForm::zero(&c, 0, 3), CechForm::zero(&c, 1, 2), b).unwrap()
}

/// Single chart `[-1,1]^3` with curving `omega = x dy^dz`.
pub fn trivial_x() -> DeligneCocycle {
    let region = cube(-1.0, 1.0);
    let c = crate::cartan::coords(&["x", "y", "z"]);
    trivial_gerbe(region, &Form::from_terms(&c, 2, [(vec![1, 2], e("x"))])).unwrap()
}

/// `eta_1 = 0`, `eta_2 = y dz` with error form `x dy^dz` for [`f2`].
pub fn f2_trivialization() -> Trivialization {
    let c = f2(false).coords().clone();
    let eta = CechForm::zero(&c, 1, 1).with(vec![1], Form::from_terms(&c, 1, [(vec![2], e("y"))])).unwrap();
    Trivialization { psi: CechForm::zero(&c, 0, 2), eta, omega: Form::from_terms(&c, 2, [(vec![1, 2], e("x"))]) }
}

/// `psi_13 = z`, `eta_3 = dz` with error form `x dy^dz` for [`three_chart`].
pub fn three_chart_trivialization() -> Trivialization {
    let c = three_chart().coords().clone();
    let psi = CechForm::functions(&c, 2, [(vec![0, 2], e("z"))]).unwrap();
    let eta = CechForm::zero(&c, 1, 1).with(vec![2], Form::dx(&c, 2)).unwrap();
    Trivialization { psi, eta, omega: Form::from_terms(&c, 2, [(vec![1, 2], e("x"))]) }
}
