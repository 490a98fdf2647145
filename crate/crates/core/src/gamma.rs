//! Dirac matrices in the standard (Dirac) representation.
//!
//! `gamma0 = diag(1, 1, -1, -1)`, `gamma^i = [[0, sigma_i], [-sigma_i, 0]]`,
//! `gamma5 = i gamma0 gamma1 gamma2 gamma3 = [[0, 1], [1, 0]]`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn pauli(i: usize) -> Mat2 {
    match i {
        0 => Mat2::new(ZERO, ONE, ONE, ZERO),
        1 => Mat2::new(ZERO, -I, I, ZERO),
        2 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {i} out of range"),
    }
}

fn blocks(tl: Mat2, tr: Mat2, bl: Mat2, br: Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&tl);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&tr);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&bl);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&br);
    m
}

pub fn gamma0() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, -ONE, -ONE))
}

/// Spatial gamma matrix `gamma^{i+1}` for `i` in `0..3`.
pub fn gamma_spatial(i: usize) -> Mat4 {
    let s = pauli(i);
    blocks(Mat2::zeros(), s, -s, Mat2::zeros())
}

pub fn gamma5() -> Mat4 {
    blocks(
        Mat2::zeros(),
        Mat2::identity(),
        Mat2::identity(),
        Mat2::zeros(),
    )
}

/// Fourier symbol of the spatial Dirac operator on a flat torus,
/// `gamma0 gamma^i k_i + m gamma0`, for a physical momentum `k`.
pub fn dirac_symbol(k: [f64; 3], mass: f64) -> Mat4 {
    let g0 = gamma0();
    let mut h = g0 * C64::from(mass);
    for (i, ki) in k.iter().enumerate() {
        h += g0 * gamma_spatial(i) * C64::from(*ki);
    }
    h
}

/// `sigma . k` as a 2x2 matrix.
pub(crate) fn sigma_dot(k: [f64; 3]) -> Mat2 {
    (0..3).fold(Mat2::zeros(), |acc, i| acc + pauli(i) * C64::from(k[i]))
}
