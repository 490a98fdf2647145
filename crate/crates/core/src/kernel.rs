//! Per-mode terms `sigma_z` of the difference kernel between an FP state and
//! the reference state, evaluated on spacetime point pairs.
//!
//! With `M(t, x) = [kappa^+_z, kappa^-_z]` (a 4x2 matrix of mode functions,
//! `kappa^+_z = e^{-i lambda t} chi_z`, `kappa^-_z = e^{i lambda t} chi_{-z}`),
//! every term is `sigma_z(p, q) = gamma0 M(p) (Q_{f,z} - Q_z) M(q)^H gamma0`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fpstate::{FpState, ProjectorBlock};
use crate::gamma::{gamma0, Mat2, Mat4, C64};
use crate::spectrum::{EigenspinorBasis, Spinor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: [f64; 3],
}

impl SpacetimePoint {
    pub fn new(t: f64, x: [f64; 3]) -> Self {
        Self { t, x }
    }

    pub fn shifted(&self, tau: f64) -> Self {
        Self {
            t: self.t + tau,
            x: self.x,
        }
    }
}

type ModeMatrix = nalgebra::Matrix4x2<C64>;

fn check_point(state: &FpState, p: &SpacetimePoint) -> Result<()> {
    let slab = state.slab();
    if !slab.contains(p.t) {
        return Err(Error::PointOutsideSlab {
            t: p.t,
            a: slab.a,
            b: slab.b,
        });
    }
    Ok(())
}

fn check_mode(state: &FpState, basis: &EigenspinorBasis, z: usize) -> Result<()> {
    if z == 0 || z > state.mode_count() || z > basis.len() {
        return Err(Error::IndexOutOfRange(z as i64));
    }
    let (ls, lb) = (
        state.modes()[z - 1].lambda,
        basis.get(z as i64).map(|e| e.eigenvalue),
    );
    if lb != Some(ls) {
        return Err(Error::SpectrumMismatch(format!(
            "mode {z}: state eigenvalue {ls}, basis eigenvalue {lb:?}"
        )));
    }
    Ok(())
}

fn mode_matrix(
    basis: &EigenspinorBasis,
    z: usize,
    lambda: f64,
    p: &SpacetimePoint,
) -> Result<ModeMatrix> {
    let zi = z as i64;
    let plus: Spinor = basis.eval(zi, p.x)? * C64::from_polar(1.0, -lambda * p.t);
    let minus: Spinor = basis.eval(-zi, p.x)? * C64::from_polar(1.0, lambda * p.t);
    Ok(ModeMatrix::from_columns(&[plus, minus]))
}

fn sigma_from_block(
    basis: &EigenspinorBasis,
    z: usize,
    lambda: f64,
    diff: &Mat2,
    p: &SpacetimePoint,
    q: &SpacetimePoint,
) -> Result<Mat4> {
    let mp = mode_matrix(basis, z, lambda, p)?;
    let mq = mode_matrix(basis, z, lambda, q)?;
    let g0 = gamma0();
    Ok(g0 * mp * diff * mq.adjoint() * g0)
}

fn block_difference(state: &FpState, z: usize) -> Mat2 {
    let block = &state.blocks()[z - 1];
    block.q - ProjectorBlock::reference(z).q
}

/// `sigma_z(p, q)` as a 4x4 matrix.
pub fn sigma_term(
    state: &FpState,
    basis: &EigenspinorBasis,
    z: usize,
    p: &SpacetimePoint,
    q: &SpacetimePoint,
) -> Result<Mat4> {
    check_mode(state, basis, z)?;
    check_point(state, p)?;
    check_point(state, q)?;
    let lambda = state.modes()[z - 1].lambda;
    sigma_from_block(basis, z, lambda, &block_difference(state, z), p, q)
}

/// `||sigma_z||^2` in `L^2((slab x Sigma)^2)`: `2 (b - a)^2 sin^2 theta_z`.
///
/// `|sigma_z(p, q)|_F^2` equals `2 sin^2 theta / V^2` at every point pair, and
/// each factor `slab x Sigma` contributes `(b - a) V`.
pub fn sigma_l2_norm_sq(state: &FpState, z: usize) -> Result<f64> {
    let mode = state.mode(z).ok_or(Error::IndexOutOfRange(z as i64))?;
    let d = state.slab().duration();
    Ok(2.0 * d * d * mode.sin_sq_theta())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `||sigma_z||^2` from `samples` point pairs drawn
/// uniformly from the product of midpoint grids with `grid` nodes per axis.
pub fn sigma_norm_grid(
    state: &FpState,
    basis: &EigenspinorBasis,
    z: usize,
    grid: usize,
    samples: usize,
    seed: u64,
) -> Result<GridEstimate> {
    check_mode(state, basis, z)?;
    if grid == 0 || samples < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least one node per axis and two samples".into(),
        ));
    }
    let slab = state.slab();
    let lengths = basis.params().lengths;
    let cell = (slab.duration() * basis.params().volume()).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node =
        |lo: f64, width: f64| lo + width * (rng.random_range(0..grid) as f64 + 0.5) / grid as f64;
    let lambda = state.modes()[z - 1].lambda;
    let diff = block_difference(state, z);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let mut point = || {
            let t = node(slab.a, slab.duration());
            let x = [0, 1, 2].map(|i| node(0.0, lengths[i]));
            SpacetimePoint::new(t, x)
        };
        let (p, q) = (point(), point());
        let v = sigma_from_block(basis, z, lambda, &diff, &p, &q)?.norm_squared() * cell;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(GridEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// `int_a^b e^{i w t} dt`.
fn time_integral(w: f64, a: f64, b: f64) -> C64 {
    if w.abs() * (b - a) < 1e-8 {
        return C64::new(b - a, 0.0) * C64::from_polar(1.0, 0.5 * w * (a + b));
    }
    (C64::from_polar(1.0, w * b) - C64::from_polar(1.0, w * a)) / C64::new(0.0, w)
}

/// `(1/n) sum_j e^{2 pi i dk j / n}` on `n` equispaced nodes.
fn axis_average(dk: i64, n: usize) -> C64 {
    (0..n)
        .map(|j| C64::from_polar(1.0, TAU * dk as f64 * j as f64 / n as f64))
        .sum::<C64>()
        / n as f64
}

/// `L^2((slab x Sigma)^2)` inner product `<sigma_w, sigma_z>`.
///
/// The integrand separates into `tr(D_w^H G D_z G^H)` with
/// `G = int M_w^H M_z`. Time integrals are exact; spatial integrals are full
/// sums over a `grid^3` equispaced grid, exact once `grid` exceeds the largest
/// lattice-momentum difference.
pub fn sigma_inner_product(
    state: &FpState,
    basis: &EigenspinorBasis,
    w: usize,
    z: usize,
    grid: usize,
) -> Result<C64> {
    check_mode(state, basis, w)?;
    check_mode(state, basis, z)?;
    if grid == 0 {
        return Err(Error::InvalidArgument(
            "grid needs at least one node".into(),
        ));
    }
    let slab = state.slab();
    let (ew_p, ez_p) = (basis.get(w as i64).unwrap(), basis.get(z as i64).unwrap());
    let (ew_m, ez_m) = (
        basis.get(-(w as i64)).unwrap(),
        basis.get(-(z as i64)).unwrap(),
    );
    let spatial: C64 = (0..3)
        .map(|i| axis_average(ez_p.k[i] - ew_p.k[i], grid))
        .product();
    let (lw, lz) = (ew_p.eigenvalue, ez_p.eigenvalue);
    let signs = [1.0, -1.0];
    let amps_w = [ew_p.amplitude, ew_m.amplitude];
    let amps_z = [ez_p.amplitude, ez_m.amplitude];
    let mut g = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let t = time_integral(signs[i] * lw - signs[j] * lz, slab.a, slab.b);
            // spatial sum carries 1/V from each normalised plane wave times V
            g[(i, j)] = amps_w[i].dotc(&amps_z[j]) * spatial * t;
        }
    }
    let dw = block_difference(state, w);
    let dz = block_difference(state, z);
    Ok((dw.adjoint() * g * dz * g.adjoint()).trace())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceKernel {
    pub n: usize,
    pub values: Vec<Mat4>,
    /// `sum_{N < z <= cutoff} ||sigma_z||^2`.
    pub tail_bound: f64,
}

/// Truncated sums `sum_{z <= n} sigma_z(p, q)` at each point pair.
pub fn difference_kernel(
    state: &FpState,
    basis: &EigenspinorBasis,
    pairs: &[(SpacetimePoint, SpacetimePoint)],
    n: usize,
) -> Result<DifferenceKernel> {
    if n > state.mode_count() || n > basis.len() {
        return Err(Error::IndexOutOfRange(n as i64));
    }
    for z in 1..=n {
        check_mode(state, basis, z)?;
    }
    let values = pairs
        .iter()
        .map(|(p, q)| {
            check_point(state, p)?;
            check_point(state, q)?;
            (1..=n).try_fold(Mat4::zeros(), |acc, z| {
                let lambda = state.modes()[z - 1].lambda;
                let diff = block_difference(state, z);
                if diff == Mat2::zeros() {
                    return Ok(acc);
                }
                Ok(acc + sigma_from_block(basis, z, lambda, &diff, p, q)?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = state.slab().duration();
    let tail_bound = state.modes()[n..]
        .iter()
        .map(|m| 2.0 * d * d * m.sin_sq_theta())
        .sum();
    Ok(DifferenceKernel {
        n,
        values,
        tail_bound,
    })
}

/// Parses lines `t x1 x2 x3 t' x1' x2' x3'`; blank lines and `#` comments are skipped.
pub fn parse_point_pairs(text: &str) -> Result<Vec<(SpacetimePoint, SpacetimePoint)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if v.len() != 8 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 8 numbers, found {}", v.len()),
            });
        }
        out.push((
            SpacetimePoint::new(v[0], [v[1], v[2], v[3]]),
            SpacetimePoint::new(v[4], [v[5], v[6], v[7]]),
        ));
    }
    Ok(out)
}

/// Column names `re_00, im_00, re_01, ...` in row-major order.
pub fn matrix_columns() -> Vec<String> {
    let mut cols = Vec::with_capacity(32);
    for r in 0..4 {
        for c in 0..4 {
            cols.push(format!("re_{r}{c}"));
            cols.push(format!("im_{r}{c}"));
        }
    }
    cols
}

/// The 32 real numbers matching [`matrix_columns`].
pub fn flatten_matrix(m: &Mat4) -> Vec<f64> {
    let mut out = Vec::with_capacity(32);
    for r in 0..4 {
        for c in 0..4 {
            out.push(m[(r, c)].re);
            out.push(m[(r, c)].im);
        }
    }
    out
}
