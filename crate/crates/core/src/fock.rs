//! Brute-force fermionic Fock space on a handful of modes, used as an
//! independent check of the quasifree formulas.
//!
//! Each oracle mode `z` carries two reference fermions `b0_z`, `d0_z`
//! (Jordan-Wigner bits `2i` and `2i + 1`). The FP ladder operators are the
//! Bogoliubov images
//!
//! ```text
//! b_z  = c b0_z + e^{i phi} s d0_z^dagger
//! d_z^dagger = -e^{-i phi} s b0_z + c d0_z^dagger
//! ```
//!
//! and the FP vacuum is found numerically as the joint kernel of all `b_z, d_z`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fpstate::FpState;
use crate::gamma::{Mat2, C64};

pub const MAX_MODES: usize = 6;

const VACUUM_SEED: u64 = 0x5eed_f0c4;

/// Sparse square operator stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            rows: (0..dim).map(|r| vec![(r, C64::new(1.0, 0.0))]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn from_unsorted(dim: usize, mut rows: Vec<Vec<(usize, C64)>>) -> Self {
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != C64::new(0.0, 0.0));
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            self.dim,
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum::<C64>()),
        )
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                rows[c].push((r, v.conj()));
            }
        }
        Self::from_unsorted(self.dim, rows)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| (c, v * s)).collect())
            .collect();
        Self::from_unsorted(self.dim, rows)
    }

    pub fn add(&self, other: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Self::from_unsorted(self.dim, rows)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .flat_map(|&(k, a)| other.rows[k].iter().map(move |&(c, b)| (c, a * b)))
                    .collect()
            })
            .collect();
        Self::from_unsorted(self.dim, rows)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|e| e.1.norm())
            .fold(0.0, f64::max)
    }
}

/// Jordan-Wigner annihilator for fermion `j` among `bits` fermions.
fn jw_annihilator(j: usize, bits: usize) -> SparseOp {
    let dim = 1usize << bits;
    let mut rows = vec![Vec::new(); dim];
    for state in 0..dim {
        if state & (1 << j) != 0 {
            let sign = if (state & ((1 << j) - 1)).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            rows[state ^ (1 << j)].push((state, C64::new(sign, 0.0)));
        }
    }
    SparseOp { dim, rows }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMode {
    pub z: usize,
    pub lambda: f64,
    pub theta: f64,
    pub phi: f64,
}

impl OracleMode {
    fn sc(&self) -> (f64, f64, C64) {
        let (s, c) = self.theta.sin_cos();
        (s, c, C64::from_polar(1.0, self.phi))
    }
}

#[derive(Debug, Clone)]
pub struct FockOracle {
    modes: Vec<OracleMode>,
    dim: usize,
    b: Vec<SparseOp>,
    d: Vec<SparseOp>,
    omega: DVector<C64>,
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    DVector::from_iterator(
        dim,
        (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    )
}

pub fn build_fock(state: &FpState, indices: &[usize]) -> Result<FockOracle> {
    if indices.len() > MAX_MODES {
        return Err(Error::TooManyModes {
            requested: indices.len(),
            max: MAX_MODES,
        });
    }
    if indices.is_empty() {
        return Err(Error::InvalidArgument(
            "oracle needs at least one mode".into(),
        ));
    }
    let mut modes = Vec::with_capacity(indices.len());
    for &z in indices {
        let m = state.mode(z).ok_or(Error::IndexOutOfRange(z as i64))?;
        if modes.iter().any(|o: &OracleMode| o.z == z) {
            return Err(Error::InvalidArgument(format!("mode {z} listed twice")));
        }
        modes.push(OracleMode {
            z,
            lambda: m.lambda,
            theta: m.theta,
            phi: m.phi,
        });
    }
    let bits = 2 * modes.len();
    let dim = 1usize << bits;
    let (mut b, mut d) = (Vec::new(), Vec::new());
    for (i, m) in modes.iter().enumerate() {
        let b0 = jw_annihilator(2 * i, bits);
        let d0 = jw_annihilator(2 * i + 1, bits);
        let (s, c, e) = m.sc();
        b.push(b0.scaled(C64::from(c)).add(&d0.adjoint().scaled(e * s)));
        // d = (d^dagger)^dagger = -e^{i phi} s b0^dagger + c d0
        d.push(b0.adjoint().scaled(-e * s).add(&d0.scaled(C64::from(c))));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(VACUUM_SEED);
    let project = |v: DVector<C64>| b.iter().chain(&d).fold(v, |acc, op| op.apply(&acc));
    let omega = project(random_vector(dim, &mut rng));
    let norm = omega.norm();
    if !(norm > 1e-8) {
        return Err(Error::InvalidArgument(
            "vacuum projection vanished on the seed vector".into(),
        ));
    }
    Ok(FockOracle {
        modes,
        dim,
        b,
        d,
        omega: omega / C64::from(norm),
    })
}

/// Coefficients of a smearing against `(kappa^+_z, kappa^-_z)` for each oracle mode.
pub type Smearing = Vec<[C64; 2]>;

impl FockOracle {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[OracleMode] {
        &self.modes
    }

    pub fn vacuum(&self) -> &DVector<C64> {
        &self.omega
    }

    pub fn b(&self, i: usize) -> &SparseOp {
        &self.b[i]
    }

    pub fn d(&self, i: usize) -> &SparseOp {
        &self.d[i]
    }

    /// Largest deviation from the canonical anticommutation relations among
    /// all `b_i, d_i` and their adjoints.
    pub fn car_residual(&self) -> f64 {
        let ops: Vec<&SparseOp> = self.b.iter().chain(&self.d).collect();
        let adj: Vec<SparseOp> = ops.iter().map(|o| o.adjoint()).collect();
        let id = SparseOp::identity(self.dim);
        let mut worst = 0.0f64;
        for (i, x) in ops.iter().enumerate() {
            for (j, y) in ops.iter().enumerate() {
                let mixed = x.anticommutator(&adj[j]);
                let mixed = if i == j {
                    mixed.add(&id.scaled(C64::from(-1.0)))
                } else {
                    mixed
                };
                worst = worst
                    .max(mixed.max_abs())
                    .max(x.anticommutator(y).max_abs());
            }
        }
        worst
    }

    /// `max ||b_i Omega||, ||d_i Omega||`.
    pub fn annihilation_residual(&self) -> f64 {
        self.b
            .iter()
            .chain(&self.d)
            .map(|op| op.apply(&self.omega).norm())
            .fold(0.0, f64::max)
    }

    /// Projects fresh random vectors onto the joint kernel and reports how far
    /// each lands from the ray of `Omega`; zero when the kernel is one-dimensional.
    pub fn vacuum_uniqueness_residual(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let v = self
                    .b
                    .iter()
                    .chain(&self.d)
                    .fold(random_vector(self.dim, &mut rng), |acc, op| op.apply(&acc));
                let n = v.norm();
                if n == 0.0 {
                    return 0.0;
                }
                let v = v / C64::from(n);
                (v.clone() - self.omega.clone() * self.omega.dotc(&v)).norm()
            })
            .fold(0.0, f64::max)
    }

    fn check_smearing(&self, v: &Smearing) -> Result<()> {
        if v.len() != self.modes.len() {
            return Err(Error::ModeMismatch(format!(
                "smearing has {} modes, oracle has {}",
                v.len(),
                self.modes.len()
            )));
        }
        Ok(())
    }

    /// `Psi[v] = sum (v^+_f b + v^-_f d^dagger)`, coefficients rotated from the
    /// reference pair `(kappa^+_z, kappa^-_z)`.
    pub fn psi(&self, v: &Smearing) -> Result<SparseOp> {
        self.check_smearing(v)?;
        let mut out = SparseOp::zero(self.dim);
        for (i, (m, vz)) in self.modes.iter().zip(v).enumerate() {
            let (s, c, e) = m.sc();
            let plus = vz[0] * c + e.conj() * s * vz[1];
            let minus = vz[1] * c - e * s * vz[0];
            out = out
                .add(&self.b[i].scaled(plus))
                .add(&self.d[i].adjoint().scaled(minus));
        }
        Ok(out)
    }

    /// `Psi^dagger[u] = sum (u^+_f b^dagger + u^-_f d)`.
    pub fn psi_dagger(&self, u: &Smearing) -> Result<SparseOp> {
        self.check_smearing(u)?;
        let mut out = SparseOp::zero(self.dim);
        for (i, (m, uz)) in self.modes.iter().zip(u).enumerate() {
            let (s, c, e) = m.sc();
            let plus = uz[0] * c + e * s * uz[1];
            let minus = uz[1] * c - e.conj() * s * uz[0];
            out = out
                .add(&self.b[i].adjoint().scaled(plus))
                .add(&self.d[i].scaled(minus));
        }
        Ok(out)
    }

    fn expectation(&self, op: &SparseOp) -> C64 {
        self.omega.dotc(&op.apply(&self.omega))
    }

    fn rotated(&self, alpha: f64) -> FockOracle {
        let g = C64::from_polar(1.0, alpha);
        let mut out = self.clone();
        out.b = self.b.iter().map(|o| o.scaled(g)).collect();
        out.d = self.d.iter().map(|o| o.scaled(g.conj())).collect();
        out
    }

    /// Charge `sum (b^dagger b - d^dagger d)`, the generator of gauge rotations.
    pub fn charge(&self) -> SparseOp {
        self.b
            .iter()
            .zip(&self.d)
            .fold(SparseOp::zero(self.dim), |acc, (b, d)| {
                acc.add(&b.adjoint().mul(b))
                    .add(&d.adjoint().mul(d).scaled(C64::from(-1.0)))
            })
    }
}

fn oracle_blocks(oracle: &FockOracle, state: &FpState) -> Result<Vec<Mat2>> {
    oracle
        .modes
        .iter()
        .map(|m| {
            let block = state.block(m.z).ok_or(Error::IndexOutOfRange(m.z as i64))?;
            let mode = state.mode(m.z).ok_or(Error::IndexOutOfRange(m.z as i64))?;
            if mode.theta != m.theta || mode.phi != m.phi || mode.lambda != m.lambda {
                return Err(Error::ModeMismatch(format!(
                    "mode {} differs between oracle and state",
                    m.z
                )));
            }
            Ok(block.q)
        })
        .collect()
}

fn bilinear(x: &Smearing, m: &[Mat2], y: &Smearing) -> C64 {
    x.iter()
        .zip(m)
        .zip(y)
        .map(|((a, q), b)| {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    s += a[i] * q[(i, j)] * b[j];
                }
            }
            s
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointReport {
    /// `|<Psi[v] Psi^dagger[u]> - v^T Q u|`, maximised over the smearings.
    pub spinor_deviation: f64,
    /// `|<Psi^dagger[u] Psi[v]> - u^T (1 - conj Q) v|`.
    pub cospinor_deviation: f64,
    /// `||{Psi[v], Psi^dagger[u]} - (v^T u) 1||`.
    pub car_deviation: f64,
    pub pairs: usize,
}

impl TwoPointReport {
    pub fn max_deviation(&self) -> f64 {
        self.spinor_deviation
            .max(self.cospinor_deviation)
            .max(self.car_deviation)
    }
}

/// Compares oracle matrix elements with the block formulas on every pair of
/// smearings `(v, u)`.
pub fn two_point_check(
    oracle: &FockOracle,
    state: &FpState,
    smearings: &[Smearing],
) -> Result<TwoPointReport> {
    let q = oracle_blocks(oracle, state)?;
    let cosp: Vec<Mat2> = q
        .iter()
        .map(|m| Mat2::identity() - m.map(|v| v.conj()))
        .collect();
    let id = SparseOp::identity(oracle.dim);
    let psis = smearings
        .iter()
        .map(|v| oracle.psi(v))
        .collect::<Result<Vec<_>>>()?;
    let psids = smearings
        .iter()
        .map(|u| oracle.psi_dagger(u))
        .collect::<Result<Vec<_>>>()?;
    let mut report = TwoPointReport {
        spinor_deviation: 0.0,
        cospinor_deviation: 0.0,
        car_deviation: 0.0,
        pairs: 0,
    };
    let ident: Vec<Mat2> = vec![Mat2::identity(); oracle.n_modes()];
    for (v, psi) in smearings.iter().zip(&psis) {
        for (u, psid) in smearings.iter().zip(&psids) {
            let sp = oracle.expectation(&psi.mul(psid));
            let co = oracle.expectation(&psid.mul(psi));
            report.spinor_deviation = report
                .spinor_deviation
                .max((sp - bilinear(v, &q, u)).norm());
            report.cospinor_deviation = report
                .cospinor_deviation
                .max((co - bilinear(u, &cosp, v)).norm());
            let pairing = bilinear(v, &ident, u);
            let anti = psi.anticommutator(psid).add(&id.scaled(-pairing));
            report.car_deviation = report.car_deviation.max(anti.max_abs());
            report.pairs += 1;
        }
    }
    Ok(report)
}

/// The `2n` unit smearings `kappa^+_z`, `kappa^-_z`.
pub fn basis_smearings(n: usize) -> Vec<Smearing> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for k in 0..2 {
            let mut v = vec![[zero, zero]; n];
            v[i][k] = one;
            out.push(v);
        }
    }
    out
}

pub fn random_smearings(n: usize, count: usize, seed: u64) -> Vec<Smearing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    (0..count)
        .map(|_| (0..n).map(|_| [draw(), draw()]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityReport {
    pub idempotency: f64,
    pub hermiticity: f64,
    pub doubling: f64,
    /// Largest change of any two-point value under the sampled gauge rotations.
    pub gauge_deviation: f64,
    /// `||charge Omega||`; zero means `Omega` is gauge invariant.
    pub vacuum_charge: f64,
    pub density_trace: f64,
    pub density_purity: f64,
}

pub fn purity_gauge_check(
    oracle: &FockOracle,
    state: &FpState,
    alphas: &[f64],
) -> Result<PurityReport> {
    let mut report = PurityReport {
        idempotency: 0.0,
        hermiticity: 0.0,
        doubling: 0.0,
        gauge_deviation: 0.0,
        vacuum_charge: oracle.charge().apply(&oracle.omega).norm(),
        density_trace: 0.0,
        density_purity: 0.0,
    };
    oracle_blocks(oracle, state)?;
    for m in &oracle.modes {
        let block = state.block(m.z).ok_or(Error::IndexOutOfRange(m.z as i64))?;
        report.idempotency = report.idempotency.max(block.idempotency_residual());
        report.hermiticity = report.hermiticity.max(block.hermiticity_residual());
        report.doubling = report.doubling.max(block.doubling_residual());
    }
    // rho = |Omega><Omega|: tr rho = |Omega|^2, tr rho^2 = |Omega|^4
    let n2 = oracle.omega.norm_squared();
    report.density_trace = n2;
    report.density_purity = n2 * n2;

    let smearings = basis_smearings(oracle.n_modes());
    let values = |o: &FockOracle| -> Result<Vec<C64>> {
        let mut out = Vec::new();
        for v in &smearings {
            let psi = o.psi(v)?;
            for u in &smearings {
                let psid = o.psi_dagger(u)?;
                out.push(o.expectation(&psi.mul(&psid)));
                out.push(o.expectation(&psid.mul(&psi)));
            }
        }
        Ok(out)
    };
    let base = values(oracle)?;
    for &alpha in alphas {
        let rotated = values(&oracle.rotated(alpha))?;
        for (a, b) in base.iter().zip(&rotated) {
            report.gauge_deviation = report.gauge_deviation.max((a - b).norm());
        }
    }
    Ok(report)
}

/// `|| :rho^{(p)}: Omega ||^2` with `h^(0) = 1`.
pub fn energy_fluctuation_oracle(oracle: &FockOracle, p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "fluctuation order p must be >= 1".into(),
        ));
    }
    let n = (2 * p - 1) as i32;
    let sign = if p.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut density = SparseOp::zero(oracle.dim);
    for (i, m) in oracle.modes.iter().enumerate() {
        let (s, c, e) = m.sc();
        let bd = &oracle.b[i];
        let dd = oracle.d[i].adjoint();
        // components along chi_z (e^{-i lambda t}) and chi_{-z} (e^{i lambda t})
        let cp = bd.scaled(C64::from(c)).add(&dd.scaled(-e * s));
        let cm = bd.scaled(e.conj() * s).add(&dd.scaled(C64::from(c)));
        let w = C64::from(sign * m.lambda.powi(n));
        density = density
            .add(&cp.adjoint().mul(&cp).scaled(w))
            .add(&cm.adjoint().mul(&cm).scaled(-w));
    }
    let applied = density.apply(&oracle.omega);
    let mean = oracle.omega.dotc(&applied);
    let normal_ordered = applied - oracle.omega.clone() * mean;
    Ok(normal_ordered.norm_squared())
}

/// `sum lambda^{4p-2} sin^2 2 theta` over the oracle's modes.
pub fn expected_fluctuation(oracle: &FockOracle, p: u32) -> f64 {
    let exponent = 4 * p as i32 - 2;
    oracle
        .modes
        .iter()
        .map(|m| {
            let s = (2.0 * m.theta).sin();
            m.lambda.powi(exponent) * s * s
        })
        .sum()
}
