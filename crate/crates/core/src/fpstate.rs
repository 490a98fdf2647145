//! Per-mode blocks of the operator `A_f`, their spectral projections, and the
//! fermionic-projector (FP) states assembled from them.
//!
//! For each positive index `z` the two-dimensional space spanned by the
//! reference modes `kappa^+_z, kappa^-_z` carries
//!
//! ```text
//! A_{f,z} = [[ f^(0) m/l,                 f^(2l) sqrt(1 - m^2/l^2) ],
//!            [ conj(f^(2l)) sqrt(1-m^2/l^2), -f^(0) m/l             ]]
//!         = Xi [[cos 2t, e^{i phi} sin 2t], [e^{-i phi} sin 2t, -cos 2t]]
//! ```
//!
//! and the FP projector block is the projection onto the `+Xi` eigenvector.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::ComplexFloat;

use crate::error::{Error, Result};
use crate::gamma::{Mat2, C64};
use crate::softening::{SlabConfig, SofteningFunction};
use crate::spectrum::{synthetic_spectrum, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub z: usize,
    pub lambda: f64,
    pub xi: f64,
    pub theta: f64,
    pub phi: f64,
    pub raw: Mat2,
}

impl ModeBlock {
    /// Builds the block from `f^(0)` and `f^(2 lambda)`.
    pub fn from_transform(
        z: usize,
        lambda: f64,
        mass: f64,
        fhat0: f64,
        fhat2: C64,
    ) -> Result<Self> {
        if !(lambda >= mass) {
            return Err(Error::BelowMassGap { lambda, mass });
        }
        let ratio = mass / lambda;
        let diag = fhat0 * ratio;
        let off = fhat2 * (1.0 - ratio * ratio).max(0.0).sqrt();
        let off_abs = off.norm();
        let xi = off_abs.hypot(diag);
        if !(xi > 0.0) {
            return Err(Error::InvalidSoftening(format!(
                "mode {z}: A_f block vanishes (f^(0) = {fhat0})"
            )));
        }
        let theta = 0.5 * off_abs.atan2(diag);
        let phi = if off_abs > 0.0 {
            off.arg().rem_euclid(std::f64::consts::TAU)
        } else {
            0.0
        };
        let raw = Mat2::new(C64::from(diag), off, off.conj(), C64::from(-diag));
        Ok(Self {
            z,
            lambda,
            xi,
            theta,
            phi,
            raw,
        })
    }

    pub fn sin_theta(&self) -> f64 {
        self.theta.sin()
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin_sq_theta(&self) -> f64 {
        let s = self.theta.sin();
        s * s
    }

    pub fn sin_sq_2theta(&self) -> f64 {
        let s = (2.0 * self.theta).sin();
        s * s
    }

    /// `|sin theta|` from the raw entries via `sqrt((1 - f^(0) m/(lambda Xi))/2)`,
    /// rewritten as `|a_12|^2 / (2 Xi (Xi + a_11))` to avoid cancellation.
    pub fn mu_from_entries(&self) -> f64 {
        let diag = self.raw[(0, 0)].re;
        let off = self.raw[(0, 1)].norm();
        if off == 0.0 {
            return if diag > 0.0 { 0.0 } else { 1.0 };
        }
        (off * off / (2.0 * self.xi * (self.xi + diag))).sqrt()
    }

    /// Eigenvectors `(kappa^+_f, kappa^-_f)` in the basis `(kappa^+_z, kappa^-_z)`
    /// for the eigenvalues `+Xi` and `-Xi`.
    pub fn eigenvectors(&self) -> (ModeVector, ModeVector) {
        let (s, c) = self.theta.sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        let plus = ModeVector {
            z: self.z,
            alpha: C64::from(c),
            beta: e.conj() * s,
        };
        let minus = ModeVector {
            z: self.z,
            alpha: -e * s,
            beta: C64::from(c),
        };
        (plus, minus)
    }
}

pub fn mode_block(f: &SofteningFunction, lambda: f64, mass: f64) -> Result<ModeBlock> {
    mode_block_indexed(f, 0, lambda, mass)
}

fn mode_block_indexed(
    f: &SofteningFunction,
    z: usize,
    lambda: f64,
    mass: f64,
) -> Result<ModeBlock> {
    if !(lambda >= mass) {
        return Err(Error::BelowMassGap { lambda, mass });
    }
    let fhat2 = f.fourier_at(2.0 * lambda)?;
    ModeBlock::from_transform(z, lambda, mass, f.fhat0(), fhat2)
}

/// `alpha kappa^+_z + beta kappa^-_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVector {
    pub z: usize,
    pub alpha: C64,
    pub beta: C64,
}

impl ModeVector {
    pub fn as_array(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }

    pub fn norm(&self) -> f64 {
        self.alpha.norm().hypot(self.beta.norm())
    }

    pub fn inner(&self, other: &ModeVector) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }
}

pub fn diagonalize_block(block: &ModeBlock) -> (ModeVector, ModeVector) {
    block.eigenvectors()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorBlock {
    pub z: usize,
    pub q: Mat2,
}

impl ProjectorBlock {
    pub fn from_angles(z: usize, theta: f64, phi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, phi);
        let q = Mat2::new(
            C64::from(c * c),
            e * (s * c),
            e.conj() * (s * c),
            C64::from(s * s),
        );
        Self { z, q }
    }

    pub fn reference(z: usize) -> Self {
        Self::from_angles(z, 0.0, 0.0)
    }

    pub fn trace(&self) -> C64 {
        self.q.trace()
    }

    pub fn idempotency_residual(&self) -> f64 {
        (self.q * self.q - self.q).norm()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (self.q - self.q.adjoint()).norm()
    }

    /// Cospinor block `1 - dagger Q dagger`, written in the basis
    /// `(kappa^{+ dagger}_z, kappa^{- dagger}_z)` where the antilinear dagger
    /// map acts as complex conjugation.
    pub fn cospinor_block(&self) -> Mat2 {
        Mat2::identity() - self.q.map(|v| v.conj())
    }

    /// `|| Q + dagger Q_cosp dagger - 1 ||`, the block form of `P + dagger P dagger = 1`.
    pub fn doubling_residual(&self) -> f64 {
        let cosp = self.cospinor_block();
        (self.q + cosp.map(|v| v.conj()) - Mat2::identity()).norm()
    }
}

pub fn fp_projector_block(block: &ModeBlock) -> ProjectorBlock {
    ProjectorBlock::from_angles(block.z, block.theta, block.phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    FermionicProjector,
    Reference,
    Ceiling,
    /// Restored from a dump; the softening function is not available.
    Restored,
}

impl StateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateKind::FermionicProjector => "fp",
            StateKind::Reference => "reference",
            StateKind::Ceiling => "ceiling",
            StateKind::Restored => "restored",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Accept `f <= 0` (the anti-Hadamard experiment). Off by default.
    pub allow_signed: bool,
}

#[derive(Debug, Clone)]
pub struct FpState {
    spectrum: Arc<Spectrum>,
    slab: SlabConfig,
    softening: Option<Arc<SofteningFunction>>,
    kind: StateKind,
    cutoff: f64,
    anti_hadamard: bool,
    modes: Vec<ModeBlock>,
    blocks: Vec<ProjectorBlock>,
}

impl FpState {
    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn slab(&self) -> SlabConfig {
        self.slab
    }

    pub fn softening(&self) -> Option<&SofteningFunction> {
        self.softening.as_deref()
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn mass(&self) -> f64 {
        self.spectrum.mass()
    }

    /// Whether the state was built from a nonpositive `f` (or is the ceiling
    /// state), so that its natural reference is the ceiling state.
    pub fn is_anti_hadamard(&self) -> bool {
        self.anti_hadamard
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeBlock] {
        &self.modes
    }

    pub fn blocks(&self) -> &[ProjectorBlock] {
        &self.blocks
    }

    /// Mode data for positive index `z` (1-based).
    pub fn mode(&self, z: usize) -> Option<&ModeBlock> {
        z.checked_sub(1).and_then(|i| self.modes.get(i))
    }

    pub fn block(&self, z: usize) -> Option<&ProjectorBlock> {
        z.checked_sub(1).and_then(|i| self.blocks.get(i))
    }

    /// Squared deviation of each block from the natural reference: `sin^2 theta`
    /// against the reference state, `cos^2 theta` against the ceiling state.
    pub fn deviation_sq(&self, z: usize) -> Option<f64> {
        let m = self.mode(z)?;
        Some(if self.anti_hadamard {
            let c = m.theta.cos();
            c * c
        } else {
            m.sin_sq_theta()
        })
    }

    fn assemble(
        spectrum: Arc<Spectrum>,
        slab: SlabConfig,
        softening: Option<Arc<SofteningFunction>>,
        kind: StateKind,
        cutoff: f64,
        anti_hadamard: bool,
        modes: Vec<ModeBlock>,
    ) -> Self {
        let blocks = modes.iter().map(fp_projector_block).collect();
        Self {
            spectrum,
            slab,
            softening,
            kind,
            cutoff,
            anti_hadamard,
            modes,
            blocks,
        }
    }

    /// Text dump: `#` header lines, then `z lambda xi theta phi` per mode.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind={}", self.kind.as_str());
        let _ = writeln!(out, "# mass={}", self.mass());
        let _ = writeln!(out, "# slab={},{}", self.slab.a, self.slab.b);
        let soft = self
            .softening
            .as_ref()
            .map_or_else(|| "none".to_string(), |f| f.descriptor());
        let _ = writeln!(out, "# softening={soft}");
        let _ = writeln!(out, "# cutoff={}", self.cutoff);
        let _ = writeln!(out, "# anti_hadamard={}", self.anti_hadamard);
        let _ = writeln!(out, "# modes={}", self.modes.len());
        for m in &self.modes {
            let _ = writeln!(
                out,
                "{} {:.17e} {:.17e} {:.17e} {:.17e}",
                m.z, m.lambda, m.xi, m.theta, m.phi
            );
        }
        out
    }

    /// Rebuilds a state from [`FpState::to_dump`] output. Raw `A_f` entries are
    /// reconstructed from `(xi, theta, phi)`; the softening function is dropped.
    pub fn from_dump(text: &str) -> Result<FpState> {
        let mut mass = None;
        let mut slab = None;
        let mut cutoff = None;
        let mut anti = false;
        let mut modes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let Some((key, value)) = h.trim().split_once('=') else {
                    continue;
                };
                let num = |v: &str| v.trim().parse::<f64>().map_err(|e| perr(e.to_string()));
                match key.trim() {
                    "mass" => mass = Some(num(value)?),
                    "cutoff" => cutoff = Some(num(value)?),
                    "anti_hadamard" => anti = value.trim() == "true",
                    "slab" => {
                        let (a, b) = value
                            .split_once(',')
                            .ok_or_else(|| perr("slab must be `a,b`".into()))?;
                        slab = Some(SlabConfig::new(num(a)?, num(b)?)?);
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| perr(e.to_string())))
                .collect::<Result<_>>()?;
            if fields.len() != 5 {
                return Err(perr("expected `z lambda xi theta phi`".into()));
            }
            let z = fields[0] as usize;
            if z != modes.len() + 1 {
                return Err(perr(format!(
                    "expected mode {}, found {z}",
                    modes.len() + 1
                )));
            }
            let (lambda, xi, theta, phi) = (fields[1], fields[2], fields[3], fields[4]);
            let (s2, c2) = (2.0 * theta).sin_cos();
            let e = C64::from_polar(1.0, phi);
            let raw = Mat2::new(
                C64::from(xi * c2),
                e * (xi * s2),
                e.conj() * (xi * s2),
                C64::from(-xi * c2),
            );
            modes.push(ModeBlock {
                z,
                lambda,
                xi,
                theta,
                phi,
                raw,
            });
        }
        let mass = mass.ok_or(Error::Parse {
            line: 1,
            message: "missing `# mass=` header".into(),
        })?;
        let slab = slab.ok_or(Error::Parse {
            line: 1,
            message: "missing `# slab=` header".into(),
        })?;
        let lambdas: Vec<f64> = modes.iter().map(|m| m.lambda).collect();
        let spectrum = synthetic_spectrum(mass, &lambdas)?;
        let cutoff = cutoff.unwrap_or_else(|| lambdas.last().copied().unwrap_or(mass));
        Ok(FpState::assemble(
            Arc::new(spectrum),
            slab,
            None,
            StateKind::Restored,
            cutoff,
            anti,
            modes,
        ))
    }
}

fn modes_within(spectrum: &Spectrum, cutoff: f64) -> Result<&[f64]> {
    let lams = spectrum.positive_branch();
    let n = lams.partition_point(|&l| l <= cutoff);
    if n == 0 {
        return Err(Error::EmptySpectrum {
            cutoff,
            mass: spectrum.mass(),
        });
    }
    Ok(&lams[..n])
}

pub fn build_fp_state(
    spectrum: Arc<Spectrum>,
    slab: SlabConfig,
    f: Arc<SofteningFunction>,
    cutoff: f64,
) -> Result<FpState> {
    build_fp_state_with(spectrum, slab, f, cutoff, BuildOptions::default())
}

pub fn build_fp_state_with(
    spectrum: Arc<Spectrum>,
    slab: SlabConfig,
    f: Arc<SofteningFunction>,
    cutoff: f64,
    options: BuildOptions,
) -> Result<FpState> {
    let fhat0 = f.fhat0();
    if fhat0 == 0.0 || !fhat0.is_finite() {
        return Err(Error::InvalidSoftening(format!(
            "f^(0) must be nonzero, got {fhat0}"
        )));
    }
    if fhat0 < 0.0 && !options.allow_signed {
        return Err(Error::InvalidSoftening(format!(
            "f^(0) = {fhat0} < 0; nonpositive f requires the anti-Hadamard flag"
        )));
    }
    let mass = spectrum.mass();
    let modes = modes_within(&spectrum, cutoff)?
        .iter()
        .enumerate()
        .map(|(i, &lam)| mode_block_indexed(&f, i + 1, lam, mass))
        .collect::<Result<Vec<_>>>()?;
    Ok(FpState::assemble(
        spectrum,
        slab,
        Some(f),
        StateKind::FermionicProjector,
        cutoff,
        fhat0 < 0.0,
        modes,
    ))
}

fn fixed_state(
    spectrum: Arc<Spectrum>,
    slab: SlabConfig,
    cutoff: f64,
    ceiling: bool,
) -> Result<FpState> {
    let mass = spectrum.mass();
    let sign = if ceiling { -1.0 } else { 1.0 };
    let modes = modes_within(&spectrum, cutoff)?
        .iter()
        .enumerate()
        .map(|(i, &lam)| ModeBlock::from_transform(i + 1, lam, mass, sign, C64::new(0.0, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let kind = if ceiling {
        StateKind::Ceiling
    } else {
        StateKind::Reference
    };
    Ok(FpState::assemble(
        spectrum, slab, None, kind, cutoff, ceiling, modes,
    ))
}

/// Reference (ground) state: every block is `[[1, 0], [0, 0]]`.
pub fn reference_state(spectrum: Arc<Spectrum>, slab: SlabConfig, cutoff: f64) -> Result<FpState> {
    fixed_state(spectrum, slab, cutoff, false)
}

/// Ceiling state with the roles of `kappa^+` and `kappa^-` swapped: every
/// block is `[[0, 0], [0, 1]]`.
pub fn ceiling_state(spectrum: Arc<Spectrum>, slab: SlabConfig, cutoff: f64) -> Result<FpState> {
    fixed_state(spectrum, slab, cutoff, true)
}

/// `Q_{f,z} - Q'_z` per positive index, for two states over the same modes.
pub fn projector_difference(state: &FpState, reference: &FpState) -> Result<Vec<(usize, Mat2)>> {
    let same_modes = state.mode_count() == reference.mode_count()
        && state
            .modes()
            .iter()
            .zip(reference.modes())
            .all(|(a, b)| a.lambda == b.lambda);
    if !same_modes || state.cutoff() != reference.cutoff() {
        return Err(Error::CutoffMismatch(format!(
            "{} modes up to {} vs {} modes up to {}",
            state.mode_count(),
            state.cutoff(),
            reference.mode_count(),
            reference.cutoff()
        )));
    }
    Ok(state
        .blocks()
        .iter()
        .zip(reference.blocks())
        .map(|(a, b)| (a.z, a.q - b.q))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::synthetic_spectrum;
    use std::f64::consts::PI;

    // mpmath (40 digits), indicator(-1,1), m = 1, lambda = sqrt 2
    const GOLDEN_XI: f64 = 1.422_577_607_587_948_3;
    const GOLDEN_SIN_SQ: f64 = 0.002_939_750_060_116_193_5;

    fn golden_block() -> ModeBlock {
        let f = SofteningFunction::indicator(-1.0, 1.0).unwrap();
        mode_block(&f, 2f64.sqrt(), 1.0).unwrap()
    }

    #[test]
    fn golden_mode_block() {
        let b = golden_block();
        assert!((b.xi - GOLDEN_XI).abs() < 1e-14);
        assert!((b.sin_sq_theta() - GOLDEN_SIN_SQ).abs() < 1e-15);
        assert!((b.mu_from_entries() - b.sin_theta()).abs() < 1e-15);
        assert!((2.0 * b.theta).cos() > 0.0);
        let det = b.raw.determinant();
        assert!((det.re + b.xi * b.xi).abs() < 1e-14 && det.im.abs() < 1e-15);
        assert!(b.raw.trace().norm() < 1e-15);
        assert!((b.raw - b.raw.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn vanishing_transform_gives_diagonal_block() {
        let f = SofteningFunction::indicator(-1.0, 1.0).unwrap();
        // f^(2 lambda) = sin(2 lambda)/lambda vanishes at lambda = pi
        let b = mode_block(&f, PI, 1.0).unwrap();
        assert!(b.theta.abs() < 1e-15);
        let exact_zero = ModeBlock::from_transform(1, 3.0, 1.0, 2.0, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(exact_zero.theta, 0.0);
        assert_eq!(exact_zero.phi, 0.0);
    }

    #[test]
    fn bottom_of_mass_shell() {
        let f = SofteningFunction::bump(0.0, 1.0).unwrap();
        let b = mode_block(&f, 1.0, 1.0).unwrap();
        assert_eq!(b.xi, f.fhat0());
        assert_eq!(b.theta, 0.0);
        assert!(matches!(
            mode_block(&f, 0.5, 1.0),
            Err(Error::BelowMassGap { .. })
        ));
    }

    #[test]
    fn eigenvectors_of_golden_block() {
        let b = golden_block();
        let (p, m) = diagonalize_block(&b);
        let apply = |v: &ModeVector| {
            let x = nalgebra::Vector2::new(v.alpha, v.beta);
            b.raw * x
        };
        let ap = apply(&p);
        let am = apply(&m);
        assert!((ap - nalgebra::Vector2::new(p.alpha, p.beta) * C64::from(b.xi)).norm() < 1e-14);
        assert!((am + nalgebra::Vector2::new(m.alpha, m.beta) * C64::from(b.xi)).norm() < 1e-14);
        assert!((p.norm() - 1.0).abs() < 1e-15 && (m.norm() - 1.0).abs() < 1e-15);
        assert!(p.inner(&m).norm() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let r = ProjectorBlock::reference(1);
        assert_eq!(
            r.q,
            Mat2::new(1.0.into(), 0.0.into(), 0.0.into(), 0.0.into())
        );
        let q = fp_projector_block(&golden_block());
        assert!((q.q[(0, 0)].re - (1.0 - GOLDEN_SIN_SQ)).abs() < 1e-15);
        assert!(q.idempotency_residual() < 1e-15);
        assert!(q.hermiticity_residual() < 1e-15);
        assert!((q.trace() - 1.0).norm() < 1e-15);
        assert!(q.doubling_residual() < 1e-15);
        let cosp = q.cospinor_block();
        assert!((cosp * cosp - cosp).norm() < 1e-15);

        let diff = q.q - r.q;
        let (s, c) = golden_block().theta.sin_cos();
        let e = C64::from_polar(1.0, golden_block().phi);
        let expected = Mat2::new(
            (-s * s).into(),
            e * (s * c),
            e.conj() * (s * c),
            (s * s).into(),
        );
        assert!((diff - expected).norm() < 1e-15);
        assert!((diff.norm_squared() - 2.0 * s * s).abs() < 1e-15);
    }

    #[test]
    fn states_and_differences() {
        let spec = Arc::new(synthetic_spectrum(1.0, &[1.0, 2f64.sqrt(), PI, 4.0]).unwrap());
        let slab = SlabConfig::symmetric(1.0).unwrap();
        let f = Arc::new(SofteningFunction::indicator(-1.0, 1.0).unwrap());
        let st = build_fp_state(spec.clone(), slab, f, 10.0).unwrap();
        let rf = reference_state(spec.clone(), slab, 10.0).unwrap();
        let ce = ceiling_state(spec.clone(), slab, 10.0).unwrap();
        assert_eq!(st.mode_count(), 4);
        assert!(rf.modes().iter().all(|m| m.theta == 0.0));
        for (r, c) in rf.blocks().iter().zip(ce.blocks()) {
            assert!((r.q + c.q - Mat2::identity()).norm() < 1e-15);
            assert!((c.trace() - 1.0).norm() < 1e-15);
        }
        let d = projector_difference(&st, &rf).unwrap();
        // lambda = pi: f^(2 pi) = 0
        assert!(d[2].1.norm() < 1e-15);
        let self_diff = projector_difference(&rf, &rf).unwrap();
        assert!(self_diff.iter().all(|(_, m)| m.norm() == 0.0));
        for (_, m) in projector_difference(&ce, &rf).unwrap() {
            let eig = m.symmetric_eigenvalues();
            let mut e = [eig[0], eig[1]];
            e.sort_by(f64::total_cmp);
            assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
        }

        let short = reference_state(spec, slab, 2.0).unwrap();
        assert!(matches!(
            projector_difference(&st, &short),
            Err(Error::CutoffMismatch(_))
        ));
    }

    #[test]
    fn empty_within_cutoff() {
        let spec = Arc::new(synthetic_spectrum(1.0, &[2.0]).unwrap());
        let slab = SlabConfig::symmetric(1.0).unwrap();
        let f = Arc::new(SofteningFunction::indicator(-1.0, 1.0).unwrap());
        assert!(matches!(
            build_fp_state(spec, slab, f, 1.5),
            Err(Error::EmptySpectrum { .. })
        ));
    }

    #[test]
    fn signed_softening_needs_flag() {
        let spec = Arc::new(synthetic_spectrum(1.0, &[1.0, 1.7, 2.2]).unwrap());
        let slab = SlabConfig::symmetric(1.0).unwrap();
        let f = Arc::new(
            SofteningFunction::indicator(-1.0, 1.0)
                .unwrap()
                .scaled(-1.0)
                .unwrap(),
        );
        assert!(build_fp_state(spec.clone(), slab, f.clone(), 5.0).is_err());
        let st =
            build_fp_state_with(spec, slab, f, 5.0, BuildOptions { allow_signed: true }).unwrap();
        assert!(st.is_anti_hadamard());
        for m in st.modes() {
            assert!(m.theta > PI / 4.0 && m.theta <= PI / 2.0);
            assert!(st.deviation_sq(m.z).unwrap() < 0.5);
        }
    }

    #[test]
    fn dump_round_trip() {
        let spec = Arc::new(synthetic_spectrum(1.0, &[1.0, 1.3, 2.9]).unwrap());
        let slab = SlabConfig::new(-0.5, 2.0).unwrap();
        let f = Arc::new(SofteningFunction::bump(0.5, 1.0).unwrap());
        let st = build_fp_state(spec, slab, f, 5.0).unwrap();
        let back = FpState::from_dump(&st.to_dump()).unwrap();
        assert_eq!(back.kind(), StateKind::Restored);
        assert_eq!(back.slab(), slab);
        for (a, b) in st.modes().iter().zip(back.modes()) {
            assert_eq!(a.theta, b.theta);
            assert!((a.raw - b.raw).norm() < 1e-14);
        }
    }
}
