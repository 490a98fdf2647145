//! Mode-sum diagnostics separating Hadamard from non-Hadamard FP states.
//!
//! Finitely many modes cannot prove divergence, so every verdict here is
//! heuristic evidence governed by [`Thresholds`].

use crate::error::{Error, Result};
use crate::fpstate::FpState;
use crate::gamma::C64;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Terms whose rolling max stays above this count as non-decaying.
    pub decay_floor: f64,
    /// Fraction of the highest modes inspected for decay.
    pub window_fraction: f64,
    /// Fraction of the highest modes whose terms form the last-decade change.
    pub tail_fraction: f64,
    /// The tail fit uses modes with `lambda >= lambda_max / fit_ratio`.
    pub fit_ratio: f64,
    /// Absolute tolerance for the last-decade change and the fitted tail.
    pub tolerance: f64,
    pub min_modes: usize,
    /// Number of consecutive chunks the decay window is split into.
    pub rolling_chunks: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            decay_floor: 0.1,
            window_fraction: 0.25,
            tail_fraction: 0.1,
            fit_ratio: 10.0,
            tolerance: 1e-8,
            min_modes: 16,
            rolling_chunks: 4,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.decay_floor) || !unit(self.window_fraction) || !unit(self.tail_fraction) {
            return Err(Error::InvalidArgument(
                "decay floor, window fraction and tail fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.fit_ratio > 1.0) {
            return Err(Error::InvalidArgument("fit ratio must exceed 1".into()));
        }
        if !(self.tolerance > 0.0) || self.rolling_chunks == 0 || self.min_modes == 0 {
            return Err(Error::InvalidArgument(
                "tolerance must be positive, rolling_chunks >= 1, min_modes >= 1".into(),
            ));
        }
        Ok(())
    }

    fn window_len(&self, n: usize) -> usize {
        ((n as f64 * self.window_fraction).ceil() as usize).clamp(self.rolling_chunks.min(n), n)
    }

    fn tail_len(&self, n: usize) -> usize {
        ((n as f64 * self.tail_fraction).ceil() as usize).clamp(2.min(n), n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub p: u32,
    /// Power of `lambda` multiplying each term.
    pub exponent: f64,
    /// `(N, S(N))` for every `N` up to the last mode.
    pub partial_sums: Vec<(usize, f64)>,
    pub last_decade_change: f64,
    pub tail_estimate: f64,
    /// Fitted decay exponent `alpha` in `term ~ C lambda^{-alpha}`, if a fit was possible.
    pub fitted_decay: Option<f64>,
    /// Smallest of the chunk maxima over the decay window.
    pub rolling_max: f64,
    pub verdict: Verdict,
    pub cutoff: f64,
}

impl SeriesReport {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().map_or(0.0, |&(_, s)| s)
    }

    pub fn mode_count(&self) -> usize {
        self.partial_sums.len()
    }
}

fn chunk_maxima(window: &[f64], chunks: usize) -> Vec<f64> {
    let size = window.len().div_ceil(chunks).max(1);
    window
        .chunks(size)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect()
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Power-law tail beyond the last mode. Terms are replaced by their running
/// maximum from the right before fitting, so oscillating terms give an upper
/// envelope. Returns `(tail, alpha)`.
fn fitted_tail(lambdas: &[f64], terms: &[f64], first_index: usize) -> (f64, Option<f64>) {
    let mut envelope = terms.to_vec();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    if envelope.iter().all(|&t| t == 0.0) {
        return (0.0, None);
    }
    let (mut lx, mut ly, mut ln) = (Vec::new(), Vec::new(), Vec::new());
    for (i, (&l, &t)) in lambdas.iter().zip(&envelope).enumerate() {
        if t > 0.0 {
            lx.push(l.ln());
            ly.push(t.ln());
            ln.push(((first_index + i + 1) as f64).ln());
        }
    }
    let Some((slope, intercept)) = linear_fit(&lx, &ly) else {
        return (f64::INFINITY, None);
    };
    let alpha = -slope;
    let lambda_max = *lambdas.last().expect("nonempty tail");
    let density = linear_fit(&lx, &ln);
    let (beta, d) = match density {
        Some((beta, c)) if beta > 0.0 => (beta, c.exp()),
        // all tail modes degenerate: fall back to a one-dimensional count
        _ => (1.0, (first_index + lambdas.len()) as f64 / lambda_max),
    };
    if alpha <= beta {
        return (f64::INFINITY, Some(alpha));
    }
    let c = intercept.exp();
    let tail = c * d * beta * lambda_max.powf(beta - alpha) / (alpha - beta);
    (tail, Some(alpha))
}

/// Verdict logic shared by every mode series. `lambdas` must be sorted.
pub fn analyze_series(
    lambdas: &[f64],
    terms: &[f64],
    p: u32,
    exponent: f64,
    cutoff: f64,
    thresholds: &Thresholds,
) -> Result<SeriesReport> {
    thresholds.validate()?;
    let n = terms.len();
    if lambdas.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} eigenvalues for {n} terms",
            lambdas.len()
        )));
    }
    if n < thresholds.min_modes {
        return Err(Error::InsufficientModes {
            have: n,
            need: thresholds.min_modes,
        });
    }
    if let Some(t) = terms.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "series term {t} is not >= 0"
        )));
    }

    let mut acc = 0.0;
    let partial_sums: Vec<(usize, f64)> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            acc += t;
            (i + 1, acc)
        })
        .collect();

    let tail_len = thresholds.tail_len(n);
    let tail_start = n - tail_len;
    let last_decade_change = terms[tail_start..].iter().sum::<f64>();
    let lambda_max = lambdas[n - 1];
    let fit_start = lambdas
        .partition_point(|&l| l < lambda_max / thresholds.fit_ratio)
        .min(n - tail_len);
    let (tail_estimate, fitted_decay) =
        fitted_tail(&lambdas[fit_start..], &terms[fit_start..], fit_start);

    let window = &terms[n - thresholds.window_len(n)..];
    let rolling_max = chunk_maxima(window, thresholds.rolling_chunks)
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let verdict =
        if last_decade_change < thresholds.tolerance && tail_estimate < thresholds.tolerance {
            Verdict::Converged
        } else if rolling_max > thresholds.decay_floor {
            Verdict::Diverging
        } else {
            Verdict::Inconclusive
        };

    Ok(SeriesReport {
        p,
        exponent,
        partial_sums,
        last_decade_change,
        tail_estimate,
        fitted_decay,
        rolling_max,
        verdict,
        cutoff,
    })
}

fn state_lambdas(state: &FpState) -> Vec<f64> {
    state.modes().iter().map(|m| m.lambda).collect()
}

/// `(z, |sin theta_z|)` computed from the raw block entries.
pub fn sin_theta_sequence(state: &FpState) -> Vec<(usize, f64)> {
    state
        .modes()
        .iter()
        .map(|m| (m.z, m.mu_from_entries()))
        .collect()
}

/// `S_p(N) = sum_{z <= N} lambda_z^p sin^2 theta_z` (or `cos^2 theta_z` for
/// states whose reference is the ceiling state).
pub fn hadamard_series(state: &FpState, p: u32, thresholds: &Thresholds) -> Result<SeriesReport> {
    let lambdas = state_lambdas(state);
    let terms: Vec<f64> = state
        .modes()
        .iter()
        .map(|m| m.lambda.powi(p as i32) * state.deviation_sq(m.z).unwrap_or(0.0))
        .collect();
    analyze_series(&lambdas, &terms, p, p as f64, state.cutoff(), thresholds)
}

/// `|h^(0)|^2 sum lambda^{4p-2} sin^2 2 theta`.
pub fn fluctuation_squared(
    state: &FpState,
    p: u32,
    hhat0: C64,
    thresholds: &Thresholds,
) -> Result<SeriesReport> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "fluctuation order p must be >= 1".into(),
        ));
    }
    let weight = hhat0.norm_sqr();
    let exponent = 4 * p as i32 - 2;
    let lambdas = state_lambdas(state);
    let terms: Vec<f64> = state
        .modes()
        .iter()
        .map(|m| weight * m.lambda.powi(exponent) * m.sin_sq_2theta())
        .collect();
    analyze_series(
        &lambdas,
        &terms,
        p,
        exponent as f64,
        state.cutoff(),
        thresholds,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSpectrum {
    pub width: f64,
    /// `(z, +(b'-a') sin theta_z, -(b'-a') sin theta_z)`.
    pub eigenvalues: Vec<(usize, f64, f64)>,
    /// Largest `|eigenvalue|` over the top window of modes.
    pub window_max: f64,
    /// Whether the eigenvalues decay along the available spectrum.
    pub compact_indicated: bool,
}

/// Spectrum of `K = chi_{(a', b')} (Q_f - Q)` restricted to the mode blocks.
/// Compactness is indicated when the largest `sin^2 theta` in the last chunk
/// of the top window has fallen below `decay_floor` times its overall maximum.
pub fn k_operator_spectrum(
    state: &FpState,
    a_sub: f64,
    b_sub: f64,
    thresholds: &Thresholds,
) -> Result<KSpectrum> {
    let slab = state.slab();
    if !(slab.a < a_sub && a_sub < b_sub && b_sub < slab.b) {
        return Err(Error::InvalidSubslab {
            a: slab.a,
            b: slab.b,
            a_sub,
            b_sub,
        });
    }
    thresholds.validate()?;
    let width = b_sub - a_sub;
    let eigenvalues: Vec<(usize, f64, f64)> = state
        .modes()
        .iter()
        .map(|m| {
            let e = width * m.sin_theta().abs();
            (m.z, e, -e)
        })
        .collect();
    let n = eigenvalues.len();
    let window: Vec<f64> = state.modes()[n - thresholds.window_len(n)..]
        .iter()
        .map(|m| m.sin_sq_theta())
        .collect();
    let chunks = chunk_maxima(&window, thresholds.rolling_chunks);
    let last = chunks.last().copied().unwrap_or(0.0);
    let peak = state
        .modes()
        .iter()
        .map(|m| m.sin_sq_theta())
        .fold(0.0, f64::max);
    let window_max = width * window.iter().copied().fold(0.0, f64::max).sqrt();
    Ok(KSpectrum {
        width,
        eigenvalues,
        window_max,
        compact_indicated: last <= thresholds.decay_floor * peak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVerdict {
    NonHadamardIndicated,
    /// Includes the resonant, measure-zero case; never reported as Hadamard.
    Inconclusive,
}

impl ScanVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanVerdict::NonHadamardIndicated => "non-hadamard",
            ScanVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub b: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub rolling_max: f64,
    pub verdict: ScanVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub window_modes: usize,
}

impl ScanReport {
    pub fn flagged_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let flagged = self
            .rows
            .iter()
            .filter(|r| r.verdict == ScanVerdict::NonHadamardIndicated)
            .count();
        flagged as f64 / self.rows.len() as f64
    }
}

/// For each half-width `b`, inspects `sin^2(2 b lambda_z)` over the top
/// window of the spectrum.
pub fn scan_slab_halfwidths(
    spectrum: &Spectrum,
    b_grid: &[f64],
    thresholds: &Thresholds,
) -> Result<ScanReport> {
    thresholds.validate()?;
    if b_grid.is_empty() {
        return Err(Error::InvalidArgument("empty half-width grid".into()));
    }
    if let Some(i) = b_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "half-width grid not strictly increasing at position {}",
            i + 1
        )));
    }
    if b_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "half-widths must be positive".into(),
        ));
    }
    let lambdas = spectrum.positive_branch();
    let n = lambdas.len();
    if n < thresholds.min_modes {
        return Err(Error::InsufficientModes {
            have: n,
            need: thresholds.min_modes,
        });
    }
    let window = &lambdas[n - thresholds.window_len(n)..];
    let rows = b_grid
        .iter()
        .map(|&b| {
            let vals: Vec<f64> = window
                .iter()
                .map(|&l| {
                    let s = (2.0 * b * l).sin();
                    s * s
                })
                .collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(0.0, f64::max);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let rolling_max = chunk_maxima(&vals, thresholds.rolling_chunks)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let verdict = if rolling_max > thresholds.decay_floor {
                ScanVerdict::NonHadamardIndicated
            } else {
                ScanVerdict::Inconclusive
            };
            ScanRow {
                b,
                min,
                max,
                mean,
                rolling_max,
                verdict,
            }
        })
        .collect();
    Ok(ScanReport {
        rows,
        window_modes: window.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeReport {
    /// `2 sin^2 theta <= sin^2 2theta <= 4 sin^2 theta` on every mode.
    pub bridge_holds: bool,
    pub max_violation: f64,
    pub cos_sq_above_half: bool,
    /// `(p, fluctuation verdict at p, series verdict at 4p - 2)`.
    pub verdicts: Vec<(u32, Verdict, Verdict)>,
    pub verdicts_agree: bool,
}

pub fn fluctuation_implies_hadamard_check(
    state: &FpState,
    orders: &[u32],
    thresholds: &Thresholds,
) -> Result<BridgeReport> {
    let mut max_violation = 0.0f64;
    let mut cos_ok = true;
    for m in state.modes() {
        let s2 = m.sin_sq_theta();
        let d = m.sin_sq_2theta();
        let slack = 4.0 * f64::EPSILON * s2.max(f64::MIN_POSITIVE);
        max_violation = max_violation
            .max(2.0 * s2 - d - slack)
            .max(d - 4.0 * s2 - slack);
        let c = m.cos_theta();
        if s2 > 0.0 && !(c * c > 0.5) {
            cos_ok = false;
        }
    }
    let mut verdicts = Vec::with_capacity(orders.len());
    for &p in orders {
        let fl = fluctuation_squared(state, p, C64::new(1.0, 0.0), thresholds)?;
        let hs = hadamard_series(state, 4 * p - 2, thresholds)?;
        verdicts.push((p, fl.verdict, hs.verdict));
    }
    let verdicts_agree = verdicts.iter().all(|(_, a, b)| a == b);
    Ok(BridgeReport {
        bridge_holds: max_violation <= 0.0,
        max_violation: max_violation.max(0.0),
        cos_sq_above_half: cos_ok,
        verdicts,
        verdicts_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpstate::{build_fp_state, reference_state};
    use crate::softening::{SlabConfig, SofteningFunction};
    use crate::spectrum::{synthetic_spectrum, torus_spectrum, ModelParams};
    use std::f64::consts::PI;
    use std::sync::Arc;

    const GOLDEN_MU: f64 = 0.054_219_462_005_042_004;
    const GOLDEN_SIN_SQ_2THETA: f64 = 0.011_724_431_718_800_96;

    fn unit_torus(cutoff: f64) -> Arc<Spectrum> {
        let params = ModelParams::cubic(1.0, 1.0).unwrap();
        Arc::new(torus_spectrum(&params, cutoff).unwrap())
    }

    fn sqrt2_state() -> FpState {
        let spec = Arc::new(synthetic_spectrum(1.0, &[2f64.sqrt()]).unwrap());
        let f = Arc::new(SofteningFunction::indicator(-1.0, 1.0).unwrap());
        build_fp_state(spec, SlabConfig::symmetric(1.0).unwrap(), f, 2.0).unwrap()
    }

    fn loose() -> Thresholds {
        Thresholds {
            min_modes: 1,
            ..Default::default()
        }
    }

    #[test]
    fn golden_mu_and_k_spectrum() {
        let st = sqrt2_state();
        let mu = sin_theta_sequence(&st);
        assert!((mu[0].1 - GOLDEN_MU).abs() < 1e-12);
        let k = k_operator_spectrum(&st, -0.5, 0.5, &loose()).unwrap();
        assert!((k.eigenvalues[0].1 - GOLDEN_MU).abs() < 1e-12);
        assert_eq!(k.eigenvalues[0].1, -k.eigenvalues[0].2);
        let k2 = k_operator_spectrum(&st, -0.9, 0.3, &loose()).unwrap();
        assert!((k2.eigenvalues[0].1 - 1.2 * GOLDEN_MU).abs() < 1e-12);
        assert!(matches!(
            k_operator_spectrum(&st, 0.5, -0.5, &loose()),
            Err(Error::InvalidSubslab { .. })
        ));
        assert!(matches!(
            k_operator_spectrum(&st, -1.0, 0.5, &loose()),
            Err(Error::InvalidSubslab { .. })
        ));
    }

    #[test]
    fn golden_fluctuation_term() {
        let st = sqrt2_state();
        let r = fluctuation_squared(&st, 1, C64::new(1.0, 0.0), &loose()).unwrap();
        assert!((r.total() - 2.0 * GOLDEN_SIN_SQ_2THETA).abs() < 1e-12);
        let half = fluctuation_squared(&st, 1, C64::new(0.0, 0.5), &loose()).unwrap();
        assert!((half.total() - 0.25 * r.total()).abs() < 1e-15);
        assert!(fluctuation_squared(&st, 0, C64::new(1.0, 0.0), &loose()).is_err());
    }

    #[test]
    fn reference_state_series_vanish() {
        let spec = unit_torus(30.0);
        let st = reference_state(spec, SlabConfig::symmetric(1.0).unwrap(), 30.0).unwrap();
        for p in [0, 2, 7] {
            let r = hadamard_series(&st, p, &Thresholds::default()).unwrap();
            assert_eq!(r.total(), 0.0);
            assert_eq!(r.tail_estimate, 0.0);
            assert_eq!(r.verdict, Verdict::Converged);
        }
        assert!(sin_theta_sequence(&st).iter().all(|&(_, mu)| mu == 0.0));
        let k = k_operator_spectrum(&st, -0.5, 0.5, &Thresholds::default()).unwrap();
        assert!(k.eigenvalues.iter().all(|e| e.1 == 0.0));
        assert!(k.compact_indicated);
        let fl = fluctuation_squared(&st, 1, C64::new(1.0, 0.0), &Thresholds::default()).unwrap();
        assert_eq!(fl.total(), 0.0);
    }

    #[test]
    fn unsoftened_terms_do_not_decay() {
        let spec = unit_torus(40.0);
        let f = Arc::new(SofteningFunction::indicator(-1.0, 1.0).unwrap());
        let st = build_fp_state(spec, SlabConfig::symmetric(1.0).unwrap(), f, 40.0).unwrap();
        let r = hadamard_series(&st, 2, &Thresholds::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Diverging);
        assert!(r.tail_estimate.is_infinite());
        let k = k_operator_spectrum(&st, -0.5, 0.5, &Thresholds::default()).unwrap();
        assert!(!k.compact_indicated);
    }

    #[test]
    fn softened_series_converges() {
        let spec = unit_torus(40.0);
        let f = Arc::new(SofteningFunction::bump(0.0, 4.0).unwrap());
        let st = build_fp_state(spec, SlabConfig::symmetric(4.0).unwrap(), f, 40.0).unwrap();
        for p in [0, 2] {
            let r = hadamard_series(&st, p, &Thresholds::default()).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::Converged,
                "p = {p}: {:?}",
                r.tail_estimate
            );
        }
        let bridge = fluctuation_implies_hadamard_check(&st, &[1], &Thresholds::default()).unwrap();
        assert!(bridge.bridge_holds && bridge.cos_sq_above_half);
    }

    #[test]
    fn insufficient_modes() {
        let st = sqrt2_state();
        assert!(matches!(
            hadamard_series(&st, 0, &Thresholds::default()),
            Err(Error::InsufficientModes { have: 1, need: 16 })
        ));
    }

    #[test]
    fn power_law_tail_matches_integral() {
        // terms z^{-4} on lambda_z = z: tail beyond N is about N^{-3}/3
        let lambdas: Vec<f64> = (1..=1000).map(f64::from).collect();
        let terms: Vec<f64> = lambdas.iter().map(|l| l.powi(-4)).collect();
        let r = analyze_series(&lambdas, &terms, 0, 0.0, 1000.0, &Thresholds::default()).unwrap();
        let alpha = r.fitted_decay.unwrap();
        assert!((alpha - 4.0).abs() < 1e-9);
        assert!((r.tail_estimate - 1e-9 / 3.0).abs() < 1e-11);
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn resonant_spectrum_is_unflagged() {
        let b = 1.3;
        let step = PI / (2.0 * b);
        let lambdas: Vec<f64> = (1..=400).map(|z| z as f64 * step).collect();
        let spec = synthetic_spectrum(step, &lambdas).unwrap();
        let grid = [b, b * 2f64.sqrt().fract() + b];
        let report = scan_slab_halfwidths(&spec, &grid, &Thresholds::default()).unwrap();
        assert!(report.rows[0].max < 1e-20);
        assert_eq!(report.rows[0].verdict, ScanVerdict::Inconclusive);
        assert_eq!(report.rows[1].verdict, ScanVerdict::NonHadamardIndicated);
        assert!(report.rows[1].max > 0.99);
        assert!(scan_slab_halfwidths(&spec, &[2.0, 1.0], &Thresholds::default()).is_err());
        assert!(scan_slab_halfwidths(&spec, &[], &Thresholds::default()).is_err());
    }

    #[test]
    fn thresholds_validation() {
        let bad = Thresholds {
            decay_floor: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(Thresholds::default().validate().is_ok());
    }
}
