//! Adaptive Gauss-Kronrod (7/15) quadrature for `int f(t) e^{i w t} dt`.
//!
//! Panels are first cut at the supplied breakpoints and then to a width of at
//! most `pi / |w|`, so no panel holds more than half an oscillation. The
//! panel with the largest error estimate is bisected until the summed
//! estimate meets the tolerance or the subdivision budget runs out.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::gamma::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: C64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// QUADPACK-style error scaling of a raw Kronrod/Gauss difference.
fn scaled_error(diff: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = diff.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, omega: f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| {
        let v = f(t);
        (v, C64::from_polar(v, omega * t))
    };

    let (fc_abs, fc) = eval(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc_abs.abs() * WGK[7];
    let mut samples = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (v1, f1) = eval(center - dx);
        let (v2, f2) = eval(center + dx);
        kron += (f1 + f2) * WGK[j];
        resabs += (v1.abs() + v2.abs()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
        samples[j] = (f1, f2);
    }
    let mean = kron * 0.5;
    let mut asc_re = WGK[7] * (fc.re - mean.re).abs();
    let mut asc_im = WGK[7] * (fc.im - mean.im).abs();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        asc_re += WGK[j] * ((f1.re - mean.re).abs() + (f2.re - mean.re).abs());
        asc_im += WGK[j] * ((f1.im - mean.im).abs() + (f2.im - mean.im).abs());
    }
    let scale = half.abs();
    let diff = (kron - gauss) * scale;
    let resabs = resabs * scale;
    let err_re = scaled_error(diff.re, resabs, asc_re * scale);
    let err_im = scaled_error(diff.im, resabs, asc_im * scale);
    Panel {
        a,
        b,
        value: kron * scale,
        error: err_re.hypot(err_im),
    }
}

/// Integrates `f(t) e^{i omega t}` over `[breakpoints[0], breakpoints[last]]`.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: F,
    omega: f64,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> QuadratureResult {
    let zero = QuadratureResult {
        value: C64::new(0.0, 0.0),
        error: 0.0,
        panels: 0,
        converged: true,
    };
    if breakpoints.len() < 2 {
        return zero;
    }
    let max_width = if omega != 0.0 {
        PI / omega.abs()
    } else {
        f64::INFINITY
    };

    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            heap.push(kronrod_panel(&f, omega, lo, hi));
        }
    }
    if heap.is_empty() {
        return zero;
    }

    let finish = |heap: &BinaryHeap<Panel>, converged: bool| QuadratureResult {
        value: heap.iter().map(|p| p.value).sum(),
        error: heap.iter().map(|p| p.error).sum(),
        panels: heap.len(),
        converged,
    };

    let mut total: C64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if error <= target {
            return finish(&heap, true);
        }
        if heap.len() >= opts.max_panels {
            return finish(&heap, false);
        }
        let worst = *heap.peek().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel cannot be split further in floating point
            return finish(&heap, false);
        }
        heap.pop();
        let left = kronrod_panel(&f, omega, worst.a, mid);
        let right = kronrod_panel(&f, omega, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate_oscillatory(|t| t * t, 0.0, &[0.0, 1.0], &QuadratureOptions::default());
        assert!((r.value.re - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.value.im.abs() < 1e-15);
        assert!(r.converged);
    }

    #[test]
    fn oscillatory_indicator() {
        // int_{-1}^{1} e^{i w t} dt = 2 sin(w) / w
        for &w in &[0.5, 3.0, 40.0, 377.0] {
            let r = integrate_oscillatory(|_| 1.0, w, &[-1.0, 1.0], &QuadratureOptions::default());
            let exact = 2.0 * f64::sin(w) / w;
            assert!((r.value.re - exact).abs() < 1e-13, "w = {w}");
            assert!(r.value.im.abs() < 1e-13);
        }
    }

    #[test]
    fn gaussian_transform() {
        // int e^{-t^2} e^{i w t} dt over a wide window = sqrt(pi) e^{-w^2/4}
        let opts = QuadratureOptions {
            abs_tol: 1e-13,
            ..Default::default()
        };
        for &w in &[0.0, 1.0, 4.0] {
            let r = integrate_oscillatory(|t| (-t * t).exp(), w, &[-12.0, 0.0, 12.0], &opts);
            let exact = PI.sqrt() * (-w * w / 4.0).exp();
            assert!((r.value.re - exact).abs() < 1e-12, "w = {w}");
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadratureOptions {
            abs_tol: 1e-30,
            rel_tol: 0.0,
            max_panels: 4,
        };
        let r = integrate_oscillatory(|t| t.abs().sqrt(), 0.0, &[-1.0, 1.0], &opts);
        assert!(!r.converged);
    }
}
