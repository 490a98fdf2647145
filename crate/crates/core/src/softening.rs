//! Softening functions `f >= 0` and their Fourier transforms
//! `f^(lambda) = int f(t) e^{i lambda t} dt` (note the sign of the exponent).

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::gamma::C64;
use crate::quadrature::{integrate_oscillatory, QuadratureOptions};

/// Time slab `(a, b)` of an ultrastatic spacetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabConfig {
    pub a: f64,
    pub b: f64,
}

impl SlabConfig {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    /// Symmetric slab `(-b, b)`.
    pub fn symmetric(b: f64) -> Result<Self> {
        Self::new(-b, b)
    }

    pub fn duration(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.a && t < self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SofteningKind {
    /// Characteristic function of `(a, b)`: the unsoftened case.
    Indicator { a: f64, b: f64 },
    /// `exp(-1 / (1 - s^2))` with `s = (t - center) / halfwidth`, zero for `|s| >= 1`.
    Bump { center: f64, halfwidth: f64 },
    /// Piecewise-linear interpolation of samples, zero outside the sampled range.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

pub struct SofteningFunction {
    kind: SofteningKind,
    scale: f64,
    fhat0: f64,
    quadrature: QuadratureOptions,
    cache: Mutex<HashMap<u64, C64>>,
}

impl Clone for SofteningFunction {
    fn clone(&self) -> Self {
        let cache = self.cache.lock().map(|c| c.clone()).unwrap_or_default();
        Self {
            kind: self.kind.clone(),
            scale: self.scale,
            fhat0: self.fhat0,
            quadrature: self.quadrature,
            cache: Mutex::new(cache),
        }
    }
}

impl fmt::Debug for SofteningFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SofteningFunction")
            .field("kind", &self.kind)
            .field("scale", &self.scale)
            .field("fhat0", &self.fhat0)
            .finish()
    }
}

fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl SofteningFunction {
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self::with_fhat0(SofteningKind::Indicator { a, b }, b - a))
    }

    pub fn bump(center: f64, halfwidth: f64) -> Result<Self> {
        Self::bump_with_options(center, halfwidth, QuadratureOptions::default())
    }

    pub fn bump_with_options(
        center: f64,
        halfwidth: f64,
        quadrature: QuadratureOptions,
    ) -> Result<Self> {
        if !(halfwidth > 0.0) || !halfwidth.is_finite() || !center.is_finite() {
            return Err(Error::InvalidSoftening(format!(
                "bump needs a finite center and positive halfwidth, got ({center}, {halfwidth})"
            )));
        }
        let mut f = Self::with_fhat0(SofteningKind::Bump { center, halfwidth }, 0.0);
        f.quadrature = quadrature;
        f.fhat0 = f.transform_uncached(0.0)?.re;
        Ok(f)
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidSoftening(
                "tabulated function needs at least two (t, f) samples".into(),
            ));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSoftening(format!(
                    "sample times must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for (&t, &v) in times.iter().zip(&values) {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeSample { t, value: v });
            }
        }
        let mut f = Self::with_fhat0(SofteningKind::Tabulated { times, values }, 0.0);
        f.fhat0 = f.transform_uncached(0.0)?.re;
        if !(f.fhat0 > 0.0) {
            return Err(Error::InvalidSoftening(
                "tabulated function is identically zero".into(),
            ));
        }
        Ok(f)
    }

    /// Parses `t f(t)` lines (blank lines and `#` comments ignored).
    pub fn from_table_text(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or(Error::Parse {
                    line: i + 1,
                    message: "expected `t f(t)`".into(),
                })?
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            };
            times.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        Self::tabulated(times, values)
    }

    fn with_fhat0(kind: SofteningKind, fhat0: f64) -> Self {
        Self {
            kind,
            scale: 1.0,
            fhat0,
            quadrature: QuadratureOptions::default(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `c f` for a nonzero constant `c`. Negative `c` yields a nonpositive
    /// function, usable only in the anti-Hadamard experiment.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidSoftening(format!(
                "scale factor must be nonzero, got {c}"
            )));
        }
        Ok(Self {
            kind: self.kind.clone(),
            scale: self.scale * c,
            fhat0: self.fhat0 * c,
            quadrature: self.quadrature,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn kind(&self) -> &SofteningKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn fhat0(&self) -> f64 {
        self.fhat0
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            SofteningKind::Indicator { a, b } => (*a, *b),
            SofteningKind::Bump { center, halfwidth } => (center - halfwidth, center + halfwidth),
            SofteningKind::Tabulated { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.scale * self.base_value(t)
    }

    fn base_value(&self, t: f64) -> f64 {
        match &self.kind {
            SofteningKind::Indicator { a, b } => {
                if t > *a && t < *b {
                    1.0
                } else {
                    0.0
                }
            }
            SofteningKind::Bump { center, halfwidth } => bump_profile((t - center) / halfwidth),
            SofteningKind::Tabulated { times, values } => {
                let n = times.len();
                if t < times[0] || t > times[n - 1] {
                    return 0.0;
                }
                let i = times.partition_point(|&x| x <= t).clamp(1, n - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// Short human-readable description, stable across runs.
    pub fn descriptor(&self) -> String {
        let base = match &self.kind {
            SofteningKind::Indicator { a, b } => format!("indicator(a={a},b={b})"),
            SofteningKind::Bump { center, halfwidth } => {
                format!("bump(center={center},halfwidth={halfwidth})")
            }
            SofteningKind::Tabulated { times, .. } => format!(
                "tabulated(samples={},t0={},t1={})",
                times.len(),
                times[0],
                times[times.len() - 1]
            ),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{}", self.scale, base)
        }
    }

    /// `f^(lambda)`, cached per exact bit pattern of `lambda`.
    pub fn fourier_at(&self, lambda: f64) -> Result<C64> {
        let key = lambda.to_bits();
        if let Some(v) = self.cache.lock().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(v);
        }
        let v = self.transform_uncached(lambda)? * self.scale;
        if let Ok(mut c) = self.cache.lock() {
            c.insert(key, v);
        }
        Ok(v)
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    fn transform_uncached(&self, lambda: f64) -> Result<C64> {
        match &self.kind {
            SofteningKind::Indicator { a, b } => {
                // (e^{i l b} - e^{i l a}) / (i l) = e^{i l c} 2 sin(l h) / l
                let c = 0.5 * (a + b);
                let h = 0.5 * (b - a);
                let amp = if lambda == 0.0 {
                    2.0 * h
                } else {
                    2.0 * (lambda * h).sin() / lambda
                };
                Ok(C64::from_polar(1.0, lambda * c) * amp)
            }
            SofteningKind::Bump { center, halfwidth } => {
                let (c, h) = (*center, *halfwidth);
                let r = integrate_oscillatory(
                    |t| bump_profile((t - c) / h),
                    lambda,
                    &[c - h, c, c + h],
                    &self.quadrature,
                );
                self.check(lambda, r)
            }
            SofteningKind::Tabulated { times, .. } => {
                let r =
                    integrate_oscillatory(|t| self.base_value(t), lambda, times, &self.quadrature);
                self.check(lambda, r)
            }
        }
    }

    fn check(&self, lambda: f64, r: crate::quadrature::QuadratureResult) -> Result<C64> {
        if r.converged {
            Ok(r.value)
        } else {
            Err(Error::QuadratureFailure {
                lambda,
                estimate: r.error,
                tolerance: self.quadrature.abs_tol,
            })
        }
    }
}
