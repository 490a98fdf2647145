//! Spectra of the spatial Dirac operator and their eigenspinor bases.
//!
//! Eigenvalues are labelled by `z` in `Z \ {0}` with
//! `... <= lambda_{-2} <= lambda_{-1} <= -m < 0 < m <= lambda_1 <= lambda_2 <= ...`
//! and `lambda_{-z} = -lambda_z`. Only the positive branch is stored; the
//! negative branch is its mirror image. Every eigenvalue has its own index,
//! so multiplicities show up as repeated values.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector4;

use crate::error::{Error, Result};
use crate::gamma::{gamma0, gamma5, sigma_dot, C64};

pub type Spinor = Vector4<C64>;

/// Mass and side lengths of a flat three-torus with periodic spin structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mass: f64,
    pub lengths: [f64; 3],
}

impl ModelParams {
    pub fn new(mass: f64, lengths: [f64; 3]) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "torus side lengths must be positive, got {l}"
            )));
        }
        Ok(Self { mass, lengths })
    }

    /// Torus with all three sides equal to `length`.
    pub fn cubic(mass: f64, length: f64) -> Result<Self> {
        Self::new(mass, [length; 3])
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// `k_phys,i = 2 pi k_i / L_i`.
    pub fn physical_momentum(&self, k: [i64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| 2.0 * PI * k[i] as f64 / self.lengths[i])
    }

    fn momentum_sq(&self, k: [i64; 3]) -> f64 {
        let l = self.lengths;
        if l[0] == l[1] && l[1] == l[2] {
            // integer norm keeps permuted lattice vectors exactly degenerate
            let n = k.iter().map(|x| x * x).sum::<i64>() as f64;
            let unit = 2.0 * PI / l[0];
            unit * unit * n
        } else {
            self.physical_momentum(k).iter().map(|p| p * p).sum()
        }
    }
}

/// Lattice vector and spin label of a torus mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub k: [i64; 3],
    pub spin: u8,
}

impl ModeLabel {
    fn tag(&self) -> String {
        format!("k:{},{},{}:s{}", self.k[0], self.k[1], self.k[2], self.spin)
    }

    fn parse_tag(tag: &str) -> Option<Self> {
        let rest = tag.strip_prefix("k:")?;
        let (ks, spin) = rest.split_once(":s")?;
        let mut parts = ks.split(',').map(|s| s.parse::<i64>());
        let k = [
            parts.next()?.ok()?,
            parts.next()?.ok()?,
            parts.next()?.ok()?,
        ];
        if parts.next().is_some() {
            return None;
        }
        Some(Self {
            k,
            spin: spin.parse().ok()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    mass: f64,
    positive: Vec<f64>,
    labels: Option<Vec<ModeLabel>>,
    origin: Option<ModelParams>,
    cutoff: Option<f64>,
}

impl Spectrum {
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Number of positive indices (the negative branch has the same size).
    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn positive_branch(&self) -> &[f64] {
        &self.positive
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn origin(&self) -> Option<&ModelParams> {
        self.origin.as_ref()
    }

    /// `lambda_z` for `z != 0`, with `lambda_{-z} = -lambda_z`.
    pub fn eigenvalue(&self, z: i64) -> Option<f64> {
        if z == 0 {
            return None;
        }
        let lam = *self.positive.get(z.unsigned_abs() as usize - 1)?;
        Some(if z > 0 { lam } else { -lam })
    }

    pub fn label(&self, z: i64) -> Option<ModeLabel> {
        if z == 0 {
            return None;
        }
        self.labels
            .as_ref()?
            .get(z.unsigned_abs() as usize - 1)
            .copied()
    }

    /// All `(z, lambda_z)` in ascending eigenvalue order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.positive.len() as i64;
        (1..=n)
            .rev()
            .map(move |z| (-z, -self.positive[z as usize - 1]))
            .chain((1..=n).map(move |z| (z, self.positive[z as usize - 1])))
    }

    pub fn max_eigenvalue(&self) -> Option<f64> {
        self.positive.last().copied()
    }

    /// `d(Lambda) = #{z : |lambda_z| <= Lambda}` over the stored indices.
    pub fn counting_function(&self, cap: f64) -> usize {
        2 * self.positive.partition_point(|&l| l <= cap)
    }

    /// Restriction to the indices with `lambda_z <= cutoff`.
    pub fn truncated(&self, cutoff: f64) -> Result<Spectrum> {
        let n = self.positive.partition_point(|&l| l <= cutoff);
        if n == 0 {
            return Err(Error::EmptySpectrum {
                cutoff,
                mass: self.mass,
            });
        }
        Ok(Spectrum {
            mass: self.mass,
            positive: self.positive[..n].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
            origin: self.origin,
            cutoff: Some(self.cutoff.map_or(cutoff, |c| c.min(cutoff))),
        })
    }

    /// Text form: a `# mass=<value>` header, then one `z lambda multiplicity_tag`
    /// line per positive-branch entry.
    pub fn to_text(&self) -> String {
        let mut out = format!("# mass={}\n", self.mass);
        for (i, lam) in self.positive.iter().enumerate() {
            let tag = self
                .labels
                .as_ref()
                .map_or_else(|| "-".to_string(), |l| l[i].tag());
            let _ = writeln!(out, "{} {:.17e} {}", i + 1, lam, tag);
        }
        out
    }

    /// Parses the text form. The result is a synthetic spectrum: lattice
    /// labels are kept when present but no torus parameters are attached.
    pub fn from_text(text: &str) -> Result<Spectrum> {
        let mut mass = None;
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                if let Some(v) = header.trim().strip_prefix("mass=") {
                    mass = Some(v.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad mass: {e}"),
                    })?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected `z lambda [tag]`".into(),
                });
            }
            let z: usize = fields[0].parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad index: {e}"),
            })?;
            if z != values.len() + 1 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected index {}, found {z}", values.len() + 1),
                });
            }
            let lam: f64 = fields[1].parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad eigenvalue: {e}"),
            })?;
            values.push(lam);
            labels.push(fields.get(2).and_then(|t| ModeLabel::parse_tag(t)));
        }
        let mass = mass.ok_or(Error::Parse {
            line: 1,
            message: "missing `# mass=<value>` header".into(),
        })?;
        let mut spectrum = synthetic_spectrum(mass, &values)?;
        if labels.iter().all(Option::is_some) && !labels.is_empty() {
            spectrum.labels = Some(labels.into_iter().flatten().collect());
        }
        Ok(spectrum)
    }
}

/// Spectrum of the spatial Dirac operator on the flat torus, truncated at
/// `|lambda| <= cutoff`. Each lattice vector contributes two spin states per sign.
pub fn torus_spectrum(params: &ModelParams, cutoff: f64) -> Result<Spectrum> {
    let params = ModelParams::new(params.mass, params.lengths)?;
    let m = params.mass;
    if !(cutoff >= m) {
        return Err(Error::EmptySpectrum { cutoff, mass: m });
    }
    let pmax_sq = cutoff * cutoff - m * m;
    let bounds = params
        .lengths
        .map(|l| (pmax_sq.sqrt() * l / (2.0 * PI)).floor() as i64);

    let mut modes: Vec<(f64, ModeLabel)> = Vec::new();
    for kx in -bounds[0]..=bounds[0] {
        for ky in -bounds[1]..=bounds[1] {
            for kz in -bounds[2]..=bounds[2] {
                let k = [kx, ky, kz];
                let p2 = params.momentum_sq(k);
                let lam = (m * m + p2).sqrt();
                if lam <= cutoff {
                    for spin in 0..2 {
                        modes.push((lam, ModeLabel { k, spin }));
                    }
                }
            }
        }
    }
    // stable: ties keep lexicographic lattice order, then spin
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(Spectrum {
        mass: m,
        positive: modes.iter().map(|(l, _)| *l).collect(),
        labels: Some(modes.into_iter().map(|(_, l)| l).collect()),
        origin: Some(params),
        cutoff: Some(cutoff),
    })
}

/// Mirrored spectrum built from a user-supplied positive branch.
pub fn synthetic_spectrum(mass: f64, positive_branch: &[f64]) -> Result<Spectrum> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidParams(format!(
            "mass must be positive, got {mass}"
        )));
    }
    for (i, &v) in positive_branch.iter().enumerate() {
        if !v.is_finite() || v < mass {
            return Err(Error::MassGapViolation { value: v, mass });
        }
        if i > 0 && v < positive_branch[i - 1] {
            return Err(Error::NotSorted { position: i + 1 });
        }
    }
    Ok(Spectrum {
        mass,
        positive: positive_branch.to_vec(),
        labels: None,
        origin: None,
        cutoff: None,
    })
}

/// Evidence for the polynomial counting bound `d(Lambda) <= c Lambda^{21/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingBound {
    /// Smallest `c` consistent with the stored eigenvalues.
    pub c: f64,
    /// Constant in the induced lower bound `|lambda_z| >= k |z|^{2/21}`.
    pub k: f64,
    /// Whether every stored index satisfies the lower bound.
    pub holds: bool,
}

pub const COUNTING_EXPONENT: f64 = 21.0 / 2.0;

pub fn counting_bound(spectrum: &Spectrum) -> CountingBound {
    let lams = spectrum.positive_branch();
    let c = lams
        .iter()
        .map(|&l| spectrum.counting_function(l) as f64 / l.powf(COUNTING_EXPONENT))
        .fold(0.0, f64::max);
    if c == 0.0 {
        return CountingBound {
            c,
            k: f64::INFINITY,
            holds: true,
        };
    }
    // d(lambda_z) >= 2z, so 2z <= c lambda_z^{21/2}
    let k = (2.0 / c).powf(1.0 / COUNTING_EXPONENT);
    let holds = lams
        .iter()
        .enumerate()
        .all(|(i, &l)| l >= k * ((i + 1) as f64).powf(1.0 / COUNTING_EXPONENT) * (1.0 - 1e-12));
    CountingBound { c, k, holds }
}

/// One member of the orthonormal eigenspinor basis: a plane wave
/// `u e^{i k.x} / sqrt(V)` with unit amplitude `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspinor {
    pub z: i64,
    pub k: [i64; 3],
    pub amplitude: Spinor,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct EigenspinorBasis {
    params: ModelParams,
    positive: Vec<Eigenspinor>,
    negative: Vec<Eigenspinor>,
}

impl EigenspinorBasis {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn get(&self, z: i64) -> Option<&Eigenspinor> {
        if z > 0 {
            self.positive.get(z as usize - 1)
        } else if z < 0 {
            self.negative.get(z.unsigned_abs() as usize - 1)
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Eigenspinor> {
        self.negative.iter().rev().chain(self.positive.iter())
    }

    /// Pointwise value `chi_z(x) = u_z e^{i k.x} / sqrt(V)`.
    pub fn eval(&self, z: i64, x: [f64; 3]) -> Result<Spinor> {
        let e = self.get(z).ok_or(Error::IndexOutOfRange(z))?;
        let p = self.params.physical_momentum(e.k);
        let phase = p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
        let norm = self.params.volume().sqrt().recip();
        Ok(e.amplitude * C64::from_polar(norm, phase))
    }

    pub fn pairing_value(&self, w: i64, z: i64) -> Result<C64> {
        let a = self.get(w).ok_or(Error::IndexOutOfRange(w))?;
        let b = self.get(z).ok_or(Error::IndexOutOfRange(z))?;
        if a.k != b.k {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(a.amplitude.dotc(&(gamma0() * b.amplitude)))
    }
}

/// Positive-energy amplitude `N (xi_s, sigma.p xi_s / (E + m))` for spin `s`.
fn positive_amplitude(p: [f64; 3], mass: f64, energy: f64, spin: u8) -> Spinor {
    let xi = if spin == 0 {
        nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else {
        nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    };
    let lower = sigma_dot(p) * xi / C64::from(energy + mass);
    let norm = ((energy + mass) / (2.0 * energy)).sqrt();
    Spinor::new(xi[0], xi[1], lower[0], lower[1]) * C64::from(norm)
}

/// Negative-branch partner of a normalised eigenspinor `chi` with eigenvalue
/// `lambda`: `(1 - m^2/lambda^2)^{-1/2} (gamma0 - m/lambda) chi`, or
/// `gamma5 chi` at the bottom of the mass shell where that vanishes.
pub fn partner_amplitude(chi: &Spinor, lambda: f64, mass: f64, at_rest: bool) -> Spinor {
    if at_rest {
        return gamma5() * chi;
    }
    let ratio = mass / lambda;
    let scale = (1.0 - ratio * ratio).sqrt().recip();
    (gamma0() * chi - chi * C64::from(ratio)) * C64::from(scale)
}

pub fn build_eigenspinor_basis(
    params: &ModelParams,
    spectrum: &Spectrum,
) -> Result<EigenspinorBasis> {
    match spectrum.origin() {
        Some(origin) if origin == params => {}
        Some(origin) => {
            return Err(Error::SpectrumMismatch(format!(
                "spectrum built for {origin:?}, basis requested for {params:?}"
            )))
        }
        None => {
            return Err(Error::SpectrumMismatch(
                "spectrum carries no torus parameters".into(),
            ))
        }
    }
    let labels = spectrum
        .labels
        .as_ref()
        .ok_or_else(|| Error::SpectrumMismatch("spectrum carries no lattice labels".into()))?;

    let m = params.mass;
    let mut positive = Vec::with_capacity(labels.len());
    let mut negative = Vec::with_capacity(labels.len());
    for (i, (label, &lam)) in labels.iter().zip(spectrum.positive_branch()).enumerate() {
        let z = (i + 1) as i64;
        let p = params.physical_momentum(label.k);
        let expected = (m * m + params.momentum_sq(label.k)).sqrt();
        if (expected - lam).abs() > 1e-12 * lam {
            return Err(Error::SpectrumMismatch(format!(
                "index {z}: stored eigenvalue {lam} but lattice vector gives {expected}"
            )));
        }
        let chi = positive_amplitude(p, m, lam, label.spin);
        let at_rest = label.k == [0, 0, 0];
        let eta = partner_amplitude(&chi, lam, m, at_rest);
        positive.push(Eigenspinor {
            z,
            k: label.k,
            amplitude: chi,
            eigenvalue: lam,
        });
        negative.push(Eigenspinor {
            z: -z,
            k: label.k,
            amplitude: eta,
            eigenvalue: -lam,
        });
    }
    Ok(EigenspinorBasis {
        params: *params,
        positive,
        negative,
    })
}

/// Closed-form value of `<chi_w | gamma0 chi_z>`: `m/lambda_z` on the
/// diagonal, `sqrt(1 - m^2/lambda_z^2)` for `z = -w`, zero otherwise.
pub fn expected_pairing(mass: f64, lambda_z: f64, w: i64, z: i64) -> f64 {
    if w == z {
        mass / lambda_z
    } else if w == -z {
        let r = mass / lambda_z;
        (1.0 - r * r).max(0.0).sqrt()
    } else {
        0.0
    }
}
