//! Flat `key = value` run configuration.
//!
//! Sections are dotted key prefixes. Unknown keys are rejected so typos do
//! not silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use fpstate::diagnostics::Thresholds;
use sha2::{Digest, Sha256};

pub const OUT_DIR_ENV: &str = "FPSTATE_OUT_DIR";

const KNOWN_KEYS: &[&str] = &[
    "model.mass",
    "model.lengths",
    "spectrum.file",
    "slab.a",
    "slab.b",
    "soften.kind",
    "soften.params",
    "soften.file",
    "cutoff",
    "thresholds.decay_floor",
    "thresholds.window_fraction",
    "thresholds.tail_fraction",
    "thresholds.fit_ratio",
    "thresholds.tolerance",
    "thresholds.min_modes",
    "thresholds.rolling_chunks",
    "series.orders",
    "fluctuation.orders",
    "scan.b_min",
    "scan.b_max",
    "scan.count",
    "kernel.grid",
    "kernel.samples",
    "kernel.modes",
    "output.dir",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn key(key: &str, message: impl fmt::Display) -> Self {
        Self {
            line: None,
            message: format!("{key}: {message}"),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum SoftenSpec {
    Indicator { a: f64, b: f64 },
    Bump { center: f64, halfwidth: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass: f64,
    pub lengths: [f64; 3],
    pub spectrum_file: Option<PathBuf>,
    pub slab: (f64, f64),
    pub soften: SoftenSpec,
    pub cutoff: f64,
    pub thresholds: Thresholds,
    pub series_orders: Vec<u32>,
    pub fluctuation_orders: Vec<u32>,
    pub scan: (f64, f64, usize),
    pub kernel_grid: usize,
    pub kernel_samples: usize,
    pub kernel_modes: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(i + 1, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(ConfigError::at(i + 1, format!("unknown key `{k}`")));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::at(i + 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    match map.get(key) {
        Some(v) => v.parse().map_err(|e| ConfigError::key(key, e)),
        None => Ok(default),
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| ConfigError::key(key, e)))
        .collect()
}

fn get_list<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match map.get(key) {
        Some(v) => list(key, v),
        None => Ok(default),
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_map(&parse_pairs(text)?)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mass = get(map, "model.mass", 1.0)?;
        let lengths: Vec<f64> = get_list(map, "model.lengths", vec![1.0])?;
        let lengths = match lengths.as_slice() {
            [l] => [*l; 3],
            [a, b, c] => [*a, *b, *c],
            _ => {
                return Err(ConfigError::key(
                    "model.lengths",
                    "expected one or three values",
                ))
            }
        };
        let slab = (get(map, "slab.a", -1.0)?, get(map, "slab.b", 1.0)?);
        let kind = map.get("soften.kind").map(String::as_str).unwrap_or("bump");
        let params: Vec<f64> = get_list(map, "soften.params", Vec::new())?;
        let soften = match (kind, params.as_slice()) {
            ("indicator", []) => SoftenSpec::Indicator {
                a: slab.0,
                b: slab.1,
            },
            ("indicator", [a, b]) => SoftenSpec::Indicator { a: *a, b: *b },
            ("bump", []) => SoftenSpec::Bump {
                center: 0.5 * (slab.0 + slab.1),
                halfwidth: 0.5 * (slab.1 - slab.0),
            },
            ("bump", [c, h]) => SoftenSpec::Bump {
                center: *c,
                halfwidth: *h,
            },
            ("file", []) => {
                SoftenSpec::File(map.get("soften.file").map(PathBuf::from).ok_or_else(|| {
                    ConfigError::key("soften.file", "required when soften.kind = file")
                })?)
            }
            ("indicator" | "bump" | "file", _) => {
                return Err(ConfigError::key(
                    "soften.params",
                    format!("wrong arity for `{kind}`"),
                ))
            }
            _ => {
                return Err(ConfigError::key(
                    "soften.kind",
                    format!("expected indicator, bump or file, got `{kind}`"),
                ))
            }
        };
        let d = Thresholds::default();
        let thresholds = Thresholds {
            decay_floor: get(map, "thresholds.decay_floor", d.decay_floor)?,
            window_fraction: get(map, "thresholds.window_fraction", d.window_fraction)?,
            tail_fraction: get(map, "thresholds.tail_fraction", d.tail_fraction)?,
            fit_ratio: get(map, "thresholds.fit_ratio", d.fit_ratio)?,
            tolerance: get(map, "thresholds.tolerance", d.tolerance)?,
            min_modes: get(map, "thresholds.min_modes", d.min_modes)?,
            rolling_chunks: get(map, "thresholds.rolling_chunks", d.rolling_chunks)?,
        };
        Ok(Self {
            mass,
            lengths,
            spectrum_file: map.get("spectrum.file").map(PathBuf::from),
            slab,
            soften,
            cutoff: get(map, "cutoff", 20.0)?,
            thresholds,
            series_orders: get_list(map, "series.orders", vec![0])?,
            fluctuation_orders: get_list(map, "fluctuation.orders", vec![1])?,
            scan: (
                get(map, "scan.b_min", 0.3)?,
                get(map, "scan.b_max", 3.0)?,
                get(map, "scan.count", 200)?,
            ),
            kernel_grid: get(map, "kernel.grid", 8)?,
            kernel_samples: get(map, "kernel.samples", 20_000)?,
            kernel_modes: get(map, "kernel.modes", 20)?,
            output_dir: PathBuf::from(map.get("output.dir").map(String::as_str).unwrap_or("out")),
            seed: get(map, "seed", 1)?,
        })
    }

    /// Checks the invariants that do not need the core library.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scan.2 == 0 || !(self.scan.0 > 0.0 && self.scan.0 < self.scan.1) {
            return Err(ConfigError::key(
                "scan",
                "need 0 < b_min < b_max and count >= 1",
            ));
        }
        if self.kernel_grid == 0 || self.kernel_samples < 2 {
            return Err(ConfigError::key(
                "kernel",
                "need grid >= 1 and samples >= 2",
            ));
        }
        for (key, path) in [
            ("spectrum.file", self.spectrum_file.as_deref()),
            (
                "soften.file",
                match &self.soften {
                    SoftenSpec::File(p) => Some(p.as_path()),
                    _ => None,
                },
            ),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(ConfigError::key(
                        key,
                        format!("file `{}` not found", p.display()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sorted `key=value` lines of the resolved configuration.
    ///
    /// The output directory is excluded: moving outputs does not change results.
    pub fn canonical(&self) -> String {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let mut map = BTreeMap::new();
        map.insert("model.mass", self.mass.to_string());
        map.insert(
            "model.lengths",
            self.lengths.map(|l| l.to_string()).join(","),
        );
        if let Some(p) = &self.spectrum_file {
            map.insert("spectrum.file", p.display().to_string());
        }
        map.insert("slab.a", self.slab.0.to_string());
        map.insert("slab.b", self.slab.1.to_string());
        let (kind, params) = match &self.soften {
            SoftenSpec::Indicator { a, b } => ("indicator", format!("{a},{b}")),
            SoftenSpec::Bump { center, halfwidth } => ("bump", format!("{center},{halfwidth}")),
            SoftenSpec::File(p) => ("file", p.display().to_string()),
        };
        map.insert("soften.kind", kind.into());
        map.insert("soften.params", params);
        map.insert("cutoff", self.cutoff.to_string());
        let t = &self.thresholds;
        map.insert("thresholds.decay_floor", t.decay_floor.to_string());
        map.insert("thresholds.window_fraction", t.window_fraction.to_string());
        map.insert("thresholds.tail_fraction", t.tail_fraction.to_string());
        map.insert("thresholds.fit_ratio", t.fit_ratio.to_string());
        map.insert("thresholds.tolerance", t.tolerance.to_string());
        map.insert("thresholds.min_modes", t.min_modes.to_string());
        map.insert("thresholds.rolling_chunks", t.rolling_chunks.to_string());
        map.insert("series.orders", join(&self.series_orders));
        map.insert("fluctuation.orders", join(&self.fluctuation_orders));
        map.insert("scan.b_min", self.scan.0.to_string());
        map.insert("scan.b_max", self.scan.1.to_string());
        map.insert("scan.count", self.scan.2.to_string());
        map.insert("kernel.grid", self.kernel_grid.to_string());
        map.insert("kernel.samples", self.kernel_samples.to_string());
        map.insert("kernel.modes", self.kernel_modes.to_string());
        map.insert("seed", self.seed.to_string());
        map.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Flag beats environment beats config file.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let c = RunConfig::from_text("").unwrap();
        assert_eq!(c.mass, 1.0);
        assert_eq!(c.lengths, [1.0; 3]);
        assert_eq!(
            c.soften,
            SoftenSpec::Bump {
                center: 0.0,
                halfwidth: 1.0
            }
        );
        assert_eq!(c.thresholds, Thresholds::default());
        assert_eq!(c.series_orders, vec![0]);
    }

    #[test]
    fn hash_ignores_order_comments_and_spacing() {
        let a = "model.mass = 1\ncutoff = 20\n# note\nsoften.kind = bump\n";
        let b = "soften.kind=bump\n\ncutoff=20   # trailing\nmodel.mass=1\n";
        let ca = RunConfig::from_text(a).unwrap();
        let cb = RunConfig::from_text(b).unwrap();
        assert_eq!(ca.hash(), cb.hash());
        assert_eq!(ca.hash().len(), 64);
    }

    #[test]
    fn hash_tracks_values_not_output_dir() {
        let a = RunConfig::from_text("cutoff = 20\noutput.dir = x").unwrap();
        let b = RunConfig::from_text("cutoff = 20\noutput.dir = y").unwrap();
        let c = RunConfig::from_text("cutoff = 21").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn explicit_default_hashes_like_omitted() {
        let a = RunConfig::from_text("seed = 1").unwrap();
        let b = RunConfig::from_text("").unwrap();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(RunConfig::from_text("nonsense").unwrap_err().line, Some(1));
        assert!(RunConfig::from_text("cutof = 3")
            .unwrap_err()
            .message
            .contains("unknown key"));
        assert!(RunConfig::from_text("seed = 1\nseed = 2").is_err());
        assert!(RunConfig::from_text("cutoff = abc").is_err());
        assert!(RunConfig::from_text("soften.kind = gauss").is_err());
        assert!(RunConfig::from_text("soften.kind = bump\nsoften.params = 1").is_err());
        assert!(RunConfig::from_text("model.lengths = 1,2").is_err());
        assert!(RunConfig::from_text("soften.kind = file").is_err());
    }

    #[test]
    fn soften_params_override_slab() {
        let c = RunConfig::from_text(
            "slab.a = -4\nslab.b = 4\nsoften.kind = indicator\nsoften.params = -1,2",
        )
        .unwrap();
        assert_eq!(c.soften, SoftenSpec::Indicator { a: -1.0, b: 2.0 });
        let c = RunConfig::from_text("slab.a = -4\nslab.b = 2\n").unwrap();
        assert_eq!(
            c.soften,
            SoftenSpec::Bump {
                center: -1.0,
                halfwidth: 3.0
            }
        );
    }

    #[test]
    fn validate_checks_files_and_grids() {
        let c = RunConfig::from_text("spectrum.file = /definitely/missing").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_text("scan.b_min = 3\nscan.b_max = 1").unwrap();
        assert!(c.validate().is_err());
        assert!(RunConfig::from_text("").unwrap().validate().is_ok());
    }

    #[test]
    fn three_lengths() {
        let c = RunConfig::from_text("model.lengths = 1, 2, 3").unwrap();
        assert_eq!(c.lengths, [1.0, 2.0, 3.0]);
    }
}
