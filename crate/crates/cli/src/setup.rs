//! Turns a [`RunConfig`] into core library objects.

use std::fs;
use std::sync::Arc;

use anyhow::{Context, Result};
use fpstate::{
    build_eigenspinor_basis, build_fp_state, torus_spectrum, EigenspinorBasis, FpState,
    ModelParams, SlabConfig, SofteningFunction, Spectrum,
};

use crate::config::{RunConfig, SoftenSpec};

pub struct Setup {
    pub config: RunConfig,
    pub params: ModelParams,
    pub spectrum: Arc<Spectrum>,
}

impl Setup {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        config.thresholds.validate()?;
        let params = ModelParams::new(config.mass, config.lengths)?;
        if config.cutoff.is_nan() || config.cutoff < config.mass {
            return Err(fpstate::Error::EmptySpectrum {
                cutoff: config.cutoff,
                mass: config.mass,
            }
            .into());
        }
        let spectrum = match &config.spectrum_file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Spectrum::from_text(&text)?.truncated(config.cutoff)?
            }
            None => torus_spectrum(&params, config.cutoff)?,
        };
        Ok(Self {
            config,
            params,
            spectrum: Arc::new(spectrum),
        })
    }

    pub fn slab(&self) -> Result<SlabConfig> {
        Ok(SlabConfig::new(self.config.slab.0, self.config.slab.1)?)
    }

    pub fn softening(&self) -> Result<SofteningFunction> {
        Ok(match &self.config.soften {
            SoftenSpec::Indicator { a, b } => SofteningFunction::indicator(*a, *b)?,
            SoftenSpec::Bump { center, halfwidth } => SofteningFunction::bump(*center, *halfwidth)?,
            SoftenSpec::File(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                SofteningFunction::from_table_text(&text)?
            }
        })
    }

    pub fn state(&self) -> Result<FpState> {
        Ok(build_fp_state(
            self.spectrum.clone(),
            self.slab()?,
            Arc::new(self.softening()?),
            self.config.cutoff,
        )?)
    }

    /// Requires a torus spectrum; file spectra carry no eigenspinors.
    pub fn basis(&self) -> Result<EigenspinorBasis> {
        Ok(build_eigenspinor_basis(&self.params, &self.spectrum)?)
    }

    /// Midpoints of `count` equal cells covering `(b_min, b_max)`.
    pub fn scan_grid(&self) -> Vec<f64> {
        let (lo, hi, n) = self.config.scan;
        (0..n)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
            .collect()
    }
}
