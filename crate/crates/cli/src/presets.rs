//! Fixed experiment bundles. Each preset carries its own configuration so
//! that its outputs do not depend on the user's config file.

use std::f64::consts::PI;
use std::fmt;

use anyhow::Result;
use fpstate::diagnostics::{fluctuation_squared, scan_slab_halfwidths, ScanVerdict, Verdict};
use fpstate::fock::{build_fock, energy_fluctuation_oracle};
use fpstate::gamma::C64;
use fpstate::synthetic_spectrum;

use crate::commands::{self, Check};
use crate::config::RunConfig;
use crate::emit::{Emitter, Header, Table};
use crate::setup::Setup;

pub const PRESETS: &[&str] = &["unsoftened-scan", "softened-convergence", "fluctuations"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPreset(pub String);

impl fmt::Display for UnknownPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown preset `{}`; expected one of {}",
            self.0,
            PRESETS.join(", ")
        )
    }
}

impl std::error::Error for UnknownPreset {}

pub fn preset_config(name: &str) -> Result<RunConfig, UnknownPreset> {
    let text = match name {
        "unsoftened-scan" => {
            "model.lengths = 1\nsoften.kind = indicator\ncutoff = 100\n\
             scan.b_min = 0.3\nscan.b_max = 3\nscan.count = 200\n"
        }
        "softened-convergence" => {
            "model.lengths = 1\nslab.a = -4\nslab.b = 4\nsoften.kind = bump\n\
             cutoff = 120\nseries.orders = 0,2,6\nfluctuation.orders = 1,2\n"
        }
        "fluctuations" => {
            "model.lengths = 6.283185307179586\nsoften.kind = indicator\ncutoff = 3\n\
             thresholds.min_modes = 1\nfluctuation.orders = 1,2\n"
        }
        _ => return Err(UnknownPreset(name.to_string())),
    };
    Ok(RunConfig::from_text(text).expect("preset configs parse"))
}

/// Runs a preset and returns its tolerance checks.
pub fn replicate(
    name: &str,
    seed: u64,
    out_flag: Option<&std::path::Path>,
) -> Result<(Vec<Check>, Emitter)> {
    let mut config = preset_config(name)?;
    config.seed = seed;
    let dir = config.resolve_output_dir(out_flag).join(name);
    let header = Header::new(&config.hash(), config.seed, &format!("replicate {name}"));
    let mut out = Emitter::new(&dir, header)?;
    let setup = Setup::new(config)?;
    let checks = match name {
        "unsoftened-scan" => unsoftened_scan(&setup, &mut out)?,
        "softened-convergence" => softened_convergence(&setup, &mut out)?,
        _ => fluctuations(&setup, &mut out)?,
    };
    out.table("checks", &commands::checks_table(&checks))?;
    Ok((checks, out))
}

fn verdict_check(name: String, ok: bool) -> Check {
    Check::new(&name, if ok { 0.0 } else { 1.0 }, 0.0)
}

fn unsoftened_scan(setup: &Setup, out: &mut Emitter) -> Result<Vec<Check>> {
    let frac = commands::scan(setup, out)?;
    // lambda_z = z pi / (2b) makes every sin^2(2 b lambda_z) vanish
    let b = 1.3;
    let step = PI / (2.0 * b);
    let lambdas: Vec<f64> = (1..=2000).map(|z| z as f64 * step).collect();
    let resonant = synthetic_spectrum(step, &lambdas)?;
    let r = scan_slab_halfwidths(&resonant, &[b], &setup.config.thresholds)?;
    let row = &r.rows[0];
    let mut t = Table::new(["b", "min", "max", "mean", "verdict"]);
    t.push(vec![
        row.b.into(),
        row.min.into(),
        row.max.into(),
        row.mean.into(),
        row.verdict.as_str().into(),
    ]);
    out.table("resonant_scan", &t)?;
    Ok(vec![
        Check::new("unflagged_fraction", 1.0 - frac, 0.05),
        verdict_check(
            "resonant_b_unflagged".into(),
            row.verdict == ScanVerdict::Inconclusive,
        ),
    ])
}

fn softened_convergence(setup: &Setup, out: &mut Emitter) -> Result<Vec<Check>> {
    let state = setup.state()?;
    let tol = setup.config.thresholds.tolerance;
    let mut checks = Vec::new();
    for r in commands::series(setup, &state, out)? {
        checks.push(verdict_check(
            format!("series_p{}_converged", r.p),
            r.verdict == Verdict::Converged,
        ));
        checks.push(Check::new(
            &format!("series_p{}_last_decade", r.p),
            r.last_decade_change,
            tol,
        ));
        checks.push(Check::new(
            &format!("series_p{}_tail", r.p),
            r.tail_estimate,
            tol,
        ));
    }
    let th = &setup.config.thresholds;
    for &p in &setup.config.fluctuation_orders {
        let r = fluctuation_squared(&state, p, C64::new(1.0, 0.0), th)?;
        checks.push(verdict_check(
            format!("fluctuation_p{p}_converged"),
            r.verdict == Verdict::Converged,
        ));
    }
    Ok(checks)
}

fn fluctuations(setup: &Setup, out: &mut Emitter) -> Result<Vec<Check>> {
    let state = setup.state()?;
    let th = &setup.config.thresholds;
    let one = C64::new(1.0, 0.0);
    let subsets: [&[usize]; 4] = [&[1], &[3, 10], &[2, 9, 30], &[7, 8, 40]];
    let mut t = Table::new(["modes", "p", "oracle", "series", "relative_deviation"]);
    let mut worst = 0.0f64;
    for &p in &setup.config.fluctuation_orders {
        let series = fluctuation_squared(&state, p, one, th)?;
        let term = |z: usize| {
            let prev = if z > 1 {
                series.partial_sums[z - 2].1
            } else {
                0.0
            };
            series.partial_sums[z - 1].1 - prev
        };
        for idx in subsets {
            let o = build_fock(&state, idx)?;
            let oracle = energy_fluctuation_oracle(&o, p)?;
            let analytic: f64 = idx.iter().map(|&z| term(z)).sum();
            let dev = (oracle - analytic).abs() / analytic.max(1.0);
            worst = worst.max(dev);
            let label = idx
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            t.push(vec![
                label.as_str().into(),
                p.into(),
                oracle.into(),
                analytic.into(),
                dev.into(),
            ]);
        }
    }
    out.table("fluctuation_agreement", &t)?;
    let mut checks = vec![Check::new("fluctuation_agreement", worst, 1e-10)];
    checks.extend(commands::oracle_checks(
        &state,
        &[2, 9, 30],
        setup.config.seed,
    )?);
    Ok(checks)
}
