use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use fpstate::diagnostics::{
    fluctuation_implies_hadamard_check, fluctuation_squared, hadamard_series, k_operator_spectrum,
    scan_slab_halfwidths, SeriesReport,
};
use fpstate::fock::{
    basis_smearings, build_fock, energy_fluctuation_oracle, expected_fluctuation,
    purity_gauge_check, two_point_check,
};
use fpstate::gamma::C64;
use fpstate::kernel::{
    difference_kernel, flatten_matrix, matrix_columns, parse_point_pairs, sigma_l2_norm_sq,
    sigma_norm_grid,
};
use fpstate::FpState;

use crate::emit::{Cell, Emitter, Table};
use crate::setup::Setup;

/// A named tolerance check; the process exits nonzero if any fails.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(["check", "value", "tolerance", "status"]);
    for c in checks {
        t.push(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.tolerance.into(),
            c.passed().into(),
        ]);
    }
    t
}

pub fn spectrum(setup: &Setup, out: &mut Emitter) -> Result<()> {
    out.text("spectrum.txt", &setup.spectrum.to_text())?;
    let mut t = Table::new(["z", "lambda"]);
    for (z, lambda) in setup.spectrum.positive_branch().iter().enumerate() {
        t.push(vec![(z + 1).into(), (*lambda).into()]);
    }
    out.table("spectrum", &t)
}

pub fn build(setup: &Setup, out: &mut Emitter) -> Result<FpState> {
    let state = setup.state()?;
    out.text("fpstate.dump", &state.to_dump())?;
    Ok(state)
}

fn series_tables(
    reports: &[SeriesReport],
    column: &str,
    stem: &str,
    out: &mut Emitter,
) -> Result<()> {
    let mut summary = Table::new([
        "p",
        "exponent",
        "modes",
        "total",
        "last_decade_change",
        "tail_estimate",
        "fitted_decay",
        "rolling_max",
        "verdict",
    ]);
    for r in reports {
        let mut t = Table::new(["N", column]);
        for &(n, s) in &r.partial_sums {
            t.push(vec![n.into(), s.into()]);
        }
        out.table(&format!("{stem}_p{}", r.p), &t)?;
        summary.push(vec![
            r.p.into(),
            r.exponent.into(),
            r.mode_count().into(),
            r.total().into(),
            r.last_decade_change.into(),
            r.tail_estimate.into(),
            r.fitted_decay.unwrap_or(f64::NAN).into(),
            r.rolling_max.into(),
            r.verdict.as_str().into(),
        ]);
    }
    out.table(&format!("{stem}_summary"), &summary)
}

pub fn series(setup: &Setup, state: &FpState, out: &mut Emitter) -> Result<Vec<SeriesReport>> {
    let reports = setup
        .config
        .series_orders
        .iter()
        .map(|&p| hadamard_series(state, p, &setup.config.thresholds))
        .collect::<fpstate::Result<Vec<_>>>()?;
    series_tables(&reports, "S_p", "series", out)?;
    Ok(reports)
}

pub fn scan(setup: &Setup, out: &mut Emitter) -> Result<f64> {
    let report = scan_slab_halfwidths(
        &setup.spectrum,
        &setup.scan_grid(),
        &setup.config.thresholds,
    )?;
    let mut t = Table::new(["b", "min", "max", "mean", "verdict"]);
    for r in &report.rows {
        t.push(vec![
            r.b.into(),
            r.min.into(),
            r.max.into(),
            r.mean.into(),
            r.verdict.as_str().into(),
        ]);
    }
    out.table("scan", &t)?;
    let mut s = Table::new(["half_widths", "window_modes", "flagged_fraction"]);
    s.push(vec![
        report.rows.len().into(),
        report.window_modes.into(),
        report.flagged_fraction().into(),
    ]);
    out.table("scan_summary", &s)?;
    Ok(report.flagged_fraction())
}

/// Defaults to the middle half of the slab when no sub-slab is given.
pub fn k_spectrum(
    setup: &Setup,
    state: &FpState,
    sub: Option<(f64, f64)>,
    out: &mut Emitter,
) -> Result<()> {
    let slab = state.slab();
    let (a_sub, b_sub) = sub.unwrap_or_else(|| {
        let q = slab.duration() / 4.0;
        (slab.a + q, slab.b - q)
    });
    let k = k_operator_spectrum(state, a_sub, b_sub, &setup.config.thresholds)?;
    let mut t = Table::new(["z", "lambda", "plus", "minus"]);
    for (&(z, plus, minus), m) in k.eigenvalues.iter().zip(state.modes()) {
        t.push(vec![z.into(), m.lambda.into(), plus.into(), minus.into()]);
    }
    out.table("k_spectrum", &t)?;
    let mut s = Table::new(["a_sub", "b_sub", "width", "window_max", "compact_indicated"]);
    s.push(vec![
        a_sub.into(),
        b_sub.into(),
        k.width.into(),
        k.window_max.into(),
        Cell::Text(k.compact_indicated.to_string()),
    ]);
    out.table("k_spectrum_summary", &s)
}

pub fn fluctuations(setup: &Setup, state: &FpState, hhat0: C64, out: &mut Emitter) -> Result<()> {
    let th = &setup.config.thresholds;
    let orders = &setup.config.fluctuation_orders;
    let reports = orders
        .iter()
        .map(|&p| fluctuation_squared(state, p, hhat0, th))
        .collect::<fpstate::Result<Vec<_>>>()?;
    series_tables(&reports, "F_p", "fluctuation", out)?;
    let bridge = fluctuation_implies_hadamard_check(state, orders, th)?;
    let mut t = Table::new(["p", "fluctuation_verdict", "series_verdict"]);
    for &(p, f, s) in &bridge.verdicts {
        t.push(vec![p.into(), f.as_str().into(), s.as_str().into()]);
    }
    out.table("bridge_verdicts", &t)?;
    let mut s = Table::new([
        "bridge_holds",
        "max_violation",
        "cos_sq_above_half",
        "verdicts_agree",
    ]);
    s.push(vec![
        Cell::Text(bridge.bridge_holds.to_string()),
        bridge.max_violation.into(),
        Cell::Text(bridge.cos_sq_above_half.to_string()),
        Cell::Text(bridge.verdicts_agree.to_string()),
    ]);
    out.table("bridge_summary", &s)
}

pub fn kernel_eval(
    setup: &Setup,
    state: &FpState,
    pairs: &Path,
    modes: usize,
    out: &mut Emitter,
) -> Result<()> {
    let text = fs::read_to_string(pairs).with_context(|| format!("reading {}", pairs.display()))?;
    let pairs = parse_point_pairs(&text)?;
    let basis = setup.basis()?;
    let n = modes.min(state.mode_count());
    let k = difference_kernel(state, &basis, &pairs, n)?;
    let mut t = Table::new(matrix_columns());
    for m in &k.values {
        t.push(flatten_matrix(m).into_iter().map(Cell::Num).collect());
    }
    out.table("kernel", &t)?;
    let mut s = Table::new(["pairs", "modes", "tail_bound"]);
    s.push(vec![k.values.len().into(), k.n.into(), k.tail_bound.into()]);
    out.table("kernel_summary", &s)
}

pub fn kernel_norms(setup: &Setup, state: &FpState, out: &mut Emitter) -> Result<()> {
    let basis = setup.basis()?;
    let c = &setup.config;
    let n = c.kernel_modes.min(state.mode_count());
    let mut t = Table::new([
        "z",
        "lambda",
        "closed_form",
        "grid_estimate",
        "std_error",
        "relative_error",
    ]);
    for z in 1..=n {
        let exact = sigma_l2_norm_sq(state, z)?;
        let est = sigma_norm_grid(
            state,
            &basis,
            z,
            c.kernel_grid,
            c.kernel_samples,
            c.seed.wrapping_add(z as u64),
        )?;
        let rel = if exact > 0.0 {
            (est.value - exact).abs() / exact
        } else {
            est.value.abs()
        };
        t.push(vec![
            z.into(),
            state.modes()[z - 1].lambda.into(),
            exact.into(),
            est.value.into(),
            est.std_error.into(),
            rel.into(),
        ]);
    }
    out.table("kernel_norms", &t)
}

pub fn oracle_checks(state: &FpState, modes: &[usize], seed: u64) -> Result<Vec<Check>> {
    let o = build_fock(state, modes)?;
    let two = two_point_check(&o, state, &basis_smearings(modes.len()))?;
    let purity = purity_gauge_check(&o, state, &[0.0, PI / 3.0, 2.0])?;
    let mut checks = vec![
        Check::new("car_residual", o.car_residual(), 1e-12),
        Check::new("annihilation_residual", o.annihilation_residual(), 1e-12),
        Check::new(
            "vacuum_uniqueness",
            o.vacuum_uniqueness_residual(4, seed),
            1e-10,
        ),
        Check::new("two_point_spinor", two.spinor_deviation, 1e-11),
        Check::new("two_point_cospinor", two.cospinor_deviation, 1e-11),
        Check::new("two_point_car", two.car_deviation, 1e-11),
        Check::new("gauge_invariance", purity.gauge_deviation, 1e-12),
        Check::new("vacuum_charge", purity.vacuum_charge, 1e-12),
        Check::new("projector_idempotency", purity.idempotency, 1e-12),
        Check::new("projector_doubling", purity.doubling, 1e-12),
    ];
    for p in [1u32, 2] {
        let oracle = energy_fluctuation_oracle(&o, p)?;
        let analytic = expected_fluctuation(&o, p);
        checks.push(Check::new(
            &format!("fluctuation_p{p}"),
            (oracle - analytic).abs() / analytic.max(1.0),
            1e-10,
        ));
    }
    Ok(checks)
}

pub fn parse_modes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .with_context(|| format!("bad mode index `{t}`"))
        })
        .collect()
}

pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').context("expected `a,b`")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_at_tolerance() {
        assert!(Check::new("x", 1e-12, 1e-12).passed());
        assert!(!Check::new("x", 2e-12, 1e-12).passed());
        assert!(!Check::new("x", f64::NAN, 1.0).passed());
    }

    #[test]
    fn parses_lists() {
        assert_eq!(parse_modes("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_modes("1,x").is_err());
        assert_eq!(parse_pair("-0.5, 0.25").unwrap(), (-0.5, 0.25));
        assert!(parse_pair("1").is_err());
    }
}
