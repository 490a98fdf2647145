//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fpstate-core --test acceptance`. The process exits
//! nonzero when a criterion fails unexpectedly. Criterion 5 is a known
//! failure of the literal norm formula; the run checks that it fails by
//! exactly the documented factor and also prints the corrected check.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::Instant;

use fpstate::diagnostics::{
    fluctuation_implies_hadamard_check, fluctuation_squared, hadamard_series, k_operator_spectrum,
    scan_slab_halfwidths, ScanVerdict, Thresholds, Verdict,
};
use fpstate::fock::{
    basis_smearings, build_fock, energy_fluctuation_oracle, purity_gauge_check, two_point_check,
};
use fpstate::gamma::{dirac_symbol, C64};
use fpstate::kernel::{sigma_inner_product, sigma_l2_norm_sq, sigma_norm_grid};
use fpstate::spectrum::expected_pairing;
use fpstate::{
    build_eigenspinor_basis, build_fp_state, mode_block, synthetic_spectrum, torus_spectrum,
    FpState, ModelParams, ProjectorBlock, SlabConfig, SofteningFunction, Spectrum,
};

// mpmath at 40 digits; see the project notes for the script
const GOLDEN_XI: f64 = 1.422_577_607_587_948_3;
const GOLDEN_SIN_SQ: f64 = 0.002_939_750_060_116_193_5;

const KNOWN_RED: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn torus(mass: f64, length: f64, cutoff: f64) -> (ModelParams, Arc<Spectrum>) {
    let params = ModelParams::cubic(mass, length).unwrap();
    let spec = Arc::new(torus_spectrum(&params, cutoff).unwrap());
    (params, spec)
}

fn state(spec: &Arc<Spectrum>, f: SofteningFunction, slab: SlabConfig, cutoff: f64) -> FpState {
    build_fp_state(spec.clone(), slab, Arc::new(f), cutoff).unwrap()
}

fn eigenstructure() -> Outcome {
    let (params, spec) = torus(1.0, TAU, 20.0);
    let basis = build_eigenspinor_basis(&params, &spec).unwrap();
    let mut residual = 0.0f64;
    let mut by_k: HashMap<[i64; 3], Vec<i64>> = HashMap::new();
    for e in basis.iter() {
        let h = dirac_symbol(params.physical_momentum(e.k), params.mass);
        let r = (h * e.amplitude - e.amplitude * C64::from(e.eigenvalue)).norm();
        residual = residual.max(r);
        by_k.entry(e.k).or_default().push(e.z);
    }
    // distinct lattice momenta pair to zero identically; check every pair within a momentum
    let mut pairing = 0.0f64;
    let mut pairs = 0usize;
    for zs in by_k.values() {
        for &w in zs {
            for &z in zs {
                let lz = spec.eigenvalue(z).unwrap();
                let got = basis.pairing_value(w, z).unwrap();
                let want = expected_pairing(params.mass, lz, w, z);
                pairing = pairing.max((got - C64::from(want)).norm());
                pairs += 1;
            }
        }
    }
    outcome(
        residual < 1e-10 && pairing < 1e-10,
        format!(
            "{} modes, eigen-residual {residual:.1e}, pairing deviation {pairing:.1e} over {pairs} same-momentum pairs",
            2 * spec.len()
        ),
    )
}

fn golden_block() -> Outcome {
    let f = SofteningFunction::indicator(-1.0, 1.0).unwrap();
    let b = mode_block(&f, 2f64.sqrt(), 1.0).unwrap();
    let dxi = (b.xi - 1.42258).abs();
    let ds = (b.sin_sq_theta() - GOLDEN_SIN_SQ).abs();
    outcome(
        dxi < 1e-4 && ds < 1e-6 && (b.xi - GOLDEN_XI).abs() < 1e-12,
        format!(
            "Xi = {:.10}, sin^2 theta = {:.12} (arbitrary-precision reference {GOLDEN_SIN_SQ:.12})",
            b.xi,
            b.sin_sq_theta()
        ),
    )
}

fn projector_laws() -> Outcome {
    let (_, spec) = torus(1.0, TAU, 20.0);
    let slab = SlabConfig::symmetric(1.0).unwrap();
    let mut worst = 0.0f64;
    let mut rescale = 0.0f64;
    let mut blocks = 0usize;
    let fs = [
        SofteningFunction::indicator(-1.0, 1.0).unwrap(),
        SofteningFunction::bump(0.0, 1.0).unwrap(),
        SofteningFunction::bump(0.3, 0.6).unwrap(),
    ];
    for f in fs {
        let base = state(&spec, f.clone(), slab, 20.0);
        for q in base.blocks() {
            worst = worst
                .max(q.idempotency_residual())
                .max(q.hermiticity_residual())
                .max(q.doubling_residual());
            blocks += 1;
        }
        for c in [1e-3, 0.37, 2.0, 1e3] {
            let scaled = state(&spec, f.scaled(c).unwrap(), slab, 20.0);
            for (a, b) in base.blocks().iter().zip(scaled.blocks()) {
                rescale = rescale.max((a.q - b.q).norm());
            }
        }
    }
    outcome(
        worst < 1e-12 && rescale < 1e-12,
        format!("{blocks} blocks, max law residual {worst:.1e}, max rescaling drift {rescale:.1e}"),
    )
}

fn k_operator_law() -> Outcome {
    let (_, spec) = torus(1.0, TAU, 20.0);
    let st = state(
        &spec,
        SofteningFunction::indicator(-1.0, 1.0).unwrap(),
        SlabConfig::symmetric(1.0).unwrap(),
        20.0,
    );
    let (a_sub, b_sub) = (-0.5, 0.3);
    let k = k_operator_spectrum(&st, a_sub, b_sub, &Thresholds::default()).unwrap();
    let mut closed = 0.0f64;
    let mut solver = 0.0f64;
    for (e, m) in k.eigenvalues.iter().zip(st.modes()) {
        let want = (b_sub - a_sub) * m.theta.sin();
        closed = closed.max((e.1 - want).abs()).max((e.2 + want).abs());
        let qdiff = st.block(m.z).unwrap().q - ProjectorBlock::reference(m.z).q;
        let eig = (qdiff * C64::from(b_sub - a_sub)).symmetric_eigenvalues();
        let (hi, lo) = (eig[0].max(eig[1]), eig[0].min(eig[1]));
        solver = solver.max((hi - e.1).abs()).max((lo - e.2).abs());
    }
    outcome(
        closed < 1e-12 && solver < 1e-12,
        format!(
            "{} modes, closed-form deviation {closed:.1e}, 2x2 eigensolver deviation {solver:.1e}",
            k.eigenvalues.len()
        ),
    )
}

struct SigmaCheck {
    literal: Outcome,
    corrected: Outcome,
    factor_ok: bool,
}

fn sigma_norms() -> SigmaCheck {
    let (params, spec) = torus(1.0, TAU, 3.0);
    let basis = build_eigenspinor_basis(&params, &spec).unwrap();
    let slab = SlabConfig::symmetric(1.0).unwrap();
    let st = state(
        &spec,
        SofteningFunction::indicator(-1.0, 1.0).unwrap(),
        slab,
        3.0,
    );
    let d = slab.duration();
    let modes: Vec<usize> = st
        .modes()
        .iter()
        .filter(|m| m.sin_sq_theta() > 0.0)
        .map(|m| m.z)
        .take(24)
        .collect();
    let (mut lit_err, mut cor_err, mut factor_err) = (0.0f64, 0.0f64, 0.0f64);
    for &z in &modes {
        let grid = sigma_norm_grid(&st, &basis, z, 32, 512, 1000 + z as u64)
            .unwrap()
            .value;
        let s2 = st.mode(z).unwrap().sin_sq_theta();
        let literal = 2.0 * d * s2;
        let corrected = sigma_l2_norm_sq(&st, z).unwrap();
        lit_err = lit_err.max((literal - grid).abs() / grid);
        cor_err = cor_err.max((corrected - grid).abs() / grid);
        factor_err = factor_err.max((grid / literal - d).abs());
    }
    let mut ortho = 0.0f64;
    let mut pairs = 0usize;
    for (i, &w) in modes.iter().enumerate() {
        for &z in &modes[i + 1..] {
            ortho = ortho.max(sigma_inner_product(&st, &basis, w, z, 8).unwrap().norm());
            pairs += 1;
        }
    }
    let n = modes.len();
    SigmaCheck {
        literal: outcome(
            n >= 20 && lit_err < 1e-2 && ortho < 1e-10,
            format!(
                "2(b-a) sin^2 theta vs grid on slab (-1,1): max relative error {lit_err:.3} on {n} modes; orthogonality {ortho:.1e} over {pairs} pairs"
            ),
        ),
        corrected: outcome(
            n >= 20 && cor_err < 1e-2 && ortho < 1e-10,
            format!("2(b-a)^2 sin^2 theta vs grid: max relative error {cor_err:.1e} on {n} modes"),
        ),
        factor_ok: factor_err < 1e-9,
    }
}

fn softened_setup() -> (Arc<Spectrum>, FpState) {
    let (_, spec) = torus(1.0, 1.0, 120.0);
    let st = state(
        &spec,
        SofteningFunction::bump(0.0, 4.0).unwrap(),
        SlabConfig::symmetric(4.0).unwrap(),
        120.0,
    );
    (spec, st)
}

fn softened_convergence(st: &FpState) -> Outcome {
    let th = Thresholds::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [0, 2, 6] {
        let r = hadamard_series(st, p, &th).unwrap();
        ok &= r.verdict == Verdict::Converged
            && r.last_decade_change < 1e-8
            && r.tail_estimate < 1e-8;
        parts.push(format!(
            "p={p}: {} (change {:.1e}, tail {:.1e})",
            r.verdict.as_str(),
            r.last_decade_change,
            r.tail_estimate
        ));
    }
    outcome(
        ok,
        format!(
            "bump on unit torus, cutoff 120, {} modes; {}",
            st.mode_count(),
            parts.join("; ")
        ),
    )
}

fn unsoftened_scan() -> Outcome {
    let (_, spec) = torus(1.0, 1.0, 100.0);
    let grid: Vec<f64> = (0..200)
        .map(|i| 0.3 + 2.7 * (i as f64 + 0.5) / 200.0)
        .collect();
    let th = Thresholds::default();
    let report = scan_slab_halfwidths(&spec, &grid, &th).unwrap();
    let frac = report.flagged_fraction();

    let b = 1.3;
    let step = PI / (2.0 * b);
    let lambdas: Vec<f64> = (1..=2000).map(|z| z as f64 * step).collect();
    let resonant = synthetic_spectrum(step, &lambdas).unwrap();
    let r = scan_slab_halfwidths(&resonant, &[b], &th).unwrap();
    let unflagged = r.rows[0].verdict == ScanVerdict::Inconclusive;
    outcome(
        frac >= 0.95 && unflagged,
        format!(
            "{:.1}% of 200 half-widths flagged over a {}-mode window; resonant b = {b}: max {:.1e}, {}",
            100.0 * frac,
            report.window_modes,
            r.rows[0].max,
            r.rows[0].verdict.as_str()
        ),
    )
}

fn fluctuation_dichotomy(softened: &FpState) -> Outcome {
    let th = Thresholds::default();
    let one = C64::new(1.0, 0.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1, 2] {
        let r = fluctuation_squared(softened, p, one, &th).unwrap();
        ok &= r.verdict == Verdict::Converged;
        parts.push(format!("softened p={p}: {}", r.verdict.as_str()));
    }
    let (_, spec) = torus(1.0, 1.0, 100.0);
    let raw = state(
        &spec,
        SofteningFunction::indicator(-1.0, 1.0).unwrap(),
        SlabConfig::symmetric(1.0).unwrap(),
        100.0,
    );
    let r = fluctuation_squared(&raw, 1, one, &th).unwrap();
    let n = r.partial_sums.len();
    let quarters: Vec<f64> = [n / 4, n / 2, 3 * n / 4, n]
        .iter()
        .map(|&i| r.partial_sums[i - 1].1)
        .collect();
    let growing = quarters.windows(2).all(|w| w[1] > 1.2 * w[0]);
    ok &= growing && r.verdict == Verdict::Diverging;
    parts.push(format!(
        "unsoftened p=1: {} (partial sums at quarters {:.3e}, {:.3e}, {:.3e}, {:.3e})",
        r.verdict.as_str(),
        quarters[0],
        quarters[1],
        quarters[2],
        quarters[3]
    ));
    let mut bridge_modes = 0;
    for st in [softened, &raw] {
        let b = fluctuation_implies_hadamard_check(st, &[], &th).unwrap();
        ok &= b.bridge_holds && b.cos_sq_above_half;
        bridge_modes += st.mode_count();
    }
    parts.push(format!("bridge inequality on {bridge_modes} modes"));
    outcome(ok, parts.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let (_, spec) = torus(1.0, TAU, 3.0);
    let th = Thresholds {
        min_modes: 1,
        ..Default::default()
    };
    let mut worst_two = 0.0f64;
    let mut worst_car = 0.0f64;
    let mut worst_gauge = 0.0f64;
    let mut worst_fluct = 0.0f64;
    let states = [
        state(
            &spec,
            SofteningFunction::indicator(-1.0, 1.0).unwrap(),
            SlabConfig::symmetric(1.0).unwrap(),
            3.0,
        ),
        state(
            &spec,
            SofteningFunction::bump(0.2, 0.7).unwrap(),
            SlabConfig::new(-0.5, 0.9).unwrap(),
            3.0,
        ),
    ];
    let subsets: [&[usize]; 4] = [&[1], &[3, 10], &[2, 9, 30], &[7, 8, 40]];
    for st in &states {
        let series = [1, 2].map(|p| fluctuation_squared(st, p, C64::new(1.0, 0.0), &th).unwrap());
        for idx in subsets {
            let o = build_fock(st, idx).unwrap();
            worst_car = worst_car.max(o.car_residual());
            let r = two_point_check(&o, st, &basis_smearings(idx.len())).unwrap();
            worst_two = worst_two.max(r.max_deviation());
            let g = purity_gauge_check(&o, st, &[0.0, PI / 3.0, 2.0]).unwrap();
            worst_gauge = worst_gauge.max(g.gauge_deviation);
            for (p, s) in [1u32, 2].iter().zip(&series) {
                let analytic: f64 = idx
                    .iter()
                    .map(|&z| {
                        let prev = if z > 1 { s.partial_sums[z - 2].1 } else { 0.0 };
                        s.partial_sums[z - 1].1 - prev
                    })
                    .sum();
                let oracle = energy_fluctuation_oracle(&o, *p).unwrap();
                worst_fluct = worst_fluct.max((oracle - analytic).abs() / analytic.max(1.0));
            }
        }
    }
    outcome(
        worst_two < 1e-11 && worst_car < 1e-12 && worst_gauge < 1e-12 && worst_fluct < 1e-10,
        format!(
            "two-point {worst_two:.1e}, CAR {worst_car:.1e}, gauge {worst_gauge:.1e}, fluctuation {worst_fluct:.1e}"
        ),
    )
}

fn large_slab_limit() -> Outcome {
    let (_, spec) = torus(1.0, 1.0, 20.0);
    let widths = [1.0, 10.0, 100.0, 1000.0];
    let zs: Vec<usize> = (1..=spec.len().min(200)).collect();
    let mut envelope = Vec::new();
    let mut finals = 0.0f64;
    for &b in &widths {
        let st = state(
            &spec,
            SofteningFunction::indicator(-b, b).unwrap(),
            SlabConfig::symmetric(b).unwrap(),
            20.0,
        );
        let vals: Vec<f64> = zs
            .iter()
            .map(|&z| st.mode(z).unwrap().sin_theta().abs())
            .collect();
        envelope.push(vals.iter().copied().fold(0.0, f64::max));
        if b == 1000.0 {
            finals = vals.iter().copied().fold(0.0, f64::max);
        }
    }
    let monotone = envelope.windows(2).all(|w| w[1] < w[0]);
    outcome(
        monotone && finals < 1e-2,
        format!(
            "max sin theta over {} modes at b = 1, 10, 100, 1000: {:.2e}, {:.2e}, {:.2e}, {:.2e}",
            zs.len(),
            envelope[0],
            envelope[1],
            envelope[2],
            envelope[3]
        ),
    )
}

fn report(unexpected: &mut Vec<u32>, id: u32, name: &str, start: Instant, o: Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} {status} {name}: {} [{:.2} s]",
        o.detail,
        start.elapsed().as_secs_f64()
    );
    if !o.pass && !KNOWN_RED.contains(&id) {
        unexpected.push(id);
    }
    if o.pass && KNOWN_RED.contains(&id) {
        println!("criterion {id:>2} now passes; remove it from the known failures");
        unexpected.push(id);
    }
}

fn main() {
    let mut unexpected = Vec::new();

    let t = Instant::now();
    let o = eigenstructure();
    let limit = o.pass && t.elapsed().as_secs_f64() < 10.0;
    report(
        &mut unexpected,
        1,
        "eigenstructure fidelity",
        t,
        outcome(limit, o.detail),
    );

    let t = Instant::now();
    report(&mut unexpected, 2, "golden mode block", t, golden_block());

    let t = Instant::now();
    report(&mut unexpected, 3, "projector laws", t, projector_laws());

    let t = Instant::now();
    report(&mut unexpected, 4, "K-operator law", t, k_operator_law());

    let t = Instant::now();
    let sigma = sigma_norms();
    report(&mut unexpected, 5, "sigma norm law", t, sigma.literal);
    println!(
        "criterion  5 (corrected) {} sigma norm law with 2(b-a)^2: {}",
        if sigma.corrected.pass { "PASS" } else { "FAIL" },
        sigma.corrected.detail
    );
    if !sigma.corrected.pass || !sigma.factor_ok {
        unexpected.push(5);
    }

    let t = Instant::now();
    let (_, softened) = softened_setup();
    let o = softened_convergence(&softened);
    let pass = o.pass && t.elapsed().as_secs_f64() < 60.0;
    report(
        &mut unexpected,
        6,
        "softened convergence",
        t,
        outcome(pass, o.detail),
    );

    let t = Instant::now();
    let o = unsoftened_scan();
    let pass = o.pass && t.elapsed().as_secs_f64() < 60.0;
    report(
        &mut unexpected,
        7,
        "unsoftened non-Hadamard evidence",
        t,
        outcome(pass, o.detail),
    );

    let t = Instant::now();
    report(
        &mut unexpected,
        8,
        "fluctuation dichotomy",
        t,
        fluctuation_dichotomy(&softened),
    );

    let t = Instant::now();
    let o = oracle_equivalence();
    let pass = o.pass && t.elapsed().as_secs_f64() < 30.0;
    report(
        &mut unexpected,
        9,
        "oracle equivalence",
        t,
        outcome(pass, o.detail),
    );

    let t = Instant::now();
    report(
        &mut unexpected,
        10,
        "large-slab limit",
        t,
        large_slab_limit(),
    );

    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (known failures: {KNOWN_RED:?})");
    } else {
        println!("acceptance: unexpected results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
