//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qobs_core::clock::{
    classify, evolve_analytic, evolve_monte_carlo, reparametrize_events, rescale_class,
    retention_time, ClockModel, QuantumSystem, Reparametrization, DEFAULT_THRESHOLD,
};
use qobs_core::glianet::{
    ek_comparison, gauge_transform, hamiltonian_full, hamiltonian_quenched, hebbian_couplings,
    rolldown, spike_pattern, GaugeTransformation, GlialField, NeuralState, QuenchedCouplings,
    EK_SIZES,
};
use qobs_core::minisuperspace::{
    amplitude_transport, evolve_matter, hamilton_jacobi_defect, hamilton_jacobi_phase,
    wdw_residual, MatterScaling, MiniSuperspaceModel,
};
use qobs_core::numerics::linspace;
use qobs_core::numerics::rng::stream;
use qobs_core::oracle::{
    cap_barrier, default_cap, inverted_parabola_transmission, transfer_matrix_transmission,
};
use qobs_core::wkb::{
    activation_rate, activation_rate_quadrature, barrier_exponent_closed_form, current_ratio,
    BarrierProblem, WkbSolution,
};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn closed_form_vs_quadrature() -> Check {
    let vals = [0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &j0 in &vals {
        for &h0 in &vals {
            for &mu in &vals {
                let bp = BarrierProblem::new(1.0, mu, j0, h0).map_err(e)?;
                let closed = activation_rate(&bp);
                let quad = activation_rate_quadrature(&bp).map_err(e)?;
                worst = worst.max(((quad - closed) / closed).abs());
                count += 1;
            }
        }
    }
    ensure(worst < 1e-8, format!("max relative deviation {worst:.2e} over {count} points (< 1e-8)"))
}

fn wkb_vs_oracle() -> Check {
    let two_lambda = linspace(6.0, 20.0, 12);
    let mut worst_wkb: f64 = 0.0;
    let mut worst_parabola: f64 = 0.0;
    for &tl in &two_lambda {
        // Λ = (πH₀/2)·√2 at ħ = μ = J₀ = 1.
        let h0 = tl / (std::f64::consts::PI * 2f64.sqrt());
        let bp = BarrierProblem::new(1.0, 1.0, 1.0, h0).map_err(e)?;
        let lambda = barrier_exponent_closed_form(&bp);
        let pot = cap_barrier(&bp, default_cap(&bp), 20_000).map_err(e)?;
        let t = transfer_matrix_transmission(&pot, 0.0, 1.0, 1.0).map_err(e)?.t_numeric;
        let t_wkb = activation_rate(&bp);
        let t_par = inverted_parabola_transmission(lambda);
        worst_wkb = worst_wkb.max(((t - t_wkb) / t_wkb).abs());
        worst_parabola = worst_parabola.max(((t - t_par) / t_par).abs());
    }
    ensure(
        worst_wkb <= 0.3 && worst_parabola <= 0.1,
        format!(
            "{} points, 2Λ in [6, 20]: max |T_num/T_wkb − 1| = {worst_wkb:.3} (≤ 0.3), max |T_num/T_parabola − 1| = {worst_parabola:.3} (≤ 0.1)",
            two_lambda.len()
        ),
    )
}

fn current_ratio_identity() -> Check {
    let bp = BarrierProblem::new(1.0, 1.0, 1.0, 1.0).map_err(e)?;
    let r = current_ratio(&WkbSolution::new(&bp)).map_err(e)?;
    let expected = (-2.0 * barrier_exponent_closed_form(&bp)).exp();
    let dev = ((r.ratio - expected) / expected).abs();
    ensure(dev < 1e-4, format!("j_out/j_in = {:.10e}, exp(−2Λ) = {expected:.10e}, deviation {dev:.2e} (< 1e-4)", r.ratio))
}

fn dephasing_oracle() -> Check {
    let sys = QuantumSystem::equal_superposition(vec![0.0, 1.0], 1.0).map_err(e)?;
    let clock = ClockModel::broken(1.0, 0.1).map_err(e)?;
    let steps = 40;
    let mc = evolve_monte_carlo(&sys, &clock, steps, 100_000, 20_240_601).map_err(e)?;
    let measured = mc.fitted_damping_exponent(0, steps);
    let expected = 0.5 * (1.0f64 * 0.1).powi(2);
    let rel = ((measured - expected) / expected).abs();
    let analytic = evolve_analytic(&sys, &clock, 400).map_err(e)?;
    let record = retention_time(&analytic, DEFAULT_THRESHOLD).map_err(e)?;
    let steps_to_retain = record.retention_steps();
    ensure(
        rel < 0.02 && steps_to_retain == Some(200),
        format!(
            "Monte Carlo exponent {measured:.6e} vs {expected:.6e} (rel {rel:.2e}, < 2%); retention steps {steps_to_retain:?} (= 200)"
        ),
    )
}

fn rescaling_invariance() -> Check {
    let sys = QuantumSystem::equal_superposition(vec![0.0, 1.0, 2.5], 1.0).map_err(e)?;
    let clock = ClockModel::broken(1.0, 0.1).map_err(e)?;
    let base = evolve_analytic(&sys, &clock, 300).map_err(e)?;
    let mut records = vec![retention_time(&base, DEFAULT_THRESHOLD).map_err(e)?];
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 2.0, 10.0] {
        let (s2, c2) = rescale_class(&sys, &clock, lambda).map_err(e)?;
        let t2 = evolve_analytic(&s2, &c2, 300).map_err(e)?;
        for (a, b) in base.damping_exponents.iter().flatten().zip(t2.damping_exponents.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in base.phase_increments.iter().flatten().zip(t2.phase_increments.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        records.push(retention_time(&t2, DEFAULT_THRESHOLD).map_err(e)?);
    }
    let classes = classify(&records);
    ensure(
        worst <= 1e-12 && classes.len() == 1,
        format!("max sequence change {worst:.2e} (≤ 1e-12) for λ ∈ {{0.5, 2, 10}}; {} class(es) (= 1)", classes.len()),
    )
}

fn event_count_invariance() -> Check {
    let sys = QuantumSystem::equal_superposition(vec![0.0, 1.0], 1.0).map_err(e)?;
    let clock = ClockModel::broken(0.7, 0.05).map_err(e)?;
    let traj = evolve_analytic(&sys, &clock, 60).map_err(e)?;
    let count = traj.event_count();
    let mut rng = stream(6, 0);
    let mut changed = 0;
    for k in 0..20 {
        let f = if k % 2 == 0 {
            let degree = 1 + k % 5;
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(0.05..3.0)).collect();
            Reparametrization::polynomial(coeffs)
        } else {
            Reparametrization::exponential(rng.random_range(0.1..3.0), rng.random_range(0.01..0.2), rng.random_range(-5.0..5.0))
        };
        let r = reparametrize_events(&traj, &f).map_err(e)?;
        let same_steps = r.events.iter().zip(&traj.events).all(|(a, b)| a.step == b.step);
        let ordered = r.events.windows(2).all(|w| w[0].time < w[1].time);
        if r.event_count() != count || !same_steps || !ordered {
            changed += 1;
        }
    }
    ensure(changed == 0, format!("{count} events; 20 reparametrizations, {changed} changed the count or order"))
}

fn gauge_invariance() -> Check {
    let mut worst: f64 = 0.0;
    let mut identity_exact = true;
    for (n, big_n) in [(4usize, 4usize), (8, 8)] {
        for trial in 0..=50u64 {
            let mut rng = stream(7, ((n as u64) << 32) | trial);
            let phi = NeuralState::random(&mut rng, n, big_n);
            let g = GlialField::random(&mut rng, n, big_n, 1.0 / (big_n as f64).sqrt());
            let before = hamiltonian_full(&phi, &g, 0.0).map_err(e)?;
            if trial == 0 {
                let (p2, g2) = gauge_transform(&phi, &g, &GaugeTransformation::identity(n, big_n)).map_err(e)?;
                identity_exact &= hamiltonian_full(&p2, &g2, 0.0).map_err(e)? == before;
                continue;
            }
            let o = GaugeTransformation::random(&mut rng, n, big_n);
            let (p2, g2) = gauge_transform(&phi, &g, &o).map_err(e)?;
            let after = hamiltonian_full(&p2, &g2, 0.0).map_err(e)?;
            worst = worst.max((after - before).abs() / before.abs());
        }
    }
    ensure(
        worst < 1e-10 && identity_exact,
        format!("max relative change {worst:.2e} over 2×50 transformations (< 1e-10); identity exact: {identity_exact}"),
    )
}

fn ek_trend() -> Check {
    let mut medians = Vec::new();
    let mut parts = Vec::new();
    for &big_n in &EK_SIZES {
        let s = ek_comparison(4, big_n, 1.0, 8, 20_000, 8).map_err(e)?;
        parts.push(format!("N={big_n}: {:.3e} ± {:.1e}", s.median_discrepancy, s.median_standard_error));
        medians.push((s.median_discrepancy, s.median_standard_error));
    }
    let trend = medians.windows(2).all(|w| w[1].0 <= w[0].0);
    let (last, se) = medians[medians.len() - 1];
    let near_zero = last <= 2.0 * se;
    ensure(
        trend || near_zero,
        format!("median discrepancy {}; non-increasing: {trend}, N=32 within 2 SE of 0: {near_zero}", parts.join(", ")),
    )
}

fn pattern(rng: &mut impl Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn hopfield_properties() -> Check {
    let n = 16;
    let mut violations = 0;
    for seed in 0..100u64 {
        let mut rng = stream(9, seed);
        let stored: Vec<Vec<i8>> = (0..3).map(|_| pattern(&mut rng, n)).collect();
        let jc = hebbian_couplings(&stored).map_err(e)?;
        let start = pattern(&mut rng, n);
        let t = rolldown(&start, &jc, 1000).map_err(e)?;
        if t.energies.windows(2).any(|w| w[1] > w[0]) {
            violations += 1;
        }
    }
    let mut rng = stream(9, 1000);
    let xi = pattern(&mut rng, n);
    let jc = hebbian_couplings(std::slice::from_ref(&xi)).map_err(e)?;
    let mut recovered = 0;
    for flip in 0..n {
        let mut start = xi.clone();
        start[flip] = -start[flip];
        if rolldown(&start, &jc, 10).map_err(e)?.final_state() == xi.as_slice() {
            recovered += 1;
        }
    }
    let energy = hamiltonian_quenched(&spike_pattern(&xi), &QuenchedCouplings::outer_product(std::slice::from_ref(&xi), 0.0).map_err(e)?)
        .map_err(e)?;
    ensure(
        violations == 0 && recovered == n && energy == -0.5,
        format!(
            "100 rolldowns, {violations} energy increases; {recovered}/{n} one-bit corruptions recovered; stored-pattern energy {energy}"
        ),
    )
}

fn minisuperspace_pipeline() -> Check {
    let matter = |a: f64| {
        DMatrix::from_row_slice(2, 2, &[
            Complex64::new(a, 0.0),
            Complex64::new(0.4, 0.1),
            Complex64::new(0.4, -0.1),
            Complex64::new(-a, 0.0),
        ])
    };
    let bare = MiniSuperspaceModel::new(|a| 4.0 * a * a, 1.0).map_err(e)?;
    let profile = hamilton_jacobi_phase(&bare, 1.0, 2.0, 1000).map_err(e)?;
    let hj = hamilton_jacobi_defect(&bare, &profile).map_err(e)?;
    let amp = amplitude_transport(&profile).map_err(e)?;
    let flux0 = amp[0] * amp[0] * profile.s_prime[0];
    let conservation = amp
        .iter()
        .zip(&profile.s_prime)
        .map(|(x, d)| (x * x * d / flux0 - 1.0).abs())
        .fold(0.0, f64::max);

    let chi0 = DVector::from_vec(vec![Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)]);
    let fixed = bare.clone().with_matter(2, matter, MatterScaling::Fixed);
    let times = linspace(0.0, 0.15, 31);
    let unit = evolve_matter(&fixed, 1.0, (0.5, 100.0), 0.0, &times, &chi0, 64).map_err(e)?;
    let drift = unit.max_norm_drift;

    let lapsed = fixed.clone().with_lapse(|t: f64| 1.0 + 0.5 * t.sin());
    let tau: Vec<f64> = times.iter().map(|t| t + 0.5 * (1.0 - t.cos())).collect();
    let with_lapse = evolve_matter(&lapsed, 1.0, (0.5, 100.0), 0.0, &times, &chi0, 64).map_err(e)?;
    let reparam = evolve_matter(&fixed, 1.0, (0.5, 100.0), 0.0, &tau, &chi0, 64).map_err(e)?;
    let covariance = with_lapse
        .chi
        .iter()
        .zip(&reparam.chi)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);

    let scaled = bare.with_matter(2, matter, MatterScaling::ProportionalToHbar);
    let report = wdw_residual(&scaled, (1.0, 2.0), 1001, &chi0, &[0.1, 0.05, 0.025]).map_err(e)?;
    let slope = report.slope.ok_or("no slope")?;
    let coarse = report.entries.iter().any(|x| x.coarse);
    ensure(
        hj < 1e-8 && conservation < 1e-8 && drift < 1e-8 && covariance < 1e-8 && (slope - 2.0).abs() <= 0.2 && !coarse,
        format!(
            "HJ defect {hj:.1e}, A²S′ {conservation:.1e}, norm drift {drift:.1e}, lapse covariance {covariance:.1e} (all < 1e-8); residual slope {slope:.4} (2 ± 0.2), coarse grid flagged: {coarse}"
        ),
    )
}

fn qobs(dir: &Path, args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_qobs"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .map_err(e)
}

/// Sorted (name, bytes) of every file in `dir`.
fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(e)? {
        let entry = entry.map_err(e)?;
        files.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path()).map_err(e)?));
    }
    files.sort();
    Ok(files)
}

fn column(csv: &[u8], name: &str) -> Result<Vec<f64>, String> {
    let text = String::from_utf8_lossy(csv);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty CSV")?.split(',').collect();
    let i = header.iter().position(|h| *h == name).ok_or(format!("no column {name}"))?;
    lines
        .map(|l| l.split(',').nth(i).ok_or("short row".to_string())?.parse::<f64>().map_err(e))
        .collect()
}

fn file<'a>(snap: &'a [(String, Vec<u8>)], name: &str) -> Result<&'a [u8], String> {
    snap.iter()
        .find(|(n, _)| n == name)
        .map(|(_, b)| b.as_slice())
        .ok_or(format!("{name} not written"))
}

fn cli_determinism() -> Check {
    let root = tempfile::tempdir().map_err(e)?;
    let examples: [(&str, &[&str]); 5] = [
        ("tunnel", &["tunnel", "--hbar", "1", "--mu", "1", "--j0", "1", "--h0", "1", "--oracle"]),
        ("clock", &["clock", "--energies", "0,1", "--sigma", "0.1", "--mu0", "1", "--steps", "400"]),
        ("malformed", &["tunnel", "--hbar", "1", "--bogus"]),
        ("sweep1", &["sweep", "h0=0.5:2:4"]),
        ("sweep2", &["sweep", "h0=0.5:2:3", "mu=1:2:3"]),
    ];
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (label, args) in examples {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let dir = root.path().join(format!("{label}-{rep}"));
            let out = qobs(&dir, args)?;
            runs.push((out.status.code(), snapshot(&dir)?));
        }
        if runs[0] != runs[1] {
            failures.push(format!("{label}: reruns differ"));
        }
        let (code, snap) = &runs[0];
        match label {
            "tunnel" => {
                let csv = file(snap, "tunnel.csv")?;
                let closed = column(csv, "T_closed")?[0];
                let numeric = column(csv, "T_numeric")?[0];
                if (closed - 1.1762e-2).abs() > 1e-6 || ((numeric - 1.1625e-2) / 1.1625e-2).abs() > 0.1 {
                    failures.push(format!("tunnel: T_closed {closed:.4e}, T_numeric {numeric:.4e}"));
                }
                notes.push(format!("T_closed {closed:.4e}, T_numeric {numeric:.4e}"));
            }
            "clock" => {
                let steps = column(file(snap, "clock_summary.csv")?, "retention_steps")?[0];
                if steps != 200.0 {
                    failures.push(format!("clock: retention {steps}"));
                }
                notes.push(format!("retention {steps}"));
            }
            "malformed" => {
                if *code != Some(2) || !snap.is_empty() {
                    failures.push(format!("malformed: exit {code:?}, {} files", snap.len()));
                }
                notes.push(format!("malformed exit {code:?}, {} files", snap.len()));
            }
            "sweep1" => {
                let t = column(file(snap, "sweep.csv")?, "T_closed")?;
                if t.len() != 4 || t.windows(2).any(|w| w[1] >= w[0]) {
                    failures.push(format!("sweep1: T = {t:?}"));
                }
                notes.push(format!("{} rows, T decreasing", t.len()));
            }
            _ => {
                let csv = file(snap, "sweep.csv")?;
                let h0 = column(csv, "h0")?;
                let mu = column(csv, "mu")?;
                let expected: Vec<(f64, f64)> =
                    [0.5, 1.25, 2.0].iter().flat_map(|&h| [1.0, 1.5, 2.0].map(|m| (h, m))).collect();
                let got: Vec<(f64, f64)> = h0.into_iter().zip(mu).collect();
                if got != expected {
                    failures.push(format!("sweep2: order {got:?}"));
                }
                notes.push(format!("{} rows lexicographic", got.len()));
            }
        }
    }

    // Plot examples: log–log slope annotation, single-row rejection.
    let dir = root.path().join("cosmo");
    for rep in 0..2 {
        let out = qobs(&dir, &["cosmo"])?;
        if !out.status.success() {
            failures.push(format!("cosmo run {rep} exited {:?}", out.status.code()));
        }
    }
    let svg = |name: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_qobs"))
            .args(["plot", "--input"])
            .arg(dir.join("cosmo_residual.csv"))
            .args(["--x", "hbar", "--y", "residual", "--log-x", "--log-y", "--output"])
            .arg(dir.join(name))
            .output()
            .map_err(e)?;
        if !out.status.success() {
            return Err(format!("plot exited {:?}", out.status.code()));
        }
        std::fs::read(dir.join(name)).map_err(e)
    };
    let (a, b) = (svg("a.svg")?, svg("b.svg")?);
    let text = String::from_utf8_lossy(&a);
    let slope: f64 = text
        .split("slope = ")
        .nth(1)
        .and_then(|s| s.split('<').next())
        .and_then(|s| s.trim().parse().ok())
        .ok_or("no slope annotation")?;
    if a != b || (slope - 2.0).abs() > 0.2 {
        failures.push(format!("plot: identical {}, slope {slope}", a == b));
    }
    notes.push(format!("plot slope {slope:.3}"));
    std::fs::write(root.path().join("one.csv"), "x,y\r\n1,2\r\n").map_err(e)?;
    let one = Command::new(env!("CARGO_BIN_EXE_qobs"))
        .args(["plot", "--x", "x", "--y", "y", "--input"])
        .arg(root.path().join("one.csv"))
        .output()
        .map_err(e)?;
    if one.status.code() != Some(2) {
        failures.push(format!("single-row plot exited {:?}", one.status.code()));
    }

    if failures.is_empty() {
        Ok(format!("all examples byte-identical on rerun; {}", notes.join("; ")))
    } else {
        Err(failures.join("; "))
    }
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 11] = [
        (1, "closed form vs quadrature", 1, closed_form_vs_quadrature),
        (2, "WKB vs transfer-matrix oracle", 30, wkb_vs_oracle),
        (3, "current-ratio identity", 1, current_ratio_identity),
        (4, "dephasing oracle", 10, dephasing_oracle),
        (5, "quantum-class rescaling", 1, rescaling_invariance),
        (6, "event-count gauge invariance", 1, event_count_invariance),
        (7, "network gauge invariance", 30, gauge_invariance),
        (8, "single-site reduction trend", 300, ek_trend),
        (9, "Hopfield properties", 5, hopfield_properties),
        (10, "mini-superspace pipeline", 30, minisuperspace_pipeline),
        (11, "CLI determinism", 60, cli_determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name}: {detail} ({:.2} s, budget {budget} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
