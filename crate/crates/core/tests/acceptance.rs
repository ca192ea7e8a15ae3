//! End-to-end acceptance checks.
//!
//! Runs every check, prints one `PASS`/`FAIL` line each followed by the
//! measured values, and exits non-zero if any check failed. Statistical bands
//! for the seeded ensembles were fixed from a frozen-seed oracle run
//! (seed 2718, n = 10⁴) before this suite was written; they are pinned below
//! and must not be retuned to make a run pass.

use std::path::Path;
use std::process::{Command, ExitCode};

use pilotline::dynamics::{
    conserved_g_reduced, integrate, orbit_turning_points, region_minimum, stationary_points,
    ModeSpectrum, PhaseState, Region, PRINTED_INNER_CONSTANT, PRINTED_OUTER_CONSTANT,
};
use pilotline::ensemble::{
    evolve_to_snapshots, marginal_histogram, sample, sample_equilibrium, sample_widened, Axis,
    Ensemble,
};
use pilotline::spectra::{
    convolve_density_at, mode_count, ActualSpectrum, ModeCountOptions, SpectrumHistogram,
    DEFAULT_BINS, DEFAULT_RANGE,
};
use pilotline::stats::{ks_critical_p01, ks_standard_normal, mean, std_dev};
use pilotline::{DispersionModel, IntegratorSettings};

// ── Pinned tolerances and oracle bands ──────────────────────────────────

/// Frozen seed of every seeded ensemble check.
const SEED: u64 = 2718;
const N: usize = 10_000;

/// Five decimals for the region constants, six for the stationary points:
/// agreement within one unit in the last printed place.
const CONSTANT_TOL: f64 = 1e-5;
const STATIONARY_TOL: f64 = 1e-6;

const G_DRIFT_REDUCED: f64 = 1e-6;
const G_DRIFT_FULL: f64 = 1e-5;

/// Centring band for the w = 4 profile at T = 1000: three standard errors of
/// the mean, 3 · 3.70 / √10⁴, rounded up. Oracle seeds 1–7 and 2718 all give
/// |mean| ≤ 0.063.
const W4_CENTRE_BAND: f64 = 0.12;

/// Frozen-seed oracle values (seed 2718, n = 10⁴, default integrator), each
/// reproduced to ±ORACLE_TOL.
const ORACLE_TOL: f64 = 0.01;
const W4_T5_MEAN: f64 = 4.634;
const W4_T5_STD: f64 = 2.663;
const W4_T1000_STD: f64 = 3.698;

const MULTINOMIAL_SIGMAS: f64 = 4.0;

const DELTA_LINE_TOL: f64 = 1e-8;
const VARIANCE_REL_TOL: f64 = 1e-6;

/// Half-width oracle: relative agreement required with a candidate.
const HALF_WIDTH_TOL: f64 = 1e-3;

// ── Harness ─────────────────────────────────────────────────────────────

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn yp_hist(e: &Ensemble) -> SpectrumHistogram {
    marginal_histogram(e, Axis::Yp, DEFAULT_BINS, DEFAULT_RANGE).unwrap()
}

// ── 1. Named constants ──────────────────────────────────────────────────

fn named_constants() -> Outcome {
    let start = std::time::Instant::now();
    let (_, outer) = region_minimum(Region::Outer);
    let (_, inner) = region_minimum(Region::Inner);
    let pts = stationary_points();
    let (q_out, q_in) = (pts[3].0, pts[2].0);
    let symmetric = pts[0].0 == -q_out && pts[1].0 == -q_in;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (outer - PRINTED_OUTER_CONSTANT).abs() <= CONSTANT_TOL
        && (inner - PRINTED_INNER_CONSTANT).abs() <= CONSTANT_TOL
        && (q_out - 1.510223).abs() <= STATIONARY_TOL
        && (q_in - 0.468213).abs() <= STATIONARY_TOL
        && symmetric
        && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "outer min {outer:.7}, inner min {inner:.7}, stationary ±{q_out:.8}, ±{q_in:.8}, {elapsed:.3} s"
        ),
    )
}

// ── 2 & 3. Conservation and barrier invariance ──────────────────────────

struct ConservationRun {
    max_drift_reduced: f64,
    max_drift_full: f64,
    sign_flips: usize,
    steps: usize,
}

fn signature(s: &PhaseState) -> Vec<bool> {
    let mut sig = vec![s.q > 0.0, s.q.abs() > 1.0];
    sig.extend(s.vacuum.iter().map(|&v| v > 0.0));
    sig
}

fn conservation_runs() -> ConservationRun {
    let settings = IntegratorSettings {
        rel_tol: 1e-10,
        ..IntegratorSettings::default()
    };
    let mut run = ConservationRun {
        max_drift_reduced: 0.0,
        max_drift_full: 0.0,
        sign_flips: 0,
        steps: 0,
    };
    // start points spread over all four regions, tails included
    let reduced = sample_widened(100, 2.0, SEED).unwrap();
    let ratios: Vec<f64> = (0..10).map(|k| 0.5 + 0.15 * k as f64).collect();
    let modes = ModeSpectrum::new(ratios).unwrap();
    let full = sample(100, 2.0, 10, SEED).unwrap();

    for (ens, modes, full_run) in [
        (&reduced, ModeSpectrum::empty(), false),
        (&full, modes, true),
    ] {
        for p in ens.points() {
            let traj = integrate(p, 100.0, &settings, &modes).unwrap();
            let drift = traj.max_g_drift();
            if full_run {
                run.max_drift_full = run.max_drift_full.max(drift);
            } else {
                run.max_drift_reduced = run.max_drift_reduced.max(drift);
            }
            let sig0 = signature(&traj.states[0]);
            run.sign_flips += traj.states.iter().filter(|s| signature(s) != sig0).count();
            run.steps += traj.len();
        }
    }
    run
}

fn conservation(run: &ConservationRun) -> Outcome {
    outcome(
        run.max_drift_reduced < G_DRIFT_REDUCED && run.max_drift_full < G_DRIFT_FULL,
        format!(
            "100 reduced trajectories max |ΔG| = {:.2e} (< {G_DRIFT_REDUCED:e}); 100 ten-mode trajectories max |ΔG_full| = {:.2e} (< {G_DRIFT_FULL:e})",
            run.max_drift_reduced, run.max_drift_full
        ),
    )
}

fn barrier_invariance(run: &ConservationRun) -> Outcome {
    outcome(
        run.sign_flips == 0,
        format!(
            "{} sign flips of Q, |Q|−1 or Q_k over {} accepted steps",
            run.sign_flips, run.steps
        ),
    )
}

// ── 4. Equivariance ─────────────────────────────────────────────────────

fn equivariance() -> Outcome {
    let start = std::time::Instant::now();
    let times = [5.0, 10.0, 50.0, 100.0];
    let e = sample_equilibrium(N, SEED).unwrap();
    let snaps = evolve_to_snapshots(
        &e,
        &times,
        &IntegratorSettings::default(),
        &ModeSpectrum::empty(),
    )
    .unwrap();
    let crit = ks_critical_p01(N);
    let ks: Vec<f64> = snaps
        .ensembles
        .iter()
        .map(|s| ks_standard_normal(&s.yp_values()))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        ks.iter().all(|&d| d < crit) && elapsed < 60.0,
        format!(
            "KS at T = 5/10/50/100: {} (critical {crit:.4}), {elapsed:.1} s",
            ks.iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>()
                .join("/")
        ),
    )
}

// ── 5 & 7. Widened ensemble, w = 4 ──────────────────────────────────────

fn broadened_profile(snaps: &[Ensemble]) -> Outcome {
    let (t5, t1000) = (&snaps[0], &snaps[3]);
    let (m5, s5) = (mean(&t5.yp_values()), std_dev(&t5.yp_values()));
    let (m1000, s1000) = (mean(&t1000.yp_values()), std_dev(&t1000.yp_values()));
    let direction = m5 > 0.0 && s5 > 1.0 && m1000.abs() < W4_CENTRE_BAND && s1000 > 1.0;
    let pinned = (m5 - W4_T5_MEAN).abs() <= ORACLE_TOL
        && (s5 - W4_T5_STD).abs() <= ORACLE_TOL
        && (s1000 - W4_T1000_STD).abs() <= ORACLE_TOL;
    outcome(
        direction && pinned,
        format!(
            "T=5 mean {m5:.4} std {s5:.4}; T=1000 mean {m1000:.4} (|·| < {W4_CENTRE_BAND}) std {s1000:.4}; oracle match {pinned}"
        ),
    )
}

/// Largest bin-wise deviation between two equal-size histograms in units of
/// the pooled two-sample multinomial standard deviation; the out-of-range
/// mass is treated as one more category.
fn worst_multinomial_z(a: &SpectrumHistogram, b: &SpectrumHistogram, n: usize) -> (f64, f64) {
    let mut ma = a.masses();
    let mut mb = b.masses();
    ma.push(a.out_of_range_mass());
    mb.push(b.out_of_range_mass());
    let mut worst = (0.0, f64::NAN);
    for (i, (pa, pb)) in ma.iter().zip(&mb).enumerate() {
        let p = 0.5 * (pa + pb);
        let sigma = (2.0 * p * (1.0 - p) / n as f64).sqrt();
        if sigma > 0.0 && (pa - pb).abs() / sigma > worst.0 {
            let where_ = if i < a.bins() {
                a.center(i)
            } else {
                f64::INFINITY
            };
            worst = ((pa - pb).abs() / sigma, where_);
        }
    }
    worst
}

fn stationary_profile(snaps: &[Ensemble]) -> Outcome {
    let (h100, h200, h1000) = (yp_hist(&snaps[1]), yp_hist(&snaps[2]), yp_hist(&snaps[3]));
    let (z, at) = worst_multinomial_z(&h100, &h1000, N);
    let (z200, at200) = worst_multinomial_z(&h200, &h1000, N);
    outcome(
        z <= MULTINOMIAL_SIGMAS,
        format!(
            "T=100 vs T=1000 worst bin z = {z:.2} at Y′ ≈ {at:.1} (band {MULTINOMIAL_SIGMAS}σ); diagnostic only: T=200 vs T=1000 worst z = {z200:.2} at Y′ ≈ {at200:.1}"
        ),
    )
}

// ── 6. Narrowed ensemble, w = 1/4 ───────────────────────────────────────

fn narrowed_profile() -> Outcome {
    let times = [5.0, 10.0, 15.0, 20.0, 100.0];
    let e = sample_widened(N, 0.25, SEED).unwrap();
    let snaps = evolve_to_snapshots(
        &e,
        &times,
        &IntegratorSettings::default(),
        &ModeSpectrum::empty(),
    )
    .unwrap();
    let opts = ModeCountOptions::default();
    let stds: Vec<f64> = snaps.ensembles[..4]
        .iter()
        .map(|s| std_dev(&s.yp_values()))
        .collect();
    let modes: Vec<usize> = snaps.ensembles[..4]
        .iter()
        .map(|s| mode_count(&yp_hist(s), &opts))
        .collect();
    let ks100 = ks_standard_normal(&snaps.ensembles[4].yp_values());
    let crit = ks_critical_p01(N);

    let narrow = stds.iter().all(|&s| s < 1.0);
    let double_bump = modes[1] == 2;
    let split = modes[2] >= 2 && modes[3] >= 2;
    let residual = if ks100 < crit {
        "relaxed to within p = 0.01"
    } else {
        "residual nonequilibrium survives"
    };
    outcome(
        narrow && double_bump && split,
        format!(
            "std T=5/10/15/20: {} (< 1: {narrow}); modes T=5/10/15/20: {:?} (T=10 == 2: {double_bump}; T=15,20 ≥ 2: {split}); T=100 KS {ks100:.4} vs {crit:.4}: {residual}",
            stds.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join("/"),
            modes
        ),
    )
}

// ── 8. Convolution identities ───────────────────────────────────────────

fn convolution_identities() -> Outcome {
    let model = DispersionModel::new(130.0, 10.0).unwrap();
    let line = ActualSpectrum::Line { energy: 130.0 };
    let mut delta_err: f64 = 0.0;
    for k in -60..=60 {
        let e = 130.0 + 0.1 * model.delta_e() * k as f64;
        let got = convolve_density_at(&line, &model, e).unwrap();
        delta_err = delta_err.max((got - model.dispersion_pdf(e)).abs());
    }

    // variance of the blurred Gaussian by quadrature of its density
    let (center, sigma) = (130.0, 7.0);
    let gauss = ActualSpectrum::GaussianLine { center, sigma };
    let total_sigma = (sigma * sigma + model.delta_e().powi(2)).sqrt();
    let (lo, hi) = (center - 12.0 * total_sigma, center + 12.0 * total_sigma);
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let x = lo + h * i as f64;
        let wgt = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = convolve_density_at(&gauss, &model, x).unwrap() * wgt * h / 3.0;
        m0 += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    let mu = m1 / m0;
    let var = m2 / m0 - mu * mu;
    let var_rel = (var - total_sigma * total_sigma).abs() / (total_sigma * total_sigma);

    let mapping = [(5.0, 0.2), (10.0, 0.1), (100.0, 0.01)]
        .iter()
        .all(|&(t, frac)| {
            let m = DispersionModel::new(1.0, t).unwrap();
            let back = DispersionModel::from_fractional_dispersion(1.0, frac).unwrap();
            m.fractional_dispersion() == frac && back.resolution() == t
        });
    outcome(
        delta_err <= DELTA_LINE_TOL && var_rel <= VARIANCE_REL_TOL && (m0 - 1.0).abs() < 1e-8 && mapping,
        format!(
            "delta line max error {delta_err:.1e}; blurred Gaussian variance rel. error {var_rel:.1e}, mass {m0:.10}; T = 5/10/100 ↔ 20%/10%/1% exact: {mapping}"
        ),
    )
}

// ── 9. Half-width ───────────────────────────────────────────────────────

fn half_width() -> Outcome {
    let g = 2.12105;
    let (_, outside) = orbit_turning_points(g, Region::Outer).unwrap();
    let start = PhaseState::new(outside, 0.0);
    let traj = integrate(
        &start,
        60.0,
        &IntegratorSettings::default(),
        &ModeSpectrum::empty(),
    )
    .unwrap();
    let on_contour = (conserved_g_reduced(&start).unwrap() - g).abs() < 1e-9;
    let measured = traj.max_abs_yp();
    let root = (g - PRINTED_OUTER_CONSTANT).sqrt();
    let sqrt2 = std::f64::consts::SQRT_2 * root;
    let two_sqrt2 = 2.0 * std::f64::consts::SQRT_2 * root;
    let near = |x: f64| (measured - x).abs() <= HALF_WIDTH_TOL * x;
    let (a, b) = (near(sqrt2), near(two_sqrt2));
    let verdict = match (a, b) {
        (true, false) => {
            "agrees with the √2 prefactor; the printed 2√2 form overstates the half-width by 2"
        }
        (false, true) => "agrees with the printed 2√2 prefactor",
        _ => "ambiguous",
    };
    outcome(
        on_contour && (a ^ b),
        format!("max |Y′| = {measured:.6}; √2·√(G−c) = {sqrt2:.6}, 2√2·√(G−c) = {two_sqrt2:.6}: {verdict}"),
    )
}

// ── 10. Determinism across thread counts ────────────────────────────────

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let work = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for threads in [1, 4] {
        let dir = work.path().join(format!("threads{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_pilotline"))
            .args([
                "run",
                "fig2",
                "--seed",
                &SEED.to_string(),
                "--threads",
                &threads.to_string(),
                "--out",
            ])
            .arg(&dir)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        if !status.success() {
            return outcome(
                false,
                format!("fig2 with --threads {threads} exited with {status}"),
            );
        }
        dirs.push(dir);
    }
    let (a, b) = (csv_files(&dirs[0]), csv_files(&dirs[1]));
    let bytes: usize = a.iter().map(|(_, d)| d.len()).sum();
    outcome(
        !a.is_empty() && a == b,
        format!(
            "{} CSV files, {bytes} bytes; --threads 1 vs 4 identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((name, o));
    };

    report("1 named constants", named_constants());
    let run = conservation_runs();
    report("2 conservation of G", conservation(&run));
    report("3 barrier invariance", barrier_invariance(&run));
    report("4 equivariance", equivariance());

    let wide = sample_widened(N, 4.0, SEED).unwrap();
    let wide = evolve_to_snapshots(
        &wide,
        &[5.0, 100.0, 200.0, 1000.0],
        &IntegratorSettings::default(),
        &ModeSpectrum::empty(),
    )
    .unwrap()
    .ensembles;
    report("5 broadened profile (w = 4)", broadened_profile(&wide));
    report("6 narrowed profile (w = 1/4)", narrowed_profile());
    report("7 stationary profile (w = 4)", stationary_profile(&wide));
    report("8 convolution identities", convolution_identities());
    report("9 half-width", half_width());
    report("10 determinism", determinism());

    let failed: Vec<_> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    println!(
        "\n{} of {} acceptance checks passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join("; "));
        ExitCode::FAILURE
    }
}
