//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use cooploc::glrr::{recover, BatchWindow};
use cooploc::graph::{build_connectivity, connected_components, extend_with_anchors};
use cooploc::harness::{run_experiment, ExperimentConfig, FleetSource, Method, MethodSelection};
use cooploc::kinematics::{generate_fleet, step_ctrv, FleetConfig, VehiclePose};
use cooploc::numerics::{least_squares, svd, svt_truncate};
use cooploc::sensing::NoiseParams;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn fleet_config(vehicles: usize, ticks: usize, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        fleet: FleetSource::Generated(FleetConfig {
            vehicles,
            ticks,
            ..FleetConfig::default()
        }),
        trials,
        seed,
        ..ExperimentConfig::default()
    }
}

fn reduction(cfg: &ExperimentConfig, m: Method) -> Result<f64, String> {
    let out = run_experiment(cfg).map_err(|e| e.to_string())?;
    out.mean_reduction(m).ok_or_else(|| format!("no reduction for {m}"))
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zero_noise_exactness() -> Check {
    let mut cfg = fleet_config(20, 60, 3, 11);
    cfg.noise = NoiseParams::noiseless();
    cfg.s = 10;
    cfg.tau = 10;
    let FleetSource::Generated(f) = &cfg.fleet else { unreachable!() };
    for t in 0..cfg.trials {
        let fleet = generate_fleet(f, cfg.seed ^ t as u64).map_err(|e| e.to_string())?;
        let g = build_connectivity(&fleet.positions(0), 20.0, 6).map_err(|e| e.to_string())?;
        if connected_components(&g).len() != 1 {
            return Err(format!("trial {t} fleet is not connected"));
        }
    }
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let gr = out.report(Method::GrCl).unwrap().msle;
    let gl = out.report(Method::GlrrCl).unwrap().msle;
    ensure(gr <= 1e-10 && gl <= 1e-10, format!("MSLE gr-cl {gr:.3e}, glrr-cl {gl:.3e} m^2"))
}

fn gps_baseline() -> Check {
    let mut cfg = fleet_config(20, 500, 12, 21);
    cfg.method = MethodSelection::Gps;
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let r = out.report(Method::Gps).unwrap();
    ensure(
        r.sample_count() >= 100_000 && (14.5..=16.0).contains(&r.msle),
        format!("GPS MSLE {:.3} m^2 over {} samples", r.msle, r.sample_count()),
    )
}

fn grcl_reproduction() -> Check {
    let mut cfg = fleet_config(20, 500, 50, 31);
    cfg.method = MethodSelection::GrCl;
    let r = reduction(&cfg, Method::GrCl)?;
    ensure((80.0..=93.0).contains(&r), format!("GR-CL reduction {r:.2}%"))
}

fn glrr_reproduction() -> Check {
    let cfg = fleet_config(25, 500, 50, 41);
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let gr = out.mean_reduction(Method::GrCl).unwrap();
    let gl = out.mean_reduction(Method::GlrrCl).unwrap();
    ensure(
        (88.0..=97.0).contains(&gl) && gl - gr >= 2.0,
        format!("GLRR-CL {gl:.2}%, GR-CL {gr:.2}%, gap {:.2} points", gl - gr),
    )
}

fn small_fleet_parity() -> Check {
    let cfg = fleet_config(5, 500, 50, 51);
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let gr = out.mean_reduction(Method::GrCl).unwrap();
    let gl = out.mean_reduction(Method::GlrrCl).unwrap();
    ensure(
        (gl - gr).abs() <= 3.0,
        format!("GLRR-CL {gl:.2}%, GR-CL {gr:.2}%, gap {:.2} points", gl - gr),
    )
}

fn rank_sweep() -> Check {
    let mut r = Vec::new();
    for s in [3, 5, 8] {
        let mut cfg = fleet_config(20, 500, 50, 61);
        cfg.s = s;
        cfg.method = MethodSelection::GlrrCl;
        r.push(reduction(&cfg, Method::GlrrCl)?);
    }
    ensure(
        r[0] >= r[1] - 1.0 && r[1] >= r[2] - 1.0,
        format!("s=3 {:.2}%, s=5 {:.2}%, s=8 {:.2}%", r[0], r[1], r[2]),
    )
}

fn objective(l: &DMatrix<f64>, x: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (l * x - b).norm_squared()
}

/// Alternating least squares over `X = P Qᵀ`, independent of the closed form.
fn alternating(l: &DMatrix<f64>, b: &DMatrix<f64>, mut p: DMatrix<f64>, iters: usize) -> DMatrix<f64> {
    let l_pinv = l.clone().pseudo_inverse(1e-12).unwrap();
    let mut q = DMatrix::zeros(b.ncols(), p.ncols());
    for _ in 0..iters {
        let m = l * &p;
        q = (m.clone().pseudo_inverse(1e-12).unwrap() * b).transpose();
        let qtq_inv = (q.transpose() * &q).pseudo_inverse(1e-12).unwrap();
        p = &l_pinv * b * &q * qtq_inv;
    }
    p * q.transpose()
}

fn closed_form_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst = f64::NEG_INFINITY;
    for inst in 0..20 {
        let n = rng.random_range(2..=6);
        let tau = rng.random_range(1..=4);
        let s = rng.random_range(1..=2usize.min(n).min(tau));
        let pts = random_points(&mut rng, n, 25.0);
        let g = build_connectivity(&pts, 20.0, 6).map_err(|e| e.to_string())?;
        let ids: Vec<usize> = (0..n).collect();
        let l = extend_with_anchors(&g, &ids).map_err(|e| e.to_string())?.matrix().clone();
        let b = random_matrix(&mut rng, 2 * n, tau) * 10.0;
        let window = BatchWindow {
            bx: b.clone(),
            by: b.clone(),
        };
        let factors = svd(&l).map_err(|e| e.to_string())?;
        let x = recover(&window, &factors, s).map_err(|e| e.to_string())?.x;
        let best = objective(&l, &x, &b);
        let scale = x.norm().max(1.0) / ((n * tau) as f64).sqrt();

        let mut rival = f64::INFINITY;
        for c in 0..10_000 {
            let p = DMatrix::from_fn(n, s, |_, _| rng.sample::<f64, _>(StandardNormal));
            let q = DMatrix::from_fn(tau, s, |_, _| rng.sample::<f64, _>(StandardNormal));
            let cand = if c % 2 == 0 {
                p * q.transpose() * scale
            } else {
                // rank-s perturbation of the closed form itself
                let eps = 10f64.powi(-(c % 7));
                svt_truncate(&(&x + p * q.transpose() * (eps * scale)), s).map_err(|e| e.to_string())?
            };
            rival = rival.min(objective(&l, &cand, &b));
        }
        let p0 = DMatrix::from_fn(n, s, |_, _| rng.sample::<f64, _>(StandardNormal));
        rival = rival.min(objective(&l, &alternating(&l, &b, p0, 300), &b));
        let svd_x = x.clone().svd(true, false);
        let mut order: Vec<usize> = (0..svd_x.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd_x.singular_values[j].total_cmp(&svd_x.singular_values[i]));
        let u = svd_x.u.unwrap();
        let warm = DMatrix::from_fn(n, s, |i, k| u[(i, order[k])] * svd_x.singular_values[order[k]]);
        rival = rival.min(objective(&l, &alternating(&l, &b, warm, 50), &b));

        let excess = (best - rival) / rival.max(f64::MIN_POSITIVE);
        worst = worst.max(excess);
        if excess > 1e-6 {
            return Err(format!("instance {inst}: closed form {best:.6e} vs rival {rival:.6e}"));
        }
    }
    Ok(format!("worst relative excess {worst:.2e} over 20 instances"))
}

fn kernel_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let (mut ls, mut ey, mut ode) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let m = rng.random_range(4..30);
        let n = rng.random_range(1..=m.min(12));
        let a = well_conditioned(&mut rng, m, n);
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x = least_squares(&a, &DVector::from_vec(b.clone())).map_err(|e| e.to_string())?;
        ls = ls.max(rel_err(x.as_slice(), &normal_equations(&a, &b)));

        let (r, c) = (rng.random_range(1..15), rng.random_range(1..15));
        let w = random_matrix(&mut rng, r, c);
        let s = rng.random_range(1..=r.min(c));
        let t = svt_truncate(&w, s).map_err(|e| e.to_string())?;
        let sigma = jacobi_singular_values(&w);
        let expected: f64 = sigma[s..].iter().map(|v| v * v).sum();
        let got = (&w - t).norm_squared();
        ey = ey.max((got - expected).abs() / expected.max(w.norm_squared() * 1e-12).max(f64::MIN_POSITIVE));

        let pose = VehiclePose::new(
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..30.0),
            rng.random_range(-1.0..1.0),
        );
        let dt = rng.random_range(0.05..1.0);
        let q = step_ctrv(&pose, dt).map_err(|e| e.to_string())?;
        let (ox, oy, _) = integrate_unicycle(pose.x, pose.y, pose.heading, pose.speed, pose.yaw_rate, dt, 2_000);
        ode = ode.max((q.x - ox).hypot(q.y - oy));
    }
    ensure(
        ls <= 1e-8 && ey <= 1e-8 && ode <= 1e-3,
        format!("least squares {ls:.1e}, Eckart-Young {ey:.1e}, CTRV {ode:.1e} m"),
    )
}

fn cli_run(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cooploc"))
        .args(["run", "--seed", "17", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    Ok(())
}

fn outputs_without_timestamp(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        if name == "summary.json" {
            let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
            bytes = text
                .lines()
                .filter(|l| !l.contains("\"created_unix_s\""))
                .collect::<Vec<_>>()
                .join("\n")
                .into_bytes();
        }
        files.push((name, bytes));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "vehicles = 8\nticks = 40\ntrials = 4\n").map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cli_run(&config, &a)?;
    cli_run(&config, &b)?;
    let (fa, fb) = (outputs_without_timestamp(&a)?, outputs_without_timestamp(&b)?);
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    if !names.contains(&"summary.json") || !names.iter().any(|n| n.starts_with("cdf_")) {
        return Err(format!("missing outputs: {names:?}"));
    }
    ensure(fa == fb, format!("{} files compared", fa.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 zero-noise exactness", Duration::from_secs(5), zero_noise_exactness),
        ("2 GPS baseline", Duration::from_secs(10), gps_baseline),
        ("3 GR-CL N=20", Duration::from_secs(120), grcl_reproduction),
        ("4 GLRR-CL N=25", Duration::from_secs(180), glrr_reproduction),
        ("5 small-fleet parity", Duration::from_secs(60), small_fleet_parity),
        ("6 rank-bound sweep", Duration::from_secs(240), rank_sweep),
        ("7 closed-form optimality", Duration::from_secs(60), closed_form_optimality),
        ("8 kernel oracles", Duration::from_secs(30), kernel_oracles),
        ("9 CLI determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {name}: {detail} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
