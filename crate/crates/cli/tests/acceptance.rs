//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qwi_core::oracle::{
    reconstruct_wavefunction, schrodinger_residual, square_well_eigenvalues, transfer_matrix_solve,
};
use qwi_core::{
    barrier_closed_forms, find_bound_states, find_resonances, impedance_mismatch, layer_transform,
    probability_current, region_constants, scattering_trajectory, solve_scattering, z_minus, Complex64,
    IntegrationConfig, MatchMode, ModelParams, PiecewisePotential, Potential, PotentialSegment, SampledPotential,
    SearchOptions, Side,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

const P: ModelParams = ModelParams { hbar: 1.0, mass: 1.0 };

fn barrier() -> Potential {
    PiecewisePotential::barrier(0.0, 1.0, 0.0, 2.0).unwrap().into()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lift<T>(r: qwi_core::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

/// Barrier closed forms on a 200-point grid in (0, 4]. The grid hits the
/// barrier top, where the closed form is the limit `1/(1 + (k l/2)²)`.
fn criterion_1() -> Outcome {
    let pot = barrier();
    let cfg = IntegrationConfig::default();
    let mut worst: f64 = 0.0;
    for i in 1..=200 {
        let e = 4.0 * i as f64 / 200.0;
        let s = lift(solve_scattering(&pot, e, Side::Left, &cfg, P), "solve")?;
        let (r_ref, t_ref) = match barrier_closed_forms(e, 1.0, 2.0, P) {
            Ok(c) => (c.big_r, c.big_t),
            Err(_) => {
                let k = (2.0 * e).sqrt();
                let t = 1.0 / (1.0 + (k * 2.0 / 2.0).powi(2));
                (1.0 - t, t)
            }
        };
        worst = worst.max((s.big_r - r_ref).abs()).max((s.big_t - t_ref).abs());
    }
    check(worst < 1e-9, format!("max |ΔR|, |ΔT| = {worst:.2e} (tol 1e-9)"))
}

fn comb_energies() -> Vec<f64> {
    (1..=3).map(|n| 1.0 + (n * n) as f64 * PI * PI / 8.0).collect()
}

fn criterion_2() -> Outcome {
    let pot = barrier();
    let cfg = IntegrationConfig::default();
    let expected = comb_energies();
    let mut t_dev: f64 = 0.0;
    for &e in &expected {
        let s = lift(solve_scattering(&pot, e, Side::Left, &cfg, P), "solve")?;
        t_dev = t_dev.max((s.big_t - 1.0).abs());
    }
    let found = lift(
        find_resonances(&pot, (1.0, 13.0), Side::Left, &cfg, P, &SearchOptions::default()),
        "resonances",
    )?;
    let e_dev = if found.energies.len() == expected.len() {
        found.energies.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    check(
        t_dev < 1e-10 && e_dev < 1e-8,
        format!(
            "max |T-1| = {t_dev:.2e} (tol 1e-10), {} resonances found, max energy error {e_dev:.2e} (tol 1e-8)",
            found.energies.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let cfg = IntegrationConfig::default();
    let step: Potential = PiecewisePotential::step(0.0, 1.0, 0.0).unwrap().into();
    let mut total: f64 = 0.0;
    for i in 0..50 {
        let e = (i as f64 + 0.5) / 50.0;
        let s = lift(solve_scattering(&step, e, Side::Left, &cfg, P), "step below")?;
        total = total.max((s.r.norm() - 1.0).abs());
    }
    let flat: Potential = PiecewisePotential::step(0.7, 0.7, 0.3).unwrap().into();
    let r_flat = lift(solve_scattering(&flat, 2.0, Side::Left, &cfg, P), "flat")?.r.norm();
    let mut classical: f64 = 0.0;
    for i in 1..=50 {
        let e = 1.0 + 4.0 * i as f64 / 50.0;
        let s = lift(solve_scattering(&step, e, Side::Left, &cfg, P), "step above")?;
        let (z1, z2) = ((2.0 * e).sqrt(), (2.0 * (e - 1.0)).sqrt());
        classical = classical.max((s.big_r - ((z2 - z1) / (z2 + z1)).powi(2)).abs());
    }
    check(
        total < 1e-12 && r_flat < 1e-12 && classical < 1e-12,
        format!("max ||r|-1| = {total:.2e}, |r| at z1=z2 = {r_flat:.2e}, max |ΔR| above step = {classical:.2e} (tol 1e-12)"),
    )
}

/// Random stacks with their scattering energies; energies avoid the layer
/// levels so no region is degenerate.
fn random_instances() -> Vec<(PiecewisePotential, f64)> {
    let mut rng = StdRng::seed_from_u64(20240607);
    let mut out = Vec::new();
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let mut x = 0.0;
        let segments: Vec<PotentialSegment> = (0..n)
            .map(|_| {
                let w = rng.gen_range(0.1..3.0);
                let s = PotentialSegment::new(x, x + w, rng.gen_range(-3.0..3.0));
                x += w;
                s
            })
            .collect();
        let pot = PiecewisePotential::new(0.0, segments, 0.0).unwrap();
        let mut k = 0;
        while k < 10 {
            let e: f64 = rng.gen_range(0.05..6.0);
            if pot.segments.iter().all(|s| (e - s.u).abs() > 1e-6) {
                out.push((pot.clone(), e));
                k += 1;
            }
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let cfg = IntegrationConfig::default();
    let mut worst: f64 = 0.0;
    for (pw, e) in random_instances() {
        let s = lift(solve_scattering(&pw.into(), e, Side::Left, &cfg, P), "solve")?;
        worst = worst.max((s.big_r + s.big_t - 1.0).abs());
    }
    check(worst < 1e-10, format!("max |R+T-1| = {worst:.2e} over 500 instances (tol 1e-10)"))
}

fn criterion_5() -> Outcome {
    let cfg = IntegrationConfig::default();
    let mut worst: f64 = 0.0;
    for (pw, e) in random_instances() {
        let tm = lift(transfer_matrix_solve(&pw, e, P), "transfer matrix")?;
        let s = lift(solve_scattering(&pw.into(), e, Side::Left, &cfg, P), "solve")?;
        worst = worst.max((s.big_r - tm.big_r).abs()).max((s.big_t - tm.big_t).abs());
    }
    check(worst < 1e-8, format!("max |ΔR|, |ΔT| = {worst:.2e} over 500 instances (tol 1e-8)"))
}

fn chained(pw: &PiecewisePotential, e: f64, z_right: Complex64) -> qwi_core::Result<Complex64> {
    let mut z = z_right;
    for seg in pw.segments.iter().rev() {
        z = layer_transform(&region_constants(e, seg.u, P)?, z, seg.x_end - seg.x_start)?;
    }
    Ok(z)
}

fn criterion_6() -> Outcome {
    let segs = [(0.6, -4.0), (0.8, 1.5), (1.1, -6.0), (0.5, 2.0), (0.9, -3.0)];
    let mut x = 0.0;
    let segments = segs
        .iter()
        .map(|&(w, u)| {
            let s = PotentialSegment::new(x, x + w, u);
            x += w;
            s
        })
        .collect();
    let pw = PiecewisePotential::new(0.0, segments, 0.0).unwrap();
    let pot: Potential = pw.clone().into();
    let cfg = IntegrationConfig::numeric();
    let mut worst: f64 = 0.0;
    let mut poles = 0;
    // Below the leads the solution is real and its nodes are poles of Z.
    for e in [-1.3, -0.4, 0.8, 2.7, 5.1] {
        let traj = lift(z_minus(&pot, e, Some(Side::Left), &cfg, P), "integrate")?;
        let numeric = traj.far_end().0.z;
        let exact = lift(chained(&pw, e, traj.anchor.z), "chain")?;
        worst = worst.max((numeric - exact).norm() / exact.norm());
        if e < 0.0 {
            let re: Vec<f64> = (0..traj.samples.len()).map(|i| traj.psi(i).re).collect();
            poles += re.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        }
    }
    check(
        worst < 1e-8 && poles > 0,
        format!("max relative endpoint error = {worst:.2e} (tol 1e-8), {poles} pole crossings"),
    )
}

fn well(depth: f64, width: f64) -> Potential {
    PiecewisePotential::barrier(0.0, -depth, 0.0, width).unwrap().into()
}

fn criterion_7() -> Outcome {
    let cfg = IntegrationConfig::default();
    let opts = SearchOptions::default();
    let mut rng = StdRng::seed_from_u64(7);
    let mut cases = vec![(5.0, 2.0)];
    cases.extend((0..20).map(|_| (rng.gen_range(0.5..20.0), rng.gen_range(0.3..4.0))));
    let (mut e_dev, mut probe_dev, mut count_ok): (f64, f64, bool) = (0.0, 0.0, true);
    let mut first_count = 0;
    for (i, &(depth, width)) in cases.iter().enumerate() {
        let pot = well(depth, width);
        let oracle = square_well_eigenvalues(depth, width, P);
        let found = lift(find_bound_states(&pot, &cfg, P, &opts), "bound states")?;
        if i == 0 {
            first_count = found.energies.len();
        }
        if found.energies.len() != oracle.len() {
            count_ok = false;
            continue;
        }
        for (a, b) in found.energies.iter().zip(&oracle) {
            e_dev = e_dev.max((a - b).abs());
        }
        for frac in [0.17, 0.5, 0.83] {
            let o = SearchOptions {
                probe_x: Some(frac * width),
                ..opts
            };
            let moved = lift(find_bound_states(&pot, &cfg, P, &o), "bound states")?;
            if moved.energies.len() != found.energies.len() {
                count_ok = false;
                continue;
            }
            for (a, b) in moved.energies.iter().zip(&found.energies) {
                probe_dev = probe_dev.max((a - b).abs());
            }
        }
    }
    check(
        first_count == 3 && count_ok && e_dev < 1e-8 && probe_dev < 1e-9,
        format!(
            "depth 5 width 2 gives {first_count} states, counts match on all wells: {count_ok}, \
             max energy error {e_dev:.2e} (tol 1e-8), max probe shift {probe_dev:.2e} (tol 1e-9)"
        ),
    )
}

fn double_barrier() -> Potential {
    PiecewisePotential::new(
        0.0,
        vec![
            PotentialSegment::new(0.0, 0.5, 2.0),
            PotentialSegment::new(0.5, 2.5, 0.0),
            PotentialSegment::new(2.5, 3.0, 2.0),
        ],
        0.0,
    )
    .unwrap()
    .into()
}

fn criterion_8() -> Outcome {
    let cfg = IntegrationConfig::default();
    let opts = SearchOptions::default();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (pot, window) in [(barrier(), (1.0, 13.0)), (double_barrier(), (0.1, 6.0))] {
        let (a, b) = pot.domain();
        let found = lift(find_resonances(&pot, window, Side::Left, &cfg, P, &opts), "resonances")?;
        for &e in &found.energies {
            n += 1;
            for j in 0..5 {
                let x0 = a + (b - a) * (j as f64 + 0.5) / 5.0;
                let d = lift(impedance_mismatch(&pot, e, x0, MatchMode::Resonance(Side::Left), &cfg, P), "mismatch")?;
                worst = worst.max(d.norm());
            }
        }
    }
    check(
        n > 0 && worst < 1e-6,
        format!("max |Z+ - Z-| = {worst:.2e} over {n} resonances x 5 probes (tol 1e-6)"),
    )
}

fn criterion_9() -> Outcome {
    let cfg = IntegrationConfig::default();
    let fine = IntegrationConfig {
        output_spacing: Some(2e-4),
        ..cfg
    };
    let harmonic: Potential = SampledPotential::from_fn(8.0, 8.0, -4.0, 4.0, 401, |x| 0.5 * x * x)
        .unwrap()
        .into();
    let (mut residual, mut tail, mut states): (f64, f64, usize) = (0.0, 0.0, 0);
    for pot in [well(5.0, 2.0), harmonic] {
        let found = lift(find_bound_states(&pot, &cfg, P, &SearchOptions::default()), "bound states")?;
        for &e in &found.energies {
            states += 1;
            let traj = lift(z_minus(&pot, e, None, &fine, P), "trajectory")?;
            let prof = lift(reconstruct_wavefunction(&traj, Complex64::new(1.0, 0.0), P), "reconstruct")?;
            residual = residual.max(lift(schrodinger_residual(&prof, &pot, e, P), "residual")?);
            // Decay into the left lead: Z(a) = -z₁ with z₁ = +i|z₁|. The
            // growing branch would give +z₁.
            let z1 = lift(region_constants(e, pot.left_level(), P), "lead")?.z;
            tail = tail.max((traj.far_end().0.z + z1).norm() / z1.norm());
        }
    }
    let mut current: f64 = 0.0;
    let smooth: Potential = SampledPotential::from_fn(0.0, 0.0, -3.0, 3.0, 241, |x| 1.5 * (-x * x).exp())
        .unwrap()
        .into();
    let numeric = IntegrationConfig::numeric();
    for (pot, e, c) in [
        (barrier(), 0.5, cfg),
        (barrier(), comb_energies()[0], cfg),
        (barrier(), 3.3, numeric),
        (double_barrier(), 1.2, cfg),
        (smooth.clone(), 0.9, cfg),
        (smooth, 2.0, cfg),
    ] {
        for side in [Side::Left, Side::Right] {
            let traj = lift(scattering_trajectory(&pot, e, side, &c, P), "trajectory")?;
            let j = probability_current(&traj);
            let scale = j.iter().map(|v| v.abs()).fold(0.0, f64::max);
            current = current.max(j.iter().map(|v| (v - j[0]).abs()).fold(0.0, f64::max) / scale);
        }
    }
    check(
        states > 0 && residual < 1e-5 && tail < 1e-4 && current < 1e-8,
        format!(
            "{states} bound states: max Schrödinger residual {residual:.2e} (tol 1e-5), \
             max tail mismatch {tail:.2e} (tol 1e-4); max relative current spread {current:.2e} (tol 1e-8)"
        ),
    )
}

fn docs(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name)
}

fn qwi(args: &[&str], spec: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwi"))
        .args(args)
        .arg("--spec")
        .arg(spec)
        .output()
        .expect("qwi runs")
}

fn criterion_10() -> Outcome {
    let (barrier, well) = (docs("barrier.toml"), docs("well.toml"));
    let runs: Vec<(Vec<&str>, &Path)> = vec![
        (vec!["scatter", "--energy", "0.75"], &barrier),
        (vec!["sweep", "--emin", "0.1", "--emax", "4", "--points", "200"], &barrier),
        (vec!["resonances", "--emin", "1", "--emax", "13"], &barrier),
        (vec!["profile", "--energy", "2.5", "--mode", "wavefunction"], &barrier),
        (vec!["validate", "--energy", "1.7"], &barrier),
        (vec!["bound"], &well),
        (vec!["scatter", "--energy", "0.5", "--side", "right", "--force-numeric"], &well),
    ];
    let mut problems = Vec::new();
    for (args, spec) in &runs {
        let first = qwi(args, spec);
        let second = qwi(args, spec);
        if first.status.code() != Some(0) {
            problems.push(format!("{} exited {:?}", args[0], first.status.code()));
        }
        if first.stdout != second.stdout || first.stdout.is_empty() {
            problems.push(format!("{} output not reproducible", args[0]));
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "[potential]\nkind = \"piecewise\"\nleft_level = \n").map_err(|e| e.to_string())?;
    let missing = dir.path().join("missing.toml");
    let expect: Vec<(Vec<&str>, &Path, i32)> = vec![
        (vec!["scatter", "--energy", "1.5"], &broken, 2),
        (vec!["scatter", "--energy", "1.5"], &missing, 2),
        (vec!["sweep", "--emin", "2", "--emax", "1", "--points", "5"], &barrier, 2),
        (vec!["scatter", "--energy", "not-a-number"], &barrier, 2),
        (vec!["scatter", "--energy", "-0.5"], &barrier, 3),
        (vec!["bound"], &barrier, 3),
    ];
    for (args, spec, code) in &expect {
        let out = qwi(args, spec);
        let stderr = String::from_utf8_lossy(&out.stderr);
        let structured = stderr.lines().count() == 1 && stderr.trim_start().starts_with('{');
        if out.status.code() != Some(*code) || !structured {
            problems.push(format!("{args:?} exited {:?}, expected {code}", out.status.code()));
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} commands reproducible, {} exit codes as expected", runs.len(), expect.len())
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("barrier closed forms", criterion_1),
        ("resonance comb", criterion_2),
        ("step results", criterion_3),
        ("unitarity", criterion_4),
        ("impedance vs transfer matrix", criterion_5),
        ("numeric vs layer chaining", criterion_6),
        ("bound states", criterion_7),
        ("matching at resonances", criterion_8),
        ("reconstruction and current", criterion_9),
        ("cli determinism and exit codes", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
