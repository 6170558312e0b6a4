//! `qwi`: scattering, spectra and profiles for potentials described in a
//! TOML spec file. Tables go to stdout as CSV; errors go to stderr as one
//! JSON object per line.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwi_core::oracle::{reconstruct_wavefunction, schrodinger_residual, transfer_matrix_solve_side};
use qwi_core::{
    energy_sweep, find_bound_states, find_resonances, probability_current, scattering_trajectory, solve_scattering,
    Complex64, Error, IntegrationConfig, PotentialSpecFile, SearchOptions, Side, SpecError, SpectrumResult,
};
use serde_json::json;

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "qwi", version, about = "Quantum wave impedance solvers for 1D potentials")]
#[command(subcommand_required = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection and transmission at one energy.
    Scatter {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Reflection and transmission on a uniform energy grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        emin: f64,
        #[arg(long, allow_negative_numbers = true)]
        emax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Bound-state energies.
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        probe_x: Option<f64>,
    },
    /// Reflectionless energies in a window.
    Resonances {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        emin: f64,
        #[arg(long, allow_negative_numbers = true)]
        emax: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
        #[arg(long, allow_negative_numbers = true)]
        probe_x: Option<f64>,
    },
    /// Impedance or wavefunction of the scattering state across the structure.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, value_enum, default_value_t = Mode::Impedance)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Cross-check the impedance solution against independent methods.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
}

#[derive(Args)]
struct Common {
    /// Potential spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Integrate the impedance equation even for piecewise-constant potentials.
    #[arg(long)]
    force_numeric: bool,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    pole_threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Impedance,
    Wavefunction,
}

enum Failure {
    Input(serde_json::Value),
    Solver(serde_json::Value),
    /// Ran to completion but a check failed; the report is already printed.
    Checks(String),
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure::Input(json!({ "error": kind, "message": message.into() }))
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        let mut v = json!({ "error": e.kind(), "message": e.to_string() });
        match &e {
            SpecError::Syntax { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            SpecError::Invalid { field, .. } => v["field"] = json!(field),
            SpecError::Io { path, .. } => v["path"] = json!(path),
        }
        Failure::Input(v)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let v = json!({ "error": e.kind(), "message": e.to_string() });
        match e {
            Error::InvalidConfig(_) | Error::InvalidProbe { .. } | Error::InvalidParams { .. } | Error::Potential(_) => {
                Failure::Input(v)
            }
            _ => Failure::Solver(v),
        }
    }
}

struct Loaded {
    spec: PotentialSpecFile,
    cfg: IntegrationConfig,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let spec = PotentialSpecFile::from_path(&common.spec)?;
    let mut cfg = spec.defaults.integration_config();
    cfg.force_numeric = common.force_numeric;
    if let Some(v) = common.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = common.abs_tol {
        cfg.abs_tol = v;
    }
    if common.max_step.is_some() {
        cfg.max_step = common.max_step;
    }
    if let Some(v) = common.pole_threshold {
        cfg.pole_threshold = v;
    }
    cfg.validate()?;
    Ok(Loaded { spec, cfg })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

const SCATTER_HEADER: &str = "E,Re_r,Im_r,Re_t,Im_t,R,T,status";

fn scatter_row(out: &mut String, e: f64, res: &Result<qwi_core::ScatteringResult, Error>) {
    match res {
        Ok(s) => row(
            out,
            &[
                num(e),
                num(s.r.re),
                num(s.r.im),
                num(s.t.re),
                num(s.t.im),
                num(s.big_r),
                num(s.big_t),
                if s.transmitted_propagating { "ok" } else { "evanescent" }.into(),
            ],
        ),
        Err(err) => {
            let mut f = vec![num(e)];
            f.extend(std::iter::repeat_n("NaN".to_string(), 6));
            f.push(err.kind().to_string());
            row(out, &f);
        }
    }
}

fn spectrum_table(res: &SpectrumResult) -> String {
    let mut out = String::from("index,E,residual\n");
    for (i, (e, r)) in res.energies.iter().zip(&res.residuals).enumerate() {
        row(&mut out, &[i.to_string(), num(*e), num(*r)]);
    }
    out
}

fn search_options(spec: &PotentialSpecFile, probe_x: Option<f64>) -> SearchOptions {
    let mut o = spec.defaults.search_options();
    if probe_x.is_some() {
        o.probe_x = probe_x;
    }
    o
}

/// Constant that makes the incident wave of the reconstructed profile unit
/// amplitude: the transmitted wave's value at the trajectory anchor.
fn incident_normalization(s: &qwi_core::ScatteringResult, spec: &PotentialSpecFile, e: f64) -> Complex64 {
    let (a, b) = spec.potential.domain();
    let p = spec.params;
    if !s.transmitted_propagating {
        return s.t;
    }
    let (far_level, x) = match s.side {
        Side::Left => (spec.potential.right_level(), b),
        Side::Right => (spec.potential.left_level(), -a),
    };
    let k = (2.0 * p.mass * (e - far_level)).sqrt() / p.hbar;
    s.t * Complex64::new(0.0, k * x).exp()
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Scatter { common, energy, side } => {
            let l = load(&common)?;
            let s = solve_scattering(&l.spec.potential, energy, side.into(), &l.cfg, l.spec.params)?;
            let mut out = format!("{SCATTER_HEADER}\n");
            scatter_row(&mut out, energy, &Ok(s));
            Ok(out)
        }
        Command::Sweep {
            common,
            emin,
            emax,
            points,
            side,
        } => {
            if !(emin < emax) || !emin.is_finite() || !emax.is_finite() {
                return Err(Failure::input("InvalidRange", format!("need emin < emax, got {emin} and {emax}")));
            }
            if points < 2 {
                return Err(Failure::input("InvalidPoints", format!("need at least 2 points, got {points}")));
            }
            let l = load(&common)?;
            let grid: Vec<f64> = (0..points)
                .map(|i| {
                    if i + 1 == points {
                        emax
                    } else {
                        emin + (emax - emin) * i as f64 / (points - 1) as f64
                    }
                })
                .collect();
            let res = energy_sweep(&l.spec.potential, &grid, side.into(), &l.cfg, l.spec.params)?;
            let mut out = format!("{SCATTER_HEADER}\n");
            for (e, r) in grid.iter().zip(&res) {
                scatter_row(&mut out, *e, r);
            }
            Ok(out)
        }
        Command::Bound { common, probe_x } => {
            let l = load(&common)?;
            let opts = search_options(&l.spec, probe_x);
            let res = find_bound_states(&l.spec.potential, &l.cfg, l.spec.params, &opts)?;
            Ok(spectrum_table(&res))
        }
        Command::Resonances {
            common,
            emin,
            emax,
            side,
            probe_x,
        } => {
            if !(emin < emax) {
                return Err(Failure::input("InvalidRange", format!("need emin < emax, got {emin} and {emax}")));
            }
            let l = load(&common)?;
            let opts = search_options(&l.spec, probe_x);
            let res = find_resonances(&l.spec.potential, (emin, emax), side.into(), &l.cfg, l.spec.params, &opts)?;
            Ok(spectrum_table(&res))
        }
        Command::Profile {
            common,
            energy,
            mode,
            side,
        } => {
            let l = load(&common)?;
            let (pot, p) = (&l.spec.potential, l.spec.params);
            let traj = scattering_trajectory(pot, energy, side.into(), &l.cfg, p)?;
            let mut out = String::new();
            match mode {
                Mode::Impedance => {
                    out.push_str("x,Re_Z,Im_Z\n");
                    for s in &traj.samples {
                        row(&mut out, &[num(s.x), num(s.z.re), num(s.z.im)]);
                    }
                }
                Mode::Wavefunction => {
                    let s = solve_scattering(pot, energy, side.into(), &l.cfg, p)?;
                    let c = incident_normalization(&s, &l.spec, energy);
                    let prof = reconstruct_wavefunction(&traj, c, p)?;
                    out.push_str("x,Re_psi,Im_psi,abs_psi_sq\n");
                    for (x, psi) in &prof.samples {
                        row(&mut out, &[num(*x), num(psi.re), num(psi.im), num(psi.norm_sqr())]);
                    }
                }
            }
            Ok(out)
        }
        Command::Validate { common, energy, side } => validate(&common, energy, side.into()),
    }
}

const TOL_AMPLITUDES: f64 = 1e-8;
const TOL_UNITARITY: f64 = 1e-10;
const TOL_UNITARITY_NUMERIC: f64 = 1e-8;
const TOL_RESIDUAL: f64 = 1e-5;
const TOL_CURRENT: f64 = 1e-8;

fn validate(common: &Common, e: f64, side: Side) -> Result<String, Failure> {
    let l = load(common)?;
    let (pot, p) = (&l.spec.potential, l.spec.params);
    let s = solve_scattering(pot, e, side, &l.cfg, p)?;
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();
    if let Some(pw) = pot.as_piecewise() {
        let tm = transfer_matrix_solve_side(pw, e, side, p)?;
        checks.push(("delta_R", (s.big_r - tm.big_r).abs(), TOL_AMPLITUDES));
        checks.push(("delta_T", (s.big_t - tm.big_t).abs(), TOL_AMPLITUDES));
    }
    if s.transmitted_propagating {
        let numeric = l.cfg.force_numeric || pot.as_piecewise().is_none();
        let tol = if numeric { TOL_UNITARITY_NUMERIC } else { TOL_UNITARITY };
        checks.push(("unitarity", (s.big_r + s.big_t - 1.0).abs(), tol));
    }
    // Fine enough that the three-point stencil error stays well below the
    // residual tolerance: (ħ²/2m) h² k⁴ / 12 ≈ 2e-6.
    let k2 = 2.0 * p.mass * (e - pot.interior_min()).abs().max(1e-12) / (p.hbar * p.hbar);
    let h = (24e-6 * p.mass / (p.hbar * p.hbar)).sqrt() / k2;
    let fine = IntegrationConfig {
        output_spacing: Some(h.min(1e-3)),
        ..l.cfg
    };
    let traj = scattering_trajectory(pot, e, side, &fine, p)?;
    let prof = reconstruct_wavefunction(&traj, incident_normalization(&s, &l.spec, e), p)?;
    // A bare step has no interior to check.
    if prof.samples.len() >= 5 {
        checks.push(("schrodinger_residual", schrodinger_residual(&prof, pot, e, p)?, TOL_RESIDUAL));
    }
    let j = probability_current(&traj);
    let j_ref = j.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    if j_ref > 0.0 {
        let spread = j.iter().map(|v| (v - j[0]).abs()).fold(0.0, f64::max) / j_ref;
        checks.push(("current_deviation", spread, TOL_CURRENT));
    }
    let mut out = String::from("check,value,tolerance,pass\n");
    let mut ok = true;
    for (name, v, tol) in &checks {
        let pass = *v <= *tol;
        ok &= pass;
        let _ = writeln!(out, "{name},{},{},{pass}", num(*v), num(*tol));
    }
    if ok {
        Ok(out)
    } else {
        Err(Failure::Checks(out))
    }
}

fn emit_error(v: &serde_json::Value) {
    let _ = writeln!(std::io::stderr().lock(), "{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit_error(&json!({ "error": "Usage", "message": e.to_string().trim() }));
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli) {
        Ok(table) => {
            let _ = stdout.write_all(table.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Input(v)) => {
            emit_error(&v);
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Solver(v)) => {
            emit_error(&v);
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Checks(report)) => {
            let _ = stdout.write_all(report.as_bytes());
            emit_error(&json!({ "error": "ValidationFailed", "message": "one or more cross-checks exceeded tolerance" }));
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
