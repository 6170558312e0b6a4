//! Bound states and transmission resonances from the matching condition
//! `Z⁺(x₀) = Z⁻(x₀)` between impedances carried in from both ends.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{WaveState, EPS_DEGENERATE};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Potential, Side};
use crate::riccati::{propagate, z_minus_anchor, z_plus, z_plus_anchor, IntegrationConfig};
use crate::scattering::solve_scattering;

/// Bisection stops once the bracketed root is pinned to this mismatch.
pub const ROOT_TOL: f64 = 1e-10;
/// A local minimum of `|D|` counts as a resonance below this, in units of
/// the impedance scale of the window.
pub const RESONANCE_TOL: f64 = 1e-6;
/// Largest reflection probability accepted at a reported resonance.
pub const RESONANCE_MAX_R: f64 = 1e-8;
/// Below this reflection at both window ends and the midpoint the
/// potential is treated as reflectionless.
pub const TRANSPARENT_R: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Decaying tails on both sides.
    Bound,
    /// Unit incident wave from the given side, outgoing waves only elsewhere.
    Resonance(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    BoundState,
    Resonance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub kind: SpectrumKind,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub probe_x: f64,
    /// Set when the potential reflects nothing anywhere in the window.
    pub transparent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub scan_points: usize,
    pub probe_x: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            scan_points: 400,
            probe_x: None,
        }
    }
}

/// Midpoint of `[a, b]`, moved by `1e-3·(b - a)` when it sits on a joint.
pub fn default_probe(pot: &Potential) -> f64 {
    let (a, b) = pot.domain();
    let mid = 0.5 * (a + b);
    let w = b - a;
    if pot.breakpoints().iter().any(|&x| (x - mid).abs() <= 1e-12 * w) {
        mid + 1e-3 * w
    } else {
        mid
    }
}

fn check_probe(pot: &Potential, x0: f64) -> Result<()> {
    let (a, b) = pot.domain();
    if x0 > a && x0 < b {
        Ok(())
    } else {
        Err(Error::InvalidProbe { x: x0, a, b })
    }
}

fn anchors(pot: &Potential, e: f64, mode: MatchMode, params: ModelParams) -> Result<(Complex64, Complex64)> {
    let inc = match mode {
        MatchMode::Bound => None,
        MatchMode::Resonance(side) => Some(side),
    };
    Ok((
        z_plus_anchor(pot, e, inc, params)?.z,
        z_minus_anchor(pot, e, inc, params)?.z,
    ))
}

/// States at `x0` of the solutions anchored at `a` and at `b`.
fn matching_states(
    pot: &Potential,
    e: f64,
    x0: f64,
    mode: MatchMode,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<(WaveState, WaveState)> {
    let (a, b) = pot.domain();
    let (zp, zm) = anchors(pot, e, mode, params)?;
    let plus = propagate(pot, e, a, WaveState::from_impedance(zp), x0, cfg, params, false)?.end;
    let minus = propagate(pot, e, b, WaveState::from_impedance(zm), x0, cfg, params, false)?.end;
    Ok((plus, minus))
}

/// `D(E) = Z⁺(x₀) - Z⁻(x₀)`.
pub fn impedance_mismatch(
    pot: &Potential,
    e: f64,
    x0: f64,
    mode: MatchMode,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<Complex64> {
    check_probe(pot, x0)?;
    let (p, m) = matching_states(pot, e, x0, mode, cfg, params)?;
    let d = p.impedance() - m.impedance();
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::PoleAtX { x: x0 })
    }
}

/// Impedance scale of a window: `√(2(E_max - U_min)/m)`.
fn impedance_scale(pot: &Potential, e_max: f64, params: ModelParams) -> f64 {
    (2.0 * (e_max - pot.interior_min().min(pot.left_level()).min(pot.right_level())).abs() / params.mass).sqrt()
}

/// Pole-safe size of the mismatch: `|D|` while both impedances are small
/// next to `scale`, bounded where either has a pole.
pub fn matching_residual(
    pot: &Potential,
    e: f64,
    x0: f64,
    mode: MatchMode,
    cfg: &IntegrationConfig,
    params: ModelParams,
    scale: f64,
) -> Result<f64> {
    check_probe(pot, x0)?;
    let (p, m) = matching_states(pot, e, x0, mode, cfg, params)?;
    Ok(p.chordal_distance(&m, scale))
}

/// Signed bound-state mismatch. In the bound window both states have real
/// `ψ` and imaginary `Zψ`, so the cross product is imaginary and changes
/// sign exactly at eigenvalues; it stays finite at nodes of `ψ`.
fn bound_function(
    pot: &Potential,
    e: f64,
    x0: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
    scale: f64,
) -> Result<f64> {
    let (p, m) = matching_states(pot, e, x0, MatchMode::Bound, cfg, params)?;
    let cross = p.zpsi * m.psi - m.zpsi * p.psi;
    let n = |w: &WaveState| (w.zpsi.norm_sqr() / (scale * scale) + w.psi.norm_sqr()).sqrt();
    Ok(cross.im / (n(&p) * n(&m)))
}

/// Number of bound states below `e`, from the zeros of the solution that
/// decays to the left (oscillation theorem). `e` must lie below both leads.
pub fn count_states_below(pot: &Potential, e: f64, cfg: &IntegrationConfig, params: ModelParams) -> Result<usize> {
    let (a, b) = pot.domain();
    let k_max = (2.0 * params.mass * (e - pot.interior_min()).max(0.0)).sqrt() / params.hbar;
    let mut spacing = cfg.max_step.unwrap_or(if b > a { (b - a) / 50.0 } else { 1.0 });
    if k_max > 0.0 {
        spacing = spacing.min(0.25 * std::f64::consts::PI / k_max);
    }
    let counting = IntegrationConfig {
        output_spacing: Some(spacing),
        ..*cfg
    };
    let traj = z_plus(pot, e, None, &counting, params)?;
    let sign = |w: &WaveState| w.psi.re;
    let mut zeros = 0;
    for w in traj.waves.windows(2) {
        let (s0, s1) = (sign(&w[0]), sign(&w[1]));
        if (s0 > 0.0 && s1 <= 0.0) || (s0 < 0.0 && s1 >= 0.0) {
            zeros += 1;
        }
    }
    // Right tail: ψ = α e^{κ(x-b)} + β e^{-κ(x-b)} has a zero iff
    // αβ < 0 and |β| > |α|.
    let (_, end) = traj.far_end();
    let kappa = (2.0 * params.mass * (pot.right_level() - e)).sqrt() / params.hbar;
    let q = end.psi.re;
    let dq = (Complex64::i() * params.m_over_hbar() * end.zpsi).re;
    let alpha = 0.5 * (q + dq / kappa);
    let beta = 0.5 * (q - dq / kappa);
    if alpha * beta < 0.0 && beta.abs() > alpha.abs() {
        zeros += 1;
    }
    Ok(zeros)
}

fn scan<T: Send>(energies: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    energies.par_iter().map(|&e| f(e)).collect()
}

/// Bound states inside `(min interior U, min(U₁, U₂))`. Every energy in
/// that window has decaying exponentials in both leads, so each root is
/// normalizable.
pub fn find_bound_states(
    pot: &Potential,
    cfg: &IntegrationConfig,
    params: ModelParams,
    opts: &SearchOptions,
) -> Result<SpectrumResult> {
    params.validate()?;
    cfg.validate()?;
    let lead_min = pot.left_level().min(pot.right_level());
    let lo = pot.interior_min();
    if !(lo < lead_min) {
        return Err(Error::EmptyWindow {
            interior_min: lo,
            lead_min,
        });
    }
    let x0 = match opts.probe_x {
        Some(x) => {
            check_probe(pot, x)?;
            x
        }
        None => default_probe(pot),
    };
    let width = lead_min - lo;
    let scale = impedance_scale(pot, lead_min, params);
    let n = opts.scan_points.max(2);
    let mut grid: Vec<f64> = (0..n).map(|i| lo + width * (i as f64 + 0.5) / n as f64).collect();
    // Shallow states hide just under the lead level.
    grid.extend((3..=12).map(|k| lead_min - width * 10f64.powi(-k)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let top = lead_min - (width * 1e-13).max(4.0 * EPS_DEGENERATE * lead_min.abs());
    grid.retain(|&e| e > lo && e < top);

    let f = |e: f64| bound_function(pot, e, x0, cfg, params, scale);
    let values = scan(&grid, f)?;
    let mut energies = Vec::new();
    let mut residuals = Vec::new();
    let mut push = |e: f64, r: f64| {
        if energies.last().is_none_or(|&l: &f64| e - l > 1e-12 * width) {
            energies.push(e);
            residuals.push(r);
        }
    };
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            push(grid[i], 0.0);
            continue;
        }
        if i + 1 < grid.len() && values[i] * values[i + 1] < 0.0 {
            let (e, r) = bisect_root(&f, grid[i], values[i], grid[i + 1])?;
            push(e, r);
        }
    }
    let expected = count_states_below(pot, top, cfg, params)?;
    if energies.len() < expected {
        return Err(Error::BracketingExhausted {
            expected,
            found: energies.len(),
            profile: grid.into_iter().zip(values).collect(),
        });
    }
    Ok(SpectrumResult {
        kind: SpectrumKind::BoundState,
        energies,
        residuals,
        probe_x: x0,
        transparent: false,
    })
}

/// Bisection to adjacent floating-point numbers; returns the end with the
/// smaller mismatch and that mismatch.
fn bisect_root(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut f_lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let mut f_hi = f(hi)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo.abs())
    } else {
        (hi, f_hi.abs())
    })
}

/// Energies in `window` where a wave incident from `side` is transmitted
/// without reflection. The search covers only energies above both leads.
pub fn find_resonances(
    pot: &Potential,
    window: (f64, f64),
    side: Side,
    cfg: &IntegrationConfig,
    params: ModelParams,
    opts: &SearchOptions,
) -> Result<SpectrumResult> {
    params.validate()?;
    cfg.validate()?;
    let (a, b) = pot.domain();
    let floor = pot.left_level().max(pot.right_level());
    let lo = window.0.max(floor);
    let hi = window.1;
    let x0 = match opts.probe_x {
        Some(x) => {
            check_probe(pot, x)?;
            x
        }
        None => default_probe(pot),
    };
    let mut out = SpectrumResult {
        kind: SpectrumKind::Resonance,
        energies: Vec::new(),
        residuals: Vec::new(),
        probe_x: x0,
        transparent: false,
    };
    if !(hi > lo) || !(b > a) {
        return Ok(out);
    }
    let n = opts.scan_points.max(3);
    let width = hi - lo;
    // The lower end may be a lead level, where the impedance degenerates.
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == 0 { lo + 1e-9 * width } else { lo + width * i as f64 / (n - 1) as f64 })
        .collect();

    let reflect = |e: f64| solve_scattering(pot, e, side, cfg, params).map(|s| s.big_r);
    if [grid[0], 0.5 * (lo + hi), hi]
        .iter()
        .map(|&e| reflect(e))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|&r| r < TRANSPARENT_R)
    {
        out.transparent = true;
        return Ok(out);
    }

    let mode = MatchMode::Resonance(side);
    let d = |e: f64| impedance_mismatch(pot, e, x0, mode, cfg, params);
    let absd = |e: f64| d(e).map(|v| v.norm());
    let values = scan(&grid, absd)?;
    let tol = RESONANCE_TOL * impedance_scale(pot, hi, params).max(1.0);
    for i in 1..n - 1 {
        if !(values[i] <= values[i - 1] && values[i] < values[i + 1]) {
            continue;
        }
        let (mut e, mut r) = golden_min(&absd, grid[i - 1], grid[i + 1])?;
        // Gauss–Newton on the complex mismatch.
        for _ in 0..8 {
            let h = 1e-7 * width.max(1e-300);
            let dv = d(e)?;
            let slope = (d(e + h)? - d(e - h)?) / (2.0 * h);
            let step = (slope.conj() * dv).re / slope.norm_sqr();
            let cand = e - step;
            if !(cand > grid[i - 1] && cand < grid[i + 1]) {
                break;
            }
            let rc = absd(cand)?;
            if rc < r {
                e = cand;
                r = rc;
            } else {
                break;
            }
        }
        if r < tol && reflect(e)? < RESONANCE_MAX_R {
            out.energies.push(e);
            out.residuals.push(r);
        }
    }
    Ok(out)
}

/// Golden-section minimization on `[lo, hi]` down to floating-point
/// resolution.
fn golden_min(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}
