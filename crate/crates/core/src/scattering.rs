//! Reflection and transmission from the entry impedance.
//!
//! Amplitudes refer to plane waves anchored at the origin: for left
//! incidence the left lead carries `exp(ik₁x) + r exp(-ik₁x)` and the right
//! lead `t exp(ik₂x)`. Right incidence is solved in the mirrored frame.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{region_constants, WaveState};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Potential, Side};
use crate::riccati::{propagate, z_minus, z_plus, ImpedanceTrajectory, IntegrationConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub e: f64,
    pub side: Side,
    pub r: Complex64,
    /// For a sub-barrier far lead this is the amplitude of the decaying
    /// tail at the far interface, and `big_t` is zero.
    pub t: Complex64,
    pub big_r: f64,
    pub big_t: f64,
    /// `Z(a)` for left incidence, `Z(b)` for right incidence.
    pub z_entry: Complex64,
    /// Whether the far lead carries a propagating wave.
    pub transmitted_propagating: bool,
}

fn solve_left(pot: &Potential, e: f64, cfg: &IntegrationConfig, params: ModelParams) -> Result<ScatteringResult> {
    let (a, b) = pot.domain();
    let rc1 = region_constants(e, pot.left_level(), params)?;
    if !rc1.is_propagating() {
        return Err(Error::EvanescentIncidence {
            e,
            lead: pot.left_level(),
        });
    }
    let rc2 = region_constants(e, pot.right_level(), params)?;
    let (z1, z2) = (rc1.z, rc2.z);
    let prop = propagate(pot, e, b, WaveState::from_impedance(z2), a, cfg, params, false)?;
    let end = prop.end;
    let z_entry = end.impedance();
    let r_local = (z1 - z_entry) / (z1 + z_entry);
    // Solution normalized to ψ(b) = 1; its incident part at a has amplitude
    // (z₁ψ + Zψ)/(2z₁).
    let t_local = 2.0 * z1 * (-end.log_scale).exp() / (z1 * end.psi + end.zpsi);
    let k1 = rc1.wavenumber();
    let r = r_local * Complex64::new(0.0, 2.0 * k1 * a).exp();
    let propagating = rc2.is_propagating();
    let t = if propagating {
        t_local * Complex64::new(0.0, k1 * a - rc2.wavenumber() * b).exp()
    } else {
        t_local * Complex64::new(0.0, k1 * a).exp()
    };
    let big_r = r_local.norm_sqr();
    let big_t = if propagating {
        (z2.re / z1.re) * t_local.norm_sqr()
    } else {
        0.0
    };
    if !(r.is_finite() && t.is_finite()) {
        return Err(Error::NonFiniteState { x: a });
    }
    Ok(ScatteringResult {
        e,
        side: Side::Left,
        r,
        t,
        big_r,
        big_t,
        z_entry,
        transmitted_propagating: propagating,
    })
}

/// Reflection and transmission for a wave incident from `side`.
pub fn solve_scattering(
    pot: &Potential,
    e: f64,
    side: Side,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ScatteringResult> {
    params.validate()?;
    match side {
        Side::Left => solve_left(pot, e, cfg, params),
        Side::Right => {
            let res = solve_left(&pot.mirrored(), e, cfg, params)?;
            Ok(ScatteringResult {
                side: Side::Right,
                z_entry: -res.z_entry,
                ..res
            })
        }
    }
}

/// Transmission amplitude including the phase gathered across `[a, b]`.
pub fn transmission_phase(
    pot: &Potential,
    e: f64,
    side: Side,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<Complex64> {
    solve_scattering(pot, e, side, cfg, params).map(|s| s.t)
}

/// Solves every grid energy independently. The grid must be strictly
/// increasing; failures at single energies are returned in place.
pub fn energy_sweep(
    pot: &Potential,
    e_grid: &[f64],
    side: Side,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<Vec<Result<ScatteringResult>>> {
    if let Some(i) = e_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingGrid { index: i + 1 });
    }
    Ok(e_grid
        .par_iter()
        .map(|&e| solve_scattering(pot, e, side, cfg, params))
        .collect())
}

/// Impedance trajectory of the scattering state over `[a, b]`, integrated
/// from the far interface toward the entry.
pub fn scattering_trajectory(
    pot: &Potential,
    e: f64,
    side: Side,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ImpedanceTrajectory> {
    let incident = pot.lead_level(side);
    if !region_constants(e, incident, params)?.is_propagating() {
        return Err(Error::EvanescentIncidence { e, lead: incident });
    }
    match side {
        Side::Left => z_minus(pot, e, Some(Side::Left), cfg, params),
        Side::Right => z_plus(pot, e, Some(Side::Right), cfg, params),
    }
}

/// Largest deviation of `ln(Re Z/z_lead) - (2m/ħ)∫Im Z` from zero along the
/// trajectory, the integral starting at the entry interface. Zero for a
/// reflectionless state; trajectories carrying current to the left are
/// mirrored first.
pub fn constant_current_diagnostic(traj: &ImpedanceTrajectory, z_lead: f64, _params: ModelParams) -> Result<f64> {
    if !(z_lead > 0.0 && z_lead.is_finite()) {
        return Err(Error::InvalidConfig(format!("z_lead must be positive, got {z_lead}")));
    }
    let mirrored;
    let traj = if traj.direction == Side::Right {
        mirrored = traj.mirrored();
        &mirrored
    } else {
        traj
    };
    let w0 = traj.waves[0];
    let ln_psi0 = w0.log_scale + w0.psi.norm().ln();
    let mut worst: f64 = 0.0;
    for (s, w) in traj.samples.iter().zip(&traj.waves) {
        if !(s.z.re > 0.0) {
            return Err(Error::NonPositiveRealPart { x: s.x, re: s.z.re });
        }
        // (2m/ħ)∫ₐˣ Im Z = -2 ln|ψ(x)/ψ(a)|
        let ln_ratio = w.log_scale + w.psi.norm().ln() - ln_psi0;
        worst = worst.max(((s.z.re / z_lead).ln() + 2.0 * ln_ratio).abs());
    }
    Ok(worst)
}

/// `|ψ|² Re Z` at every sample, with `ψ` normalized at the anchor.
pub fn probability_current(traj: &ImpedanceTrajectory) -> Vec<f64> {
    traj.samples
        .iter()
        .zip(&traj.waves)
        .map(|(s, w)| w.psi_value().norm_sqr() * s.z.re)
        .collect()
}
