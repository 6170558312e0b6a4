//! One-dimensional stationary scattering, bound states and resonances
//! computed through the quantum wave impedance `Z = (ħ/im) ψ'/ψ`.
//!
//! Piecewise-constant potentials are handled by exact layer chaining,
//! anything else by adaptive integration of the impedance Riccati equation.
//! The [`oracle`] module holds independent reference methods.

pub mod analytic;
pub mod error;
pub mod model;
pub mod oracle;
pub mod riccati;
pub mod scattering;
pub mod specfile;
pub mod spectral;

pub use num_complex::Complex64;

pub use analytic::{
    barrier_closed_forms, impedance_at, layer_transform, phase_from_impedance, region_constants, shift_state,
    step_reflection, BarrierCoefficients, PhaseConstant, RegionConstants, WaveState,
};
pub use error::{Error, PotentialError, Result};
pub use model::{
    potential_at, validate_potential, ImpedanceSample, ModelParams, Piece, PiecewisePotential, Potential,
    PotentialSegment, SampledPotential, Side,
};
pub use riccati::{
    integrate_impedance, pole_safe_step, trace_impedance, z_minus, z_plus, ImpedanceTrajectory, IntegrationConfig,
    RiccatiState,
};
pub use scattering::{
    constant_current_diagnostic, energy_sweep, probability_current, scattering_trajectory, solve_scattering,
    transmission_phase, ScatteringResult,
};
pub use specfile::{PotentialSpecFile, SpecDefaults, SpecError};
pub use spectral::{
    default_probe, find_bound_states, find_resonances, impedance_mismatch, matching_residual, MatchMode,
    SearchOptions, SpectrumKind, SpectrumResult,
};
