//! Numerical integration of the impedance equation
//! `dZ/dx + i(m/ħ)Z² = i(2/ħ)(E - U(x))`.
//!
//! The state carries, next to `Z`, the logarithm of the wavefunction relative
//! to the anchor (`d ln ψ/dx = (im/ħ)Z`), so transmission phases and profiles
//! come out of the same pass. `Z` has simple poles at the nodes of `ψ`; near
//! them the integrator switches to `W = 1/Z` and `ln(Zψ)`, both regular there:
//!
//! ```text
//! dW/dx        = i(m/ħ) - i(2/ħ)(E - U) W²
//! d ln(Zψ)/dx  = i(2/ħ)(E - U) W
//! ```
//!
//! Integration stops at every breakpoint of the potential so each adaptive
//! step sees a potential that is constant or linear.

use num_complex::Complex64;

use crate::analytic::{region_constants, shift_state, WaveState};
use crate::error::{Error, Result};
use crate::model::{ImpedanceSample, ModelParams, Piece, Potential, Side};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest allowed step; `None` means `(b - a)/50`.
    pub max_step: Option<f64>,
    /// `|Z|` above which the reciprocal variable takes over.
    pub pole_threshold: f64,
    /// Record samples on this spacing instead of at every accepted step.
    pub output_spacing: Option<f64>,
    /// Integrate the ODE even for piecewise-constant potentials.
    pub force_numeric: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            pole_threshold: 1e3,
            output_spacing: None,
            force_numeric: false,
        }
    }
}

impl IntegrationConfig {
    pub fn numeric() -> Self {
        IntegrationConfig {
            force_numeric: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.rel_tol) || !pos(self.abs_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if !pos(self.pole_threshold) {
            return Err(Error::InvalidConfig(format!(
                "pole_threshold must be positive, got {}",
                self.pole_threshold
            )));
        }
        if let Some(h) = self.max_step {
            if !pos(h) {
                return Err(Error::InvalidConfig(format!("max_step must be positive, got {h}")));
            }
        }
        if let Some(h) = self.output_spacing {
            if !pos(h) {
                return Err(Error::InvalidConfig(format!(
                    "output_spacing must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }

    fn max_step_for(&self, pot: &Potential) -> f64 {
        self.max_step.unwrap_or_else(|| {
            let (a, b) = pot.domain();
            if b > a {
                (b - a) / 50.0
            } else {
                1.0
            }
        })
    }

    fn uses_analytic(&self, pot: &Potential) -> bool {
        !self.force_numeric && pot.as_piecewise().is_some()
    }
}

/// Integrator state in either the direct or the reciprocal variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiState {
    Direct { z: Complex64, log_psi: Complex64 },
    Reciprocal { w: Complex64, log_zpsi: Complex64 },
}

impl RiccatiState {
    pub fn from_wave(ws: WaveState, pole_threshold: f64) -> Self {
        if ws.psi != Complex64::new(0.0, 0.0) && ws.impedance().norm() < pole_threshold {
            RiccatiState::Direct {
                z: ws.impedance(),
                log_psi: ws.psi.ln() + ws.log_scale,
            }
        } else {
            RiccatiState::Reciprocal {
                w: ws.psi / ws.zpsi,
                log_zpsi: ws.zpsi.ln() + ws.log_scale,
            }
        }
    }

    pub fn to_wave(self) -> WaveState {
        match self {
            RiccatiState::Direct { z, log_psi } => {
                let psi = Complex64::from_polar(1.0, log_psi.im);
                WaveState {
                    psi,
                    zpsi: z * psi,
                    log_scale: log_psi.re,
                }
            }
            RiccatiState::Reciprocal { w, log_zpsi } => {
                let zpsi = Complex64::from_polar(1.0, log_zpsi.im);
                WaveState {
                    psi: w * zpsi,
                    zpsi,
                    log_scale: log_zpsi.re,
                }
            }
        }
    }

    pub fn impedance(&self) -> Complex64 {
        match *self {
            RiccatiState::Direct { z, .. } => z,
            RiccatiState::Reciprocal { w, .. } => 1.0 / w,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            RiccatiState::Direct { z, log_psi } => z.is_finite() && log_psi.is_finite(),
            RiccatiState::Reciprocal { w, log_zpsi } => w.is_finite() && log_zpsi.is_finite(),
        }
    }

    /// Switches variable when `|Z|` crosses the threshold. Switching back
    /// waits until `|Z| < threshold/2`, so `W = 0` never converts.
    pub fn rebalanced(self, threshold: f64) -> Self {
        match self {
            RiccatiState::Direct { z, log_psi } if z.norm() >= threshold => RiccatiState::Reciprocal {
                w: 1.0 / z,
                log_zpsi: log_psi + z.ln(),
            },
            RiccatiState::Reciprocal { w, log_zpsi } if w.norm() * threshold > 2.0 => {
                RiccatiState::Direct {
                    z: 1.0 / w,
                    log_psi: log_zpsi + w.ln(),
                }
            }
            s => s,
        }
    }

    fn components(&self) -> [Complex64; 2] {
        match *self {
            RiccatiState::Direct { z, log_psi } => [z, log_psi],
            RiccatiState::Reciprocal { w, log_zpsi } => [w, log_zpsi],
        }
    }

    fn with_components(&self, c: [Complex64; 2]) -> Self {
        match self {
            RiccatiState::Direct { .. } => RiccatiState::Direct {
                z: c[0],
                log_psi: c[1],
            },
            RiccatiState::Reciprocal { .. } => RiccatiState::Reciprocal {
                w: c[0],
                log_zpsi: c[1],
            },
        }
    }
}

fn rhs(reciprocal: bool, y: [Complex64; 2], u: f64, e: f64, params: ModelParams) -> [Complex64; 2] {
    let drive = I * (2.0 / params.hbar) * (e - u);
    let m_h = I * params.m_over_hbar();
    if reciprocal {
        [m_h - drive * y[0] * y[0], drive * y[0]]
    } else {
        [drive - m_h * y[0] * y[0], m_h * y[0]]
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted-or-not trial step: the advanced state and the error norm
/// relative to the tolerances (accept when `error <= 1`).
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub state: RiccatiState,
    pub error: f64,
}

fn dp_step(
    state: RiccatiState,
    x: f64,
    h: f64,
    piece: Piece,
    e: f64,
    params: ModelParams,
    cfg: &IntegrationConfig,
) -> StepOutcome {
    let reciprocal = matches!(state, RiccatiState::Reciprocal { .. });
    let y0 = state.components();
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    for s in 0..7 {
        let mut y = y0;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                y[0] += kj[0] * (a * h);
                y[1] += kj[1] * (a * h);
            }
        }
        let xs = x + C[s] * h;
        k[s] = rhs(reciprocal, y, piece.eval(xs), e, params);
    }
    let mut y5 = y0;
    let mut err = [Complex64::new(0.0, 0.0); 2];
    for s in 0..7 {
        for c in 0..2 {
            y5[c] += k[s][c] * (B5[s] * h);
            err[c] += k[s][c] * ((B5[s] - B4[s]) * h);
        }
    }
    let sc0 = cfg.abs_tol + cfg.rel_tol * y0[0].norm().max(y5[0].norm());
    // The log component measures relative error of ψ directly.
    let sc1 = cfg.abs_tol + cfg.rel_tol;
    let mut error = (err[0].norm() / sc0).max(err[1].norm() / sc1);
    if !error.is_finite() || !y5[0].is_finite() || !y5[1].is_finite() {
        error = f64::INFINITY;
    }
    StepOutcome {
        state: state.with_components(y5),
        error,
    }
}

/// One trial step of size `h` (signed) from `x`, switching to the
/// reciprocal variable first when `|Z|` has reached the pole threshold.
pub fn pole_safe_step(
    state: RiccatiState,
    x: f64,
    h: f64,
    pot: &Potential,
    e: f64,
    params: ModelParams,
    cfg: &IntegrationConfig,
) -> Result<StepOutcome> {
    let state = state.rebalanced(cfg.pole_threshold);
    let out = dp_step(state, x, h, pot.piece_at(x + 0.5 * h), e, params, cfg);
    if out.error.is_finite() {
        Ok(out)
    } else {
        Err(Error::NonFiniteState { x: x + h })
    }
}

/// Ordered list of stop points from `from` to `to`, both included.
fn stops(pot: &Potential, from: f64, to: f64) -> Vec<f64> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let mut pts: Vec<f64> = pot
        .breakpoints()
        .into_iter()
        .filter(|&x| x > lo && x < hi)
        .collect();
    if from > to {
        pts.reverse();
    }
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(from);
    out.extend(pts);
    if to != from {
        out.push(to);
    }
    out
}

/// Stop points merged with a uniform grid of the given spacing laid from
/// `from`; grid points closer than `1e-9·spacing` to a stop are dropped.
fn grid_stops(pot: &Potential, from: f64, to: f64, spacing: f64) -> Vec<f64> {
    let dir = if to >= from { 1.0 } else { -1.0 };
    let stops = stops(pot, from, to);
    let n = ((to - from).abs() / spacing).floor() as usize;
    let near = 1e-9 * spacing;
    let mut out = Vec::with_capacity(stops.len() + n + 1);
    let mut si = 0;
    for j in 0..=n {
        let g = from + dir * spacing * j as f64;
        while si < stops.len() && (stops[si] - g) * dir < near {
            out.push(stops[si]);
            si += 1;
        }
        if out.last().is_none_or(|&l| ((g - l) * dir).abs() >= near) && (to - g) * dir >= near {
            out.push(g);
        }
    }
    out.extend_from_slice(&stops[si..]);
    out
}

struct Integrator<'a> {
    e: f64,
    params: ModelParams,
    cfg: &'a IntegrationConfig,
    max_step: f64,
    h: f64,
}

impl Integrator<'_> {
    /// Adaptive integration across `[x0, x1]` where the potential is the
    /// single smooth `piece`.
    fn run_piece(
        &mut self,
        piece: Piece,
        mut state: RiccatiState,
        x0: f64,
        x1: f64,
        record: &mut Option<&mut Vec<(f64, WaveState)>>,
        record_every_step: bool,
    ) -> Result<RiccatiState> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let mut x = x0;
        let floor = 1e-14 * x0.abs().max(x1.abs()).max(1.0);
        while (x1 - x) * dir > 0.0 {
            state = state.rebalanced(self.cfg.pole_threshold);
            let remaining = (x1 - x).abs();
            let mut h = self.h.min(self.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let out = dp_step(state, x, dir * h, piece, self.e, self.params, self.cfg);
            if out.error <= 1.0 {
                x = if last { x1 } else { x + dir * h };
                state = out.state;
                if !state.is_finite() {
                    return Err(Error::NonFiniteState { x });
                }
                if record_every_step {
                    if let Some(rec) = record.as_deref_mut() {
                        rec.push((x, state.to_wave()));
                    }
                }
                let grow = if out.error == 0.0 {
                    5.0
                } else {
                    (0.9 * out.error.powf(-0.2)).clamp(0.2, 5.0)
                };
                // A short final step should not shrink the next piece's guess.
                if !last || grow > 1.0 {
                    self.h = (h * grow).max(self.h.min(h));
                }
            } else {
                let shrink = if out.error.is_finite() {
                    (0.9 * out.error.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.25
                };
                self.h = h * shrink;
                if self.h < floor {
                    return Err(Error::StepSizeUnderflow { x, h: self.h });
                }
            }
        }
        Ok(state)
    }
}

/// Trace of a propagation: end state plus recorded `(x, state)` pairs in
/// integration order, the start included.
pub(crate) struct Propagation {
    pub end: WaveState,
    pub samples: Vec<(f64, WaveState)>,
}

/// Propagates `init` (given at `from`) to `to`, analytically for
/// piecewise-constant potentials unless `force_numeric` is set.
pub(crate) fn propagate(
    pot: &Potential,
    e: f64,
    from: f64,
    init: WaveState,
    to: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
    record: bool,
) -> Result<Propagation> {
    if cfg.uses_analytic(pot) {
        propagate_analytic(pot, e, from, init, to, cfg, params, record)
    } else {
        propagate_numeric(pot, e, from, init, to, cfg, params, record)
    }
}

fn propagate_analytic(
    pot: &Potential,
    e: f64,
    from: f64,
    init: WaveState,
    to: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
    record: bool,
) -> Result<Propagation> {
    let spacing = cfg.output_spacing.unwrap_or_else(|| cfg.max_step_for(pot));
    let pts = if record {
        grid_stops(pot, from, to, spacing)
    } else {
        stops(pot, from, to)
    };
    let mut state = init.normalized();
    let mut samples = Vec::new();
    if record {
        samples.push((from, state));
    }
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let xm = 0.5 * (x0 + x1);
        state = shift_state(e, pot.piece_at(xm).eval(xm), params, state, x1 - x0);
        if record {
            samples.push((x1, state));
        }
    }
    if !(state.psi.is_finite() && state.zpsi.is_finite()) {
        return Err(Error::NonFiniteState { x: to });
    }
    Ok(Propagation {
        end: state,
        samples,
    })
}

fn propagate_numeric(
    pot: &Potential,
    e: f64,
    from: f64,
    init: WaveState,
    to: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
    record: bool,
) -> Result<Propagation> {
    cfg.validate()?;
    let max_step = cfg.max_step_for(pot);
    let mut integ = Integrator {
        e,
        params,
        cfg,
        max_step,
        h: 0.1 * max_step,
    };
    let mut state = RiccatiState::from_wave(init, cfg.pole_threshold);
    let mut samples = Vec::new();
    if record {
        samples.push((from, init));
    }
    match cfg.output_spacing {
        Some(spacing) => {
            for w in grid_stops(pot, from, to, spacing).windows(2) {
                let piece = pot.piece_at(0.5 * (w[0] + w[1]));
                state = integ.run_piece(piece, state, w[0], w[1], &mut None, false)?;
                if record {
                    samples.push((w[1], state.to_wave()));
                }
            }
        }
        None => {
            let mut rec = if record { Some(&mut samples) } else { None };
            for w in stops(pot, from, to).windows(2) {
                let piece = pot.piece_at(0.5 * (w[0] + w[1]));
                state = integ.run_piece(piece, state, w[0], w[1], &mut rec, true)?;
            }
        }
    }
    Ok(Propagation {
        end: state.to_wave(),
        samples,
    })
}

/// Impedance samples from an anchor to a target, with the wavefunction
/// relative to its value at the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceTrajectory {
    pub energy: f64,
    pub params: ModelParams,
    pub potential: Potential,
    /// Direction of integration: `Right` runs toward increasing x.
    pub direction: Side,
    pub anchor: ImpedanceSample,
    /// Ordered by increasing x.
    pub samples: Vec<ImpedanceSample>,
    /// Wave states matching `samples`; `ψ(anchor) = 1`.
    pub waves: Vec<WaveState>,
}

impl ImpedanceTrajectory {
    fn from_propagation(
        pot: &Potential,
        e: f64,
        params: ModelParams,
        anchor: ImpedanceSample,
        target: f64,
        mut prop: Propagation,
    ) -> Self {
        let direction = if target >= anchor.x { Side::Right } else { Side::Left };
        if direction == Side::Left {
            prop.samples.reverse();
        }
        // Coincident stop points (zero-width steps) would break ordering.
        prop.samples.dedup_by(|b, a| b.0 == a.0);
        let samples = prop
            .samples
            .iter()
            .map(|(x, ws)| ImpedanceSample {
                x: *x,
                z: ws.impedance(),
            })
            .collect();
        let waves = prop.samples.into_iter().map(|(_, ws)| ws).collect();
        ImpedanceTrajectory {
            energy: e,
            params,
            potential: pot.clone(),
            direction,
            anchor,
            samples,
            waves,
        }
    }

    /// The sample at the end opposite the anchor.
    pub fn far_end(&self) -> (ImpedanceSample, WaveState) {
        let i = match self.direction {
            Side::Right => self.samples.len() - 1,
            Side::Left => 0,
        };
        (self.samples[i], self.waves[i])
    }

    /// `ψ` at sample `i`, relative to the anchor.
    pub fn psi(&self, i: usize) -> Complex64 {
        self.waves[i].psi_value()
    }

    /// The same solution seen in the frame x -> -x (Z flips sign).
    pub fn mirrored(&self) -> Self {
        let flip = |s: &ImpedanceSample| ImpedanceSample { x: -s.x, z: -s.z };
        ImpedanceTrajectory {
            energy: self.energy,
            params: self.params,
            potential: self.potential.mirrored(),
            direction: self.direction.opposite(),
            anchor: flip(&self.anchor),
            samples: self.samples.iter().rev().map(flip).collect(),
            waves: self
                .waves
                .iter()
                .rev()
                .map(|w| WaveState {
                    zpsi: -w.zpsi,
                    ..*w
                })
                .collect(),
        }
    }
}

/// Integrates the impedance ODE from `anchor` to `target_x` with adaptive
/// Dormand–Prince steps (always numerically, whatever the potential shape).
pub fn integrate_impedance(
    pot: &Potential,
    e: f64,
    anchor: ImpedanceSample,
    target_x: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ImpedanceTrajectory> {
    if !anchor.z.is_finite() {
        return Err(Error::NonFiniteState { x: anchor.x });
    }
    let init = WaveState::from_impedance(anchor.z);
    let prop = propagate_numeric(pot, e, anchor.x, init, target_x, cfg, params, true)?;
    Ok(ImpedanceTrajectory::from_propagation(
        pot, e, params, anchor, target_x, prop,
    ))
}

/// Like [`integrate_impedance`], but piecewise-constant potentials are
/// chained analytically unless `cfg.force_numeric` is set.
pub fn trace_impedance(
    pot: &Potential,
    e: f64,
    anchor: ImpedanceSample,
    target_x: f64,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ImpedanceTrajectory> {
    if !anchor.z.is_finite() {
        return Err(Error::NonFiniteState { x: anchor.x });
    }
    let init = WaveState::from_impedance(anchor.z);
    let prop = propagate(pot, e, anchor.x, init, target_x, cfg, params, true)?;
    Ok(ImpedanceTrajectory::from_propagation(
        pot, e, params, anchor, target_x, prop,
    ))
}

/// Anchor value of `Z⁺` at `a`: `+z₁` for a wave incident from the left,
/// `-z₁` otherwise (outgoing to the left, or the decaying left tail).
pub fn z_plus_anchor(
    pot: &Potential,
    e: f64,
    incidence: Option<Side>,
    params: ModelParams,
) -> Result<ImpedanceSample> {
    let z1 = region_constants(e, pot.left_level(), params)?.z;
    let z = if incidence == Some(Side::Left) { z1 } else { -z1 };
    Ok(ImpedanceSample { x: pot.domain().0, z })
}

/// Anchor value of `Z⁻` at `b`: `-z₂` for a wave incident from the right,
/// `+z₂` otherwise.
pub fn z_minus_anchor(
    pot: &Potential,
    e: f64,
    incidence: Option<Side>,
    params: ModelParams,
) -> Result<ImpedanceSample> {
    let z2 = region_constants(e, pot.right_level(), params)?.z;
    let z = if incidence == Some(Side::Right) { -z2 } else { z2 };
    Ok(ImpedanceSample { x: pot.domain().1, z })
}

/// `Z⁺(x, a)` over `[a, b]`. `incidence = None` selects bound-state anchors.
pub fn z_plus(
    pot: &Potential,
    e: f64,
    incidence: Option<Side>,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ImpedanceTrajectory> {
    let anchor = z_plus_anchor(pot, e, incidence, params)?;
    trace_impedance(pot, e, anchor, pot.domain().1, cfg, params)
}

/// `Z⁻(x, b)` over `[a, b]`. `incidence = None` selects bound-state anchors.
pub fn z_minus(
    pot: &Potential,
    e: f64,
    incidence: Option<Side>,
    cfg: &IntegrationConfig,
    params: ModelParams,
) -> Result<ImpedanceTrajectory> {
    let anchor = z_minus_anchor(pot, e, incidence, params)?;
    trace_impedance(pot, e, anchor, pot.domain().0, cfg, params)
}
