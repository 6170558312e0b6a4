//! Closed-form impedance algebra for regions of constant potential.
//!
//! In a region with constant `U` the impedance equation separates and every
//! solution has the form `Z(x) = z tanh(γx + φ)` with the characteristic
//! impedance `z = sqrt(2(E - U)/m)` and propagation constant `γ = i(m/ħ)z`.
//! The branch of `z` is fixed so that `E > U` gives a positive real `z` and
//! `E < U` gives `z = +i|z|`, which is the impedance of a tail decaying to the
//! right. The same algebra, written for the pair `(ψ, Zψ)`, gives an exact
//! linear map across a layer that never divides by a vanishing `ψ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Relative width of the excluded band around `E = U`.
pub const EPS_DEGENERATE: f64 = 1e-12;
/// Relative threshold for the vanishing denominators of the tanh algebra.
pub const EPS_POLE: f64 = 1e-10;
pub const TOL_ALG: f64 = 1e-10;
pub const TOL_FLUX: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// True when `e` and `u` are equal up to the relative band `EPS_DEGENERATE`.
pub fn is_degenerate(e: f64, u: f64) -> bool {
    (e - u).abs() <= EPS_DEGENERATE * e.abs().max(u.abs())
}

/// Characteristic impedance and propagation constant of a uniform region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionConstants {
    pub z: Complex64,
    pub gamma: Complex64,
    pub e: f64,
    pub u: f64,
    pub params: ModelParams,
}

impl RegionConstants {
    pub fn is_propagating(&self) -> bool {
        self.e > self.u
    }

    /// `k` for a propagating region, `κ` for an evanescent one; always positive.
    pub fn wavenumber(&self) -> f64 {
        self.params.m_over_hbar() * self.z.norm()
    }
}

pub fn region_constants(e: f64, u: f64, params: ModelParams) -> Result<RegionConstants> {
    if is_degenerate(e, u) {
        return Err(Error::DegenerateEnergy { e, u });
    }
    let d = e - u;
    let mag = (2.0 * d.abs() / params.mass).sqrt();
    let z = if d > 0.0 {
        Complex64::new(mag, 0.0)
    } else {
        Complex64::new(0.0, mag)
    };
    Ok(RegionConstants {
        z,
        gamma: I * params.m_over_hbar() * z,
        e,
        u,
        params,
    })
}

/// The integration constant `φ` of `z tanh(γx + φ)`.
///
/// `φ = +∞` is the pure right-moving wave (`Z ≡ z`), `φ = -∞` the pure
/// left-moving one (`Z ≡ -z`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseConstant {
    Finite(Complex64),
    PosInfinite,
    NegInfinite,
}

/// `cosh w` and `sinh w`, both multiplied by `exp(-|Re w|)`, plus `|Re w|`.
pub(crate) fn scaled_cosh_sinh(w: Complex64) -> (Complex64, Complex64, f64) {
    let s = w.re.abs();
    let ep = (w - s).exp();
    let em = (-w - s).exp();
    ((ep + em) * 0.5, (ep - em) * 0.5, s)
}

/// `sinh(w)/w` scaled by `exp(-|Re w|)`.
fn scaled_sinhc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        let series = 1.0 + w2 / 6.0 * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0));
        series * (-w.re.abs()).exp()
    } else {
        scaled_cosh_sinh(w).1 / w
    }
}

/// `z tanh(γx + φ)`.
pub fn impedance_at(rc: &RegionConstants, phi: PhaseConstant, x: f64) -> Result<Complex64> {
    match phi {
        PhaseConstant::PosInfinite => Ok(rc.z),
        PhaseConstant::NegInfinite => Ok(-rc.z),
        PhaseConstant::Finite(phi) => {
            let (ch, sh, _) = scaled_cosh_sinh(rc.gamma * x + phi);
            if ch.norm() <= EPS_POLE * sh.norm() {
                return Err(Error::PoleAtX { x });
            }
            Ok(rc.z * sh / ch)
        }
    }
}

/// Inverts `z tanh(γx + φ) = z_val` for `φ`, with `Im φ` in `(-π/2, π/2]`.
pub fn phase_from_impedance(rc: &RegionConstants, x: f64, z_val: Complex64) -> PhaseConstant {
    let w = z_val / rc.z;
    let tight = 4.0 * f64::EPSILON;
    if (w - 1.0).norm() <= tight {
        return PhaseConstant::PosInfinite;
    }
    if (w + 1.0).norm() <= tight {
        return PhaseConstant::NegInfinite;
    }
    let atanh = 0.5 * ((1.0 + w) / (1.0 - w)).ln();
    let phi = atanh - rc.gamma * x;
    let pi = std::f64::consts::PI;
    let mut im = phi.im.rem_euclid(pi);
    if im > pi / 2.0 {
        im -= pi;
    }
    PhaseConstant::Finite(Complex64::new(phi.re, im))
}

/// Carries an impedance `z_far` a distance `length` to the left through a
/// uniform region:
/// `z (z_far cosh γl - z sinh γl) / (z cosh γl - z_far sinh γl)`.
pub fn layer_transform(rc: &RegionConstants, z_far: Complex64, length: f64) -> Result<Complex64> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::InvalidLength(length));
    }
    let (ch, sh, _) = scaled_cosh_sinh(rc.gamma * length);
    let a = rc.z * ch;
    let b = z_far * sh;
    let den = a - b;
    if den.norm() <= EPS_POLE * (a.norm() + b.norm()) {
        return Err(Error::TransformPole {
            magnitude: den.norm(),
        });
    }
    Ok(rc.z * (z_far * ch - rc.z * sh) / den)
}

/// Reflection amplitude of a potential step at `x0` for a wave incident
/// from the left, referenced to plane waves `exp(±ik₁x)`.
pub fn step_reflection(e: f64, u1: f64, u2: f64, x0: f64, params: ModelParams) -> Result<Complex64> {
    let r1 = region_constants(e, u1, params)?;
    let r2 = region_constants(e, u2, params)?;
    let ratio = r2.z / r1.z;
    Ok((2.0 * r1.gamma * x0).exp() * (1.0 - ratio) / (1.0 + ratio))
}

/// Amplitudes and probabilities of a rectangular barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub big_r: f64,
    pub big_t: f64,
}

/// Closed forms for a barrier of height `u_b` on `[0, length]` with zero
/// potential outside.
pub fn barrier_closed_forms(
    e: f64,
    u_b: f64,
    length: f64,
    params: ModelParams,
) -> Result<BarrierCoefficients> {
    if e <= 0.0 {
        return Err(Error::EvanescentIncidence { e, lead: 0.0 });
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidLength(length));
    }
    let lead = region_constants(e, 0.0, params)?;
    let bar = region_constants(e, u_b, params)?;
    let g0 = lead.gamma;
    let gb = bar.gamma;
    let ratio = gb / g0;
    let (ch, sh, scale) = scaled_cosh_sinh(gb * length);

    let r = -(1.0 - ratio * ratio) * sh / (2.0 * ratio * ch - (1.0 + ratio * ratio) * sh);
    let t = 2.0 * g0 * gb * (-g0 * length).exp() * (-scale).exp()
        / (2.0 * g0 * gb * ch - (g0 * g0 + gb * gb) * sh);

    let k0 = lead.wavenumber();
    let kb = bar.wavenumber();
    let (big_r, big_t) = if e <= u_b {
        let kl = kb * length;
        let q = (kb * kb) / (k0 * k0);
        let sh2 = kl.sinh().powi(2);
        let ch2 = kl.cosh().powi(2);
        let big_r = 1.0 / (1.0 + 4.0 * q / ((1.0 + q).powi(2) * sh2));
        let num = 4.0 * k0 * k0 * kb * kb;
        let big_t = num / (num * ch2 + (k0 * k0 - kb * kb).powi(2) * sh2);
        (big_r, big_t)
    } else {
        let s2 = (kb * length).sin().powi(2);
        let c2 = (kb * length).cos().powi(2);
        let q = (kb * kb) / (k0 * k0);
        let big_r = (1.0 - q).powi(2) * s2 / (4.0 * q + (1.0 - q).powi(2) * s2);
        let num = 4.0 * k0 * k0 * kb * kb;
        let big_t = num / (num * c2 + (k0 * k0 + kb * kb).powi(2) * s2);
        (big_r, big_t)
    };
    Ok(BarrierCoefficients { r, t, big_r, big_t })
}

/// Homogeneous form of an impedance: `Z = zpsi / psi` with `psi ∝ ψ` and
/// `zpsi ∝ (ħ/im) ψ'`. The true amplitudes are the stored ones times
/// `exp(log_scale)`, which keeps long evanescent stretches finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveState {
    pub psi: Complex64,
    pub zpsi: Complex64,
    pub log_scale: f64,
}

impl WaveState {
    /// State with `ψ = 1` and the given impedance.
    pub fn from_impedance(z: Complex64) -> Self {
        WaveState {
            psi: Complex64::new(1.0, 0.0),
            zpsi: z,
            log_scale: 0.0,
        }
    }

    pub fn impedance(&self) -> Complex64 {
        self.zpsi / self.psi
    }

    /// `ψ` including the scale factor.
    pub fn psi_value(&self) -> Complex64 {
        self.psi * self.log_scale.exp()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.psi.norm().max(self.zpsi.norm());
        if n > 0.0 && n.is_finite() {
            self.psi /= n;
            self.zpsi /= n;
            self.log_scale += n.ln();
        }
        self
    }

    /// Distance between the two impedances on the Riemann sphere, measured
    /// in impedance units of size `scale`; equals `|Z₁ - Z₂|` when both are
    /// small compared with `scale` and stays bounded at poles.
    pub fn chordal_distance(&self, other: &WaveState, scale: f64) -> f64 {
        let cross = self.zpsi * other.psi - other.zpsi * self.psi;
        let n1 = (self.zpsi.norm_sqr() / (scale * scale) + self.psi.norm_sqr()).sqrt();
        let n2 = (other.zpsi.norm_sqr() / (scale * scale) + other.psi.norm_sqr()).sqrt();
        cross.norm() / (n1 * n2)
    }
}

/// Exact propagation of a wave state across `dx` (either sign) in a region
/// of constant potential `u`. Valid for every energy, including `E = U`.
pub fn shift_state(e: f64, u: f64, params: ModelParams, state: WaveState, dx: f64) -> WaveState {
    let m_h = params.m_over_hbar();
    let gamma_sq = -2.0 * params.mass * (e - u) / (params.hbar * params.hbar);
    let w = Complex64::new(gamma_sq, 0.0).sqrt() * dx;
    let (ch, _, scale) = scaled_cosh_sinh(w);
    let shc = scaled_sinhc(w);
    let a = I * m_h * dx * shc;
    let b = I * (2.0 / params.hbar) * (e - u) * dx * shc;
    WaveState {
        psi: state.psi * ch + state.zpsi * a,
        zpsi: state.zpsi * ch + state.psi * b,
        log_scale: state.log_scale + scale,
    }
    .normalized()
}
