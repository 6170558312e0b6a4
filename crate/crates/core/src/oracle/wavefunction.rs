use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Piece, Potential, Side};
use crate::riccati::ImpedanceTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `ψ` at the trajectory anchor equals the supplied constant.
    UnitIncident,
    /// `∫|ψ|² dx = 1` over the sampled range.
    UnitNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionProfile {
    pub samples: Vec<(f64, Complex64)>,
    pub normalization: Normalization,
}

impl WavefunctionProfile {
    /// Rescaled so that the trapezoidal `∫|ψ|²` over the samples is one.
    pub fn unit_norm(&self) -> WavefunctionProfile {
        let norm: f64 = self
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.norm_sqr() + w[1].1.norm_sqr()))
            .sum();
        let s = 1.0 / norm.sqrt();
        WavefunctionProfile {
            samples: self.samples.iter().map(|&(x, p)| (x, p * s)).collect(),
            normalization: Normalization::UnitNorm,
        }
    }

    /// Rescaled so the largest `|ψ|` is one and real positive there.
    pub fn unit_peak(&self) -> Vec<(f64, Complex64)> {
        let peak = self
            .samples
            .iter()
            .map(|s| s.1)
            .fold(Complex64::new(0.0, 0.0), |m, p| if p.norm() > m.norm() { p } else { m });
        self.samples.iter().map(|&(x, p)| (x, p / peak)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max)
    }
}

/// `1/z`, zero at a pole.
fn reciprocal(z: Complex64) -> Complex64 {
    if z.is_finite() {
        z.inv()
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// `sinh(w)/w`.
fn sinhc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        1.0 + w * w / 6.0
    } else {
        w.sinh() / w
    }
}

fn local_phase(e: f64, u: f64, h: f64, params: ModelParams) -> Complex64 {
    let g2 = -2.0 * params.mass * (e - u) / (params.hbar * params.hbar);
    Complex64::new(g2, 0.0).sqrt() * h
}

/// `ψ(x + h)/ψ(x)` for constant `u` on the step, exact for the local
/// solution that has impedance `z` at `x`.
fn constant_ratio(e: f64, u: f64, z: Complex64, h: f64, params: ModelParams) -> Complex64 {
    let w = local_phase(e, u, h, params);
    w.cosh() + z * Complex64::i() * (params.mass / params.hbar) * h * sinhc(w)
}

/// `(Zψ)(x + h)/(Zψ)(x)` for constant `u`, in terms of `1/Z` at `x`. Used
/// near nodes of `ψ`, where `Zψ` stays well conditioned.
fn constant_flux_ratio(e: f64, u: f64, inv_z: Complex64, h: f64, params: ModelParams) -> Complex64 {
    let w = local_phase(e, u, h, params);
    w.cosh() + inv_z * Complex64::i() * (2.0 * (e - u) / params.hbar) * h * sinhc(w)
}

/// `ψ(x) = C exp[(im/ħ)∫Z dx]` along the trajectory, with `ψ = C` at the
/// anchor. Steps where the potential is constant use the local
/// constant-potential solution; the rest use the endpoint-corrected
/// trapezoid rule with `Z'` from the Riccati equation. Where `|Z|` exceeds
/// the trajectory's impedance scale the product `Zψ` is carried instead,
/// through `1/Z`, so nodes of `ψ` lose no accuracy.
pub fn reconstruct_wavefunction(
    traj: &ImpedanceTrajectory,
    c: Complex64,
    params: ModelParams,
) -> Result<WavefunctionProfile> {
    let s = &traj.samples;
    let n = s.len();
    let e = traj.energy;
    let im_h = Complex64::i() * (params.mass / params.hbar);
    let dz = |x: f64, z: Complex64, piece: Piece| {
        Complex64::i() * (2.0 / params.hbar) * (e - piece.eval(x)) - im_h * z * z
    };
    let scale = s
        .iter()
        .map(|p| (2.0 * (e - traj.potential.value_at(p.x)).abs() / params.mass).sqrt())
        .fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let start = if traj.direction == Side::Right { 0 } else { n - 1 };
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[start] = c;
    let mut flux = s[start].z * c;
    let order: Vec<(usize, usize)> = if start == 0 {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    } else {
        (1..n).rev().map(|i| (i, i - 1)).collect()
    };
    for (from, to) in order {
        let (x0, x1) = (s[from].x, s[to].x);
        let h = x1 - x0;
        let piece = traj.potential.piece_at(0.5 * (x0 + x1));
        let (z0, z1) = (s[from].z, s[to].z);
        if z0.norm().max(z1.norm()) > scale {
            let ratio = match piece {
                Piece::Constant(u) => constant_flux_ratio(e, u, reciprocal(z0), h, params),
                _ => {
                    // d ln(Zψ)/dx = (2i/ħ)(E - U)/Z
                    let slope = (piece.eval(x1) - piece.eval(x0)) / h;
                    let g = |x: f64, z: Complex64| Complex64::i() * (2.0 / params.hbar) * (e - piece.eval(x)) * reciprocal(z);
                    let dg = |x: f64, z: Complex64| {
                        // (1/Z)' = i m/ħ - (1/Z)² i(2/ħ)(E - U)
                        let w = reciprocal(z);
                        let dw = im_h - w * w * Complex64::i() * (2.0 / params.hbar) * (e - piece.eval(x));
                        Complex64::i() * (2.0 / params.hbar) * (-slope * w + (e - piece.eval(x)) * dw)
                    };
                    let integral = 0.5 * h * (g(x0, z0) + g(x1, z1)) + h * h / 12.0 * (dg(x0, z0) - dg(x1, z1));
                    integral.exp()
                }
            };
            flux *= ratio;
            psi[to] = if z1.is_finite() { flux / z1 } else { Complex64::new(0.0, 0.0) };
        } else {
            let ratio = match piece {
                Piece::Constant(u) => constant_ratio(e, u, z0, h, params),
                _ => {
                    let integral =
                        0.5 * h * (z0 + z1) + h * h / 12.0 * (dz(x0, z0, piece) - dz(x1, z1, piece));
                    (im_h * integral).exp()
                }
            };
            psi[to] = psi[from] * ratio;
            flux = z1 * psi[to];
        }
        if !(psi[to].is_finite() && flux.is_finite()) {
            return Err(Error::QuadratureDivergence { x: x1 });
        }
    }
    Ok(WavefunctionProfile {
        samples: s.iter().map(|p| p.x).zip(psi).collect(),
        normalization: Normalization::UnitIncident,
    })
}

/// Largest `|-(ħ²/2m)ψ'' + (U - E)ψ| / max|ψ|` over interior samples, with
/// `ψ''` from the three-point stencil. Samples within two grid points of a
/// potential jump, or between unequal spacings, are skipped.
pub fn schrodinger_residual(
    profile: &WavefunctionProfile,
    pot: &Potential,
    e: f64,
    params: ModelParams,
) -> Result<f64> {
    let s = &profile.samples;
    if s.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: s.len(),
        });
    }
    let jumps = pot.discontinuities();
    let scale = profile.max_abs();
    let kin = params.hbar * params.hbar / (2.0 * params.mass);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 1..s.len() - 1 {
        let lo = s[i.saturating_sub(2)].0;
        let hi = s[(i + 2).min(s.len() - 1)].0;
        if jumps.iter().any(|&d| d >= lo && d <= hi) {
            continue;
        }
        let (xm, x, xp) = (s[i - 1].0, s[i].0, s[i + 1].0);
        let (hm, hp) = (x - xm, xp - x);
        // The stencil drops to first order on unequal spacings.
        if (hp - hm).abs() > 1e-6 * hp.max(hm) {
            continue;
        }
        checked += 1;
        let d2 = 2.0 * ((s[i + 1].1 - s[i].1) / hp - (s[i].1 - s[i - 1].1) / hm) / (hp + hm);
        let res = -kin * d2 + (pot.value_at(x) - e) * s[i].1;
        worst = worst.max(res.norm());
    }
    if checked < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: checked,
        });
    }
    Ok(worst / scale)
}
