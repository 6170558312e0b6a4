use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PiecewisePotential, PotentialSegment, Side};

/// Maps the forward/backward plane-wave coefficients `(A, B)` on the right
/// of a structure to those on its left. Coefficients are referenced to the
/// point where they are taken: `ψ(x' ) = A e^{ik(x'-x)} + B e^{-ik(x'-x)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        TransferMatrix {
            m11: o,
            m12: z,
            m21: z,
            m22: o,
        }
    }

    /// Continuity of ψ and ψ' at a jump from wavenumber `k_left` to `k_right`.
    pub fn interface(k_left: Complex64, k_right: Complex64) -> Self {
        let rho = k_right / k_left;
        let p = (1.0 + rho) * 0.5;
        let m = (1.0 - rho) * 0.5;
        TransferMatrix {
            m11: p,
            m12: m,
            m21: m,
            m22: p,
        }
    }

    /// Free propagation over `length` at wavenumber `k`.
    pub fn propagation(k: Complex64, length: f64) -> Self {
        let ph = Complex64::i() * k * length;
        TransferMatrix {
            m11: (-ph).exp(),
            m12: Complex64::new(0.0, 0.0),
            m21: Complex64::new(0.0, 0.0),
            m22: ph.exp(),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `self · other`: the structure of `self` followed on its right by `other`.
    pub fn compose(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * other.m11 + self.m12 * other.m21,
            m12: self.m11 * other.m12 + self.m12 * other.m22,
            m21: self.m21 * other.m11 + self.m22 * other.m21,
            m22: self.m21 * other.m12 + self.m22 * other.m22,
        }
    }
}

fn wavenumber(e: f64, u: f64, params: ModelParams) -> Result<Complex64> {
    if (e - u).abs() <= 1e-12 * e.abs().max(u.abs()) {
        return Err(Error::DegenerateEnergy { e, u });
    }
    let k2 = 2.0 * params.mass * (e - u) / (params.hbar * params.hbar);
    Ok(Complex64::new(k2, 0.0).sqrt())
}

/// One segment embedded in a medium of wavenumber `k_ref` on both sides.
pub fn layer_matrix(seg: &PotentialSegment, e: f64, k_ref: Complex64, params: ModelParams) -> Result<TransferMatrix> {
    let k = wavenumber(e, seg.u, params)?;
    Ok(TransferMatrix::interface(k_ref, k)
        .compose(&TransferMatrix::propagation(k, seg.x_end - seg.x_start))
        .compose(&TransferMatrix::interface(k, k_ref)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub big_r: f64,
    pub big_t: f64,
}

/// Whole-structure matrix from the right lead at `b` to the left lead at `a`.
fn structure_matrix(pot: &PiecewisePotential, e: f64, params: ModelParams) -> Result<TransferMatrix> {
    let mut k_prev = wavenumber(e, pot.left_level, params)?;
    let mut m = TransferMatrix::identity();
    for seg in &pot.segments {
        let k = wavenumber(e, seg.u, params)?;
        m = m
            .compose(&TransferMatrix::interface(k_prev, k))
            .compose(&TransferMatrix::propagation(k, seg.x_end - seg.x_start));
        k_prev = k;
    }
    let k2 = wavenumber(e, pot.right_level, params)?;
    Ok(m.compose(&TransferMatrix::interface(k_prev, k2)))
}

/// Scattering of a wave incident from the left, with amplitudes referred
/// to plane waves anchored at the origin.
pub fn transfer_matrix_solve(pot: &PiecewisePotential, e: f64, params: ModelParams) -> Result<TransferCoefficients> {
    let k1 = wavenumber(e, pot.left_level, params)?;
    if k1.re <= 0.0 {
        return Err(Error::EvanescentIncidence {
            e,
            lead: pot.left_level,
        });
    }
    let k2 = wavenumber(e, pot.right_level, params)?;
    let m = structure_matrix(pot, e, params)?;
    let (a, b) = pot.domain();
    let i = Complex64::i();
    let t_local = 1.0 / m.m11;
    let r_local = m.m21 / m.m11;
    let propagating = k2.im == 0.0;
    let t = if propagating {
        t_local * (i * (k1 * a - k2 * b)).exp()
    } else {
        t_local * (i * k1 * a).exp()
    };
    Ok(TransferCoefficients {
        r: r_local * (2.0 * i * k1 * a).exp(),
        t,
        big_r: r_local.norm_sqr(),
        big_t: if propagating {
            (k2.re / k1.re) * t_local.norm_sqr()
        } else {
            0.0
        },
    })
}

/// As [`transfer_matrix_solve`], with right incidence handled through the
/// mirrored structure.
pub fn transfer_matrix_solve_side(
    pot: &PiecewisePotential,
    e: f64,
    side: Side,
    params: ModelParams,
) -> Result<TransferCoefficients> {
    match side {
        Side::Left => transfer_matrix_solve(pot, e, params),
        Side::Right => {
            let segments = pot
                .segments
                .iter()
                .rev()
                .map(|s| PotentialSegment::new(-s.x_end, -s.x_start, s.u))
                .collect();
            let mirrored = PiecewisePotential {
                left_level: pot.right_level,
                right_level: pot.left_level,
                segments,
                step_at: pot.step_at.map(|x| -x),
            };
            transfer_matrix_solve(&mirrored, e, params)
        }
    }
}
