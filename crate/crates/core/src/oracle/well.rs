use std::f64::consts::{FRAC_PI_2, PI};

use crate::model::ModelParams;

/// Eigenstate of a symmetric square well of the given depth (`U = -depth`
/// inside, zero outside) and width, centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellEigenstate {
    pub energy: f64,
    pub even: bool,
    pub k: f64,
    pub kappa: f64,
    pub width: f64,
}

impl WellEigenstate {
    /// Unnormalized eigenfunction at `x` measured from the well centre.
    pub fn psi(&self, x: f64) -> f64 {
        let h = 0.5 * self.width;
        let inside = |y: f64| if self.even { (self.k * y).cos() } else { (self.k * y).sin() };
        if x.abs() <= h {
            inside(x)
        } else {
            inside(h.copysign(x)) * (-self.kappa * (x.abs() - h)).exp()
        }
    }
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All bound states, ordered by energy. In `θ = kw/2` each branch of
/// `θ tan θ = √(θ_max² - θ²)` (even) and `-θ cot θ = √(θ_max² - θ²)` (odd)
/// is monotone and holds exactly one root.
pub fn square_well_states(depth: f64, width: f64, params: ModelParams) -> Vec<WellEigenstate> {
    if !(depth > 0.0 && width > 0.0) {
        return Vec::new();
    }
    let (hbar, m) = (params.hbar, params.mass);
    let theta_max = 0.5 * width * (2.0 * m * depth).sqrt() / hbar;
    let rhs = |t: f64| (theta_max * theta_max - t * t).max(0.0).sqrt();
    let mut thetas = Vec::new();
    let mut n = 0usize;
    loop {
        let base = n as f64 * PI;
        if base >= theta_max && n > 0 {
            break;
        }
        // Even branch on [nπ, nπ + π/2).
        let hi = (base + FRAC_PI_2).min(theta_max);
        thetas.push((bisect(|t| t * t.tan() - rhs(t), base, hi), true));
        // Odd branch on (nπ + π/2, (n+1)π).
        let lo = base + FRAC_PI_2;
        if lo < theta_max {
            let hi = (base + PI).min(theta_max);
            thetas.push((bisect(|t| -t / t.tan() - rhs(t), lo, hi), false));
        }
        n += 1;
    }
    thetas
        .into_iter()
        .map(|(t, even)| {
            let k = 2.0 * t / width;
            let energy = hbar * hbar * k * k / (2.0 * m) - depth;
            let kappa = (-2.0 * m * energy).max(0.0).sqrt() / hbar;
            WellEigenstate {
                energy,
                even,
                k,
                kappa,
                width,
            }
        })
        .collect()
}

/// Bound-state energies of the symmetric square well.
pub fn square_well_eigenvalues(depth: f64, width: f64, params: ModelParams) -> Vec<f64> {
    square_well_states(depth, width, params).into_iter().map(|s| s.energy).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: ModelParams = ModelParams {
        hbar: 1.0,
        mass: 1.0,
    };

    #[test]
    fn depth_five_width_two() {
        let states = square_well_states(5.0, 2.0, P);
        assert_eq!(states.len(), 3);
        assert!(states.windows(2).all(|w| w[0].energy < w[1].energy));
        assert_eq!(states.iter().map(|s| s.even).collect::<Vec<_>>(), [true, false, true]);
        for s in &states {
            let t = s.k;
            let lhs = if s.even { t * t.tan() } else { -t / t.tan() };
            assert!((lhs - s.kappa).abs() < 1e-10);
            assert!(s.energy > -5.0 && s.energy < 0.0);
        }
    }

    #[test]
    fn deep_well_approaches_infinite_well() {
        // Leading finite-depth correction: the wall penetration 1/κ widens
        // the box on each side, E_n + V₀ ≈ n²π²/(2(w + 2/κ)²).
        let e = square_well_eigenvalues(1e6, 1.0, P);
        let kappa = (2.0f64 * 1e6).sqrt();
        for (n, en) in e.iter().take(5).enumerate() {
            let inf = (n as f64 + 1.0).powi(2) * PI * PI / 2.0;
            let corrected = inf / (1.0 + 2.0 / kappa).powi(2);
            let got = en + 1e6;
            assert!((got - corrected).abs() < 1e-4 * inf, "n={n}: {got} vs {corrected}");
            assert!((got - inf).abs() < 3e-3 * inf);
            assert!(got < inf);
        }
    }

    #[test]
    fn shallow_wells_bind_once() {
        assert_eq!(square_well_eigenvalues(0.01, 1.0, P).len(), 1);
        let e = square_well_eigenvalues(1e-6, 2.0, P);
        assert_eq!(e.len(), 1);
        // Weak binding: E ≈ -m(V₀w)²/(2ħ²).
        let approx = -(1e-6f64 * 2.0).powi(2) / 2.0;
        assert!((e[0] - approx).abs() < 1e-2 * approx.abs());
    }

    #[test]
    fn eigenfunction_is_continuous_and_smooth() {
        for s in square_well_states(5.0, 2.0, P) {
            for x in [-1.0f64, 1.0] {
                let d = 1e-7;
                let (l, r) = (s.psi(x - d), s.psi(x + d));
                assert!((l - r).abs() < 1e-5);
                let dl = (s.psi(x - d) - s.psi(x - 2.0 * d)) / d;
                let dr = (s.psi(x + 2.0 * d) - s.psi(x + d)) / d;
                assert!((dl - dr).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn invalid_input_gives_nothing() {
        assert!(square_well_eigenvalues(-1.0, 1.0, P).is_empty());
        assert!(square_well_eigenvalues(1.0, 0.0, P).is_empty());
    }
}
