//! Unit system, potential descriptions and the shared impedance vocabulary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PotentialError, Result};

/// Physical constants fixing the unit system. Defaults to ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let p = ModelParams { hbar, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.hbar) && ok(self.mass) {
            Ok(())
        } else {
            Err(Error::InvalidParams {
                hbar: self.hbar,
                mass: self.mass,
            })
        }
    }

    /// m/ħ, the factor turning an impedance into a wavenumber.
    pub fn m_over_hbar(&self) -> f64 {
        self.mass / self.hbar
    }
}

/// Incidence direction, or which lead is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Constant potential `u` on `[x_start, x_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSegment {
    pub x_start: f64,
    pub x_end: f64,
    pub u: f64,
}

impl PotentialSegment {
    pub fn new(x_start: f64, x_end: f64, u: f64) -> Self {
        PotentialSegment { x_start, x_end, u }
    }

    pub fn length(&self) -> f64 {
        self.x_end - self.x_start
    }
}

/// Piecewise-constant potential between two semi-infinite leads.
///
/// With no segments the potential is a step located at `step_at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewisePotential {
    pub left_level: f64,
    pub right_level: f64,
    #[serde(default)]
    pub segments: Vec<PotentialSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_at: Option<f64>,
}

impl PiecewisePotential {
    pub fn new(left_level: f64, segments: Vec<PotentialSegment>, right_level: f64) -> Result<Self> {
        Ok(validate_potential(PiecewisePotential {
            left_level,
            right_level,
            segments,
            step_at: None,
        })?)
    }

    pub fn step(left_level: f64, right_level: f64, x0: f64) -> Result<Self> {
        Ok(validate_potential(PiecewisePotential {
            left_level,
            right_level,
            segments: Vec::new(),
            step_at: Some(x0),
        })?)
    }

    /// Constant `u_b` on `[a, a + length]`, `lead` elsewhere.
    pub fn barrier(lead: f64, u_b: f64, a: f64, length: f64) -> Result<Self> {
        Self::new(lead, vec![PotentialSegment::new(a, a + length, u_b)], lead)
    }

    /// The interval `[a, b]` carrying the structure; `a == b` for a step.
    pub fn domain(&self) -> (f64, f64) {
        match (self.segments.first(), self.segments.last()) {
            (Some(f), Some(l)) => (f.x_start, l.x_end),
            _ => {
                let x0 = self.step_at.unwrap_or(0.0);
                (x0, x0)
            }
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        if x <= a {
            return self.left_level;
        }
        if x >= b {
            return self.right_level;
        }
        // Last segment whose start is <= x: right-segment value at joins.
        let idx = self.segments.partition_point(|s| s.x_start <= x);
        self.segments[idx.saturating_sub(1)].u
    }

    fn mirrored(&self) -> PiecewisePotential {
        PiecewisePotential {
            left_level: self.right_level,
            right_level: self.left_level,
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| PotentialSegment::new(-s.x_end, -s.x_start, s.u))
                .collect(),
            step_at: self.step_at.map(|x| -x),
        }
    }
}

/// Checks contiguity and ordering; reports the first violated invariant.
pub fn validate_potential(p: PiecewisePotential) -> Result<PiecewisePotential, PotentialError> {
    let finite = |v: f64, field: String| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(PotentialError::NonFinite { field })
        }
    };
    finite(p.left_level, "left_level".into())?;
    finite(p.right_level, "right_level".into())?;
    if p.segments.is_empty() {
        return match p.step_at {
            Some(x) => {
                finite(x, "step_at".into())?;
                Ok(p)
            }
            None => Err(PotentialError::EmptyDomainWithNoStepPoint),
        };
    }
    if p.step_at.is_some() {
        return Err(PotentialError::StepPointWithSegments {
            count: p.segments.len(),
        });
    }
    for (i, s) in p.segments.iter().enumerate() {
        finite(s.x_start, format!("segments[{i}].x_start"))?;
        finite(s.x_end, format!("segments[{i}].x_end"))?;
        finite(s.u, format!("segments[{i}].u"))?;
        if s.x_start >= s.x_end {
            return Err(PotentialError::EmptySegment {
                index: i,
                x_start: s.x_start,
                x_end: s.x_end,
            });
        }
    }
    for (i, w) in p.segments.windows(2).enumerate() {
        let (end, start) = (w[0].x_end, w[1].x_start);
        if start > end {
            return Err(PotentialError::GapBetweenSegments {
                index: i,
                next: i + 1,
                end,
                start,
            });
        }
        if start < end {
            return Err(PotentialError::OverlappingSegments {
                index: i,
                next: i + 1,
                end,
                start,
            });
        }
    }
    Ok(p)
}

/// Potential given by samples, linearly interpolated, between two leads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledPotential {
    pub left_level: f64,
    pub right_level: f64,
    pub samples: Vec<(f64, f64)>,
}

impl SampledPotential {
    pub fn new(left_level: f64, samples: Vec<(f64, f64)>, right_level: f64) -> Result<Self> {
        let p = SampledPotential {
            left_level,
            right_level,
            samples,
        };
        p.validate()?;
        Ok(p)
    }

    /// Samples `f` at `n` uniformly spaced points on `[a, b]`.
    pub fn from_fn(
        left_level: f64,
        right_level: f64,
        a: f64,
        b: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                (x, f(x))
            })
            .collect();
        Self::new(left_level, samples, right_level)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !self.left_level.is_finite() {
            return Err(PotentialError::NonFinite {
                field: "left_level".into(),
            });
        }
        if !self.right_level.is_finite() {
            return Err(PotentialError::NonFinite {
                field: "right_level".into(),
            });
        }
        if self.samples.len() < 2 {
            return Err(PotentialError::TooFewSamples {
                count: self.samples.len(),
            });
        }
        for (i, &(x, u)) in self.samples.iter().enumerate() {
            if !x.is_finite() || !u.is_finite() {
                return Err(PotentialError::NonFinite {
                    field: format!("samples[{i}]"),
                });
            }
            if i > 0 && x <= self.samples[i - 1].0 {
                return Err(PotentialError::NonIncreasingSamples {
                    index: i,
                    x,
                    prev: self.samples[i - 1].0,
                });
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        if x <= a {
            return self.left_level;
        }
        if x >= b {
            return self.right_level;
        }
        let idx = self.samples.partition_point(|s| s.0 <= x).max(1);
        let (x0, u0) = self.samples[idx - 1];
        let (x1, u1) = self.samples[idx];
        u0 + (u1 - u0) * (x - x0) / (x1 - x0)
    }

    fn mirrored(&self) -> SampledPotential {
        SampledPotential {
            left_level: self.right_level,
            right_level: self.left_level,
            samples: self.samples.iter().rev().map(|&(x, u)| (-x, u)).collect(),
        }
    }
}

/// Potential restricted to one smooth piece: constant or linear in x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Constant(f64),
    Linear { x0: f64, u0: f64, slope: f64 },
}

impl Piece {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Piece::Constant(u) => u,
            Piece::Linear { x0, u0, slope } => u0 + slope * (x - x0),
        }
    }
}

/// Any supported potential shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    Piecewise(PiecewisePotential),
    Sampled(SampledPotential),
}

impl From<PiecewisePotential> for Potential {
    fn from(p: PiecewisePotential) -> Self {
        Potential::Piecewise(p)
    }
}

impl From<SampledPotential> for Potential {
    fn from(p: SampledPotential) -> Self {
        Potential::Sampled(p)
    }
}

impl Potential {
    pub fn validate(&self) -> Result<(), PotentialError> {
        match self {
            Potential::Piecewise(p) => validate_potential(p.clone()).map(|_| ()),
            Potential::Sampled(s) => s.validate(),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Potential::Piecewise(p) => p.domain(),
            Potential::Sampled(s) => s.domain(),
        }
    }

    pub fn left_level(&self) -> f64 {
        match self {
            Potential::Piecewise(p) => p.left_level,
            Potential::Sampled(s) => s.left_level,
        }
    }

    pub fn right_level(&self) -> f64 {
        match self {
            Potential::Piecewise(p) => p.right_level,
            Potential::Sampled(s) => s.right_level,
        }
    }

    pub fn lead_level(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left_level(),
            Side::Right => self.right_level(),
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self {
            Potential::Piecewise(p) => p.value_at(x),
            Potential::Sampled(s) => s.value_at(x),
        }
    }

    pub fn as_piecewise(&self) -> Option<&PiecewisePotential> {
        match self {
            Potential::Piecewise(p) => Some(p),
            Potential::Sampled(_) => None,
        }
    }

    /// Sorted positions where the potential or its slope may change,
    /// including both ends of the domain.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Potential::Piecewise(p) => {
                let (a, b) = p.domain();
                let mut pts = vec![a];
                pts.extend(p.segments.iter().map(|s| s.x_end));
                if pts.last() != Some(&b) {
                    pts.push(b);
                }
                pts
            }
            Potential::Sampled(s) => s.samples.iter().map(|s| s.0).collect(),
        }
    }

    /// Positions where the potential itself jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            Potential::Piecewise(p) => {
                let mut prev = p.left_level;
                for s in &p.segments {
                    if s.u != prev {
                        out.push(s.x_start);
                    }
                    prev = s.u;
                }
                if prev != p.right_level {
                    out.push(p.domain().1);
                }
            }
            Potential::Sampled(s) => {
                let (a, b) = s.domain();
                if s.samples[0].1 != s.left_level {
                    out.push(a);
                }
                if s.samples[s.samples.len() - 1].1 != s.right_level {
                    out.push(b);
                }
            }
        }
        out
    }

    /// The smooth piece containing `x`, taken as the open interval
    /// around it; callers pass an interior point of a step.
    pub fn piece_at(&self, x: f64) -> Piece {
        let (a, b) = self.domain();
        if x < a {
            return Piece::Constant(self.left_level());
        }
        if x > b {
            return Piece::Constant(self.right_level());
        }
        match self {
            Potential::Piecewise(p) => Piece::Constant(p.value_at(x)),
            Potential::Sampled(s) => {
                let idx = s.samples.partition_point(|q| q.0 <= x).clamp(1, s.samples.len() - 1);
                let (x0, u0) = s.samples[idx - 1];
                let (x1, u1) = s.samples[idx];
                Piece::Linear {
                    x0,
                    u0,
                    slope: (u1 - u0) / (x1 - x0),
                }
            }
        }
    }

    /// Smallest value inside the domain (the lead minimum for a step).
    pub fn interior_min(&self) -> f64 {
        match self {
            Potential::Piecewise(p) if p.segments.is_empty() => p.left_level.min(p.right_level),
            Potential::Piecewise(p) => p.segments.iter().map(|s| s.u).fold(f64::INFINITY, f64::min),
            Potential::Sampled(s) => s.samples.iter().map(|q| q.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest value anywhere, leads included.
    pub fn global_max(&self) -> f64 {
        let leads = self.left_level().max(self.right_level());
        match self {
            Potential::Piecewise(p) => p.segments.iter().map(|s| s.u).fold(leads, f64::max),
            Potential::Sampled(s) => s.samples.iter().map(|q| q.1).fold(leads, f64::max),
        }
    }

    /// All constant levels appearing in a piecewise potential (leads first).
    pub fn levels(&self) -> Vec<f64> {
        let mut v = vec![self.left_level(), self.right_level()];
        if let Potential::Piecewise(p) = self {
            v.extend(p.segments.iter().map(|s| s.u));
        }
        v
    }

    /// The reflection x -> -x.
    pub fn mirrored(&self) -> Potential {
        match self {
            Potential::Piecewise(p) => Potential::Piecewise(p.mirrored()),
            Potential::Sampled(s) => Potential::Sampled(s.mirrored()),
        }
    }
}

/// Value of the potential at `x`; joins take the right-hand segment's value.
pub fn potential_at(p: &Potential, x: f64) -> f64 {
    p.value_at(x)
}

/// Complex impedance at a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceSample {
    pub x: f64,
    pub z: Complex64,
}
