//! G-closure of two isotropic conductors: means, membership, θ-recovery and
//! boundary sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symtensor::SymTensor;

/// Conductivities a1 < a2 with a1-volume fraction `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseA {
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "thetaA")]
    pub theta: f64,
}

impl PhaseA {
    pub fn new(a1: f64, a2: f64, theta: f64) -> Result<PhaseA> {
        if !(a1 > 0.0 && a2.is_finite() && a1 < a2) {
            return Err(Error::InvalidPhase(format!("need 0 < a1 < a2, got a1={a1}, a2={a2}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidPhase(format!("thetaA={theta} outside [0,1]")));
        }
        Ok(PhaseA { a1, a2, theta })
    }

    pub fn with_theta(&self, theta: f64) -> PhaseA {
        PhaseA { theta, ..*self }
    }

    pub fn harmonic_at(&self, theta: f64) -> f64 {
        1.0 / (theta / self.a1 + (1.0 - theta) / self.a2)
    }

    pub fn arithmetic_at(&self, theta: f64) -> f64 {
        self.a1 * theta + self.a2 * (1.0 - theta)
    }

    pub fn harmonic(&self) -> f64 {
        self.harmonic_at(self.theta)
    }

    pub fn arithmetic(&self) -> f64 {
        self.arithmetic_at(self.theta)
    }

    pub fn contrast(&self) -> f64 {
        self.a2 - self.a1
    }
}

/// (harmonic, arithmetic)
pub fn means(p: &PhaseA) -> (f64, f64) {
    (p.harmonic(), p.arithmetic())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GVerdict {
    Inside,
    BoundaryLower,
    BoundaryUpper,
    Corner,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GMembershipReport {
    /// λᵢ − a̲ then ā − λᵢ, eigenvalues descending
    pub eigenvalue_window_slacks: Vec<f64>,
    pub lower_trace_slack: f64,
    pub upper_trace_slack: f64,
    pub verdict: GVerdict,
}

fn is_scalar_multiple(a: &SymTensor, s: f64, tol: f64) -> bool {
    a.sub(&SymTensor::scalar(a.dim(), s).unwrap()).unwrap().frob() <= tol
}

/// Slack of Σ1/(λᵢ−a1) ≤ 1/(a̲−a1) + (N−1)/(ā−a1) (rhs − lhs).
fn lower_trace_slack(lams: &[f64], p: &PhaseA) -> f64 {
    let n = lams.len() as f64;
    let (h, m) = means(p);
    if lams.iter().any(|&l| l <= p.a1) {
        return f64::NEG_INFINITY;
    }
    let lhs: f64 = lams.iter().map(|l| 1.0 / (l - p.a1)).sum();
    1.0 / (h - p.a1) + (n - 1.0) / (m - p.a1) - lhs
}

fn upper_trace_slack(lams: &[f64], p: &PhaseA) -> f64 {
    let n = lams.len() as f64;
    let (h, m) = means(p);
    if lams.iter().any(|&l| l >= p.a2) {
        return f64::NEG_INFINITY;
    }
    let lhs: f64 = lams.iter().map(|l| 1.0 / (p.a2 - l)).sum();
    1.0 / (p.a2 - h) + (n - 1.0) / (p.a2 - m) - lhs
}

pub fn g_membership(astar: &SymTensor, p: &PhaseA, tol: f64) -> Result<GMembershipReport> {
    let n = astar.dim();
    let lams = astar.eig().values;
    let (h, m) = means(p);
    let mut window: Vec<f64> = lams.iter().map(|l| l - h).collect();
    window.extend(lams.iter().map(|l| m - l));

    if p.theta == 0.0 || p.theta == 1.0 {
        let pure = if p.theta == 0.0 { p.a2 } else { p.a1 };
        if !is_scalar_multiple(astar, pure, tol * (n as f64).sqrt()) {
            return Err(Error::DegenerateTheta);
        }
        return Ok(GMembershipReport {
            eigenvalue_window_slacks: window,
            lower_trace_slack: 0.0,
            upper_trace_slack: 0.0,
            verdict: GVerdict::Corner,
        });
    }

    let lower = lower_trace_slack(&lams, p);
    let upper = upper_trace_slack(&lams, p);
    let outside = window.iter().any(|&s| s < -tol) || lower < -tol || upper < -tol;
    let verdict = if outside {
        GVerdict::Outside
    } else {
        match (lower.abs() <= tol, upper.abs() <= tol) {
            (true, true) => GVerdict::Corner,
            (true, false) => GVerdict::BoundaryLower,
            (false, true) => GVerdict::BoundaryUpper,
            (false, false) => GVerdict::Inside,
        }
    };
    Ok(GMembershipReport {
        eigenvalue_window_slacks: window,
        lower_trace_slack: lower,
        upper_trace_slack: upper,
        verdict,
    })
}

pub const DEFAULT_TOL: f64 = 1e-9;

fn require_member(astar: &SymTensor, p: &PhaseA) -> Result<()> {
    let r = g_membership(astar, p, DEFAULT_TOL)?;
    if r.verdict == GVerdict::Outside {
        return Err(Error::OutsideGSet);
    }
    Ok(())
}

/// θ with A* on the lower boundary of G_θ, from S = tr(A*−a1I)⁻¹.
pub fn theta_from_lower_boundary(astar: &SymTensor, p: &PhaseA) -> Result<f64> {
    require_member(astar, p)?;
    theta_lower_unchecked(astar, p)
}

pub(crate) fn theta_lower_unchecked(astar: &SymTensor, p: &PhaseA) -> Result<f64> {
    let lams = astar.eig().values;
    let n = lams.len() as f64;
    if lams.iter().any(|&l| l - p.a1 <= 1e-14 * p.a1) {
        return Ok(1.0);
    }
    let s: f64 = lams.iter().map(|l| 1.0 / (l - p.a1)).sum();
    let k = p.contrast();
    let theta = p.a1 * (k * s - n) / (k * (p.a1 * s + 1.0));
    Ok(theta.clamp(0.0, p.theta.max(0.0)))
}

/// rhs of tr(A*⁻¹ − a2⁻¹I)⁻¹ = N/(θ(1/a1−1/a2)) + (N−1)(1−θ)a2/θ
fn upper_rhs(theta: f64, n: f64, p: &PhaseA) -> f64 {
    let d = 1.0 / p.a1 - 1.0 / p.a2;
    n / (theta * d) + (n - 1.0) * (1.0 - theta) * p.a2 / theta
}

fn upper_lhs(lams: &[f64], p: &PhaseA) -> f64 {
    lams.iter().map(|l| 1.0 / (1.0 / l - 1.0 / p.a2)).sum()
}

/// Residual rhs(θ) − lhs of the upper-boundary equation; strictly decreasing in θ.
pub fn upper_boundary_residual(astar: &SymTensor, p: &PhaseA, theta: f64) -> f64 {
    let lams = astar.eig().values;
    upper_rhs(theta, lams.len() as f64, p) - upper_lhs(&lams, p)
}

/// θ ≥ θ_A with A* on the upper boundary of G_θ, by bisection.
pub fn theta_from_upper_boundary(astar: &SymTensor, p: &PhaseA) -> Result<f64> {
    require_member(astar, p)?;
    theta_upper_unchecked(astar, p)
}

pub(crate) fn theta_upper_unchecked(astar: &SymTensor, p: &PhaseA) -> Result<f64> {
    let lams = astar.eig().values;
    let n = lams.len() as f64;
    if lams.iter().any(|&l| p.a2 - l <= 1e-14 * p.a2) {
        return Ok(p.theta);
    }
    if p.theta >= 1.0 {
        return Ok(1.0);
    }
    let lhs = upper_lhs(&lams, p);
    let f = |t: f64| upper_rhs(t, n, p) - lhs;
    let scale = lhs.abs().max(1.0);
    let mut lo = p.theta.max(1e-300);
    let mut hi = 1.0 - 1e-9;
    let flo = f(lo);
    if flo <= 1e-12 * scale {
        return Ok(p.theta);
    }
    let fhi = f(hi);
    if fhi > 1e-12 * scale {
        if fhi <= 1e-6 * scale {
            return Ok(hi);
        }
        return Err(Error::NoBracket(lo, hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo <= 1e-16 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Points (λ1, λ2) on a boundary curve of G_θ for N = 2, λ1 running from a̲ to ā.
///
/// The sweep is linear in 1/(λ1−a1) (lower) or 1/(a2−λ1) (upper), so the
/// midpoint of an odd-count sample is the isotropic point of that curve.
pub fn boundary_curve_sample(p: &PhaseA, side: Side, count: usize) -> Vec<(f64, f64)> {
    let count = count.max(2);
    let (h, m) = means(p);
    if p.theta == 0.0 || p.theta == 1.0 {
        let v = if p.theta == 0.0 { p.a2 } else { p.a1 };
        return vec![(v, v); count];
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            match side {
                Side::Lower => {
                    let (g0, g1) = (1.0 / (h - p.a1), 1.0 / (m - p.a1));
                    let total = g0 + g1;
                    let x = g0 + t * (g1 - g0);
                    let l1 = p.a1 + 1.0 / x;
                    let l2 = p.a1 + 1.0 / (total - x);
                    (l1, l2)
                }
                Side::Upper => {
                    let (g0, g1) = (1.0 / (p.a2 - h), 1.0 / (p.a2 - m));
                    let total = g0 + g1;
                    let x = g0 + t * (g1 - g0);
                    let l1 = p.a2 - 1.0 / x;
                    let l2 = p.a2 - 1.0 / (total - x);
                    (l1, l2)
                }
            }
        })
        .collect()
}
