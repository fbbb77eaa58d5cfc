//! One-dimensional laboratory: weak* limits of periodic profiles, the closed
//! forms b# and b#_FL, the bounds l#/u#, and an exact piecewise solver for
//! -(a u')' = f with u(0) = u(1) = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gclosure::PhaseA;
use crate::laminates::overlap_window;
use crate::pairbounds::PhaseB;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub len: f64,
    #[serde(rename = "inA")]
    pub in_a: bool,
    #[serde(rename = "inB")]
    pub in_b: bool,
}

/// One unit cell repeated `periods` times over [0,1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    pub cells: Vec<Cell>,
    pub periods: usize,
}

impl Profile1D {
    pub fn new(cells: Vec<Cell>, periods: usize) -> Result<Profile1D> {
        let p = Profile1D { cells, periods };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidProfile("no cells".into()));
        }
        if self.periods == 0 {
            return Err(Error::InvalidProfile("period count must be >= 1".into()));
        }
        if self.cells.iter().any(|c| !(c.len > 0.0 && c.len.is_finite())) {
            return Err(Error::InvalidProfile("cell lengths must be positive".into()));
        }
        let total: f64 = self.cells.iter().map(|c| c.len).sum();
        if (total - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidProfile(format!("cell lengths sum to {total}")));
        }
        Ok(())
    }

    /// Four-cell layout with the given fractions; empty cells are dropped.
    pub fn from_fractions(theta_a: f64, theta_b: f64, theta_ab: f64, periods: usize) -> Result<Profile1D> {
        let lens = [
            (theta_ab, true, true),
            (theta_a - theta_ab, true, false),
            (theta_b - theta_ab, false, true),
            (1.0 - theta_a - theta_b + theta_ab, false, false),
        ];
        if lens.iter().any(|l| l.0 < -1e-15) {
            return Err(Error::OverlapOutOfWindow {
                value: theta_ab,
                lower: (theta_a + theta_b - 1.0).max(0.0),
                upper: theta_a.min(theta_b),
            });
        }
        let cells = lens
            .iter()
            .filter(|l| l.0 > 1e-15)
            .map(|&(len, in_a, in_b)| Cell { len, in_a, in_b })
            .collect();
        Profile1D::new(cells, periods)
    }

    /// Half (a1,b1), half (a2,b2).
    pub fn nested(periods: usize) -> Profile1D {
        Profile1D::from_fractions(0.5, 0.5, 0.5, periods).expect("valid fractions")
    }

    /// Half (a1,b2), half (a2,b1).
    pub fn disjoint(periods: usize) -> Profile1D {
        Profile1D::from_fractions(0.5, 0.5, 0.0, periods).expect("valid fractions")
    }

    pub fn with_periods(&self, periods: usize) -> Profile1D {
        Profile1D { cells: self.cells.clone(), periods }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStar {
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_ab: f64,
    pub a_harm: f64,
    pub b_mean: f64,
    pub lim_b_a2: f64,
    pub lim_b_a: f64,
}

fn cell_coeffs(c: &Cell, pa: &PhaseA, pb: &PhaseB) -> (f64, f64) {
    (if c.in_a { pa.a1 } else { pa.a2 }, if c.in_b { pb.b1 } else { pb.b2 })
}

/// Cell-weighted averages. Only the coefficient values of `pa`, `pb` are used.
pub fn weakstar_limits(p: &Profile1D, pa: &PhaseA, pb: &PhaseB) -> Result<WeakStar> {
    p.validate()?;
    let mut w = WeakStar {
        theta_a: 0.0,
        theta_b: 0.0,
        theta_ab: 0.0,
        a_harm: 0.0,
        b_mean: 0.0,
        lim_b_a2: 0.0,
        lim_b_a: 0.0,
    };
    let mut inv_a = 0.0;
    for c in &p.cells {
        let (a, b) = cell_coeffs(c, pa, pb);
        if c.in_a {
            w.theta_a += c.len;
        }
        if c.in_b {
            w.theta_b += c.len;
        }
        if c.in_a && c.in_b {
            w.theta_ab += c.len;
        }
        inv_a += c.len / a;
        w.b_mean += c.len * b;
        w.lim_b_a2 += c.len * b / (a * a);
        w.lim_b_a += c.len * b / a;
    }
    w.a_harm = 1.0 / inv_a;
    Ok(w)
}

fn check_overlap(pa: &PhaseA, pb: &PhaseB, theta_ab: f64) -> Result<()> {
    let w = overlap_window(pa, pb);
    if !w.contains(theta_ab, 1e-12) {
        return Err(Error::OverlapOutOfWindow { value: theta_ab, lower: w.lower, upper: w.upper });
    }
    Ok(())
}

/// Bracket of b# before the a̲² factor, linear in θ_AB.
fn bracket(pa: &PhaseA, pb: &PhaseB, theta_ab: f64) -> f64 {
    let (b1, b2) = (pb.b1, pb.b2);
    let a2s = pa.a2 * pa.a2;
    let d = 1.0 / (pa.a1 * pa.a1) - 1.0 / a2s;
    b2 / a2s + (b1 - b2) * pb.theta / a2s + b2 * d * pa.theta - (b2 - b1) * d * theta_ab
}

/// b# = a̲²·lim* b/a² for overlap θ_AB.
pub fn bsharp_1d(pa: &PhaseA, pb: &PhaseB, theta_ab: f64) -> Result<f64> {
    check_overlap(pa, pb, theta_ab)?;
    let h = pa.harmonic();
    Ok(h * h * bracket(pa, pb, theta_ab))
}

/// b#_FL = a̲·lim* b/a
pub fn bsharp_flux_1d(pa: &PhaseA, pb: &PhaseB, theta_ab: f64) -> Result<f64> {
    check_overlap(pa, pb, theta_ab)?;
    let (ta, tb) = (pa.theta, pb.theta);
    let lim = theta_ab * pb.b1 / pa.a1
        + (ta - theta_ab) * pb.b2 / pa.a1
        + (tb - theta_ab) * pb.b1 / pa.a2
        + (1.0 - ta - tb + theta_ab) * pb.b2 / pa.a2;
    Ok(pa.harmonic() * lim)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds1D {
    pub l1: f64,
    pub l2: f64,
    pub u1: f64,
    pub u2: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The four closed forms, each taken as a formula in (θ_A, θ_B); `lower` and
/// `upper` are the ones valid for the given fractions.
pub fn bounds_1d(pa: &PhaseA, pb: &PhaseB) -> Bounds1D {
    let h2 = pa.harmonic().powi(2);
    let (ta, tb) = (pa.theta, pb.theta);
    let l1 = h2 * bracket(pa, pb, ta);
    let l2 = h2 * bracket(pa, pb, tb);
    let u1 = h2 * bracket(pa, pb, 0.0);
    let u2 = h2 * bracket(pa, pb, ta + tb - 1.0);
    Bounds1D {
        l1,
        l2,
        u1,
        u2,
        lower: if ta <= tb { l1 } else { l2 },
        upper: if ta + tb <= 1.0 { u1 } else { u2 },
    }
}

/// Overlap fraction realizing a target b#, with a four-cell profile.
pub fn invert_theta_ab(pa: &PhaseA, pb: &PhaseB, target: f64) -> Result<(f64, Profile1D)> {
    let bd = bounds_1d(pa, pb);
    let scale = bd.upper.abs().max(1.0);
    if target < bd.lower - 1e-12 * scale || target > bd.upper + 1e-12 * scale {
        return Err(Error::TargetOutsideInterval { target, lower: bd.lower, upper: bd.upper });
    }
    let w = overlap_window(pa, pb);
    let h2 = pa.harmonic().powi(2);
    let slope = -(pb.b2 - pb.b1) * (1.0 / (pa.a1 * pa.a1) - 1.0 / (pa.a2 * pa.a2));
    let t = if slope == 0.0 {
        w.lower
    } else {
        ((target / h2 - bracket(pa, pb, 0.0)) / slope).clamp(w.lower, w.upper)
    };
    let profile = Profile1D::from_fractions(pa.theta, pb.theta, t, 1)?;
    Ok((t, profile))
}

/// Piecewise-constant right-hand side: `values[i]` on
/// [breakpoints[i-1], breakpoints[i]].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source1D {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Source1D {
    pub fn constant(v: f64) -> Source1D {
        Source1D { breakpoints: vec![], values: vec![v] }
    }

    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Source1D> {
        let s = Source1D { breakpoints, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return Err(Error::InvalidProfile("source needs one more value than breakpoints".into()));
        }
        let mut prev = 0.0;
        for &x in &self.breakpoints {
            if !(x > prev && x < 1.0) {
                return Err(Error::InvalidProfile(format!("bad source breakpoint {x}")));
            }
            prev = x;
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite source value".into()));
        }
        Ok(())
    }

    /// Parses `const:v`.
    pub fn parse(s: &str) -> Result<Source1D> {
        let v = s
            .strip_prefix("const:")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidProfile(format!("unrecognized source {s:?}")))?;
        Ok(Source1D::constant(v))
    }

    fn value_at(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= x);
        self.values[i]
    }
}

/// Interval with constant a, b and f.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State1D {
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p_adj: Vec<f64>,
    /// z = a p' − b u', constant
    pub adjoint_flux: f64,
    /// ∫ b (u')²
    pub energy_b: f64,
    /// ∫ b u'
    pub flux_b: f64,
    /// ∫ a (u')²
    pub energy_a: f64,
}

/// Splits the pieces at the source breakpoints.
fn refine(pieces: &[Piece], f: &Source1D) -> Vec<Piece> {
    let mut out = Vec::with_capacity(pieces.len() + f.breakpoints.len());
    let mut k = 0;
    for p in pieces {
        let mut x0 = p.x0;
        while k < f.breakpoints.len() && f.breakpoints[k] <= x0 {
            k += 1;
        }
        while k < f.breakpoints.len() && f.breakpoints[k] < p.x1 {
            out.push(Piece { x0, x1: f.breakpoints[k], ..*p });
            x0 = f.breakpoints[k];
            k += 1;
        }
        out.push(Piece { x0, ..*p });
    }
    out
}

/// Exact solve over contiguous pieces covering [0,1].
pub fn solve_pieces(pieces: &[Piece], f: &Source1D) -> Result<State1D> {
    f.validate()?;
    if pieces.is_empty() {
        return Err(Error::InvalidProfile("no pieces".into()));
    }
    let pieces = refine(pieces, f);
    // F at nodes
    let mut nodes = Vec::with_capacity(pieces.len() + 1);
    let mut big_f = Vec::with_capacity(pieces.len() + 1);
    nodes.push(pieces[0].x0);
    big_f.push(0.0);
    for p in &pieces {
        let fv = f.value_at(0.5 * (p.x0 + p.x1));
        let last = *big_f.last().unwrap();
        big_f.push(last + fv * (p.x1 - p.x0));
        nodes.push(p.x1);
    }
    // c ∫1/a = ∫F/a
    let (mut inv_a, mut f_over_a) = (0.0, 0.0);
    for (i, p) in pieces.iter().enumerate() {
        let h = p.x1 - p.x0;
        inv_a += h / p.a;
        f_over_a += h * 0.5 * (big_f[i] + big_f[i + 1]) / p.a;
    }
    let c = f_over_a / inv_a;
    let sigma: Vec<f64> = big_f.iter().map(|&v| c - v).collect();

    let mut u = vec![0.0; nodes.len()];
    let (mut energy_b, mut flux_b, mut energy_a, mut bu_over_a) = (0.0, 0.0, 0.0, 0.0);
    for (i, p) in pieces.iter().enumerate() {
        let h = p.x1 - p.x0;
        let (g0, g1) = (sigma[i], sigma[i + 1]);
        let int_g = h * 0.5 * (g0 + g1);
        let int_g2 = h * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
        u[i + 1] = u[i] + int_g / p.a;
        energy_b += p.b * int_g2 / (p.a * p.a);
        energy_a += int_g2 / p.a;
        flux_b += p.b * int_g / p.a;
        bu_over_a += p.b * int_g / (p.a * p.a);
    }
    let z = -bu_over_a / inv_a;
    let mut p_adj = vec![0.0; nodes.len()];
    for (i, p) in pieces.iter().enumerate() {
        let h = p.x1 - p.x0;
        let int_g = h * 0.5 * (sigma[i] + sigma[i + 1]);
        p_adj[i + 1] = p_adj[i] + h * z / p.a + p.b * int_g / (p.a * p.a);
    }
    Ok(State1D { nodes, u, sigma, p_adj, adjoint_flux: z, energy_b, flux_b, energy_a })
}

pub fn profile_pieces(p: &Profile1D, pa: &PhaseA, pb: &PhaseB) -> Result<Vec<Piece>> {
    p.validate()?;
    let n = p.periods;
    let eps = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n * p.cells.len());
    for k in 0..n {
        let mut x = k as f64 * eps;
        for (j, c) in p.cells.iter().enumerate() {
            let x1 = if j + 1 == p.cells.len() { (k + 1) as f64 * eps } else { x + c.len * eps };
            let (a, b) = cell_coeffs(c, pa, pb);
            out.push(Piece { x0: x, x1, a, b });
            x = x1;
        }
    }
    Ok(out)
}

pub fn solve_state_exact(p: &Profile1D, pa: &PhaseA, pb: &PhaseB, f: &Source1D) -> Result<State1D> {
    solve_pieces(&profile_pieces(p, pa, pb)?, f)
}

/// Solve with constant coefficients.
pub fn solve_homogeneous(a: f64, b: f64, f: &Source1D) -> Result<State1D> {
    solve_pieces(&[Piece { x0: 0.0, x1: 1.0, a, b }], f)
}

/// ∫ b_h (u')² for the homogenized problem of a profile.
pub fn homogenized_energy(p: &Profile1D, pa: &PhaseA, pb: &PhaseB, f: &Source1D) -> Result<f64> {
    let w = weakstar_limits(p, pa, pb)?;
    let bh = w.a_harm * w.a_harm * w.lim_b_a2;
    Ok(solve_homogeneous(w.a_harm, bh, f)?.energy_b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvRow {
    pub periods: usize,
    pub eps: f64,
    pub energy: f64,
    pub error: f64,
}

pub fn convergence_study(
    p: &Profile1D,
    pa: &PhaseA,
    pb: &PhaseB,
    f: &Source1D,
    period_counts: &[usize],
) -> Result<Vec<ConvRow>> {
    let target = homogenized_energy(p, pa, pb, f)?;
    period_counts
        .par_iter()
        .map(|&n| {
            let e = solve_state_exact(&p.with_periods(n), pa, pb, f)?.energy_b;
            Ok(ConvRow { periods: n, eps: 1.0 / n as f64, energy: e, error: (e - target).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pa(t: f64) -> PhaseA {
        PhaseA::new(1.0, 2.0, t).unwrap()
    }

    fn pb(t: f64) -> PhaseB {
        PhaseB::new(1.0, 3.0, t).unwrap()
    }

    #[test]
    fn weakstar_examples() {
        let w = weakstar_limits(&Profile1D::nested(3), &pa(0.5), &pb(0.5)).unwrap();
        assert_eq!((w.theta_a, w.theta_b, w.theta_ab), (0.5, 0.5, 0.5));
        assert_abs_diff_eq!(w.a_harm, 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!((w.b_mean, w.lim_b_a2, w.lim_b_a), (2.0, 0.875, 1.25));
        let all = Profile1D::new(vec![Cell { len: 1.0, in_a: true, in_b: true }], 1).unwrap();
        let w = weakstar_limits(&all, &pa(0.5), &pb(0.5)).unwrap();
        assert_eq!((w.theta_a, w.a_harm, w.lim_b_a2, w.lim_b_a), (1.0, 1.0, 1.0, 1.0));
        let w = weakstar_limits(&Profile1D::disjoint(1), &pa(0.5), &pb(0.5)).unwrap();
        assert_eq!(w.theta_ab, 0.0);
        assert_abs_diff_eq!(w.lim_b_a2, 1.625, epsilon = 1e-15);
    }

    #[test]
    fn bsharp_examples() {
        assert_abs_diff_eq!(bsharp_1d(&pa(0.5), &pb(0.5), 0.5).unwrap(), 14.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bsharp_1d(&pa(0.5), &pb(0.5), 0.0).unwrap(), 26.0 / 9.0, epsilon = 1e-14);
        let flat = PhaseB::new(2.0, 2.0, 0.3).unwrap();
        let h: f64 = 4.0 / 3.0;
        let want = h * h * (0.5 + 0.5 / 4.0) * 2.0;
        assert_abs_diff_eq!(bsharp_1d(&pa(0.5), &flat, 0.1).unwrap(), want, epsilon = 1e-14);
        assert!(bsharp_1d(&pa(0.5), &pb(0.5), 0.6).is_err());
    }

    #[test]
    fn flux_limit_differs() {
        let fl = bsharp_flux_1d(&pa(0.5), &pb(0.5), 0.5).unwrap();
        assert_abs_diff_eq!(fl, 5.0 / 3.0, epsilon = 1e-14);
        assert!(fl > 14.0 / 9.0);
        // (a1,b2) and (a2,b1) halves: lim b/a = 0.5·3 + 0.5·0.5
        let dis = bsharp_flux_1d(&pa(0.5), &pb(0.5), 0.0).unwrap();
        assert_abs_diff_eq!(dis, 7.0 / 3.0, epsilon = 1e-14);
        assert!((dis - 26.0 / 9.0).abs() > 0.1);
    }

    #[test]
    fn bounds_examples() {
        let b = bounds_1d(&pa(0.5), &pb(0.5));
        for v in [b.l1, b.l2, b.lower] {
            assert_abs_diff_eq!(v, 14.0 / 9.0, epsilon = 1e-14);
        }
        for v in [b.u1, b.u2, b.upper] {
            assert_abs_diff_eq!(v, 26.0 / 9.0, epsilon = 1e-14);
        }
        let b = bounds_1d(&pa(0.75), &pb(0.5));
        assert_abs_diff_eq!(b.upper, 116.0 / 49.0, epsilon = 1e-14);
        assert_eq!(b.upper, b.u2);
    }

    #[test]
    fn inversion_examples() {
        let (t, _) = invert_theta_ab(&pa(0.5), &pb(0.5), 14.0 / 9.0).unwrap();
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-14);
        let (t, _) = invert_theta_ab(&pa(0.5), &pb(0.5), 26.0 / 9.0).unwrap();
        assert_abs_diff_eq!(t, 0.0, epsilon = 1e-14);
        let (t, prof) = invert_theta_ab(&pa(0.5), &pb(0.5), 20.0 / 9.0).unwrap();
        assert_abs_diff_eq!(t, 0.25, epsilon = 1e-14);
        assert_eq!(prof.cells.len(), 4);
        assert!(matches!(invert_theta_ab(&pa(0.5), &pb(0.5), 3.0), Err(Error::TargetOutsideInterval { .. })));
    }

    #[test]
    fn homogeneous_solution() {
        let s = solve_homogeneous(4.0 / 3.0, 14.0 / 9.0, &Source1D::constant(1.0)).unwrap();
        assert_abs_diff_eq!(s.energy_b, 7.0 / 96.0, epsilon = 1e-15);
        assert_abs_diff_eq!(*s.u.last().unwrap(), 0.0, epsilon = 1e-15);
        let s = solve_state_exact(&Profile1D::nested(4), &pa(0.5), &pb(0.5), &Source1D::constant(0.0)).unwrap();
        assert!(s.u.iter().all(|&v| v == 0.0));
        assert_eq!(s.energy_b, 0.0);
    }

    #[test]
    fn boundary_values_vanish() {
        let f = Source1D::new(vec![0.3, 0.55], vec![1.0, -2.0, 0.5]).unwrap();
        let s = solve_state_exact(&Profile1D::disjoint(7), &pa(0.5), &pb(0.5), &f).unwrap();
        assert_abs_diff_eq!(*s.u.last().unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(*s.p_adj.last().unwrap(), 0.0, epsilon = 1e-14);
        assert!(s.nodes.contains(&0.3) && s.nodes.contains(&0.55));
    }

    #[test]
    fn nested_converges() {
        let rows = convergence_study(&Profile1D::nested(1), &pa(0.5), &pb(0.5), &Source1D::constant(1.0), &[4, 16, 64, 256])
            .unwrap();
        assert!(rows[3].error <= 0.02 * 7.0 / 96.0);
        assert!(rows.windows(2).all(|w| w[1].error <= w[0].error));
    }

    #[test]
    fn source_parse() {
        assert_eq!(Source1D::parse("const:1").unwrap(), Source1D::constant(1.0));
        assert!(Source1D::parse("sin").is_err());
    }
}
