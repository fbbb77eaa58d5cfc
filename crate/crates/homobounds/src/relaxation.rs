//! Relaxed optimal design in 1-D: the relaxed ODP and OODP functionals,
//! exhaustive enumeration of the classical problems, and a search for the
//! relaxed minimum over interval-shaped A fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gclosure::{g_membership, GVerdict, PhaseA};
use crate::homog1d::{solve_pieces, Piece, Source1D};
use crate::pairbounds::PhaseB;
use crate::symtensor::SymTensor;

/// Piecewise-constant field on a uniform grid over [0,1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignField1D {
    pub values: Vec<f64>,
}

impl DesignField1D {
    pub fn new(values: Vec<f64>) -> Result<DesignField1D> {
        if values.is_empty() {
            return Err(Error::InvalidProfile("empty design field".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidProfile("design values must lie in [0,1]".into()));
        }
        Ok(DesignField1D { values })
    }

    pub fn constant(n: usize, v: f64) -> Result<DesignField1D> {
        DesignField1D::new(vec![v; n])
    }

    pub fn indicator(pattern: &[bool]) -> DesignField1D {
        DesignField1D { values: pattern.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect() }
    }

    /// Grid projection of the indicator of [start, start+len].
    pub fn interval(n: usize, start: f64, len: f64) -> Result<DesignField1D> {
        let h = 1.0 / n as f64;
        let end = start + len;
        let values = (0..n)
            .map(|i| {
                let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
                ((x1.min(end) - x0.max(start)).max(0.0) / h).clamp(0.0, 1.0)
            })
            .collect();
        DesignField1D::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid-weighted mean.
    pub fn delta(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn check_delta(&self, target: f64) -> Result<()> {
        let d = self.delta();
        if (d - target).abs() > 1e-12 {
            return Err(Error::InvalidProfile(format!("volume {d} differs from target {target}")));
        }
        Ok(())
    }
}

/// Nested family realizing the pointwise optimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// θ_A ≤ θ_B, ω_A ⊆ ω_B
    #[serde(rename = "A_subset_B")]
    ASubsetB,
    /// θ_B < θ_A, ω_B ⊆ ω_A
    #[serde(rename = "B_subset_A")]
    BSubsetA,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedValue {
    pub value: f64,
    pub theta_a: DesignField1D,
    pub theta_b: Option<DesignField1D>,
    pub families: Vec<Family>,
}

/// lim b/a² of the optimal nested mixture: l_#/a̲².
pub fn oodp_coefficient(pa: &PhaseA, pb: &PhaseB, ta: f64, tb: f64) -> f64 {
    let (b1, b2) = (pb.b1, pb.b2);
    let a2s = pa.a2 * pa.a2;
    let d = 1.0 / (pa.a1 * pa.a1) - 1.0 / a2s;
    b2 / a2s + (b1 - b2) * tb / a2s + b2 * d * ta - (b2 - b1) * d * ta.min(tb)
}

fn grid_pieces(theta: &DesignField1D, coef: impl Fn(usize, f64) -> f64, pa: &PhaseA) -> Vec<Piece> {
    let n = theta.len();
    let h = 1.0 / n as f64;
    theta
        .values
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let a = pa.harmonic_at(t);
            Piece {
                x0: i as f64 * h,
                x1: if i + 1 == n { 1.0 } else { (i + 1) as f64 * h },
                a,
                b: a * a * coef(i, t),
            }
        })
        .collect()
}

/// ∫ i#(θ) (u')² with i# = a̲²(θ/a1² + (1−θ)/a2²).
pub fn odp_relaxed_value_1d(theta: &DesignField1D, pa: &PhaseA, f: &Source1D) -> Result<f64> {
    let (a1s, a2s) = (pa.a1 * pa.a1, pa.a2 * pa.a2);
    let pieces = grid_pieces(theta, |_, t| t / a1s + (1.0 - t) / a2s, pa);
    Ok(solve_pieces(&pieces, f)?.energy_b)
}

/// ∫ l_#(x) (u')² with the nested family chosen pointwise.
pub fn oodp_relaxed_value_1d(
    theta_a: &DesignField1D,
    theta_b: &DesignField1D,
    pa: &PhaseA,
    pb: &PhaseB,
    f: &Source1D,
) -> Result<RelaxedValue> {
    if theta_a.len() != theta_b.len() {
        return Err(Error::DimensionMismatch(theta_a.len(), theta_b.len()));
    }
    let pieces = grid_pieces(theta_a, |i, t| oodp_coefficient(pa, pb, t, theta_b.values[i]), pa);
    let value = solve_pieces(&pieces, f)?.energy_b;
    let families = theta_a
        .values
        .iter()
        .zip(&theta_b.values)
        .map(|(&ta, &tb)| if ta <= tb { Family::ASubsetB } else { Family::BSubsetA })
        .collect();
    Ok(RelaxedValue { value, theta_a: theta_a.clone(), theta_b: Some(theta_b.clone()), families })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteResult {
    pub value: f64,
    pub pattern_a: Vec<bool>,
    pub pattern_b: Option<Vec<bool>>,
    pub evaluated: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All k-subsets of 0..n as bitmasks, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u32, |m, &i| m | (1 << i)));
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mask_to_pattern(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask & (1 << i) != 0).collect()
}

/// Per-cell ∫σ² for the classical design `mask` (σ depends on A only).
fn cell_flux_squares(mask: u32, n: usize, pa: &PhaseA, f: &Source1D) -> Result<(Vec<f64>, Vec<f64>)> {
    let pattern = mask_to_pattern(mask, n);
    let a: Vec<f64> = pattern.iter().map(|&x| if x { pa.a1 } else { pa.a2 }).collect();
    let h = 1.0 / n as f64;
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        // ∫_cell σ² = energy with b = a² on cell i, 0 elsewhere
        let pieces: Vec<Piece> = (0..n)
            .map(|j| Piece {
                x0: j as f64 * h,
                x1: if j + 1 == n { 1.0 } else { (j + 1) as f64 * h },
                a: a[j],
                b: if i == j { a[j] * a[j] } else { 0.0 },
            })
            .collect();
        v.push(solve_pieces(&pieces, f)?.energy_b);
    }
    Ok((a, v))
}

fn check_n(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > 20 {
        return Err(Error::TooLarge(format!("{n} cells (limit 20)")));
    }
    if k > n {
        return Err(Error::InvalidProfile(format!("{k} marked cells out of {n}")));
    }
    Ok(())
}

fn classical_pieces(mask_a: u32, mask_b: Option<u32>, n: usize, pa: &PhaseA, pb: &PhaseB) -> Vec<Piece> {
    let h = 1.0 / n as f64;
    (0..n)
        .map(|i| Piece {
            x0: i as f64 * h,
            x1: if i + 1 == n { 1.0 } else { (i + 1) as f64 * h },
            a: if mask_a & (1 << i) != 0 { pa.a1 } else { pa.a2 },
            b: match mask_b {
                Some(m) if m & (1 << i) != 0 => pb.b1,
                Some(_) => pb.b2,
                None => pb.b1,
            },
        })
        .collect()
}

/// Smallest (value, index), ties to the lower index.
fn pick(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Exhaustive minimum of ∫(u')² over placements of k a1-cells among n.
pub fn odp_bruteforce_1d(n: usize, k: usize, pa: &PhaseA, f: &Source1D) -> Result<BruteResult> {
    check_n(n, k)?;
    let unit = PhaseB::constant(1.0)?;
    let masks = combinations(n, k);
    let values = masks
        .par_iter()
        .map(|&m| Ok(solve_pieces(&classical_pieces(m, None, n, pa, &unit), f)?.energy_b))
        .collect::<Result<Vec<f64>>>()?;
    let best = values.iter().enumerate().map(|(i, &v)| (v, i)).fold((f64::INFINITY, usize::MAX), pick);
    Ok(BruteResult {
        value: best.0,
        pattern_a: mask_to_pattern(masks[best.1], n),
        pattern_b: None,
        evaluated: masks.len(),
    })
}

/// Classical OODP value ∫ b(u')² of one placement pair, solved directly.
pub fn oodp_classical_value(pattern_a: &[bool], pattern_b: &[bool], pa: &PhaseA, pb: &PhaseB, f: &Source1D) -> Result<f64> {
    if pattern_a.len() != pattern_b.len() {
        return Err(Error::DimensionMismatch(pattern_a.len(), pattern_b.len()));
    }
    let n = pattern_a.len();
    let to_mask = |p: &[bool]| p.iter().enumerate().fold(0u32, |m, (i, &x)| if x { m | (1 << i) } else { m });
    Ok(solve_pieces(&classical_pieces(to_mask(pattern_a), Some(to_mask(pattern_b)), n, pa, pb), f)?.energy_b)
}

/// Exhaustive minimum over placements of kA a1-cells and kB b1-cells. The
/// value is linear in b once the A placement is fixed, so each A placement is
/// solved once per cell and the B placements are summed against those weights.
pub fn oodp_bruteforce_1d(
    n: usize,
    k_a: usize,
    k_b: usize,
    pa: &PhaseA,
    pb: &PhaseB,
    f: &Source1D,
) -> Result<BruteResult> {
    check_n(n, k_a)?;
    check_n(n, k_b)?;
    let total = binomial(n, k_a) * binomial(n, k_b);
    if total > 2e6 {
        return Err(Error::TooLarge(format!("{total} placement pairs (limit 2e6)")));
    }
    let masks_a = combinations(n, k_a);
    let masks_b = combinations(n, k_b);
    let per_a = masks_a
        .par_iter()
        .map(|&ma| {
            let (a, v) = cell_flux_squares(ma, n, pa, f)?;
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, &mb) in masks_b.iter().enumerate() {
                let mut s = 0.0;
                for i in 0..n {
                    let b = if mb & (1 << i) != 0 { pb.b1 } else { pb.b2 };
                    s += b / (a[i] * a[i]) * v[i];
                }
                best = pick(best, (s, j));
            }
            Ok(best)
        })
        .collect::<Result<Vec<(f64, usize)>>>()?;
    let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
    for (i, &(v, j)) in per_a.iter().enumerate() {
        if v < best.0 {
            best = (v, i, j);
        }
    }
    Ok(BruteResult {
        value: best.0,
        pattern_a: mask_to_pattern(masks_a[best.1], n),
        pattern_b: Some(mask_to_pattern(masks_b[best.2], n)),
        evaluated: masks_a.len() * masks_b.len(),
    })
}

/// Best θ_B field for a fixed θ_A field and B-volume `delta_b`. Per cell the
/// value is convex piecewise linear in θ_B with a kink at θ_A, so filling the
/// steepest segments first is optimal.
pub fn oodp_best_b(
    theta_a: &DesignField1D,
    delta_b: f64,
    pa: &PhaseA,
    pb: &PhaseB,
    f: &Source1D,
) -> Result<DesignField1D> {
    let n = theta_a.len();
    let h = 1.0 / n as f64;
    // ∫_cell σ², obtained with b = a² on one cell at a time
    let base: Vec<Piece> = grid_pieces(theta_a, |_, _| 0.0, pa);
    let v: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut p = base.clone();
            p[i].b = p[i].a * p[i].a;
            Ok(solve_pieces(&p, f)?.energy_b)
        })
        .collect::<Result<Vec<f64>>>()?;
    // (rate, cell, segment, capacity)
    let mut segs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let ta = theta_a.values[i];
        let k0 = oodp_coefficient(pa, pb, ta, 0.0);
        let kt = oodp_coefficient(pa, pb, ta, ta);
        let k1 = oodp_coefficient(pa, pb, ta, 1.0);
        if ta > 0.0 {
            segs.push(((kt - k0) / ta * v[i] / h, i, 0, ta));
        }
        if ta < 1.0 {
            segs.push(((k1 - kt) / (1.0 - ta) * v[i] / h, i, 1, 1.0 - ta));
        }
    }
    segs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut tb = vec![0.0; n];
    let mut left = delta_b * n as f64;
    for &(_, i, _, cap) in &segs {
        if left <= 0.0 {
            break;
        }
        let take = cap.min(left);
        tb[i] += take;
        left -= take;
    }
    DesignField1D::new(tb.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedMin {
    pub value: f64,
    /// A field is the grid projection of [a_start, a_start + δ_A]
    pub a_start: f64,
    pub best: RelaxedValue,
    pub evaluations: usize,
}

fn golden_scan(
    lo: f64,
    hi: f64,
    scan: usize,
    mut eval: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64, usize)> {
    let mut count = 0;
    let mut best = (f64::INFINITY, lo);
    let steps = scan.max(1);
    for j in 0..=steps {
        let s = lo + (hi - lo) * j as f64 / steps as f64;
        let v = eval(s)?;
        count += 1;
        if v < best.0 {
            best = (v, s);
        }
    }
    if hi > lo {
        let h = (hi - lo) / steps as f64;
        let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (eval(c)?, eval(d)?);
        count += 2;
        for _ in 0..60 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(d)?;
            }
            count += 1;
        }
        for (v, s) in [(fc, c), (fd, d)] {
            if v < best.0 {
                best = (v, s);
            }
        }
    }
    Ok((best.0, best.1, count))
}

/// Relaxed ODP minimum over interval A fields on a grid of `grid` cells.
pub fn odp_relaxed_min_1d(delta: f64, pa: &PhaseA, f: &Source1D, grid: usize, scan: usize) -> Result<RelaxedMin> {
    let (value, s, evaluations) = golden_scan(0.0, 1.0 - delta, scan, |s| {
        odp_relaxed_value_1d(&DesignField1D::interval(grid, s, delta)?, pa, f)
    })?;
    let theta_a = DesignField1D::interval(grid, s, delta)?;
    let families = vec![Family::ASubsetB; grid];
    Ok(RelaxedMin {
        value,
        a_start: s,
        best: RelaxedValue { value, theta_a, theta_b: None, families },
        evaluations,
    })
}

/// Relaxed OODP minimum over interval A fields, with the best B field for each.
pub fn oodp_relaxed_min_1d(
    delta_a: f64,
    delta_b: f64,
    pa: &PhaseA,
    pb: &PhaseB,
    f: &Source1D,
    grid: usize,
    scan: usize,
) -> Result<RelaxedMin> {
    let eval = |s: f64| -> Result<RelaxedValue> {
        let ta = DesignField1D::interval(grid, s, delta_a)?;
        let tb = oodp_best_b(&ta, delta_b, pa, pb, f)?;
        oodp_relaxed_value_1d(&ta, &tb, pa, pb, f)
    };
    let (value, s, evaluations) = golden_scan(0.0, 1.0 - delta_a, scan, |s| Ok(eval(s)?.value))?;
    let best = eval(s)?;
    Ok(RelaxedMin { value, a_start: s, best, evaluations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HReport {
    pub segments: usize,
    pub steps_checked: usize,
    pub violations: usize,
    pub max_increase: f64,
}

/// h₁₁(λ1) = (λ1 + (a2−λ1)²/(a2−ā))/a2
pub fn h_component(pa: &PhaseA, lambda1: f64) -> f64 {
    let abar = pa.arithmetic();
    (lambda1 + (pa.a2 - lambda1).powi(2) / (pa.a2 - abar)) / pa.a2
}

/// Checks, for N = 2 on a grid over [a̲, ā]², that h₁₁ does not increase as
/// λ1 increases with λ2 fixed, over points inside G_θ.
pub fn h_monotonicity_check(pa: &PhaseA, grid: usize) -> Result<HReport> {
    let mut rep = HReport { segments: 0, steps_checked: 0, violations: 0, max_increase: 0.0 };
    if pa.theta <= 0.0 || pa.theta >= 1.0 || grid < 2 {
        return Ok(rep);
    }
    let (lo, hi) = (pa.harmonic(), pa.arithmetic());
    let at = |i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    for j in 0..grid {
        let l2 = at(j);
        let mut prev: Option<f64> = None;
        let mut any = false;
        for i in 0..grid {
            let l1 = at(i);
            let a = SymTensor::diag(&[l1, l2])?;
            let inside = g_membership(&a, pa, 1e-9)?.verdict != GVerdict::Outside;
            if !inside {
                prev = None;
                continue;
            }
            any = true;
            let h = h_component(pa, l1);
            if let Some(p) = prev {
                rep.steps_checked += 1;
                if h > p + 1e-14 {
                    rep.violations += 1;
                    rep.max_increase = rep.max_increase.max(h - p);
                }
            }
            prev = Some(h);
        }
        if any {
            rep.segments += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pa() -> PhaseA {
        PhaseA::new(1.0, 2.0, 0.5).unwrap()
    }

    fn pb() -> PhaseB {
        PhaseB::new(1.0, 3.0, 0.5).unwrap()
    }

    fn one() -> Source1D {
        Source1D::constant(1.0)
    }

    #[test]
    fn odp_constant_field() {
        let v = odp_relaxed_value_1d(&DesignField1D::constant(8, 0.5).unwrap(), &pa(), &one()).unwrap();
        assert_abs_diff_eq!(v, 5.0 / 96.0, epsilon = 1e-15);
        let z = odp_relaxed_value_1d(&DesignField1D::constant(8, 0.5).unwrap(), &pa(), &Source1D::constant(0.0)).unwrap();
        assert_eq!(z, 0.0);
        // a ≡ a2: ∫(u')² = 1/(12 a2²)
        let v = odp_relaxed_value_1d(&DesignField1D::constant(3, 0.0).unwrap(), &pa(), &one()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 48.0, epsilon = 1e-15);
    }

    #[test]
    fn oodp_constant_fields() {
        let t = DesignField1D::constant(6, 0.5).unwrap();
        let r = oodp_relaxed_value_1d(&t, &t, &pa(), &pb(), &one()).unwrap();
        assert_abs_diff_eq!(r.value, 7.0 / 96.0, epsilon = 1e-15);
        assert!(r.families.iter().all(|&f| f == Family::ASubsetB));
        let pa75 = PhaseA::new(1.0, 2.0, 0.75).unwrap();
        let k = oodp_coefficient(&pa75, &pb(), 0.75, 0.5);
        let h = pa75.harmonic();
        assert_abs_diff_eq!(h, 8.0 / 7.0, epsilon = 1e-15);
        let l2 = crate::homog1d::bounds_1d(&pa75, &pb()).l2;
        assert_abs_diff_eq!(h * h * k, l2, epsilon = 1e-14);
    }

    #[test]
    fn oodp_flat_b_reduces_to_odp() {
        let pb = PhaseB::new(2.0, 2.0, 0.3).unwrap();
        let ta = DesignField1D::new(vec![0.1, 0.9, 0.4, 0.6]).unwrap();
        let tb = DesignField1D::new(vec![0.7, 0.0, 1.0, 0.2]).unwrap();
        let r = oodp_relaxed_value_1d(&ta, &tb, &pa(), &pb, &one()).unwrap();
        let o = odp_relaxed_value_1d(&ta, &pa(), &one()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 * o, epsilon = 1e-15);
    }

    #[test]
    fn families_switch_with_sign() {
        let ta = DesignField1D::new(vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let tb = DesignField1D::constant(4, 0.5).unwrap();
        let r = oodp_relaxed_value_1d(&ta, &tb, &pa(), &pb(), &one()).unwrap();
        use Family::*;
        assert_eq!(r.families, vec![ASubsetB, ASubsetB, BSubsetA, BSubsetA]);
    }

    #[test]
    fn combinations_lexicographic() {
        let c = combinations(4, 2);
        assert_eq!(c, vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]);
        assert_eq!(combinations(12, 6).len(), 924);
        assert_eq!(combinations(3, 0), vec![0]);
        assert_eq!(combinations(3, 3), vec![0b111]);
    }

    #[test]
    fn odp_two_cells_symmetric() {
        let r = odp_bruteforce_1d(2, 1, &pa(), &one()).unwrap();
        let left = odp_relaxed_value_1d(&DesignField1D::indicator(&[true, false]), &pa(), &one()).unwrap();
        let right = odp_relaxed_value_1d(&DesignField1D::indicator(&[false, true]), &pa(), &one()).unwrap();
        assert_abs_diff_eq!(left, right, epsilon = 1e-15);
        assert_abs_diff_eq!(r.value, left.min(right), epsilon = 1e-15);
        assert_eq!(r.pattern_a.iter().filter(|&&x| x).count(), 1);
    }

    #[test]
    fn oodp_two_cells() {
        let r = oodp_bruteforce_1d(2, 1, 1, &pa(), &pb(), &one()).unwrap();
        assert_eq!(r.evaluated, 4);
        let nested = oodp_classical_value(&[true, false], &[true, false], &pa(), &pb(), &one()).unwrap();
        let disjoint = oodp_classical_value(&[true, false], &[false, true], &pa(), &pb(), &one()).unwrap();
        assert!(nested < disjoint);
        assert_abs_diff_eq!(r.value, nested, epsilon = 1e-15);
        let z = oodp_bruteforce_1d(2, 1, 1, &pa(), &pb(), &Source1D::constant(0.0)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn brute_matches_indicator_values() {
        let r = oodp_bruteforce_1d(6, 3, 2, &pa(), &pb(), &one()).unwrap();
        let pat_b = r.pattern_b.clone().unwrap();
        let direct = oodp_classical_value(&r.pattern_a, &pat_b, &pa(), &pb(), &one()).unwrap();
        let relaxed = oodp_relaxed_value_1d(
            &DesignField1D::indicator(&r.pattern_a),
            &DesignField1D::indicator(&pat_b),
            &pa(),
            &pb(),
            &one(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(r.value, relaxed.value, epsilon = 1e-15);
    }

    #[test]
    fn too_large() {
        assert!(matches!(odp_bruteforce_1d(21, 3, &pa(), &one()), Err(Error::TooLarge(_))));
        assert!(matches!(oodp_bruteforce_1d(20, 10, 10, &pa(), &pb(), &one()), Err(Error::TooLarge(_))));
    }

    #[test]
    fn relaxed_min_below_brute() {
        let brute = odp_bruteforce_1d(8, 4, &pa(), &one()).unwrap();
        let rel = odp_relaxed_min_1d(0.5, &pa(), &one(), 80, 80).unwrap();
        assert!(rel.value <= brute.value + 1e-12);
    }

    #[test]
    fn interval_field_volume() {
        let d = DesignField1D::interval(10, 0.23, 0.5).unwrap();
        d.check_delta(0.5).unwrap();
        assert_abs_diff_eq!(d.values[2], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn best_b_keeps_volume() {
        let ta = DesignField1D::interval(24, 0.25, 0.5).unwrap();
        let tb = oodp_best_b(&ta, 0.5, &pa(), &pb(), &one()).unwrap();
        tb.check_delta(0.5).unwrap();
        let got = oodp_relaxed_value_1d(&ta, &tb, &pa(), &pb(), &one()).unwrap().value;
        let same = oodp_relaxed_value_1d(&ta, &ta, &pa(), &pb(), &one()).unwrap().value;
        assert!(got <= same + 1e-15);
    }

    #[test]
    fn h_decreasing() {
        let r = h_monotonicity_check(&pa(), 100).unwrap();
        assert!(r.steps_checked > 0);
        assert_eq!(r.violations, 0);
        let z = h_monotonicity_check(&PhaseA::new(1.0, 2.0, 0.0).unwrap(), 100).unwrap();
        assert_eq!(z.steps_checked, 0);
        let d1 = h_component(&pa(), 1.40) - h_component(&pa(), 4.0 / 3.0);
        assert!(d1 < 0.0);
    }
}
