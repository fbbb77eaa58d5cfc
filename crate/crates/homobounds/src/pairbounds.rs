//! Bounds on the pair (A*, B#): the general chain, the const-b trace bounds,
//! the four two-phase trace bounds, region labels, fibre mixing and pointwise
//! energy-density bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gclosure::{self, g_membership, GVerdict, PhaseA, DEFAULT_TOL};
use crate::symtensor::{trace_chain, Factor, Mat, SymTensor};

/// Second-phase coefficients b1 ≤ b2 with b1-volume fraction `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseB {
    pub b1: f64,
    pub b2: f64,
    #[serde(rename = "thetaB")]
    pub theta: f64,
}

impl PhaseB {
    pub fn new(b1: f64, b2: f64, theta: f64) -> Result<PhaseB> {
        if !(b1 > 0.0 && b2.is_finite() && b1 <= b2) {
            return Err(Error::InvalidPhase(format!("need 0 < b1 <= b2, got b1={b1}, b2={b2}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidPhase(format!("thetaB={theta} outside [0,1]")));
        }
        Ok(PhaseB { b1, b2, theta })
    }

    /// Constant coefficient b as a degenerate phase pair.
    pub fn constant(b: f64) -> Result<PhaseB> {
        PhaseB::new(b, b, 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.b1 * self.theta + self.b2 * (1.0 - self.theta)
    }

    pub fn harmonic(&self) -> f64 {
        1.0 / (self.theta / self.b1 + (1.0 - self.theta) / self.b2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    L1U1,
    L1U2,
    L2U1,
    L2U2,
}

impl RegionLabel {
    pub fn is_l1(self) -> bool {
        matches!(self, RegionLabel::L1U1 | RegionLabel::L1U2)
    }

    pub fn is_u1(self) -> bool {
        matches!(self, RegionLabel::L1U1 | RegionLabel::L2U1)
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::L1U1 => "L1U1",
            RegionLabel::L1U2 => "L1U2",
            RegionLabel::L2U1 => "L2U1",
            RegionLabel::L2U2 => "L2U2",
        }
    }
}

pub fn classify_region(pa: &PhaseA, pb: &PhaseB) -> RegionLabel {
    let l1 = pa.theta <= pb.theta;
    let u1 = pa.theta + pb.theta <= 1.0;
    match (l1, u1) {
        (true, true) => RegionLabel::L1U1,
        (true, false) => RegionLabel::L1U2,
        (false, true) => RegionLabel::L2U1,
        (false, false) => RegionLabel::L2U2,
    }
}

/// Both sides of a bound and its signed slack (≥ 0 when satisfied).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEval {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl BoundEval {
    fn at_most(lhs: f64, rhs: f64) -> BoundEval {
        BoundEval { lhs, rhs, slack: rhs - lhs }
    }

    fn at_least(lhs: f64, rhs: f64) -> BoundEval {
        BoundEval { lhs, rhs, slack: lhs - rhs }
    }
}

fn same_dim(a: &SymTensor, b: &SymTensor) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.dim())
}

fn eye(n: usize, s: f64) -> SymTensor {
    SymTensor::scalar(n, s).expect("dimension already validated")
}

/// Chain links, in order:
/// B#−b1, (b2/a1)A*−B#, (b2/a1)(ā−A*), (b2/a1)(a2−ā), A*−a1, a2−A* (smallest eigenvalues).
pub fn general_chain_check(
    astar: &SymTensor,
    bsharp: &SymTensor,
    pa: &PhaseA,
    pb: &PhaseB,
) -> Result<[f64; 6]> {
    let n = same_dim(astar, bsharp)?;
    let r = pb.b2 / pa.a1;
    let abar = pa.arithmetic();
    Ok([
        bsharp.shift(-pb.b1).min_eig(),
        astar.lincomb(r, bsharp, -1.0)?.min_eig(),
        eye(n, abar).sub(astar)?.scale(r).min_eig(),
        r * (pa.a2 - abar),
        astar.shift(-pa.a1).min_eig(),
        pa.a2 - astar.max_eig(),
    ])
}

fn is_zero(s: &SymTensor) -> bool {
    s.frob() <= 1e-13
}

/// tr{b(a2I−A*)(a2B#−bA*)⁻¹(a2I−A*)} ≤ Nθ_A(a2−a1)
pub fn bound_l_const_b(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, b: f64) -> Result<BoundEval> {
    let n = same_dim(astar, bsharp)?;
    let rhs = n as f64 * pa.theta * pa.contrast();
    let left = astar.scale(-1.0).shift(pa.a2);
    if is_zero(&left) {
        return Ok(BoundEval::at_most(0.0, rhs));
    }
    let mid = bsharp.lincomb(pa.a2, astar, -b)?;
    let lhs = trace_chain(&[
        Factor::Scalar(b, 1),
        Factor::Tensor(&left, 1),
        Factor::Tensor(&mid, -1),
        Factor::Tensor(&left, 1),
    ])?;
    Ok(BoundEval::at_most(lhs, rhs))
}

/// tr{b(A*−a1I)(bA*−a1B#)⁻¹(A*−a1I)} ≤ N(1−θ_A)(a2−a1)
pub fn bound_u_const_b(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, b: f64) -> Result<BoundEval> {
    let n = same_dim(astar, bsharp)?;
    let rhs = n as f64 * (1.0 - pa.theta) * pa.contrast();
    let left = astar.shift(-pa.a1);
    if is_zero(&left) {
        return Ok(BoundEval::at_most(0.0, rhs));
    }
    let mid = astar.lincomb(b, bsharp, -pa.a1)?;
    let lhs = trace_chain(&[
        Factor::Scalar(b, 1),
        Factor::Tensor(&left, 1),
        Factor::Tensor(&mid, -1),
        Factor::Tensor(&left, 1),
    ])?;
    Ok(BoundEval::at_most(lhs, rhs))
}

/// S = tr(A*−a1I)⁻¹ and the denominator a2 + a1(N−1).
fn lower_trace_data(astar: &SymTensor, pa: &PhaseA) -> Result<(f64, f64)> {
    let n = astar.dim() as f64;
    let shifted = astar.shift(-pa.a1);
    let s = trace_chain(&[Factor::Tensor(&shifted, -1)])?;
    Ok((s, pa.a2 + pa.a1 * (n - 1.0)))
}

/// tr(B#−b1I)(A*−a1I)⁻² ≥ N(b2−b1)(1−θ_B)(a1S+1)²/D² + (b1/a1)((a2−a1)S−N)/D
pub fn bound_l1(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<BoundEval> {
    let n = same_dim(astar, bsharp)? as f64;
    let (s, d) = lower_trace_data(astar, pa)?;
    let shifted = astar.shift(-pa.a1);
    let bs = bsharp.shift(-pb.b1);
    let lhs = trace_chain(&[Factor::Tensor(&bs, 1), Factor::Tensor(&shifted, -2)])?;
    let g = pa.a1 * s + 1.0;
    let rhs = n * (pb.b2 - pb.b1) * (1.0 - pb.theta) * g * g / (d * d)
        + (pb.b1 / pa.a1) * (pa.contrast() * s - n) / d;
    Ok(BoundEval::at_least(lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Case {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Eval {
    pub bound: BoundEval,
    pub case: L2Case,
    pub theta: f64,
}

/// l(θ) = b1θ_B/a1² + b2(θ−θ_B)/a1² + b2(1−θ)/a2²
pub fn l_of_theta(pa: &PhaseA, pb: &PhaseB, theta: f64) -> f64 {
    let (a1s, a2s) = (pa.a1 * pa.a1, pa.a2 * pa.a2);
    pb.b1 * pb.theta / a1s + pb.b2 * (theta - pb.theta) / a1s + pb.b2 * (1.0 - theta) / a2s
}

/// c = min{b1/a1², b2/a2²}
pub fn translation_c(pa: &PhaseA, pb: &PhaseB) -> f64 {
    (pb.b1 / (pa.a1 * pa.a1)).min(pb.b2 / (pa.a2 * pa.a2))
}

/// A*⁻¹B#A*⁻¹ as a symmetric tensor.
fn sandwich(astar: &SymTensor, bsharp: &SymTensor) -> Result<SymTensor> {
    let ainv = astar.inverse_spd()?.to_mat();
    let m = ainv.mul(&bsharp.to_mat()).mul(&ainv);
    SymTensor::from_mat(&m, 1e-9)
}

/// tr{X (A̲_θ⁻¹−a2⁻¹)² (A*⁻¹−a2⁻¹I)⁻²}
fn flux_side_trace(astar: &SymTensor, x: &SymTensor, pa: &PhaseA, theta: f64) -> Result<f64> {
    let s = theta * (1.0 / pa.a1 - 1.0 / pa.a2);
    let y = astar.inverse_spd()?.shift(-1.0 / pa.a2);
    Ok(s * s * trace_chain(&[Factor::Tensor(x, 1), Factor::Tensor(&y, -2)])?)
}

pub fn bound_l2(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<L2Eval> {
    let n = same_dim(astar, bsharp)? as f64;
    let theta = gclosure::theta_upper_unchecked(astar, pa)?;
    let c = translation_c(pa, pb);
    let l = l_of_theta(pa, pb, theta);
    let x = sandwich(astar, bsharp)?.shift(-c);
    let lhs = flux_side_trace(astar, &x, pa, theta)?;
    let (a1, a2, k) = (pa.a1, pa.a2, pa.contrast());
    let case_a = pb.b2 / (a2 * a2) <= pb.b1 / (a1 * a1);
    let rhs = if case_a {
        n * (l - c) + pb.b2 * k * k / (a1 * a2).powi(2) * theta * (1.0 - theta) * (n - 1.0)
    } else {
        n * (l - c)
            + (pb.b1 * k * k * theta / a1.powi(4) + 2.0 * (pb.b2 / (a2 * a2) - pb.b1 / (a1 * a1)) * k / a1)
                * (1.0 - theta)
                * (n - 1.0)
    };
    Ok(L2Eval {
        bound: BoundEval::at_least(lhs, rhs),
        case: if case_a { L2Case::A } else { L2Case::B },
        theta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U1Eval {
    /// eliminated-θ form
    pub bound: BoundEval,
    /// form carrying θ from the lower boundary explicitly
    pub theta_form: BoundEval,
    pub theta: f64,
}

pub fn bound_u1(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<U1Eval> {
    let n = same_dim(astar, bsharp)? as f64;
    let (s, d) = lower_trace_data(astar, pa)?;
    let x = astar.lincomb(pb.b2 / pa.a1, bsharp, -1.0)?;
    let shifted = astar.shift(-pa.a1);
    let lhs = trace_chain(&[Factor::Tensor(&x, 1), Factor::Tensor(&shifted, -2)])?;
    let g = pa.a1 * s + 1.0;
    let rhs = n * (pb.b2 - pb.b1) * pb.theta * g * g / (d * d) + n * (pb.b2 / pa.a1) * g / d;

    let theta = gclosure::theta_lower_unchecked(astar, pa)?;
    let f = pa.arithmetic_at(theta) - pa.a1;
    let theta_form = BoundEval::at_least(
        f * f * lhs,
        n * (pb.b2 - pb.b1) * pb.theta + n * (pb.b2 / pa.a1) * pa.contrast() * (1.0 - theta),
    );
    Ok(U1Eval { bound: BoundEval::at_least(lhs, rhs), theta_form, theta })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U2Eval {
    pub lhs: f64,
    pub rhs_printed: f64,
    pub rhs_step: f64,
    pub slack_printed: f64,
    pub slack_step: f64,
    pub theta: f64,
}

/// Θ* = b2/a1² + (b1−b2)θ_B/a1² + (b1/a2² − b1/a1²)(1−θ)
pub fn theta_star(pa: &PhaseA, pb: &PhaseB, theta: f64) -> f64 {
    let (a1s, a2s) = (pa.a1 * pa.a1, pa.a2 * pa.a2);
    pb.b2 / a1s + (pb.b1 - pb.b2) * pb.theta / a1s + (pb.b1 / a2s - pb.b1 / a1s) * (1.0 - theta)
}

/// Difference rhs_step − rhs_printed = N·b2(a2−a1)(2θ−1)/a1³.
pub fn u2_discrepancy(pa: &PhaseA, pb: &PhaseB, n: usize, theta: f64) -> f64 {
    n as f64 * pb.b2 * pa.contrast() * (2.0 * theta - 1.0) / pa.a1.powi(3)
}

pub fn bound_u2(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<U2Eval> {
    let n = same_dim(astar, bsharp)? as f64;
    let theta = gclosure::theta_upper_unchecked(astar, pa)?;
    let (a1, k) = (pa.a1, pa.contrast());
    let ainv = astar.inverse_spd()?;
    let x = ainv.lincomb(pb.b2 * pa.a2 / (a1 * a1), &sandwich(astar, bsharp)?, -1.0)?;
    let lhs = flux_side_trace(astar, &x, pa, theta)?;
    let common = n * (pb.b2 / (a1 * a1) - theta_star(pa, pb, theta))
        - 2.0 * (pb.b2 - pb.b1) * k * (1.0 - theta) * (n - 1.0) / a1.powi(3);
    let rhs_printed = common + n * pb.b2 * k * (1.0 - theta) / a1.powi(3);
    let rhs_step = common + n * pb.b2 * k * theta / a1.powi(3);
    Ok(U2Eval {
        lhs,
        rhs_printed,
        rhs_step,
        slack_printed: lhs - rhs_printed,
        slack_step: lhs - rhs_step,
        theta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    Feasible,
    Boundary,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBoundReport {
    pub region: RegionLabel,
    pub g_verdict: Option<GVerdict>,
    pub chain_slacks: Vec<f64>,
    pub li_lhs: Option<f64>,
    pub li_rhs: Option<f64>,
    pub li_slack: Option<f64>,
    pub uj_lhs: Option<f64>,
    pub uj_rhs: Option<f64>,
    pub uj_slack: Option<f64>,
    /// U2: slack against the printed right-hand side; U1: θ-form slack
    pub uj_variant_slack: Option<f64>,
    pub verdict: PairVerdict,
    pub note: Option<String>,
}

impl PairBoundReport {
    pub fn is_feasible(&self) -> bool {
        self.verdict != PairVerdict::Infeasible
    }

    /// Smallest of the slacks that decide feasibility.
    pub fn min_slack(&self) -> f64 {
        let mut m = self.chain_slacks.iter().cloned().fold(f64::INFINITY, f64::min);
        for s in [self.li_slack, self.uj_slack].into_iter().flatten() {
            m = m.min(s);
        }
        m
    }
}

fn li_eval(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB, region: RegionLabel) -> Result<BoundEval> {
    if pb.b1 == pb.b2 {
        bound_l_const_b(astar, bsharp, pa, pb.b1)
    } else if region.is_l1() {
        bound_l1(astar, bsharp, pa, pb)
    } else {
        Ok(bound_l2(astar, bsharp, pa, pb)?.bound)
    }
}

fn uj_eval(
    astar: &SymTensor,
    bsharp: &SymTensor,
    pa: &PhaseA,
    pb: &PhaseB,
    region: RegionLabel,
) -> Result<(BoundEval, f64)> {
    if pb.b1 == pb.b2 {
        let u = bound_u_const_b(astar, bsharp, pa, pb.b1)?;
        Ok((u, u.slack))
    } else if region.is_u1() {
        let u = bound_u1(astar, bsharp, pa, pb)?;
        Ok((u.bound, u.theta_form.slack))
    } else {
        let u = bound_u2(astar, bsharp, pa, pb)?;
        Ok((BoundEval { lhs: u.lhs, rhs: u.rhs_step, slack: u.slack_step }, u.slack_printed))
    }
}

/// Membership of (A*, B#) in the set cut out by the chain, G_θ and the
/// region's two trace bounds.
pub fn pair_membership(
    astar: &SymTensor,
    bsharp: &SymTensor,
    pa: &PhaseA,
    pb: &PhaseB,
    tol: f64,
) -> Result<PairBoundReport> {
    let n = same_dim(astar, bsharp)?;
    let region = classify_region(pa, pb);
    let chain = general_chain_check(astar, bsharp, pa, pb)?;
    let mut report = PairBoundReport {
        region,
        g_verdict: None,
        chain_slacks: chain.to_vec(),
        li_lhs: None,
        li_rhs: None,
        li_slack: None,
        uj_lhs: None,
        uj_rhs: None,
        uj_slack: None,
        uj_variant_slack: None,
        verdict: PairVerdict::Infeasible,
        note: None,
    };
    let chain_ok = chain.iter().all(|&s| s >= -tol);

    if pa.theta == 0.0 || pa.theta == 1.0 {
        // homogeneous A: the only relative limit is the weak limit of B
        let pure = if pa.theta == 0.0 { pa.a2 } else { pa.a1 };
        let da = astar.sub(&eye(n, pure))?.frob();
        let db = bsharp.sub(&eye(n, pb.mean()))?.frob();
        report.g_verdict = Some(GVerdict::Corner);
        report.verdict = if da <= tol && db <= tol && chain_ok {
            PairVerdict::Boundary
        } else {
            PairVerdict::Infeasible
        };
        report.note = Some("homogeneous A phase".into());
        return Ok(report);
    }

    let g = g_membership(astar, pa, tol)?;
    report.g_verdict = Some(g.verdict);
    if g.verdict == GVerdict::Outside {
        report.note = Some("A* outside G-closure".into());
        return Ok(report);
    }
    match li_eval(astar, bsharp, pa, pb, region) {
        Ok(e) => {
            report.li_lhs = Some(e.lhs);
            report.li_rhs = Some(e.rhs);
            report.li_slack = Some(e.slack);
        }
        Err(e) => report.note = Some(format!("lower bound not evaluable: {e}")),
    }
    match uj_eval(astar, bsharp, pa, pb, region) {
        Ok((e, variant)) => {
            report.uj_lhs = Some(e.lhs);
            report.uj_rhs = Some(e.rhs);
            report.uj_slack = Some(e.slack);
            report.uj_variant_slack = Some(variant);
        }
        Err(e) => report.note = Some(format!("upper bound not evaluable: {e}")),
    }
    let (li, uj) = match (report.li_slack, report.uj_slack) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(report),
    };
    report.verdict = if !chain_ok || li < -tol || uj < -tol {
        PairVerdict::Infeasible
    } else if li.abs() <= tol || uj.abs() <= tol {
        PairVerdict::Boundary
    } else {
        PairVerdict::Feasible
    };
    Ok(report)
}

/// Eigenvalue of the unit-trace matrix M attached to A* on the lower
/// boundary of G_θ: (1−θ)(A*−a1)⁻¹ = (a2−a1)⁻¹I + θM/a1.
fn lower_m_value(lambda: f64, pa: &PhaseA, theta: f64, n: usize) -> f64 {
    if theta <= 0.0 {
        return 1.0 / n as f64;
    }
    pa.a1 / theta * ((1.0 - theta) / (lambda - pa.a1) - 1.0 / pa.contrast())
}

/// M recovered from A* through the lower-boundary relation.
pub fn lower_boundary_m(astar: &SymTensor, pa: &PhaseA) -> Result<SymTensor> {
    let theta = gclosure::theta_lower_unchecked(astar, pa)?;
    let e = astar.eig();
    let n = astar.dim();
    let vals: Vec<f64> = e.values.iter().map(|&l| lower_m_value(l, pa, theta, n)).collect();
    SymTensor::from_spectrum(&vals, &e.vectors)
}

fn spectral_from_a(astar: &SymTensor, f: impl Fn(f64) -> f64) -> Result<SymTensor> {
    let e = astar.eig();
    let vals: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
    SymTensor::from_spectrum(&vals, &e.vectors)
}

/// B# on the L1 boundary over A* (nested inclusion ω_A ⊂ ω_B).
pub fn l1_extreme(astar: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<SymTensor> {
    let theta = gclosure::theta_lower_unchecked(astar, pa)?;
    let n = astar.dim();
    let (a1, k) = (pa.a1, pa.contrast());
    let f = pa.arithmetic_at(theta) - a1;
    let bbar = pb.mean();
    spectral_from_a(astar, |l| {
        let m = lower_m_value(l, pa, theta, n);
        let r = (l - a1) / f;
        pb.b1 + r * r * ((bbar - pb.b1) + pb.b1 * k * k * theta * (1.0 - theta) * m / (a1 * a1))
    })
}

/// B# on the U1 boundary over A* (disjoint inclusion ω_A ∩ ω_B = ∅).
pub fn u1_extreme(astar: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<SymTensor> {
    let theta = gclosure::theta_lower_unchecked(astar, pa)?;
    let n = astar.dim();
    let (a1, k) = (pa.a1, pa.contrast());
    let f = pa.arithmetic_at(theta) - a1;
    let bbar = pb.mean();
    spectral_from_a(astar, |l| {
        let m = lower_m_value(l, pa, theta, n);
        let r = (l - a1) / f;
        pb.b2 - r * r * ((pb.b2 - bbar) - pb.b2 * k * k * theta * (1.0 - theta) * m / (a1 * a1))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibreMix {
    pub beta1: f64,
    pub beta2: f64,
    pub b1_target: SymTensor,
    pub b2_target: SymTensor,
    pub mix: SymTensor,
}

/// β-weights of B# between the L1- and U1-saturating relative limits over A*.
pub fn fibre_mix(astar: &SymTensor, bsharp: &SymTensor, pa: &PhaseA, pb: &PhaseB) -> Result<FibreMix> {
    if classify_region(pa, pb) != RegionLabel::L1U1 {
        return Err(Error::NotInRegion("L1U1".into()));
    }
    same_dim(astar, bsharp)?;
    let shifted = astar.shift(-pa.a1);
    let norm = trace_chain(&[Factor::Tensor(&shifted, -2)])?;
    let l1 = bound_l1(astar, bsharp, pa, pb)?;
    let u1 = bound_u1(astar, bsharp, pa, pb)?.bound;
    let beta1 = l1.slack / norm;
    let beta2 = u1.slack / norm;
    if beta1 < -DEFAULT_TOL || beta2 < -DEFAULT_TOL {
        return Err(Error::NotInRegion("L1U1 (pair infeasible)".into()));
    }
    let b1_target = l1_extreme(astar, pa, pb)?;
    let b2_target = u1_extreme(astar, pa, pb)?;
    let total = beta1 + beta2;
    let mix = if total <= 0.0 {
        b1_target.clone()
    } else {
        b1_target.lincomb(beta2 / total, &b2_target, beta1 / total)?
    };
    Ok(FibreMix { beta1, beta2, b1_target, b2_target, mix })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    /// (b/a2){A* + (a2I−Ā)⁻¹(a2I−A*)²}
    ConstLower { b: f64 },
    /// (b/a1){A* + (Ā−a1I)⁻¹(A*−a1I)²}
    ConstUpper { b: f64 },
    /// lower bound on B#∇u·∇u, optimal where θ_A ≤ θ_B
    GradientNested,
    /// lower bound on A*⁻¹B#A*⁻¹σ·σ, optimal where θ_B < θ_A
    FluxNested,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBound {
    pub value_bound: f64,
    pub matrix: SymTensor,
}

/// Pointwise quadratic-form bound evaluated at `v` (a gradient, or a flux for
/// `FluxNested`). `m` is the unit-trace microstructure matrix, (1/N)I if absent.
pub fn energy_density_bounds(
    astar: &SymTensor,
    pa: &PhaseA,
    pb: Option<&PhaseB>,
    kind: DensityKind,
    m: Option<&SymTensor>,
    v: &[f64],
) -> Result<DensityBound> {
    let n = astar.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch(n, v.len()));
    }
    let g = g_membership(astar, pa, DEFAULT_TOL)?;
    if g.verdict == GVerdict::Outside {
        return Err(Error::OutsideGSet);
    }
    let m = match m {
        Some(m) => {
            same_dim(astar, m)?;
            m.clone()
        }
        None => eye(n, 1.0 / n as f64),
    };
    let need_b = || pb.copied().ok_or_else(|| Error::InvalidPhase("two-phase B data required".into()));
    let (a1, a2, k) = (pa.a1, pa.a2, pa.contrast());
    let abar = pa.arithmetic();
    let matrix = match kind {
        DensityKind::ConstLower { b } => {
            let d = a2 - abar;
            if d <= 1e-14 * a2 {
                astar.scale(b / a2)
            } else {
                let sq = astar.scale(-1.0).shift(a2).map_spectrum(|x| x * x);
                astar.lincomb(b / a2, &sq, b / (a2 * d))?
            }
        }
        DensityKind::ConstUpper { b } => {
            let d = abar - a1;
            if d <= 1e-14 * a1 {
                astar.scale(b / a1)
            } else {
                let sq = astar.shift(-a1).map_spectrum(|x| x * x);
                astar.lincomb(b / a1, &sq, b / (a1 * d))?
            }
        }
        DensityKind::GradientNested => {
            let pb = need_b()?;
            let theta = gclosure::theta_lower_unchecked(astar, pa)?;
            let tb = pb.theta;
            let db = pb.b2 - pb.b1;
            let y_ab = pb.b1 * k * k * theta * (1.0 - theta) / (a1 * a1) + db * db * tb * (1.0 - tb) / pb.b1
                - 2.0 * db * k * theta * (1.0 - tb) / a1;
            let y_b = tb * (1.0 - tb) * db * db / pb.b1;
            // M_AB = M_B = m
            let y = m.scale(y_ab - y_b);
            let f = pa.arithmetic_at(theta) - a1;
            let bb = pb.mean() - pb.b1;
            let x = astar.shift(-a1);
            let x2 = x.map_spectrum(|t| t * t);
            let cross = y.shift(-bb).sym_product(&x2)?;
            eye(n, pb.b1).lincomb(1.0, &x, 2.0 * bb / f)?.lincomb(1.0, &cross, 1.0 / (f * f))?
        }
        DensityKind::FluxNested => {
            let pb = need_b()?;
            let theta = gclosure::theta_upper_unchecked(astar, pa)?;
            let c = translation_c(pa, &pb);
            let l = l_of_theta(pa, &pb, theta);
            let s = theta * (1.0 / a1 - 1.0 / a2);
            let yp = c * k * k * theta * (1.0 - theta) / (a1 * a1)
                + 2.0 * k * (pb.b2 - pb.b1) * pb.theta * (1.0 - theta) / a1.powi(3)
                - 2.0 * k * k * pb.b2 * (a1 + a2) * theta * (1.0 - theta) / (a1.powi(3) * a2 * a2);
            let y = eye(n, 1.0).sub(&m)?.scale(yp);
            let w = astar.inverse_spd()?.shift(-1.0 / a2);
            let w2 = w.map_spectrum(|t| t * t);
            let cross = y.shift(-(l - c)).sym_product(&w2)?;
            eye(n, c).lincomb(1.0, &w, 2.0 * (l - c) / s)?.lincomb(1.0, &cross, 1.0 / (s * s))?
        }
    };
    Ok(DensityBound { value_bound: matrix.quad(v), matrix })
}

/// Frame helper: columns of the eigenvector matrix of A*.
pub fn eigenframe(astar: &SymTensor) -> Mat {
    astar.eig().vectors
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d(v: &[f64]) -> SymTensor {
        SymTensor::diag(v).unwrap()
    }

    fn pa(t: f64) -> PhaseA {
        PhaseA::new(1.0, 2.0, t).unwrap()
    }

    fn pb(t: f64) -> PhaseB {
        PhaseB::new(1.0, 3.0, t).unwrap()
    }

    const A_LAM: [f64; 2] = [4.0 / 3.0, 1.5];

    #[test]
    fn chain_examples() {
        let c = general_chain_check(&d(&A_LAM), &d(&[14.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert!(c.iter().all(|&s| s >= 0.0));
        let c = general_chain_check(&d(&A_LAM), &d(&[1.0, 1.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(c[0], 0.0);
        let top = d(&A_LAM).scale(3.0);
        let c = general_chain_check(&d(&A_LAM), &top, &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn const_b_laminate_saturates_both() {
        let (a, b) = (d(&A_LAM), d(&[10.0 / 9.0, 1.0]));
        let l = bound_l_const_b(&a, &b, &pa(0.5), 1.0).unwrap();
        assert_abs_diff_eq!(l.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.rhs, 1.0);
        let u = bound_u_const_b(&a, &b, &pa(0.5), 1.0).unwrap();
        assert_abs_diff_eq!(u.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.rhs, 1.0);
    }

    #[test]
    fn const_b_coated_spheres() {
        let l = bound_l_const_b(&d(&[10.0 / 7.0; 2]), &d(&[51.0 / 49.0; 2]), &pa(0.5), 1.0).unwrap();
        assert_abs_diff_eq!(l.slack, 0.0, epsilon = 1e-13);
        let u = bound_u_const_b(&d(&[1.4; 2]), &d(&[1.08; 2]), &pa(0.5), 1.0).unwrap();
        assert_abs_diff_eq!(u.slack, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn const_b_pure_phases() {
        let l = bound_l_const_b(&d(&[2.0, 2.0]), &d(&[1.0, 1.0]), &pa(0.0), 1.0).unwrap();
        assert_eq!((l.lhs, l.rhs), (0.0, 0.0));
        let u = bound_u_const_b(&d(&[1.0, 1.0]), &d(&[1.0, 1.0]), &pa(1.0), 1.0).unwrap();
        assert_eq!((u.lhs, u.rhs), (0.0, 0.0));
    }

    #[test]
    fn l1_nested_laminate_equality() {
        let e = bound_l1(&d(&A_LAM), &d(&[14.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(e.lhs, 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.rhs, 9.0, epsilon = 1e-12);
    }

    #[test]
    fn l1_fails_off_lower_boundary() {
        // core-a1 sphere with b1 = b2: saturates the const-b bound L, yet L1 reads 4/9 ≥ 8/9
        let a = d(&[10.0 / 7.0; 2]);
        let b = d(&[51.0 / 49.0; 2]);
        let flat = PhaseB { b1: 1.0, b2: 1.0, theta: 0.5 };
        let e = bound_l1(&a, &b, &pa(0.5), &flat).unwrap();
        assert_abs_diff_eq!(e.lhs, 4.0 / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.rhs, 8.0 / 9.0, epsilon = 1e-13);
        let r = pair_membership(&a, &b, &pa(0.5), &PhaseB::constant(1.0).unwrap(), 1e-9).unwrap();
        assert!(r.is_feasible());
    }

    #[test]
    fn l1_fibre_midpoint_strict() {
        let e = bound_l1(&d(&A_LAM), &d(&[20.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert!(e.slack > 1.0);
    }

    #[test]
    fn u1_disjoint_laminate_equality() {
        let e = bound_u1(&d(&A_LAM), &d(&[26.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(e.bound.lhs, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.bound.rhs, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.theta_form.lhs, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.theta_form.rhs, 5.0, epsilon = 1e-12);
        let mid = bound_u1(&d(&A_LAM), &d(&[20.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert!(mid.bound.slack > 1.0);
    }

    #[test]
    fn l2_case_a_equality() {
        let e = bound_l2(&d(&A_LAM), &d(&[22.0 / 9.0, 2.5]), &pa(0.5), &pb(0.25)).unwrap();
        assert_eq!(e.case, L2Case::A);
        assert_abs_diff_eq!(e.theta, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e.bound.lhs, 1.4375, epsilon = 1e-10);
        assert_abs_diff_eq!(e.bound.rhs, 1.4375, epsilon = 1e-10);
    }

    #[test]
    fn u2_dual_forms() {
        let a = d(&[8.0 / 7.0, 1.25]);
        let b = d(&[116.0 / 49.0, 2.0]);
        let e = bound_u2(&a, &b, &pa(0.75), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(e.lhs, 8.9375, epsilon = 1e-10);
        assert_abs_diff_eq!(e.rhs_printed, 2.875, epsilon = 1e-10);
        assert_abs_diff_eq!(e.rhs_step, 5.875, epsilon = 1e-10);
        assert_abs_diff_eq!(e.rhs_step - e.rhs_printed, u2_discrepancy(&pa(0.75), &pb(0.5), 2, e.theta), epsilon = 1e-12);
    }

    #[test]
    fn regions() {
        assert_eq!(classify_region(&pa(0.5), &pb(0.5)), RegionLabel::L1U1);
        assert_eq!(classify_region(&pa(0.75), &pb(0.5)), RegionLabel::L2U2);
        assert_eq!(classify_region(&pa(0.25), &pb(0.5)), RegionLabel::L1U1);
        assert_eq!(classify_region(&pa(0.25), &pb(0.9)), RegionLabel::L1U2);
        assert_eq!(classify_region(&pa(0.6), &pb(0.3)), RegionLabel::L2U1);
    }

    #[test]
    fn membership_examples() {
        let r = pair_membership(&d(&A_LAM), &d(&[14.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5), 1e-9).unwrap();
        assert_eq!(r.region, RegionLabel::L1U1);
        assert_eq!(r.verdict, PairVerdict::Boundary);
        let r = pair_membership(&d(&A_LAM), &d(&[0.5, 0.5]), &pa(0.5), &pb(0.5), 1e-9).unwrap();
        assert_eq!(r.verdict, PairVerdict::Infeasible);
        let r = pair_membership(&d(&A_LAM), &d(&[20.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5), 1e-9).unwrap();
        assert_eq!(r.verdict, PairVerdict::Feasible);
        assert!(r.li_slack.unwrap() > 0.0 && r.uj_slack.unwrap() > 0.0);
    }

    #[test]
    fn extremes_of_laminate_fibre() {
        let a = d(&A_LAM);
        let l = l1_extreme(&a, &pa(0.5), &pb(0.5)).unwrap();
        let u = u1_extreme(&a, &pa(0.5), &pb(0.5)).unwrap();
        assert!(l.sub(&d(&[14.0 / 9.0, 2.0])).unwrap().frob() < 1e-13);
        assert!(u.sub(&d(&[26.0 / 9.0, 2.0])).unwrap().frob() < 1e-13);
    }

    #[test]
    fn fibre_mix_examples() {
        let a = d(&A_LAM);
        let f = fibre_mix(&a, &d(&[14.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(f.beta1, 0.0, epsilon = 1e-12);
        let f = fibre_mix(&a, &d(&[26.0 / 9.0, 2.0]), &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(f.beta2, 0.0, epsilon = 1e-12);
        let mid = d(&[20.0 / 9.0, 2.0]);
        let f = fibre_mix(&a, &mid, &pa(0.5), &pb(0.5)).unwrap();
        assert_abs_diff_eq!(f.beta1, f.beta2, epsilon = 1e-12);
        assert_abs_diff_eq!(f.beta1, 6.0 / 13.0, epsilon = 1e-12);
        assert!(f.mix.sub(&mid).unwrap().frob() < 1e-12);
        assert!(fibre_mix(&a, &mid, &pa(0.75), &pb(0.5)).is_err());
    }

    #[test]
    fn density_const_lower_laminate() {
        let r = energy_density_bounds(&d(&A_LAM), &pa(0.5), None, DensityKind::ConstLower { b: 1.0 }, None, &[1.0, 0.0])
            .unwrap();
        assert_abs_diff_eq!(r.value_bound, 10.0 / 9.0, epsilon = 1e-14);
        let z = energy_density_bounds(&d(&A_LAM), &pa(0.5), None, DensityKind::ConstUpper { b: 1.0 }, None, &[0.0, 0.0])
            .unwrap();
        assert_eq!(z.value_bound, 0.0);
    }

    #[test]
    fn density_homogeneous() {
        let lo = DensityKind::ConstLower { b: 2.0 };
        let r = energy_density_bounds(&d(&[2.0, 2.0]), &pa(0.0), None, lo, None, &[0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(r.value_bound, 2.0, epsilon = 1e-14);
        let up = DensityKind::ConstUpper { b: 2.0 };
        let r = energy_density_bounds(&d(&[1.0, 1.0]), &pa(1.0), None, up, None, &[0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(r.value_bound, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn density_two_phase_laminate_saturation() {
        let m = d(&[1.0, 0.0]);
        let r = energy_density_bounds(&d(&A_LAM), &pa(0.5), Some(&pb(0.5)), DensityKind::GradientNested, Some(&m), &[1.0, 0.0])
            .unwrap();
        assert_abs_diff_eq!(r.matrix.get(0, 0), 14.0 / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.matrix.get(1, 1), 2.0, epsilon = 1e-13);
        let r = energy_density_bounds(&d(&A_LAM), &pa(0.5), Some(&pb(0.25)), DensityKind::FluxNested, Some(&m), &[1.0, 0.0])
            .unwrap();
        assert_abs_diff_eq!(r.matrix.get(0, 0), 22.0 / 9.0 * 9.0 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix.get(1, 1), 2.5 * 4.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn density_outside_rejected() {
        let r = energy_density_bounds(&d(&[4.0 / 3.0; 2]), &pa(0.5), None, DensityKind::ConstLower { b: 1.0 }, None, &[1.0, 0.0]);
        assert_eq!(r, Err(Error::OutsideGSet));
    }
}
