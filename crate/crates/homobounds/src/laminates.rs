//! Laminate constructors: simple laminates, rank-p sequential laminates for
//! A*, and the matching relative limits B# for each inclusion relation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gclosure::PhaseA;
use crate::homog1d::bsharp_1d;
use crate::pairbounds::{self, general_chain_check, l_of_theta, theta_star, translation_c, PhaseB};
use crate::symtensor::{SymTensor, MAX_DIM};

/// Which A-phase sits in the core of the lamination (the other is the matrix).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Core {
    #[serde(rename = "a1")]
    A1,
    #[serde(rename = "a2")]
    A2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "A_subset_B")]
    ASubsetB,
    #[serde(rename = "B_subset_A")]
    BSubsetA,
    #[serde(rename = "disjoint")]
    Disjoint,
    #[serde(rename = "complement_cover")]
    ComplementCover,
    #[serde(rename = "const_b")]
    ConstB,
}

impl Relation {
    /// Core phase the relation is built on.
    pub fn required_core(self) -> Option<Core> {
        match self {
            Relation::ASubsetB | Relation::Disjoint => Some(Core::A2),
            Relation::BSubsetA | Relation::ComplementCover => Some(Core::A1),
            Relation::ConstB => None,
        }
    }

    pub fn compatible(self, pa: &PhaseA, pb: &PhaseB) -> bool {
        let (ta, tb) = (pa.theta, pb.theta);
        match self {
            Relation::ASubsetB => ta <= tb,
            Relation::BSubsetA => tb < ta,
            Relation::Disjoint => ta + tb <= 1.0,
            Relation::ComplementCover => ta + tb > 1.0,
            Relation::ConstB => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminateSpec {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub core: Core,
    pub relation: Relation,
}

impl LaminateSpec {
    /// Rank-p laminate along the first p coordinate axes with equal weights.
    pub fn axes(n: usize, p: usize, core: Core, relation: Relation) -> Result<LaminateSpec> {
        if p == 0 || p > n {
            return Err(Error::InconsistentSpec(format!("rank {p} in dimension {n}")));
        }
        let directions = (0..p)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let spec = LaminateSpec { directions, weights: vec![1.0 / p as f64; p], core, relation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.directions.len();
        if p == 0 {
            return Err(Error::InconsistentSpec("no lamination directions".into()));
        }
        if self.weights.len() != p {
            return Err(Error::InconsistentSpec(format!("{} weights for {p} directions", self.weights.len())));
        }
        let n = self.dim();
        if n == 0 || n > MAX_DIM {
            return Err(Error::BadDimension(n));
        }
        for e in &self.directions {
            if e.len() != n {
                return Err(Error::DimensionMismatch(n, e.len()));
            }
            let norm: f64 = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InconsistentSpec(format!("direction norm {norm}")));
            }
        }
        if self.weights.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InconsistentSpec("negative weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InconsistentSpec(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// M = Σ mᵢ eᵢ⊗eᵢ
    pub fn m_matrix(&self) -> Result<SymTensor> {
        self.validate()?;
        SymTensor::from_dyads(&self.directions, &self.weights)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionWindow {
    pub lower: f64,
    pub upper: f64,
}

impl InclusionWindow {
    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.lower - tol && t <= self.upper + tol
    }
}

pub fn overlap_window(pa: &PhaseA, pb: &PhaseB) -> InclusionWindow {
    InclusionWindow {
        lower: (pa.theta + pb.theta - 1.0).max(0.0),
        upper: pa.theta.min(pb.theta),
    }
}

/// A* = diag(a̲, ā, …), B# = diag(b#, b̄, …) with the harmonic entry on `axis`.
pub fn simple_laminate_pair(
    pa: &PhaseA,
    pb: &PhaseB,
    theta_ab: f64,
    axis: usize,
    n: usize,
) -> Result<(SymTensor, SymTensor)> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::BadDimension(n));
    }
    if axis >= n {
        return Err(Error::DimensionMismatch(axis, n));
    }
    let b11 = bsharp_1d(pa, pb, theta_ab)?;
    let mut a = vec![pa.arithmetic(); n];
    let mut b = vec![pb.mean(); n];
    a[axis] = pa.harmonic();
    b[axis] = b11;
    Ok((SymTensor::diag(&a)?, SymTensor::diag(&b)?))
}

/// Eigenvalue of A*_p belonging to eigenvalue m of M.
fn seq_a_value(pa: &PhaseA, core: Core, m: f64) -> f64 {
    let (a1, a2, t) = (pa.a1, pa.a2, pa.theta);
    let k = pa.contrast();
    if t <= 0.0 {
        return a2;
    }
    if t >= 1.0 {
        return a1;
    }
    match core {
        Core::A2 => a1 + (1.0 - t) / (1.0 / k + t * m / a1),
        Core::A1 => a2 + t / (-1.0 / k + (1.0 - t) * m / a2),
    }
}

fn spectral_of_m(spec: &LaminateSpec, f: impl Fn(f64) -> Result<f64>) -> Result<SymTensor> {
    let m = spec.m_matrix()?;
    let e = m.eig();
    let vals = e.values.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    SymTensor::from_spectrum(&vals, &e.vectors)
}

/// Rank-p sequential laminate A*_p.
pub fn seq_a(spec: &LaminateSpec, pa: &PhaseA) -> Result<SymTensor> {
    spectral_of_m(spec, |m| Ok(seq_a_value(pa, spec.core, m)))
}

/// Quasi-sequential B#_p for a constant coefficient b.
pub fn seq_b_const(spec: &LaminateSpec, pa: &PhaseA, b: f64) -> Result<SymTensor> {
    let t = pa.theta;
    let n = spec.dim();
    if t <= 0.0 || t >= 1.0 {
        spec.validate()?;
        return SymTensor::scalar(n, b);
    }
    let k = pa.contrast();
    let abar = pa.arithmetic();
    spectral_of_m(spec, |m| {
        let mismatch = abar - seq_a_value(pa, spec.core, m);
        if m <= 1e-14 {
            if mismatch.abs() > 1e-12 {
                return Err(Error::InconsistentSpec(format!("zero weight with mismatch {mismatch:e}")));
            }
            return Ok(b);
        }
        Ok(b + b * mismatch * mismatch / (t * (1.0 - t) * k * k * m))
    })
}

/// (p,p)-sequential B#_{p,p} for the relation named in `spec`. The result is
/// checked against the general chain.
pub fn seq_b_pp(spec: &LaminateSpec, pa: &PhaseA, pb: &PhaseB) -> Result<SymTensor> {
    spec.validate()?;
    let rel = spec.relation;
    let core = match rel.required_core() {
        Some(c) => c,
        None => return Err(Error::InconsistentSpec("const_b relation needs seq_b_const".into())),
    };
    if core != spec.core {
        return Err(Error::InconsistentSpec(format!("relation {rel:?} needs core {core:?}")));
    }
    if !rel.compatible(pa, pb) {
        return Err(Error::RegionMismatch(format!(
            "{rel:?} with thetaA={}, thetaB={}",
            pa.theta, pb.theta
        )));
    }
    let (a1, a2, t) = (pa.a1, pa.a2, pa.theta);
    let k = pa.contrast();
    let (b1, b2) = (pb.b1, pb.b2);
    let bbar = pb.mean();
    let abar = pa.arithmetic();
    let value = |m: f64| -> Result<f64> {
        let lam = seq_a_value(pa, core, m);
        Ok(match rel {
            Relation::ASubsetB | Relation::Disjoint if t >= 1.0 => bbar,
            Relation::ASubsetB => {
                let r = (lam - a1) / (abar - a1);
                b1 + r * r * ((bbar - b1) + b1 * k * k * t * (1.0 - t) * m / (a1 * a1))
            }
            Relation::Disjoint => {
                let r = (lam - a1) / (abar - a1);
                b2 - r * r * ((b2 - bbar) - b2 * k * k * t * (1.0 - t) * m / (a1 * a1))
            }
            Relation::BSubsetA => {
                let c = translation_c(pa, pb);
                let l = l_of_theta(pa, pb, t);
                let s = t * (1.0 / a1 - 1.0 / a2);
                let w = (1.0 / lam - 1.0 / a2) / s;
                let y = c * k * k * t * (1.0 - t) / (a1 * a1) + 2.0 * (b2 / (a2 * a2) - c) * k * (1.0 - t) / a1;
                let x = c + w * w * ((l - c) + y * (1.0 - m));
                lam * lam * x
            }
            Relation::ComplementCover => {
                let s = t * (1.0 / a1 - 1.0 / a2);
                let w = (1.0 / lam - 1.0 / a2) / s;
                let r = b2 * a2 / (a1 * a1);
                let rhs = r / pa.harmonic_at(t) - theta_star(pa, pb, t)
                    - 2.0 * (b2 - b1) * k * (1.0 - t) * (1.0 - m) / a1.powi(3);
                let x = r / lam - w * w * rhs;
                lam * lam * x
            }
            Relation::ConstB => unreachable!(),
        })
    };
    let b = spectral_of_m(spec, value)?;
    let a = seq_a(spec, pa)?;
    let chain = general_chain_check(&a, &b, pa, pb)?;
    for (link, &slack) in chain.iter().enumerate() {
        if slack < -1e-9 {
            return Err(Error::ChainViolation { link, slack });
        }
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    L,
    U,
    L1,
    L2,
    U1,
    U2Step,
    U2Printed,
}

/// Signed slack of the designated bound (≥ 0 when satisfied, 0 on saturation).
/// The const-b bounds use b = pb.b1 and require b1 = b2.
pub fn saturation_report(
    astar: &SymTensor,
    bsharp: &SymTensor,
    pa: &PhaseA,
    pb: &PhaseB,
    which: BoundKind,
) -> Result<f64> {
    let const_b = || {
        if pb.b1 != pb.b2 {
            Err(Error::InvalidPhase("const-b bound needs b1 = b2".into()))
        } else {
            Ok(pb.b1)
        }
    };
    Ok(match which {
        BoundKind::L => pairbounds::bound_l_const_b(astar, bsharp, pa, const_b()?)?.slack,
        BoundKind::U => pairbounds::bound_u_const_b(astar, bsharp, pa, const_b()?)?.slack,
        BoundKind::L1 => pairbounds::bound_l1(astar, bsharp, pa, pb)?.slack,
        BoundKind::L2 => pairbounds::bound_l2(astar, bsharp, pa, pb)?.bound.slack,
        BoundKind::U1 => pairbounds::bound_u1(astar, bsharp, pa, pb)?.bound.slack,
        BoundKind::U2Step => pairbounds::bound_u2(astar, bsharp, pa, pb)?.slack_step,
        BoundKind::U2Printed => pairbounds::bound_u2(astar, bsharp, pa, pb)?.slack_printed,
    })
}
