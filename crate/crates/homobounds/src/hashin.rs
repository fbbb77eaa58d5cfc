//! Coated-sphere (Hashin–Shtrikman) assemblages: the effective conductivity m,
//! the closed forms for b#, and a radial quadrature of the energy integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gclosure::PhaseA;
use crate::laminates::Core;
use crate::pairbounds::PhaseB;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreB {
    B1,
    B2,
    Const(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inclusion {
    #[serde(rename = "B_in_A")]
    BInA,
    #[serde(rename = "A_in_B")]
    AInB,
    #[serde(rename = "A_in_Bc")]
    AInBc,
    #[serde(rename = "Ac_in_B")]
    AcInB,
    #[serde(rename = "none")]
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoatingConfig {
    #[serde(rename = "coreA")]
    pub core_a: Core,
    #[serde(rename = "coreB")]
    pub core_b: CoreB,
    pub inclusion: Inclusion,
}

/// The closed-form families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HsCase {
    ConstCoreA1,
    ConstCoreA2,
    /// core a1, core b1, ω_B ⊂ ω_A
    Case2a,
    /// core a2, core b2, ω_A ⊂ ω_B
    Case2b,
    /// core a2, core b1, ω_A ∩ ω_B = ∅
    Case2c,
    /// core a1, core b2, ω_Aᶜ ⊂ ω_B
    Case2d,
}

impl CoatingConfig {
    pub fn constant(core_a: Core, b: f64) -> CoatingConfig {
        CoatingConfig { core_a, core_b: CoreB::Const(b), inclusion: Inclusion::None }
    }

    pub fn case(core: HsCase) -> CoatingConfig {
        let (core_a, core_b, inclusion) = match core {
            HsCase::ConstCoreA1 => (Core::A1, CoreB::Const(1.0), Inclusion::None),
            HsCase::ConstCoreA2 => (Core::A2, CoreB::Const(1.0), Inclusion::None),
            HsCase::Case2a => (Core::A1, CoreB::B1, Inclusion::BInA),
            HsCase::Case2b => (Core::A2, CoreB::B2, Inclusion::AInB),
            HsCase::Case2c => (Core::A2, CoreB::B1, Inclusion::AInBc),
            HsCase::Case2d => (Core::A1, CoreB::B2, Inclusion::AcInB),
        };
        CoatingConfig { core_a, core_b, inclusion }
    }

    /// Matches the configuration to its closed form and checks the volumes.
    pub fn classify(&self, pa: &PhaseA, pb: Option<&PhaseB>) -> Result<HsCase> {
        let case = match (self.core_a, self.core_b, self.inclusion) {
            (Core::A1, CoreB::Const(_), _) => return Ok(HsCase::ConstCoreA1),
            (Core::A2, CoreB::Const(_), _) => return Ok(HsCase::ConstCoreA2),
            (Core::A1, CoreB::B1, Inclusion::BInA) => HsCase::Case2a,
            (Core::A2, CoreB::B2, Inclusion::AInB) => HsCase::Case2b,
            (Core::A2, CoreB::B1, Inclusion::AInBc) => HsCase::Case2c,
            (Core::A1, CoreB::B2, Inclusion::AcInB) => HsCase::Case2d,
            other => return Err(Error::UnsupportedGeometry(format!("{other:?}"))),
        };
        let pb = pb.ok_or_else(|| Error::InvalidPhase("two-phase B data required".into()))?;
        let (ta, tb) = (pa.theta, pb.theta);
        let ok = match case {
            HsCase::Case2a => tb <= ta,
            HsCase::Case2b => ta <= tb,
            HsCase::Case2c => ta + tb <= 1.0,
            HsCase::Case2d => ta + tb >= 1.0,
            _ => true,
        };
        if !ok {
            return Err(Error::IncompatibleVolumes(format!("{case:?} with thetaA={ta}, thetaB={tb}")));
        }
        Ok(case)
    }
}

/// m with (m−a_c')/(m+(N−1)a_c') matching the coated-sphere relation, found by
/// bisection on [a1, a2].
pub fn hs_m(pa: &PhaseA, core: Core, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::BadDimension(n));
    }
    let nf = n as f64;
    let (a1, a2, t) = (pa.a1, pa.a2, pa.theta);
    let resid = |m: f64| match core {
        Core::A1 => (m - a2) / (m + (nf - 1.0) * a2) - t * (a1 - a2) / (a1 + (nf - 1.0) * a2),
        Core::A2 => (m - a1) / (m + (nf - 1.0) * a1) - (1.0 - t) * (a2 - a1) / (a2 + (nf - 1.0) * a1),
    };
    let (mut lo, mut hi) = (a1, a2);
    if resid(lo) >= 0.0 {
        return Ok(lo);
    }
    if resid(hi) <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if resid(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn denominators(pa: &PhaseA, n: f64) -> (f64, f64) {
    let (a1, a2, t) = (pa.a1, pa.a2, pa.theta);
    ((1.0 - t) * a1 + (n + t - 1.0) * a2, t * a2 + (n - t) * a1)
}

/// Closed-form b# of the coated-sphere assemblage selected by `cfg`.
pub fn hs_b(pa: &PhaseA, pb: Option<&PhaseB>, cfg: &CoatingConfig, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::BadDimension(n));
    }
    let case = cfg.classify(pa, pb)?;
    let pb = match cfg.core_b {
        CoreB::Const(b) => PhaseB::constant(b)?,
        _ => *pb.expect("classified as two-phase"),
    };
    Ok(hs_b_formula(pa, &pb, case, n))
}

/// The closed form of `case` as a formula in the fractions, without the
/// volume check. Const cases read b from `pb.b1`.
pub fn hs_b_formula(pa: &PhaseA, pb: &PhaseB, case: HsCase, n: usize) -> f64 {
    let nf = n as f64;
    let (a1, a2, t) = (pa.a1, pa.a2, pa.theta);
    let k = pa.contrast();
    let (d1, d2) = denominators(pa, nf);
    let g = |d: f64| 1.0 + nf * t * (1.0 - t) * k * k / (d * d);
    let (b1, b2, tb) = (pb.b1, pb.b2, pb.theta);
    match case {
        HsCase::ConstCoreA1 => b1 * g(d1),
        HsCase::ConstCoreA2 => b1 * g(d2),
        HsCase::Case2a => b2 * g(d1) - (b2 - b1) * (nf * a2).powi(2) * tb / (d1 * d1),
        HsCase::Case2b => b1 * g(d2) - (b1 - b2) * (nf * a1).powi(2) * (1.0 - tb) / (d2 * d2),
        HsCase::Case2c => b2 * g(d2) - (b2 - b1) * (nf * a1).powi(2) * tb / (d2 * d2),
        HsCase::Case2d => b1 * g(d1) - (b1 - b2) * (nf * a2).powi(2) * (1.0 - tb) / (d1 * d1),
    }
}

/// Radial profile f(r) of the cell solution w = y_l f(r).
struct Radial {
    r_core: f64,
    inner: f64,
    outer: f64,
    c: f64,
    n: f64,
}

impl Radial {
    fn new(core_val: f64, coat_val: f64, phi: f64, n: f64) -> Radial {
        let inner = n * coat_val / ((1.0 - phi) * core_val + (n + phi - 1.0) * coat_val);
        if phi >= 1.0 {
            return Radial { r_core: 1.0, inner: 1.0, outer: 1.0, c: 0.0, n };
        }
        Radial {
            r_core: phi.powf(1.0 / n),
            inner,
            outer: (1.0 - inner * phi) / (1.0 - phi),
            c: (inner - 1.0) * phi / (1.0 - phi),
            n,
        }
    }

    /// (f, f')
    fn eval(&self, r: f64) -> (f64, f64) {
        if r < self.r_core {
            (self.inner, 0.0)
        } else {
            (self.outer + self.c / r.powf(self.n), -self.n * self.c / r.powf(self.n + 1.0))
        }
    }
}

/// Inner coefficient b̃₁ = N a_coat/((1−φ)a_core + (N+φ−1)a_coat).
pub fn hs_profile_inner(pa: &PhaseA, core: Core, n: usize) -> f64 {
    let (core_val, coat_val, phi) = a_geometry(pa, core);
    Radial::new(core_val, coat_val, phi, n as f64).inner
}

fn a_geometry(pa: &PhaseA, core: Core) -> (f64, f64, f64) {
    match core {
        Core::A1 => (pa.a1, pa.a2, pa.theta),
        Core::A2 => (pa.a2, pa.a1, 1.0 - pa.theta),
    }
}

/// b# = N∫₀¹ B(r)[f² + 2ff'r/N + f'²r²/N] r^{N−1} dr by composite midpoint,
/// with the nodes split at the interface radii.
pub fn hs_radial_oracle(
    pa: &PhaseA,
    pb: Option<&PhaseB>,
    cfg: &CoatingConfig,
    n: usize,
    points: usize,
) -> Result<f64> {
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedGeometry(format!("radial quadrature needs N = 2 or 3, got {n}")));
    }
    cfg.classify(pa, pb)?;
    let nf = n as f64;
    let (core_val, coat_val, phi_a) = a_geometry(pa, cfg.core_a);
    let prof = Radial::new(core_val, coat_val, phi_a, nf);
    let (b_core, b_coat, phi_b) = match cfg.core_b {
        CoreB::Const(b) => (b, b, 1.0),
        CoreB::B1 => {
            let pb = pb.unwrap();
            (pb.b1, pb.b2, pb.theta)
        }
        CoreB::B2 => {
            let pb = pb.unwrap();
            (pb.b2, pb.b1, 1.0 - pb.theta)
        }
    };
    let r_b = phi_b.powf(1.0 / nf);
    let mut cuts = vec![0.0, prof.r_core.min(1.0), r_b.min(1.0), 1.0];
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = points.max(4);
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let m = ((total as f64 * (hi - lo)).ceil() as usize).max(1);
        let h = (hi - lo) / m as f64;
        let bv = if 0.5 * (lo + hi) < r_b { b_core } else { b_coat };
        for i in 0..m {
            let r = lo + (i as f64 + 0.5) * h;
            let (f, fp) = prof.eval(r);
            let dens = f * f + 2.0 * f * fp * r / nf + fp * fp * r * r / nf;
            sum += bv * dens * r.powi(n as i32 - 1) * h;
        }
    }
    Ok(nf * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog1d::bounds_1d;
    use approx::assert_abs_diff_eq;

    fn pa(t: f64) -> PhaseA {
        PhaseA::new(1.0, 2.0, t).unwrap()
    }

    #[test]
    fn m_examples() {
        assert_abs_diff_eq!(hs_m(&pa(0.5), Core::A1, 2).unwrap(), 10.0 / 7.0, epsilon = 1e-13);
        assert_abs_diff_eq!(hs_m(&pa(0.5), Core::A2, 2).unwrap(), 7.0 / 5.0, epsilon = 1e-13);
        assert_eq!(hs_m(&pa(0.0), Core::A1, 2).unwrap(), 2.0);
    }

    #[test]
    fn const_b_examples() {
        let b = hs_b(&pa(0.5), None, &CoatingConfig::constant(Core::A1, 1.0), 2).unwrap();
        assert_abs_diff_eq!(b, 51.0 / 49.0, epsilon = 1e-14);
        let b = hs_b(&pa(0.5), None, &CoatingConfig::constant(Core::A2, 1.0), 2).unwrap();
        assert_abs_diff_eq!(b, 27.0 / 25.0, epsilon = 1e-14);
    }

    #[test]
    fn one_dimensional_reductions() {
        let pa = pa(0.5);
        let pb = PhaseB::new(1.0, 3.0, 0.5).unwrap();
        let bd = bounds_1d(&pa, &pb);
        let cases = [(HsCase::Case2a, bd.l2), (HsCase::Case2b, bd.l1), (HsCase::Case2c, bd.u1), (HsCase::Case2d, bd.u2)];
        for (case, want) in cases {
            let got = hs_b(&pa, Some(&pb), &CoatingConfig::case(case), 1).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn inner_coefficient() {
        assert_abs_diff_eq!(hs_profile_inner(&pa(0.5), Core::A1, 2), 8.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn oracle_matches_const() {
        let cfg = CoatingConfig::constant(Core::A1, 1.0);
        let q = hs_radial_oracle(&pa(0.5), None, &cfg, 2, 10_000).unwrap();
        assert!((q - 51.0 / 49.0).abs() <= 1e-8 * 51.0 / 49.0, "{q}");
    }

    #[test]
    fn oracle_flat_profile() {
        let pa = PhaseA { a1: 2.0, a2: 2.0, theta: 0.4 };
        let q = hs_radial_oracle(&pa, None, &CoatingConfig::constant(Core::A1, 1.7), 3, 10_000).unwrap();
        assert!((q - 1.7).abs() < 1e-8 * 1.7, "{q}");
    }

    #[test]
    fn oracle_two_phase_cases() {
        let cases = [(HsCase::Case2a, 0.6, 0.3), (HsCase::Case2b, 0.4, 0.5), (HsCase::Case2c, 0.4, 0.5), (HsCase::Case2d, 0.7, 0.5)];
        for (case, ta, tb) in cases {
            let pa = pa(ta);
            let pb = PhaseB::new(1.0, 3.0, tb).unwrap();
            let cfg = CoatingConfig::case(case);
            for n in [2, 3] {
                let closed = hs_b(&pa, Some(&pb), &cfg, n).unwrap();
                let q = hs_radial_oracle(&pa, Some(&pb), &cfg, n, 10_000).unwrap();
                assert!((q - closed).abs() <= 1e-8 * closed, "{case:?} N={n}: {q} vs {closed}");
            }
        }
    }

    #[test]
    fn volume_checks() {
        let pb = PhaseB::new(1.0, 3.0, 0.2).unwrap();
        let r = hs_b(&pa(0.5), Some(&pb), &CoatingConfig::case(HsCase::Case2b), 2);
        assert!(matches!(r, Err(Error::IncompatibleVolumes(_))));
        let odd = CoatingConfig { core_a: Core::A1, core_b: CoreB::B1, inclusion: Inclusion::AInB };
        assert!(matches!(hs_b(&pa(0.5), Some(&pb), &odd, 2), Err(Error::UnsupportedGeometry(_))));
    }
}
