//! First-kind (SU(2)-like) two-boson realizations.
//!
//! ```text
//! J+ = f(n) (a1+)^k a2^l,   J- = a1^k (a2+)^l g(n),   J3 = n1/(2k) - n2/(2l) + α
//! ```
//!
//! (1,1), α = 0: `f g = (1/8){4C1 + C3[n1² + n2(n2+2)]}`; U11 takes
//! `f = g`, D11 takes `g = 1`, K11 takes `g(n) = f(n1-1, n2+1)`.
//! (2,2): `f g = (n2 + X3+/2){16C1 + C3[n1² - X1-(n1+1) + n2(n2 + X3+)]}
//!  / [128 (n1 - X1+/2)(n2+1)(n2+2)]` with `Xk± = k ± (-1)^n1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{self, assemble, j3_op, solve_chain, ChainSolution, Family, RadicandPolicy, Style};
use crate::domain::{ceil_sqrt, claim, intersect, kernels, DomainCase, DomainReport};
use crate::error::{Error, Result};
use crate::fock::{chains, Chain, FockSpace, SectorBasis, SectorKind, State, Window};
use crate::higgs::{HiggsParams, Realization, RealizationKind};
use crate::special::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FirstVariant {
    U11,
    D11,
    K11,
    U22,
    D22,
    /// Unitary (1,1) with arbitrary α, as printed.
    GenericA,
    /// Unitary realization of any order from the telescoped product.
    UChain,
    /// Dyson-type realization of any order from the telescoped product.
    DChain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstKindSpec {
    pub order: (usize, usize),
    pub variant: FirstVariant,
    pub alpha: f64,
    pub policy: RadicandPolicy,
}

impl FirstKindSpec {
    pub fn new(variant: FirstVariant) -> Self {
        let order = match variant {
            FirstVariant::U22 | FirstVariant::D22 => (2, 2),
            _ => (1, 1),
        };
        FirstKindSpec { order, variant, alpha: 0.0, policy: RadicandPolicy::Strict }
    }

    pub fn generic_a(alpha: f64) -> Self {
        FirstKindSpec { alpha, ..Self::new(FirstVariant::GenericA) }
    }

    pub fn chain(variant: FirstVariant, k: usize, l: usize, alpha: f64) -> Self {
        FirstKindSpec { order: (k, l), alpha, ..Self::new(variant) }
    }

    pub fn with_policy(mut self, policy: RadicandPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        let (k, l) = self.order;
        if k == 0 || l == 0 {
            return Err(Error::InvalidParam("first-kind order needs k, l >= 1".into()));
        }
        let ok = match self.variant {
            FirstVariant::U11 | FirstVariant::D11 | FirstVariant::K11 => self.order == (1, 1) && self.alpha == 0.0,
            FirstVariant::GenericA => self.order == (1, 1),
            FirstVariant::U22 | FirstVariant::D22 => self.order == (2, 2) && self.alpha == 0.0,
            FirstVariant::UChain | FirstVariant::DChain => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!("{:?} is inconsistent with order {:?}, alpha {}", self.variant, self.order, self.alpha)))
        }
    }
}

pub fn h_first(k: usize, l: usize, alpha: f64) -> Result<impl Fn(State) -> f64> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParam("k = 0 or l = 0 has no two-boson first-kind form".into()));
    }
    Ok(move |s: State| Family::First.h(k, l, alpha, s))
}

/// `f g` of the unitary (1,1) family with α = 0, as a polynomial in (n1, n2).
pub fn fg_u11(p: &HiggsParams, n1: f64, n2: f64) -> f64 {
    (4.0 * p.c1 + p.c3 * (n1 * n1 + n2 * (n2 + 2.0))) / 8.0
}

/// First (1,1) solution for general α; NaN at n1 = 0 unless α = 0.
pub fn fg_solu1(p: &HiggsParams, alpha: f64, n1: f64, n2: f64) -> f64 {
    if n1 == 0.0 && alpha == 0.0 {
        return fg_u11(p, n1, n2);
    }
    (n1 + 2.0 * alpha) / (8.0 * n1)
        * (4.0 * p.c1 + p.c3 * (n1 * (n1 + 4.0 * alpha) + (n2 + 1.0).powi(2) + (2.0 * alpha + 1.0) * (2.0 * alpha - 1.0)))
}

/// Second (1,1) solution, the `n1 <-> n2 + 1`, `α <-> -α` partner.
pub fn fg_solu2(p: &HiggsParams, alpha: f64, n1: f64, n2: f64) -> f64 {
    (n2 - 2.0 * alpha + 1.0) / (8.0 * (n2 + 1.0))
        * (4.0 * p.c1 + p.c3 * (n1 * n1 + n2 * (n2 - 4.0 * alpha + 2.0) + 4.0 * alpha * (alpha - 1.0)))
}

/// `X_k^±(n1) = k ± (-1)^n1`.
pub fn x_pm(k: f64, plus: bool, n1: i64) -> f64 {
    let s = if n1.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if plus {
        k + s
    } else {
        k - s
    }
}

/// (2,2) product.
pub fn fg_solu3(p: &HiggsParams, n1: i64, n2: i64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let x1p = x_pm(1.0, true, n1);
    let x1m = x_pm(1.0, false, n1);
    let x3p = x_pm(3.0, true, n1);
    (b + x3p / 2.0) * (16.0 * p.c1 + p.c3 * (a * a - x1m * (a + 1.0) + b * (b + x3p)))
        / (128.0 * (a - x1p / 2.0) * (b + 1.0) * (b + 2.0))
}

pub fn realize_first(space: FockSpace, p: &HiggsParams, spec: &FirstKindSpec) -> Result<Realization> {
    spec.validate()?;
    let (k, l) = spec.order;
    let alpha = spec.alpha;
    if spec.variant == FirstVariant::K11 && p.c3 == 0.0 {
        return Err(Error::InvalidParam("K11 needs C3 != 0".into()));
    }
    let fg: Box<dyn Fn(State) -> f64> = match spec.variant {
        FirstVariant::U11 | FirstVariant::D11 | FirstVariant::K11 => Box::new(|s: State| fg_u11(p, s.0 as f64, s.1 as f64)),
        FirstVariant::GenericA => Box::new(move |s: State| fg_solu1(p, alpha, s.0 as f64, s.1 as f64)),
        FirstVariant::U22 | FirstVariant::D22 => Box::new(|s: State| fg_solu3(p, s.0 as i64, s.1 as i64)),
        FirstVariant::UChain | FirstVariant::DChain => {
            Box::new(move |s: State| chain::telescoped_fg(Family::First, k, l, p, alpha, s))
        }
    };
    let style = match spec.variant {
        FirstVariant::U11 | FirstVariant::U22 | FirstVariant::GenericA | FirstVariant::UChain => Style::Unitary,
        FirstVariant::D11 | FirstVariant::D22 | FirstVariant::DChain => Style::Dyson,
        FirstVariant::K11 => Style::Constrained,
    };
    let lad = assemble(Family::First, space, k, l, p, &*fg, style, spec.policy)?;
    Ok(Realization {
        jp: lad.jp,
        jm: lad.jm,
        j3: j3_op(Family::First, space, k, l, alpha),
        kind: RealizationKind::First,
        order: (k, l),
        variant: format!("{:?}", spec.variant),
        shift: alpha,
    })
}

fn sector_chain(sector: &SectorBasis, k: usize, l: usize) -> Result<Chain> {
    if sector.kind != (SectorKind::Sum { k, l }) {
        return Err(Error::InvalidParam("sector kind does not match the order".into()));
    }
    let states = sector.members.clone();
    let (first, last) = (states[0], *states.last().unwrap());
    let chain = Chain { true_bottom: first.0 < k, true_top: last.1 < l, states };
    if !chain.is_closed() {
        return Err(Error::InvalidParam(format!("sector {} is not fully contained in the caps", sector.value)));
    }
    Ok(chain)
}

/// Brute-force product along one SUM(k,l) sector.
pub fn chain_product_solve(k: usize, l: usize, p: &HiggsParams, alpha: f64, sector: &SectorBasis) -> Result<ChainSolution> {
    if sector.members.len() < 2 {
        return Err(Error::ShortChain(sector.members.len()));
    }
    solve_chain(Family::First, k, l, p, alpha, &sector_chain(sector, k, l)?)
}

/// `(1/64)(N+2α)(N+2α+2)[8C1 + C3(N+2α)(N+2α+2)]`.
pub fn casimir_first_value(p: &HiggsParams, alpha: f64, n: usize) -> f64 {
    let t = (n as f64 + 2.0 * alpha) * (n as f64 + 2.0 * alpha + 2.0);
    t * (8.0 * p.c1 + p.c3 * t) / 64.0
}

/// States on chains that lie entirely inside the caps.
pub fn contained_window(space: FockSpace, k: usize, l: usize) -> Window {
    let states: Vec<State> = chains(space, Family::First.step(k, l))
        .into_iter()
        .filter(|c| c.is_closed())
        .flat_map(|c| c.states)
        .collect();
    Window::from_states(space, format!("contained SUM({k},{l}) chains"), &states)
}

/// Contained chains whose telescoped product also closes at the top, i.e.
/// chains on which the Higgs relation can hold.
pub fn closing_window(space: FockSpace, p: &HiggsParams, k: usize, l: usize, alpha: f64) -> Window {
    let mut states = Vec::new();
    for c in chains(space, Family::First.step(k, l)) {
        if !c.is_closed() {
            continue;
        }
        let ok = if c.states.len() < 2 {
            let top = c.states[0];
            p.structure(Family::First.h(k, l, alpha, top)).abs() <= chain::coef_scale(p, top) * 1e3
        } else {
            let sol = solve_chain(Family::First, k, l, p, alpha, &c).expect("closed chain");
            let top = *c.states.last().unwrap();
            sol.closes(chain::coef_scale(p, top) * 1e3)
        };
        if ok {
            states.extend(c.states);
        }
    }
    Window::from_states(space, format!("closing SUM({k},{l}) chains"), &states)
}

/// Constrained coefficient from the log-Gamma closed form, with
/// `M = m_sign (n1 - n2)` and the arbitrary function of N set to zero.
pub fn k11_closed_form(p: &HiggsParams, s: State, m_sign: f64) -> Option<Complex64> {
    let n = (s.0 + s.1) as f64;
    let m = m_sign * (s.0 as f64 - s.1 as f64);
    let root = Complex64::new(-8.0 * p.c1 / p.c3 - (n * n + 2.0 * n - 1.0), 0.0).sqrt();
    let om = |k: f64, x: f64, sg: f64| ln_gamma((k + x + sg * root) / 4.0);
    let par = if s.0 % 2 == 0 { 1.0 } else { -1.0 };
    let inner = -om(1.0, -n, -1.0)? + om(3.0, -n, -1.0)? - om(1.0, -n, 1.0)? + om(3.0, -n, 1.0)?
        + par * (om(1.0, m, -1.0)? - om(3.0, m, -1.0)? + om(1.0, m, 1.0)? - om(3.0, m, 1.0)?)
        + 0.5 * Complex64::new(p.c3, 0.0).ln() * (1.0 - par);
    let v = (-par * inner).exp();
    (v.re.is_finite() && v.im.is_finite()).then_some(v)
}

/// Domain and nullspace analysis of U11.
pub fn domain_first(p: &HiggsParams, caps: (usize, usize)) -> Result<DomainReport> {
    let space = FockSpace { n1_max: caps.0, n2_max: caps.1 };
    let rp = |a: usize, b: usize| fg_u11(p, a as f64 + 1.0, b as f64 - 1.0);
    let rm = |a: usize, b: usize| fg_u11(p, a as f64, b as f64);
    let fam = Family::First;
    let admissible: Vec<State> = space
        .basis()
        .into_iter()
        .filter(|&s| {
            let up = space.shifted(s, (1, -1)).is_none() || fam.raise_sq(1, 1, s) == 0.0 || rp(s.0, s.1) >= 0.0;
            let dn = space.shifted(s, (-1, 1)).is_none() || fam.lower_sq(1, 1, s) == 0.0 || rm(s.0, s.1) >= 0.0;
            up && dn
        })
        .collect();
    let radicand_set: Vec<State> =
        space.basis().into_iter().filter(|&(a, b)| rp(a, b) >= 0.0 && rm(a, b) >= 0.0).collect();
    let case = if admissible.len() == space.dim() {
        DomainCase::WholeSpace
    } else if p.c3 > 0.0 {
        DomainCase::Restricted
    } else {
        DomainCase::Finite
    };

    let u = crate::realize_one::realize_first(space, p, &FirstKindSpec::new(FirstVariant::U11).with_policy(RadicandPolicy::Complex))?;
    let adm = admissible.clone();
    let k_adm = kernels(fam, &u.jp, &u.jm, &|s| adm.contains(&s));
    let mut rep = DomainReport {
        family: fam,
        case,
        caps,
        admissible,
        radicand_set,
        boundary1: vec![],
        boundary1_scan: vec![],
        boundary2: vec![],
        boundary2_scan: vec![],
        eta: None,
        eta_scan: None,
        common_kernel: intersect(&k_adm.jp, &k_adm.jm),
        jp_kernel: k_adm.jp,
        jm_kernel: k_adm.jm,
        nullity_consistent: k_adm.consistent,
        claims: vec![],
        notes: vec![],
    };

    if p.c3 <= 0.0 {
        rep.notes.push("C3 <= 0: outside the regime of the zeta/eta formulas; scan only".into());
        return Ok(rep);
    }
    let d = 1.0 - 4.0 * p.c1 / p.c3;
    let zeta = |x: usize| ceil_sqrt(d - (x as f64 + 1.0).powi(2));
    rep.boundary1 = (0..=caps.0).map(zeta).collect();
    rep.boundary2 = (0..=caps.1).map(zeta).collect();
    rep.boundary1_scan = (0..=caps.0).map(|a| (0..=caps.1).find(|&b| rp(a, b) >= 0.0).map(|b| b as i64)).collect();
    rep.boundary2_scan = (0..=caps.1).map(|b| (0..=caps.0).find(|&a| rm(a, b) >= 0.0).map(|a| a as i64)).collect();
    rep.eta = (d > 0.0).then(|| ceil_sqrt(d) - 1);
    rep.eta_scan = (0..=caps.0).find(|&a| rp(a, 0) >= 0.0).map(|a| a as i64);

    if case == DomainCase::WholeSpace {
        let all = space.basis();
        rep.claims.push(claim("J+ kernel = {|n1,0>}", all.iter().filter(|s| s.1 == 0).cloned().collect(), rep.jp_kernel.clone(), true));
        rep.claims.push(claim("J- kernel = {|0,n2>}", all.iter().filter(|s| s.0 == 0).cloned().collect(), rep.jm_kernel.clone(), true));
        rep.claims.push(claim("common null state |0,0>", vec![(0, 0)], rep.common_kernel.clone(), true));
        return Ok(rep);
    }
    let eta = match rep.eta {
        Some(e) if d > 1.0 => e,
        _ => return Ok(rep),
    };
    let z0 = zeta(0);
    if z0 as usize > caps.1 || eta as usize > caps.0 {
        rep.notes.push("zeta1(0) or eta exceeds the caps; nullspace claims skipped".into());
        return Ok(rep);
    }
    let v1 = move |s: State| s.1 as i64 >= ceil_sqrt(d - (s.0 as f64 + 1.0).powi(2));
    let kv = kernels(fam, &u.jp, &u.jm, &v1);
    rep.nullity_consistent &= kv.consistent;
    let v10: Vec<State> = (z0 as usize..=caps.1).map(|b| (0, b)).collect();
    rep.claims.push(claim("V1(0) is J- null", v10, kv.jm.clone(), false));
    let claimed: Vec<State> = (0..=eta as usize).map(|a| (a, zeta(a) as usize)).filter(|s| s.1 <= caps.1).collect();
    let observed: Vec<State> = kv.jp.iter().filter(|s| s.0 as i64 <= eta).cloned().collect();
    rep.claims.push(claim("J+ kernel is {|n1,zeta1(n1)>: n1 <= eta} (eta+1 states)", claimed, observed, true));
    rep.claims.push(claim("|0,zeta1(0)> is a common null state", vec![(0, z0 as usize)], intersect(&kv.jp, &kv.jm), false));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_space, ladder, sectors, LadderKind, LinOp, Mode};
    use crate::higgs::{casimir, higgs_residuals};
    use approx::assert_relative_eq;

    #[test]
    fn h_values() {
        assert_eq!(h_first(1, 1, 0.0).unwrap()((3, 1)), 1.0);
        assert_eq!(h_first(2, 2, 0.0).unwrap()((4, 0)), 1.0);
        assert!(h_first(0, 1, 0.0).is_err());
    }

    #[test]
    fn u11_reduces_to_jordan_schwinger() {
        let sp = build_space(6, 6).unwrap();
        let r = realize_first(sp, &HiggsParams::new(2.0, 0.0), &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let js = LinOp::shift(sp, (1, -1), |(a, b)| crate::fock::re((((a + 1) * b) as f64).sqrt()));
        assert_eq!(r.jp.max_abs_diff(&js).unwrap(), 0.0);
        assert_eq!(r.jm.max_abs_diff(&js.adjoint()).unwrap(), 0.0);
    }

    #[test]
    fn u11_sqrt10_element() {
        let sp = build_space(4, 4).unwrap();
        let r = realize_first(sp, &HiggsParams::new(2.0, 8.0), &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        assert_relative_eq!(r.jp.get((2, 0), (1, 1)).re, 10f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn d11_limits() {
        let sp = build_space(5, 5).unwrap();
        let a12 = LinOp::shift(sp, (-1, 1), |(a, b)| crate::fock::re(((a * (b + 1)) as f64).sqrt()));
        let composed = ladder(sp, Mode::One, LadderKind::Annihilate).compose(&ladder(sp, Mode::Two, LadderKind::Create)).unwrap();
        assert!(a12.max_abs_diff(&composed).unwrap() < 1e-14);
        for c1 in [2.0, -2.0] {
            let r = realize_first(sp, &HiggsParams::new(c1, 0.0), &FirstKindSpec::new(FirstVariant::D11)).unwrap();
            assert_eq!(r.jm.max_abs_diff(&a12).unwrap(), 0.0);
            let w = contained_window(sp, 1, 1);
            assert!(higgs_residuals(&r, &HiggsParams::new(c1, 0.0), &w, 1e-12).unwrap().pass);
        }
    }

    #[test]
    fn chain_solver_examples() {
        let sp = build_space(6, 6).unwrap();
        let secs = sectors(sp, SectorKind::Sum { k: 1, l: 1 }).unwrap();
        let s2 = secs.iter().find(|s| s.value == 2).unwrap();
        let sol = chain_product_solve(1, 1, &HiggsParams::new(2.0, 0.0), 0.0, s2).unwrap();
        for v in sol.fg.iter().flatten() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
        let sol = chain_product_solve(1, 1, &HiggsParams::new(2.0, 8.0), 0.0, s2).unwrap();
        let i = sol.states.iter().position(|s| *s == (1, 1)).unwrap();
        assert_relative_eq!(sol.fg[i].unwrap(), 5.0, epsilon = 1e-13);
        assert!(sol.closes(1e-12));
    }

    #[test]
    fn solu3_matches_recursion_on_all_chains() {
        let p = HiggsParams::new(2.0, 8.0);
        let sp = build_space(10, 10).unwrap();
        for c in chains(sp, (2, -2)) {
            if !c.true_bottom || c.states.len() < 2 {
                continue;
            }
            let sol = solve_chain(Family::First, 2, 2, &p, 0.0, &c).unwrap();
            for (s, fg) in sol.states.iter().zip(&sol.fg) {
                if let Some(v) = fg {
                    assert_relative_eq!(*v, fg_solu3(&p, s.0 as i64, s.1 as i64), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn casimir_first_values() {
        assert_eq!(casimir_first_value(&HiggsParams::new(2.0, 0.0), 0.0, 2), 2.0);
        assert_eq!(casimir_first_value(&HiggsParams::new(2.0, 4.0), 0.0, 2), 6.0);
        assert_eq!(casimir_first_value(&HiggsParams::new(-7.0, 3.0), 0.0, 0), 0.0);
        let p = HiggsParams::new(2.0, 4.0);
        let sp = build_space(3, 3).unwrap();
        let r = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let c = casimir(&r, &p);
        assert_relative_eq!(c.get((1, 1), (1, 1)).re, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn generic_a_reduces_to_u11() {
        let sp = build_space(5, 5).unwrap();
        let p = HiggsParams::new(2.0, 1.0);
        let a = realize_first(sp, &p, &FirstKindSpec::generic_a(0.0)).unwrap();
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        assert_eq!(a.jp.max_abs_diff(&u.jp).unwrap(), 0.0);
        let g = realize_first(sp, &p, &FirstKindSpec::generic_a(0.3)).unwrap();
        let w = contained_window(sp, 1, 1).restrict("n1>=1", |s| s.0 >= 1);
        assert!(higgs_residuals(&g, &p, &w, 1e-9).unwrap().pass);
    }

    #[test]
    fn solu2_partner_equals_solu1_at_alpha_zero() {
        let p = HiggsParams::new(-1.5, 2.5);
        for a in 0..6 {
            for b in 0..6 {
                assert_relative_eq!(fg_solu2(&p, 0.0, a as f64, b as f64), fg_u11(&p, a as f64, b as f64), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn domain_examples() {
        let rep = domain_first(&HiggsParams::new(2.0, 1.0), (6, 6)).unwrap();
        assert_eq!(rep.case, DomainCase::WholeSpace);
        assert!(rep.claims.iter().all(|c| c.holds), "{:?}", rep.claims);
        let rep = domain_first(&HiggsParams::new(-6.0, 1.0), (12, 12)).unwrap();
        assert_eq!(rep.case, DomainCase::Restricted);
        assert_eq!(rep.boundary1[0], 5);
        assert_eq!(rep.boundary1_scan[0], Some(5));
        assert_eq!(rep.eta, Some(4));
        assert!(rep.nullity_consistent);
    }

    #[test]
    fn k11_is_not_unitary_but_satisfies_higgs() {
        let sp = build_space(8, 8).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let r = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::K11)).unwrap();
        assert!(r.adjoint_gap() > 1e-6);
        let w = contained_window(sp, 1, 1);
        assert!(higgs_residuals(&r, &p, &w, 1e-9).unwrap().pass);
        assert!(matches!(
            realize_first(sp, &HiggsParams::new(-6.0, 1.0), &FirstKindSpec::new(FirstVariant::K11)),
            Err(Error::ZeroCoefficient(..))
        ));
    }
}
