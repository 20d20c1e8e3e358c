//! Second-kind (SU(1,1)-like) two-boson realizations.
//!
//! ```text
//! J+ = f(n) (a1+)^k (a2+)^l,   J- = a1^k a2^l g(n),   J3 = n1/(2k) + n2/(2l) + β
//! ```
//!
//! (1,1), β = ½: `f g = -(1/8){4C1 + C3(n1² + n2² - 1)}`. Sectors are the
//! DIFF classes `n1 - n2 = const`, infinite upwards, so identities are checked
//! on `margin(k)` windows.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{self, assemble, j3_op, solve_chain, ChainSolution, Family, RadicandPolicy, Style};
use crate::domain::{ceil_sqrt, claim, intersect, kernels, DomainCase, DomainReport};
use crate::error::{Error, Result};
use crate::fock::{Chain, FockSpace, State};
use crate::higgs::{HiggsParams, Realization, RealizationKind};
use crate::realize_one::x_pm;
use crate::special::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SecondVariant {
    U11,
    D11,
    K11,
    U22,
    D22,
    /// Unitary (1,1) with arbitrary β, as printed.
    GenericB,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondKindSpec {
    pub order: (usize, usize),
    pub variant: SecondVariant,
    pub beta: f64,
    pub policy: RadicandPolicy,
}

impl SecondKindSpec {
    pub fn new(variant: SecondVariant) -> Self {
        let order = match variant {
            SecondVariant::U22 | SecondVariant::D22 => (2, 2),
            _ => (1, 1),
        };
        SecondKindSpec { order, variant, beta: 0.5, policy: RadicandPolicy::Strict }
    }

    pub fn generic_b(beta: f64) -> Self {
        SecondKindSpec { beta, ..Self::new(SecondVariant::GenericB) }
    }

    pub fn with_policy(mut self, policy: RadicandPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.variant {
            SecondVariant::GenericB => self.order == (1, 1),
            SecondVariant::U22 | SecondVariant::D22 => self.order == (2, 2) && self.beta == 0.5,
            _ => self.order == (1, 1) && self.beta == 0.5,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!("{:?} is inconsistent with order {:?}, beta {}", self.variant, self.order, self.beta)))
        }
    }
}

/// `f g` of the unitary (1,1) family with β = ½.
pub fn fg_u11_second(p: &HiggsParams, n1: f64, n2: f64) -> f64 {
    -(4.0 * p.c1 + p.c3 * (n1 * n1 + n2 * n2 - 1.0)) / 8.0
}

/// First (1,1) solution for general β; NaN at n1 = 0 unless β = ½.
pub fn fg_su11_solu1(p: &HiggsParams, beta: f64, n1: f64, n2: f64) -> f64 {
    if n1 == 0.0 && beta == 0.5 {
        return fg_u11_second(p, n1, n2);
    }
    -(n1 + 2.0 * beta - 1.0) / (8.0 * n1)
        * (4.0 * p.c1 + p.c3 * (n1 * (n1 + 4.0 * beta - 2.0) + n2 * n2 + 4.0 * beta * (beta - 1.0)))
}

/// The (2,2) product exactly as printed. It does not solve the difference
/// equation; the realizations use [`chain::telescoped_fg`] instead.
pub fn fg_su11_fg3_printed(p: &HiggsParams, n1: i64, n2: i64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let x1m = x_pm(1.0, false, n1);
    let x5m = x_pm(5.0, false, n1);
    let x3p = x_pm(3.0, true, n1);
    (a + x1m / 2.0) * (b + 2.0 - x5m / 2.0)
        * (16.0 * p.c1 + p.c3 * (x1m * (a + 3.0) + a * a + b * (b + 4.0 + x3p) + 2.0 * (2.0 - x3p)))
        / (128.0 * (a - 1.0) * a * (b - 1.0) * b)
}

pub fn realize_second(space: FockSpace, p: &HiggsParams, spec: &SecondKindSpec) -> Result<Realization> {
    spec.validate()?;
    let (k, l) = spec.order;
    let beta = spec.beta;
    if spec.variant == SecondVariant::K11 && p.c3 == 0.0 {
        return Err(Error::InvalidParam("K11 needs C3 != 0".into()));
    }
    let fg: Box<dyn Fn(State) -> f64> = match spec.variant {
        SecondVariant::U11 | SecondVariant::D11 | SecondVariant::K11 => {
            Box::new(|s: State| fg_u11_second(p, s.0 as f64, s.1 as f64))
        }
        SecondVariant::GenericB => Box::new(move |s: State| fg_su11_solu1(p, beta, s.0 as f64, s.1 as f64)),
        SecondVariant::U22 | SecondVariant::D22 => {
            Box::new(move |s: State| chain::telescoped_fg(Family::Second, k, l, p, beta, s))
        }
    };
    let style = match spec.variant {
        SecondVariant::U11 | SecondVariant::U22 | SecondVariant::GenericB => Style::Unitary,
        SecondVariant::D11 | SecondVariant::D22 => Style::Dyson,
        SecondVariant::K11 => Style::Constrained,
    };
    let lad = assemble(Family::Second, space, k, l, p, &*fg, style, spec.policy)?;
    Ok(Realization {
        jp: lad.jp,
        jm: lad.jm,
        j3: j3_op(Family::Second, space, k, l, beta),
        kind: RealizationKind::Second,
        order: (k, l),
        variant: format!("{:?}", spec.variant),
        shift: beta,
    })
}

/// Brute-force product along one ladder chain of step `(k, l)`.
pub fn chain_product_solve_second(k: usize, l: usize, p: &HiggsParams, beta: f64, chain: &Chain) -> Result<ChainSolution> {
    solve_chain(Family::Second, k, l, p, beta, chain)
}

/// `(1/64)(M-1)(M+1)[8C1 + C3(M-1)(M+1)]`, the β = ½ Casimir on DIFF sector `M`.
pub fn casimir_second_value(p: &HiggsParams, m: i64) -> f64 {
    let t = ((m - 1) * (m + 1)) as f64;
    t * (8.0 * p.c1 + p.c3 * t) / 64.0
}

/// Constrained coefficient from the log-Gamma closed form, with
/// `M = m_sign (n1 - n2)` and the arbitrary function of M set to zero.
pub fn k11_closed_form_second(p: &HiggsParams, s: State, m_sign: f64) -> Option<Complex64> {
    let n = (s.0 + s.1) as f64;
    let m = m_sign * (s.0 as f64 - s.1 as f64);
    let root = Complex64::new(-8.0 * p.c1 / p.c3 - (m * m - 2.0), 0.0).sqrt();
    let om = |k: f64, x: f64, sg: f64| ln_gamma((k + x + sg * root) / 4.0);
    let par = if s.0 % 2 == 0 { 1.0 } else { -1.0 };
    let branch = Complex64::new(p.c3, 0.0).ln() + Complex64::new(0.0, std::f64::consts::PI);
    let inner = -om(2.0, -m, -1.0)? + om(4.0, -m, -1.0)? - om(2.0, -m, 1.0)? + om(4.0, -m, 1.0)?
        + par * (om(2.0, n, -1.0)? - om(4.0, n, -1.0)? + om(2.0, n, 1.0)? - om(4.0, n, 1.0)?)
        + 0.5 * branch * (1.0 - par);
    let v = (-par * inner).exp();
    (v.re.is_finite() && v.im.is_finite()).then_some(v)
}

/// Domain and nullspace analysis of the second-kind U11.
pub fn domain_second(p: &HiggsParams, caps: (usize, usize)) -> Result<DomainReport> {
    let space = FockSpace { n1_max: caps.0, n2_max: caps.1 };
    let fam = Family::Second;
    let r = |a: usize, b: usize| fg_u11_second(p, a as f64, b as f64);
    let admissible: Vec<State> = space
        .basis()
        .into_iter()
        .filter(|&s| {
            let up = space.shifted(s, (1, 1)).is_none() || r(s.0 + 1, s.1 + 1) >= 0.0;
            let dn = space.shifted(s, (-1, -1)).is_none() || r(s.0, s.1) >= 0.0;
            up && dn
        })
        .collect();
    let radicand_set: Vec<State> = space.basis().into_iter().filter(|&(a, b)| r(a, b) >= 0.0).collect();
    let case = if admissible.len() == space.dim() {
        DomainCase::WholeSpace
    } else if p.c3 < 0.0 {
        DomainCase::Restricted
    } else {
        DomainCase::Finite
    };

    let u = realize_second(space, p, &SecondKindSpec::new(SecondVariant::U11).with_policy(RadicandPolicy::Complex))?;
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

    if case == DomainCase::WholeSpace {
        let claimed = space.basis().into_iter().filter(|s| s.0 == 0 || s.1 == 0).collect();
        rep.claims.push(claim("J- kernel = {|0,n2>} u {|n1,0>}", claimed, rep.jm_kernel.clone(), true));
    }
    if p.c3 >= 0.0 {
        rep.notes.push("C3 >= 0: outside the regime of the kappa/lambda formulas; scan only".into());
        return Ok(rep);
    }
    let d = 1.0 - 4.0 * p.c1 / p.c3;
    let kappa = |x: usize| ceil_sqrt(d - (x as f64).powi(2));
    rep.boundary1 = (0..=caps.0).map(kappa).collect();
    rep.boundary2 = (0..=caps.1).map(kappa).collect();
    rep.boundary1_scan = (0..=caps.0).map(|a| (0..=caps.1).find(|&b| r(a, b) >= 0.0).map(|b| b as i64)).collect();
    rep.boundary2_scan = (0..=caps.1).map(|b| (0..=caps.0).find(|&a| r(a, b) >= 0.0).map(|a| a as i64)).collect();
    rep.eta = (d > 0.0).then(|| ceil_sqrt(d) - 1);
    rep.eta_scan = rep.boundary1_scan.iter().rposition(|z| *z != Some(0)).map(|a| a as i64);

    let lam = match rep.eta {
        Some(e) if d > 1.0 && case == DomainCase::Restricted => e,
        _ => return Ok(rep),
    };
    let k0 = kappa(0);
    if k0 as usize > caps.1 || lam as usize > caps.0 {
        rep.notes.push("kappa1(0) or lambda exceeds the caps; nullspace claims skipped".into());
        return Ok(rep);
    }
    let v1 = move |s: State| s.1 as i64 >= ceil_sqrt(d - (s.0 as f64).powi(2));
    let kv = kernels(fam, &u.jp, &u.jm, &v1);
    rep.nullity_consistent &= kv.consistent;
    let v10: Vec<State> = (k0 as usize..=caps.1).map(|b| (0, b)).collect();
    rep.claims.push(claim("V1(0) is J- null", v10, kv.jm.clone(), false));
    let claimed: Vec<State> = (1..=lam as usize).map(|a| (a, kappa(a) as usize)).filter(|s| s.1 <= caps.1).collect();
    let observed: Vec<State> = kv.jm.iter().filter(|s| s.0 >= 1 && s.0 as i64 <= lam).cloned().collect();
    rep.claims.push(claim("J- kernel is {|n1,kappa1(n1)>: 1 <= n1 <= lambda} (lambda states)", claimed, observed, true));
    rep.claims.push(claim("J+ and J- have no common null state", vec![], intersect(&kv.jp, &kv.jm), true));
    Ok(rep)
}
