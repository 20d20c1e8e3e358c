//! Diagonal similarity transformations between nonunitary and unitary
//! (1,1) realizations, `S B_nu(J) S⁻¹ = B_u(J)`.
//!
//! S1 and S2 carry the Dyson forms (g = 1) to the unitary ones and follow
//! from `S(n)² = S(prev)² / fg(n)` along each ladder chain. For the
//! constrained forms the ratio is `sigma(n) / sigma(prev) = sqrt(fg(n)) / f(n)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{constrained_coefficients, Family};
use crate::error::{Error, Result};
use crate::fock::{chains, column_residual, FockSpace, LinOp, State, Window, C64, ZERO};
use crate::higgs::{HiggsParams, Realization, ResidualReport};
use crate::realize_one::fg_u11;
use crate::realize_two::fg_u11_second;

pub use crate::special::pochhammer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flavor {
    S1,
    S2,
    /// Printed closed form `sqrt(8 / (4C1 + C3[n1² + n2(n2+2)]))`.
    Sbar1,
    /// Printed closed form `sqrt(-8 / (4C1 + C3(n1² + n2² - 1)))`.
    Sbar2,
    /// Constrained-to-unitary transform from its recursion, first kind.
    Sbar1Rec,
    Sbar2Rec,
}

impl Flavor {
    pub fn family(&self) -> Family {
        match self {
            Flavor::S1 | Flavor::Sbar1 | Flavor::Sbar1Rec => Family::First,
            _ => Family::Second,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDiag {
    pub space: FockSpace,
    pub flavor: Flavor,
    /// Diagonal entries by basis index; the first state of every chain is
    /// normalized to 1 for the recursive flavors.
    pub values: Vec<C64>,
}

fn fg_of(fam: Family, p: &HiggsParams, s: State) -> f64 {
    match fam {
        Family::First => fg_u11(p, s.0 as f64, s.1 as f64),
        Family::Second => fg_u11_second(p, s.0 as f64, s.1 as f64),
    }
}

fn csqrt(x: f64) -> C64 {
    Complex64::new(x, 0.0).sqrt()
}

pub fn similarity_diag(flavor: Flavor, p: &HiggsParams, space: FockSpace) -> Result<SimilarityDiag> {
    let fam = flavor.family();
    let step = fam.step(1, 1);
    let fg = |s: State| fg_of(fam, p, s);
    let mut values = vec![ZERO; space.dim()];
    let idx = |s: State| space.index(s.0, s.1).unwrap();
    match flavor {
        Flavor::Sbar1 | Flavor::Sbar2 => {
            for s in space.basis() {
                let x = fg(s);
                if x == 0.0 {
                    return Err(Error::Singular(s.0, s.1));
                }
                values[idx(s)] = csqrt(1.0 / x);
            }
        }
        Flavor::S1 | Flavor::S2 => {
            for ch in chains(space, step) {
                let mut sq = 1.0;
                for (i, s) in ch.states.iter().enumerate() {
                    if i > 0 {
                        let x = fg(*s);
                        if x == 0.0 {
                            return Err(Error::ZeroCoefficient(s.0, s.1));
                        }
                        sq /= x;
                    }
                    values[idx(*s)] = csqrt(sq);
                }
            }
        }
        Flavor::Sbar1Rec | Flavor::Sbar2Rec => {
            let f = constrained_coefficients(space, step, p, &fg)?;
            for ch in chains(space, step) {
                let mut v = Complex64::new(1.0, 0.0);
                for (i, s) in ch.states.iter().enumerate() {
                    if i > 0 {
                        let fi = f[idx(*s)];
                        if fi == 0.0 {
                            return Err(Error::ZeroCoefficient(s.0, s.1));
                        }
                        v *= csqrt(fg(*s)) / fi;
                    }
                    values[idx(*s)] = v;
                }
            }
        }
    }
    Ok(SimilarityDiag { space, flavor, values })
}

impl SimilarityDiag {
    pub fn at(&self, s: State) -> C64 {
        self.values[self.space.index(s.0, s.1).expect("state in space")]
    }

    pub fn op(&self) -> LinOp {
        LinOp::diag(self.space, |s| self.at(s))
    }

    /// Copy with every chain multiplied by `c(first state of the chain)`.
    pub fn rescale_chains(&self, c: impl Fn(State) -> f64) -> SimilarityDiag {
        let mut out = self.clone();
        for ch in chains(self.space, self.flavor.family().step(1, 1)) {
            let k = c(ch.states[0]);
            for s in &ch.states {
                out.values[self.space.index(s.0, s.1).unwrap()] *= k;
            }
        }
        out
    }

    fn check_invertible(&self, w: &Window) -> Result<()> {
        for s in w.states() {
            let v = self.at(s);
            if v == ZERO || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Singular(s.0, s.1));
            }
        }
        Ok(())
    }
}

/// `L A R` for diagonal `L`, `R` given entrywise. Only nonzero entries of
/// `A` are touched, so singular factors off its support do no harm.
fn sandwich(a: &LinOp, left: impl Fn(State) -> C64, right: impl Fn(State) -> C64) -> LinOp {
    let sp = a.space;
    let mut out = a.clone();
    for j in 0..sp.dim() {
        for i in 0..sp.dim() {
            let v = a.matrix[(i, j)];
            if v != ZERO {
                out.matrix[(i, j)] = left(sp.state(i)) * v * right(sp.state(j));
            }
        }
    }
    out
}

/// Residuals of `S Rnu(Jμ) S⁻¹ - Ru(Jμ)` on `w`.
pub fn check_conjugation(s: &SimilarityDiag, rnu: &Realization, ru: &Realization, w: &Window, tol: f64) -> Result<ResidualReport> {
    if rnu.space() != s.space || ru.space() != s.space {
        return Err(Error::SpaceMismatch);
    }
    s.check_invertible(w)?;
    let mut rep = ResidualReport::new(w.label.clone(), tol);
    for ((name, a), (_, b)) in rnu.ops().into_iter().zip(ru.ops()) {
        let c = sandwich(a, |t| s.at(t), |t| 1.0 / s.at(t));
        rep.push(format!("S {name} S^-1 - {name}(unitary)"), column_residual(&c.sub(b)?, w)?);
    }
    Ok(rep)
}

/// Residuals of `U⁻¹ Rnu(J±)† U - Rnu(J∓)` and the J3 analogue, `U = S†S`.
pub fn check_unitarization(s: &SimilarityDiag, rnu: &Realization, w: &Window, tol: f64) -> Result<ResidualReport> {
    if rnu.space() != s.space {
        return Err(Error::SpaceMismatch);
    }
    s.check_invertible(w)?;
    let u = |t: State| Complex64::new(s.at(t).norm_sqr(), 0.0);
    let mut rep = ResidualReport::new(w.label.clone(), tol);
    for (name, a, b) in [("J+", &rnu.jp, ("J-", &rnu.jm)), ("J-", &rnu.jm, ("J+", &rnu.jp)), ("J3", &rnu.j3, ("J3", &rnu.j3))] {
        let c = sandwich(&a.adjoint(), |t| 1.0 / u(t), u);
        rep.push(format!("U^-1 {name}^dag U - {}", b.0), column_residual(&c.sub(b.1)?, w)?);
    }
    Ok(rep)
}

/// Endpoints of chain links whose recursion ratio `S(n)² / S(prev)²` is
/// negative, i.e. states no real S1/S2 can reach.
pub fn nonunitarizable_states(fam: Family, p: &HiggsParams, space: FockSpace) -> Vec<State> {
    let mut out = Vec::new();
    for ch in chains(space, fam.step(1, 1)) {
        for w in ch.states.windows(2) {
            if fg_of(fam, p, w[1]) < 0.0 {
                out.extend_from_slice(w);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `S1²` from the closed form. `paired = false` repeats `(Ż+)` as printed;
/// `paired = true` uses `(Ż+)(Ż-)`. Needs `n1 >= 1`.
pub fn s1_closed_sq(p: &HiggsParams, s: State, paired: bool) -> C64 {
    let n = (s.0 + s.1) as f64;
    let root = csqrt(-8.0 * p.c1 / p.c3 - (n * n + 2.0 * n - 1.0));
    let zp = (3.0 - n + root) / 2.0;
    let zm = if paired { (3.0 - n - root) / 2.0 } else { zp };
    let k = s.0 - 1;
    Complex64::new(p.c3 / 4.0, 0.0).powf(1.0 - s.0 as f64) / (pochhammer(zp, k) * pochhammer(zm, k))
}

/// `S2²` from the closed form, with the `(Z̈+)(Z̈-)` pair when `paired`.
pub fn s2_closed_sq(p: &HiggsParams, s: State, paired: bool) -> C64 {
    let m = s.0 as f64 - s.1 as f64;
    let root = csqrt(-8.0 * p.c1 / p.c3 - (m * m - 2.0));
    let zp = (4.0 - m + root) / 2.0;
    let zm = if paired { (4.0 - m - root) / 2.0 } else { zp };
    let k = s.0 - 1;
    let sign = if s.0 % 2 == 0 { -1.0 } else { 1.0 };
    sign * Complex64::new(p.c3 / 4.0, 0.0).powf(1.0 - s.0 as f64) / (pochhammer(zp, k) * pochhammer(zm, k))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub flavor: Flavor,
    pub paired: bool,
    /// Largest `|q / q_0 - 1|` over chains, `q = S²(recursion) / S²(closed)`.
    pub spread: f64,
    pub points: usize,
    pub pass: bool,
}

/// Compares the recursion with the closed form up to the per-chain
/// constant, on chain points with `n1 >= 1` where both are finite.
pub fn closed_form_check(s: &SimilarityDiag, p: &HiggsParams, paired: bool, tol: f64) -> Result<ClosedFormCheck> {
    let closed: fn(&HiggsParams, State, bool) -> C64 = match s.flavor {
        Flavor::S1 => s1_closed_sq,
        Flavor::S2 => s2_closed_sq,
        _ => return Err(Error::InvalidParam("closed forms exist for S1 and S2 only".into())),
    };
    let mut spread: f64 = 0.0;
    let mut points = 0;
    for ch in chains(s.space, s.flavor.family().step(1, 1)) {
        let mut q0: Option<C64> = None;
        for t in ch.states.iter().filter(|t| t.0 >= 1) {
            let c = closed(p, *t, paired);
            let v = s.at(*t);
            let q = v * v / c;
            if !(q.re.is_finite() && q.im.is_finite()) || c.norm() == 0.0 {
                continue;
            }
            points += 1;
            match q0 {
                None => q0 = Some(q),
                Some(r) => spread = spread.max((q / r - 1.0).norm()),
            }
        }
    }
    Ok(ClosedFormCheck { flavor: s.flavor, paired, spread, points, pass: spread <= tol && points > 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_space;
    use crate::realize_one::{contained_window, realize_first, FirstKindSpec, FirstVariant};
    use crate::realize_two::{realize_second, SecondKindSpec, SecondVariant};
    use approx::assert_relative_eq;

    #[test]
    fn su2_limit_is_trivial() {
        let sp = build_space(5, 5).unwrap();
        let p = HiggsParams::new(2.0, 0.0);
        let sb = similarity_diag(Flavor::Sbar1, &p, sp).unwrap();
        assert!(sb.values.iter().all(|v| (*v - 1.0).norm() < 1e-15));
        let s1 = similarity_diag(Flavor::S1, &p, sp).unwrap();
        assert!(s1.values.iter().all(|v| (*v - 1.0).norm() < 1e-15));
        let d = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::D11)).unwrap();
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let w = contained_window(sp, 1, 1);
        assert!(check_conjugation(&s1, &d, &u, &w, 1e-14).unwrap().max() < 1e-14);
    }

    #[test]
    fn s1_conjugates_dyson_to_unitary() {
        let sp = build_space(10, 10).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let s1 = similarity_diag(Flavor::S1, &p, sp).unwrap();
        let d = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::D11)).unwrap();
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let w = contained_window(sp, 1, 1);
        assert!(check_conjugation(&s1, &d, &u, &w, 1e-8).unwrap().pass);
        assert!(check_unitarization(&s1, &d, &w, 1e-8).unwrap().pass);
        let scaled = s1.rescale_chains(|s| 1.0 + s.1 as f64);
        let a = check_conjugation(&scaled, &d, &u, &w, 1e-8).unwrap();
        assert!(a.pass);
    }

    #[test]
    fn sbar_rec_works_where_printed_form_does_not() {
        let sp = build_space(8, 8).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let k = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::K11)).unwrap();
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let w = contained_window(sp, 1, 1);
        let rec = similarity_diag(Flavor::Sbar1Rec, &p, sp).unwrap();
        assert!(check_conjugation(&rec, &k, &u, &w, 1e-8).unwrap().pass);
        let printed = similarity_diag(Flavor::Sbar1, &p, sp).unwrap();
        assert!(!check_conjugation(&printed, &k, &u, &w, 1e-8).unwrap().pass);
    }

    #[test]
    fn s2_dyson_second_kind() {
        let sp = build_space(8, 8).unwrap();
        let p = HiggsParams::new(-2.0, -8.0);
        let s2 = similarity_diag(Flavor::S2, &p, sp).unwrap();
        let d = realize_second(sp, &p, &SecondKindSpec::new(SecondVariant::D11)).unwrap();
        let u = realize_second(sp, &p, &SecondKindSpec::new(SecondVariant::U11)).unwrap();
        let w = Window::margin(sp, 1);
        assert!(check_conjugation(&s2, &d, &u, &w, 1e-8).unwrap().pass);
        assert!(check_unitarization(&s2, &d, &w, 1e-8).unwrap().pass);
    }

    #[test]
    fn closed_forms_need_the_pair() {
        let sp = build_space(10, 10).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let s1 = similarity_diag(Flavor::S1, &p, sp).unwrap();
        assert!(closed_form_check(&s1, &p, true, 1e-9).unwrap().pass);
        assert!(!closed_form_check(&s1, &p, false, 1e-9).unwrap().pass);
        let p = HiggsParams::new(-2.0, -8.0);
        let s2 = similarity_diag(Flavor::S2, &p, sp).unwrap();
        assert!(closed_form_check(&s2, &p, true, 1e-9).unwrap().pass);
        assert!(!closed_form_check(&s2, &p, false, 1e-9).unwrap().pass);
    }

    #[test]
    fn negative_squares_flag_the_inadmissible_states() {
        let sp = build_space(6, 6).unwrap();
        let p = HiggsParams::new(-5.5, 1.0);
        let s1 = similarity_diag(Flavor::S1, &p, sp).unwrap();
        assert!(s1.at((1, 2)).im.abs() > 0.0);
        let bad = nonunitarizable_states(Family::First, &p, sp);
        let dom = crate::realize_one::domain_first(&p, (6, 6)).unwrap();
        let inadmissible: Vec<State> = sp.basis().into_iter().filter(|s| !dom.admissible.contains(s)).collect();
        assert_eq!(bad, inadmissible);
        assert_relative_eq!(pochhammer(Complex64::new(3.0, 0.0), 4).re, 360.0);
    }
}
