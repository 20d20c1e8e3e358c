//! Phase operators: single-mode (Susskind-Glogower), the two-mode phase
//! difference, and the Higgs-algebra operators
//!
//! ```text
//! E+ = 2 (n1+1)^-½ J- [(n2+1)(2C1 + C3 n1 (n2+1))]^-½,   E- = E+†
//! ```
//!
//! built on the first-kind U11. `E+ = exp[i(φ1-φ2)] w(n1, n2)` with `w`
//! evaluated on the ket, and `w = 1` only when C3 = 0 or `d(d-2) = 0`,
//! `d = n1 - n2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{column_residual, FockSpace, LinOp, Mode, SectorBasis, SectorKind, State, Window, C64, ZERO};
use crate::higgs::{HiggsParams, ResidualReport};
use crate::realize_one::{realize_first, FirstKindSpec, FirstVariant};

const I: C64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convention {
    /// `cos = ½(E- + E+)`, `sin = (E- - E+)/(2i)` as printed.
    PaperLiteral,
    /// `sin = (E+ - E-)/(2i)`, matching the single-mode case where the
    /// lowering operator carries `exp(iφ)`.
    LoweringConsistent,
}

#[derive(Clone, Debug)]
pub struct SingleModePhase {
    pub exp_i: LinOp,
    pub exp_minus_i: LinOp,
    pub cos: LinOp,
    pub sin: LinOp,
}

/// `(l(bra) r(ket)) A` entrywise on the support of `A`.
fn scaled(a: &LinOp, l: impl Fn(State) -> f64, r: impl Fn(State) -> f64) -> LinOp {
    let sp = a.space;
    let mut out = a.clone();
    for j in 0..sp.dim() {
        for i in 0..sp.dim() {
            let v = a.matrix[(i, j)];
            if v != ZERO {
                out.matrix[(i, j)] = (l(sp.state(i)) * r(sp.state(j))) * v;
            }
        }
    }
    out
}

/// `A / (l(bra) r(ket))` entrywise on the support of `A`. Dividing a ladder
/// element by its own square roots gives exactly 1.
fn divided(a: &LinOp, l: impl Fn(State) -> f64, r: impl Fn(State) -> f64) -> LinOp {
    let sp = a.space;
    let mut out = a.clone();
    for j in 0..sp.dim() {
        for i in 0..sp.dim() {
            let v = a.matrix[(i, j)];
            if v != ZERO {
                out.matrix[(i, j)] = v / (l(sp.state(i)) * r(sp.state(j)));
            }
        }
    }
    out
}

fn occupation(mode: Mode, s: State) -> usize {
    match mode {
        Mode::One => s.0,
        Mode::Two => s.1,
    }
}

fn cos_sin(e: &LinOp, ed: &LinOp) -> (LinOp, LinOp) {
    let cos = e.add(ed).expect("same space").scale(Complex64::new(0.5, 0.0));
    let sin = e.sub(ed).expect("same space").scale(1.0 / (2.0 * I));
    (cos, sin)
}

/// `exp(iφ) = (n+1)^-½ a`, `exp(-iφ) = a+ (n+1)^-½`, with `cos`, `sin`
/// from `exp(iφ)` and its adjoint.
pub fn single_mode_phase(space: FockSpace, mode: Mode) -> SingleModePhase {
    let a = crate::fock::ladder(space, mode, crate::fock::LadderKind::Annihilate);
    let root = |s: State| ((occupation(mode, s) + 1) as f64).sqrt();
    let exp_i = divided(&a, root, |_| 1.0);
    let exp_minus_i = divided(&a.adjoint(), |_| 1.0, root);
    let (cos, sin) = cos_sin(&exp_i, &exp_minus_i);
    SingleModePhase { exp_i, exp_minus_i, cos, sin }
}

/// `exp[±i(φ1 - φ2)]`.
pub fn phase_difference(space: FockSpace) -> (LinOp, LinOp) {
    let a1 = crate::fock::ladder(space, Mode::One, crate::fock::LadderKind::Annihilate);
    let c2 = crate::fock::ladder(space, Mode::Two, crate::fock::LadderKind::Create);
    let m = a1.compose(&c2).expect("same space");
    let e = divided(&m, |s| ((s.0 + 1) as f64).sqrt(), |s| ((s.1 + 1) as f64).sqrt());
    let ed = e.adjoint();
    (e, ed)
}

/// `w(n1, n2)²`.
pub fn w_squared(p: &HiggsParams, s: State) -> f64 {
    let (a, b) = (s.0 as f64, s.1 as f64);
    (4.0 * p.c1 + p.c3 * (a * a + b * (b + 2.0))) / (4.0 * p.c1 + 2.0 * p.c3 * a * (b + 1.0))
}

#[derive(Clone, Debug)]
pub struct PhaseOps {
    pub eplus: LinOp,
    pub eminus: LinOp,
    pub w_diag: LinOp,
    pub cos: LinOp,
    pub sin: LinOp,
    pub convention: Convention,
}

fn gate(p: &HiggsParams, space: FockSpace) -> Result<()> {
    for s in space.basis() {
        let d = 2.0 * p.c1 + p.c3 * s.0 as f64 * (s.1 + 1) as f64;
        if d <= 0.0 {
            return Err(Error::Domain { n1: s.0, n2: s.1, value: d });
        }
    }
    Ok(())
}

fn finish(eplus: LinOp, eminus: LinOp, w_diag: LinOp, convention: Convention) -> PhaseOps {
    let (cos, sin_lowering) = cos_sin(&eplus, &eminus);
    let sin = match convention {
        Convention::LoweringConsistent => sin_lowering,
        Convention::PaperLiteral => sin_lowering.scale(Complex64::new(-1.0, 0.0)),
    };
    PhaseOps { eplus, eminus, w_diag, cos, sin, convention }
}

/// The phase operators as defined from U11. Requires
/// `2C1 + C3 n1 (n2+1) > 0` on the whole space.
pub fn higgs_phase(space: FockSpace, p: &HiggsParams, convention: Convention) -> Result<PhaseOps> {
    gate(p, space)?;
    let u = realize_first(space, p, &FirstKindSpec::new(FirstVariant::U11))?;
    let den = |s: State| 1.0 / (((s.1 + 1) as f64) * (2.0 * p.c1 + p.c3 * s.0 as f64 * (s.1 + 1) as f64)).sqrt();
    let num = |s: State| 2.0 / ((s.0 + 1) as f64).sqrt();
    let eplus = scaled(&u.jm, num, den);
    let eminus = scaled(&u.jp, den, num);
    let w_diag = LinOp::diag(space, |s| Complex64::new(w_squared(p, s).sqrt(), 0.0));
    Ok(finish(eplus, eminus, w_diag, convention))
}

/// Variant with every nonzero `E+` element replaced by 1, so that the
/// eigenvector action holds by construction.
pub fn exact_shift_phase(space: FockSpace, p: &HiggsParams, convention: Convention) -> Result<PhaseOps> {
    let lit = higgs_phase(space, p, convention)?;
    let one = |op: &LinOp| {
        let mut o = op.clone();
        o.matrix.iter_mut().filter(|v| **v != ZERO).for_each(|v| *v = Complex64::new(1.0, 0.0));
        o
    };
    Ok(finish(one(&lit.eplus), one(&lit.eminus), LinOp::identity(space), convention))
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    /// Checks that must hold under any convention.
    pub residuals: ResidualReport,
    /// `max |<t|E+|s> - 1|` over sector states with `n1 >= 1`.
    pub unit_deviation: f64,
    pub unit_deviation_at: Option<State>,
    /// `||[J3,cos] + i sin||`, `||[J3,sin] - i cos||` under the active
    /// convention; asserted only for LOWERING_CONSISTENT.
    pub cos_sin: (f64, f64),
    pub notes: Vec<String>,
}

/// `<s - (1,-1)|E+|s>`, or `None` when `E+` kills `s` by the ladder.
pub fn eplus_coefficient(ops: &PhaseOps, s: State) -> Option<C64> {
    (s.0 >= 1 && s.1 < ops.eplus.space.n2_max).then(|| ops.eplus.get((s.0 - 1, s.1 + 1), s))
}

pub fn phase_checks(ops: &PhaseOps, j3: &LinOp, sector: &SectorBasis, tol: f64) -> Result<PhaseReport> {
    let space = ops.eplus.space;
    let n = match sector.kind {
        SectorKind::Sum { k: 1, l: 1 } => sector.value as usize,
        _ => return Err(Error::InvalidParam("phase checks need a SUM(1,1) sector".into())),
    };
    if n > space.n1_max || n > space.n2_max {
        return Err(Error::InvalidParam(format!("sector N = {n} is not contained in the caps")));
    }
    let w = Window::sector(sector);
    let mut rep = ResidualReport::new(w.label.clone(), tol);
    rep.push("[J3,E+]+E+", column_residual(&j3.commutator(&ops.eplus)?.add(&ops.eplus)?, &w)?);
    rep.push("[J3,E-]-E-", column_residual(&j3.commutator(&ops.eminus)?.sub(&ops.eminus)?, &w)?);
    rep.push("E- - E+^dag", ops.eminus.max_abs_diff(&ops.eplus.adjoint())?);
    rep.push("E+|0,N>", ops.eplus.column_norm(space.index(0, n).unwrap()));
    rep.push("E-|N,0>", ops.eminus.column_norm(space.index(n, 0).unwrap()));

    let mut unit_deviation: f64 = 0.0;
    let mut unit_deviation_at = None;
    for s in sector.members.iter().filter(|s| s.0 >= 1) {
        let d = (eplus_coefficient(ops, *s).unwrap_or(ZERO) - 1.0).norm();
        if d > unit_deviation {
            unit_deviation = d;
            unit_deviation_at = Some(*s);
        }
    }

    let c1 = column_residual(&j3.commutator(&ops.cos)?.add(&ops.sin.scale(I))?, &w)?;
    let c2 = column_residual(&j3.commutator(&ops.sin)?.sub(&ops.cos.scale(I))?, &w)?;
    let mut notes = Vec::new();
    match ops.convention {
        Convention::LoweringConsistent => {
            rep.push("[J3,cos]+i sin", c1);
            rep.push("[J3,sin]-i cos", c2);
        }
        Convention::PaperLiteral => notes.push(format!(
            "PAPER_LITERAL cos/sin: ||[J3,cos]+i sin|| = {c1:e}, ||[J3,sin]-i cos|| = {c2:e}"
        )),
    }
    if unit_deviation > tol {
        notes.push(format!("E+ coefficient deviates from 1 by {unit_deviation:e} at {unit_deviation_at:?}"));
    }

    let m = Window::margin(space, 1);
    for (label, mode) in [("1", Mode::One), ("2", Mode::Two)] {
        let sm = single_mode_phase(space, mode);
        let num = crate::fock::ladder(space, mode, crate::fock::LadderKind::Number);
        rep.push(format!("[n{label},cos]+i sin"), column_residual(&num.commutator(&sm.cos)?.add(&sm.sin.scale(I))?, &m)?);
        rep.push(format!("[n{label},sin]-i cos"), column_residual(&num.commutator(&sm.sin)?.sub(&sm.cos.scale(I))?, &m)?);
    }
    Ok(PhaseReport { residuals: rep, unit_deviation, unit_deviation_at, cos_sin: (c1, c2), notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_space, sectors, LadderKind};
    use crate::realize_one::fg_u11;
    use approx::assert_relative_eq;

    #[test]
    fn single_mode_action() {
        let sp = build_space(6, 2).unwrap();
        let ph = single_mode_phase(sp, Mode::One);
        assert_eq!(ph.exp_i.column_norm(sp.index(0, 1).unwrap()), 0.0);
        assert_eq!(ph.exp_minus_i.get((4, 1), (3, 1)).re, 1.0);
        let id = LinOp::identity(sp);
        let m = Window::margin(sp, 1);
        let up = ph.exp_minus_i.adjoint().compose(&ph.exp_minus_i).unwrap();
        assert_eq!(crate::fock::window_residual(&up, &id, &m).unwrap(), 0.0);
        let down = ph.exp_minus_i.compose(&ph.exp_minus_i.adjoint()).unwrap();
        let proj = LinOp::diag(sp, |s| if s.0 == 0 { ZERO } else { Complex64::new(1.0, 0.0) });
        assert_eq!(crate::fock::window_residual(&down, &proj, &Window::full(sp)).unwrap(), 0.0);
    }

    #[test]
    fn difference_operator() {
        let sp = build_space(5, 5).unwrap();
        let (e, ed) = phase_difference(sp);
        assert_eq!(e.get((1, 1), (2, 0)).re, 1.0);
        assert_eq!(e.column_norm(sp.index(0, 5).unwrap()), 0.0);
        assert_eq!(ed.max_abs_diff(&e.adjoint()).unwrap(), 0.0);
    }

    #[test]
    fn su2_limit_has_unit_coefficients() {
        let sp = build_space(6, 6).unwrap();
        let p = HiggsParams::new(2.0, 0.0);
        let ops = higgs_phase(sp, &p, Convention::LoweringConsistent).unwrap();
        let (e, _) = phase_difference(sp);
        let w = Window::margin(sp, 1);
        assert!(crate::fock::window_residual(&ops.eplus, &e, &w).unwrap() < 1e-14);
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let sec = sectors(sp, SectorKind::Sum { k: 1, l: 1 }).unwrap().into_iter().find(|s| s.value == 4).unwrap();
        let rep = phase_checks(&ops, &u.j3, &sec, 1e-10).unwrap();
        assert!(rep.residuals.pass, "{:?}", rep.residuals);
        assert!(rep.unit_deviation < 1e-14);
    }

    #[test]
    fn w_at_three_zero() {
        let sp = build_space(6, 6).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let ops = higgs_phase(sp, &p, Convention::PaperLiteral).unwrap();
        assert_relative_eq!(ops.eplus.get((2, 1), (3, 0)).re, (10.0f64 / 7.0).sqrt(), epsilon = 1e-14);
        let (e, _) = phase_difference(sp);
        let f = e.compose(&ops.w_diag).unwrap();
        assert!(ops.eplus.max_abs_diff(&f).unwrap() < 1e-14);
        let g = ops.w_diag.compose(&e.adjoint()).unwrap();
        assert!(ops.eminus.max_abs_diff(&g).unwrap() < 1e-14);
        assert_relative_eq!(w_squared(&p, (3, 0)), 80.0 / 56.0);
        assert_relative_eq!(4.0 * fg_u11(&p, 3.0, 0.0) / (2.0 * p.c1 + 3.0 * p.c3), 80.0 / 56.0);
    }

    #[test]
    fn conventions_differ_in_sign() {
        let sp = build_space(6, 6).unwrap();
        let p = HiggsParams::new(2.0, 8.0);
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let sec = sectors(sp, SectorKind::Sum { k: 1, l: 1 }).unwrap().into_iter().find(|s| s.value == 3).unwrap();
        let good = phase_checks(&higgs_phase(sp, &p, Convention::LoweringConsistent).unwrap(), &u.j3, &sec, 1e-10).unwrap();
        assert!(good.residuals.pass);
        assert!(good.cos_sin.0 < 1e-10 && good.cos_sin.1 < 1e-10);
        let lit = phase_checks(&higgs_phase(sp, &p, Convention::PaperLiteral).unwrap(), &u.j3, &sec, 1e-10).unwrap();
        assert!(lit.cos_sin.0 > 0.1);
        assert!(lit.residuals.pass);
        assert_relative_eq!(lit.unit_deviation, (10.0f64 / 7.0).sqrt() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gating_and_exact_shift() {
        let sp = build_space(4, 4).unwrap();
        assert!(higgs_phase(sp, &HiggsParams::new(-1.0, 8.0), Convention::PaperLiteral).unwrap_err().is_domain());
        let p = HiggsParams::new(2.0, 8.0);
        let ex = exact_shift_phase(sp, &p, Convention::LoweringConsistent).unwrap();
        let (e, _) = phase_difference(sp);
        assert_eq!(ex.eplus.max_abs_diff(&e).unwrap(), 0.0);
        let _ = crate::fock::ladder(sp, Mode::One, LadderKind::Number);
    }
}
