//! The cubic Higgs algebra
//!
//! ```text
//! [J3, J±] = ±J±,   [J+, J-] = C1 J3 + C3 J3^3
//! C = ½(J+J- + J-J+) + (½C1 + ¼C3) J3² + ¼C3 J3⁴
//! ```
//!
//! plus residual checks for candidate realizations and the finite irreps
//! `|j m>` with `<j m+1|J+|j m> = sqrt(c(j) - c(m))`,
//! `c(x) = ½C1 x(x+1) + ¼C3 x²(x+1)²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{column_residual, re, FockSpace, LinOp, State, Window, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HiggsParams {
    pub c1: f64,
    pub c3: f64,
    /// General PAMA coefficients `C0..Cn` of `[J+, J-] = Σ Ci J3^i`.
    pub poly: Option<Vec<f64>>,
}

impl HiggsParams {
    pub fn new(c1: f64, c3: f64) -> Self {
        HiggsParams { c1, c3, poly: None }
    }

    pub fn pama(coeffs: Vec<f64>) -> Self {
        let get = |i: usize| coeffs.get(i).copied().unwrap_or(0.0);
        HiggsParams { c1: get(1), c3: get(3), poly: Some(coeffs) }
    }

    pub fn coeffs(&self) -> Vec<f64> {
        self.poly.clone().unwrap_or_else(|| vec![0.0, self.c1, 0.0, self.c3])
    }

    /// Right side of `[J+, J-]` at `J3 = h`.
    pub fn structure(&self, h: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    /// `c(x) = ½C1 x(x+1) + ¼C3 x²(x+1)²`, defined for any real `x`.
    pub fn casimir_at(&self, x: f64) -> f64 {
        let t = x * (x + 1.0);
        0.5 * self.c1 * t + 0.25 * self.c3 * t * t
    }

    pub fn is_degenerate(&self) -> bool {
        self.c1 == 0.0 && self.c3 == 0.0
    }
}

pub fn casimir_value(p: &HiggsParams, jtilde: f64) -> f64 {
    p.casimir_at(jtilde)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RealizationKind {
    First,
    Second,
    Irrep,
    Custom,
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub jp: LinOp,
    pub jm: LinOp,
    pub j3: LinOp,
    pub kind: RealizationKind,
    pub order: (usize, usize),
    pub variant: String,
    /// α for the first kind, β for the second kind.
    pub shift: f64,
}

impl Realization {
    pub fn space(&self) -> FockSpace {
        self.jp.space
    }

    pub fn ops(&self) -> [(&'static str, &LinOp); 3] {
        [("J+", &self.jp), ("J-", &self.jm), ("J3", &self.j3)]
    }

    /// Largest entry of `J+† - J-`.
    pub fn adjoint_gap(&self) -> f64 {
        self.jp.adjoint().max_abs_diff(&self.jm).expect("same space")
    }

    /// True when J± connect only states with equal `inv`.
    pub fn preserves(&self, inv: impl Fn(State) -> i64) -> bool {
        let sp = self.space();
        [&self.jp, &self.jm].iter().all(|op| {
            (0..sp.dim()).all(|j| {
                (0..sp.dim()).all(|i| op.matrix[(i, j)] == ZERO || inv(sp.state(i)) == inv(sp.state(j)))
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Residual {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Residual { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub residuals: Vec<Residual>,
    pub tolerance: f64,
    pub window: String,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(window: impl Into<String>, tolerance: f64) -> Self {
        ResidualReport { residuals: Vec::new(), tolerance, window: window.into(), pass: true }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        let r = Residual::new(name, value, self.tolerance);
        self.pass &= r.pass;
        self.residuals.push(r);
    }

    pub fn extend(&mut self, other: ResidualReport) {
        for r in other.residuals {
            self.pass &= r.pass;
            self.residuals.push(r);
        }
    }

    pub fn max(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// `Σ Ci J3^i`, evaluated on the diagonal when J3 is diagonal.
fn structure_op(j3: &LinOp, p: &HiggsParams) -> LinOp {
    if j3.is_diagonal() {
        return LinOp::diag(j3.space, |s| {
            let h = j3.get(s, s);
            p.coeffs().iter().rev().fold(ZERO, |acc, c| acc * h + c)
        });
    }
    let mut acc = LinOp::zeros(j3.space);
    for (i, c) in p.coeffs().iter().enumerate() {
        if *c != 0.0 {
            acc = acc.add(&j3.powi(i as u32).scale(re(*c))).expect("same space");
        }
    }
    acc
}

pub fn higgs_residuals(r: &Realization, p: &HiggsParams, w: &Window, tol: f64) -> Result<ResidualReport> {
    let mut rep = ResidualReport::new(w.label.clone(), tol);
    let c3p = r.j3.commutator(&r.jp)?.sub(&r.jp)?;
    rep.push("[J3,J+]-J+", column_residual(&c3p, w)?);
    let c3m = r.j3.commutator(&r.jm)?.add(&r.jm)?;
    rep.push("[J3,J-]+J-", column_residual(&c3m, w)?);
    let cpm = r.jp.commutator(&r.jm)?.sub(&structure_op(&r.j3, p))?;
    let name = if p.poly.is_some() { "[J+,J-]-sum(Ci J3^i)" } else { "[J+,J-]-(C1 J3+C3 J3^3)" };
    rep.push(name, column_residual(&cpm, w)?);
    Ok(rep)
}

pub fn casimir(r: &Realization, p: &HiggsParams) -> LinOp {
    let j3sq = r.j3.compose(&r.j3).expect("same space");
    let sym = r.jp.anticommutator(&r.jm).expect("same space").scale(re(0.5));
    sym.add(&j3sq.scale(re(0.5 * p.c1 + 0.25 * p.c3)))
        .and_then(|x| x.add(&j3sq.compose(&j3sq)?.scale(re(0.25 * p.c3))))
        .expect("same space")
}

/// `[C, Jμ]` residuals on `w`.
pub fn casimir_residuals(r: &Realization, p: &HiggsParams, w: &Window, tol: f64) -> Result<ResidualReport> {
    let c = casimir(r, p);
    let mut rep = ResidualReport::new(w.label.clone(), tol);
    for (name, op) in r.ops() {
        rep.push(format!("[C,{name}]"), column_residual(&c.commutator(op)?, w)?);
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrepLabel {
    pub jtilde: f64,
    /// Admissible m, ascending.
    pub admissible: Vec<f64>,
    /// Connected blocks of `admissible`, separated by vanishing links.
    pub blocks: Vec<Vec<f64>>,
}

/// `<j m+1|J+|j m>²`.
pub fn irrep_radicand(p: &HiggsParams, j: f64, m: f64) -> f64 {
    p.casimir_at(j) - p.casimir_at(m)
}

fn half_integer(j: f64) -> Result<usize> {
    let twice = 2.0 * j;
    if j < 0.0 || !j.is_finite() || twice.fract() != 0.0 {
        return Err(Error::InvalidParam(format!("jtilde = {j} is not a nonnegative half-integer")));
    }
    Ok(twice as usize)
}

/// Irrep `j` realized on `FockSpace(2j, 0)` with `n1 = j + m`.
pub fn irrep(p: &HiggsParams, jtilde: f64) -> Result<(Realization, IrrepLabel)> {
    let d = half_integer(jtilde)?;
    let space = FockSpace { n1_max: d, n2_max: 0 };
    let m_of = |n1: usize| n1 as f64 - jtilde;
    let scale = 1e-12 * p.c1.abs().max(p.c3.abs()).max(1.0) * (1.0 + jtilde * jtilde).powi(2);
    let link = |n1: usize| irrep_radicand(p, jtilde, m_of(n1));
    let is_zero = |x: f64| x.abs() <= scale;

    let admissible: Vec<bool> = (0..=d)
        .map(|n| {
            let up = (n..d).map(link).find(|&x| is_zero(x) || x < 0.0).map_or(true, is_zero);
            let down = (0..n).rev().map(link).find(|&x| is_zero(x) || x < 0.0).map_or(true, is_zero);
            up && down
        })
        .collect();
    if !admissible.iter().any(|a| *a) {
        return Err(Error::EmptyAdmissible(jtilde));
    }

    let connects = |n: usize| n < d && admissible[n] && admissible[n + 1] && !is_zero(link(n)) && link(n) > 0.0;
    let jp = LinOp::shift(space, (1, 0), |(n, _)| if connects(n) { re(link(n).sqrt()) } else { ZERO });
    let jm = jp.adjoint();
    let j3 = LinOp::diag(space, |(n, _)| re(m_of(n)));

    let mut blocks: Vec<Vec<f64>> = Vec::new();
    for n in 0..=d {
        if !admissible[n] {
            continue;
        }
        match blocks.last_mut() {
            Some(b) if n > 0 && connects(n - 1) => b.push(m_of(n)),
            _ => blocks.push(vec![m_of(n)]),
        }
    }
    let label = IrrepLabel {
        jtilde,
        admissible: (0..=d).filter(|&n| admissible[n]).map(m_of).collect(),
        blocks,
    };
    let r = Realization {
        jp,
        jm,
        j3,
        kind: RealizationKind::Irrep,
        order: (1, 1),
        variant: "IRREP".into(),
        shift: 0.0,
    };
    Ok((r, label))
}

/// Window of the admissible states of an irrep realization.
pub fn irrep_window(r: &Realization, label: &IrrepLabel) -> Window {
    let j = label.jtilde;
    let adm = label.admissible.clone();
    Window::from_predicate(r.space(), "admissible m", move |(n, _)| adm.contains(&(n as f64 - j)))
}
