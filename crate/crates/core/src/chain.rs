//! Ladder bookkeeping shared by both kinds of two-boson realization.
//!
//! First kind: `J+ = f(n) (a1+)^k a2^l`, `J- = a1^k (a2+)^l g(n)`, step
//! `(k, -l)`. Second kind: `J+ = f(n) (a1+)^k (a2+)^l`, `J- = a1^k a2^l g(n)`,
//! step `(k, l)`. With `P(n) = f(n) g(n) A(n)` and `A(n)` the squared ladder
//! factor of `J-` on `|n>`, the Higgs relation becomes
//!
//! ```text
//! P(n) - P(n + step) = C1 h(n) + C3 h(n)^3
//! ```
//!
//! and telescoping from the chain bottom (where `A = 0`) gives
//! `P(n) = c(h_b - 1) - c(h(n) - 1)` with `c` the Casimir polynomial.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{re, Chain, FockSpace, LinOp, State, C64, ZERO};
use crate::higgs::HiggsParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    First,
    Second,
}

/// `x (x-1) ... (x-k+1)`.
fn falling(x: i64, k: usize) -> f64 {
    (0..k as i64).map(|i| (x - i) as f64).product()
}

impl Family {
    pub fn step(&self, k: usize, l: usize) -> (i64, i64) {
        match self {
            Family::First => (k as i64, -(l as i64)),
            Family::Second => (k as i64, l as i64),
        }
    }

    pub fn h(&self, k: usize, l: usize, shift: f64, s: State) -> f64 {
        let a = s.0 as f64 / (2 * k) as f64;
        let b = s.1 as f64 / (2 * l) as f64;
        match self {
            Family::First => a - b + shift,
            Family::Second => a + b + shift,
        }
    }

    /// Squared ladder factor of `J-` acting on `|n>` (zero if it annihilates).
    pub fn lower_sq(&self, k: usize, l: usize, s: State) -> f64 {
        let (a, b) = (s.0 as i64, s.1 as i64);
        match self {
            Family::First => falling(a, k) * falling(b + l as i64, l),
            Family::Second => falling(a, k) * falling(b, l),
        }
        .max(0.0)
    }

    /// Squared ladder factor of `J+` acting on `|n>`.
    pub fn raise_sq(&self, k: usize, l: usize, s: State) -> f64 {
        let (dk, dl) = self.step(k, l);
        let (a, b) = (s.0 as i64 + dk, s.1 as i64 + dl);
        if a < 0 || b < 0 {
            return 0.0;
        }
        self.lower_sq(k, l, (a as usize, b as usize))
    }

    /// Lowest point of the infinite ladder through `s`.
    pub fn bottom(&self, k: usize, l: usize, s: State) -> State {
        match self {
            Family::First => {
                let t = s.0 / k;
                (s.0 - t * k, s.1 + t * l)
            }
            Family::Second => {
                let t = (s.0 / k).min(s.1 / l);
                (s.0 - t * k, s.1 - t * l)
            }
        }
    }
}

/// `P(n) = f g A` anchored at the chain bottom.
pub fn telescoped_product(fam: Family, k: usize, l: usize, p: &HiggsParams, shift: f64, s: State) -> f64 {
    let hb = fam.h(k, l, shift, fam.bottom(k, l, s));
    p.casimir_at(hb - 1.0) - p.casimir_at(fam.h(k, l, shift, s) - 1.0)
}

/// `f g` from the telescoped product; NaN where `J-` annihilates.
pub fn telescoped_fg(fam: Family, k: usize, l: usize, p: &HiggsParams, shift: f64, s: State) -> f64 {
    let a = fam.lower_sq(k, l, s);
    if a == 0.0 {
        return f64::NAN;
    }
    telescoped_product(fam, k, l, p, shift, s) / a
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSolution {
    pub states: Vec<State>,
    /// `P = f g A` at each chain point.
    pub product: Vec<f64>,
    /// `f g` where `A != 0`.
    pub fg: Vec<Option<f64>>,
    /// `P(top) - (C1 h + C3 h^3)(top)` for chains with a true top.
    pub closure_defect: Option<f64>,
}

impl ChainSolution {
    pub fn closes(&self, tol: f64) -> bool {
        self.closure_defect.map_or(true, |d| d.abs() <= tol)
    }
}

/// Forward recursion `P(next) = P(n) - (C1 h + C3 h^3)(n)` from `P = 0`
/// at the true bottom of `chain`.
pub fn solve_chain(fam: Family, k: usize, l: usize, p: &HiggsParams, shift: f64, chain: &Chain) -> Result<ChainSolution> {
    if chain.states.len() < 2 {
        return Err(Error::ShortChain(chain.states.len()));
    }
    if !chain.true_bottom {
        return Err(Error::InvalidParam("chain is cut by the truncation below its bottom".into()));
    }
    let mut product = Vec::with_capacity(chain.states.len());
    let mut cur = 0.0;
    for i in 0..chain.states.len() {
        if i > 0 {
            cur -= p.structure(fam.h(k, l, shift, chain.states[i - 1]));
        }
        product.push(cur);
    }
    let fg = chain
        .states
        .iter()
        .zip(&product)
        .map(|(s, pv)| {
            let a = fam.lower_sq(k, l, *s);
            (a != 0.0).then(|| pv / a)
        })
        .collect();
    let closure_defect = chain.true_top.then(|| {
        let top = *chain.states.last().unwrap();
        product.last().unwrap() - p.structure(fam.h(k, l, shift, top))
    });
    Ok(ChainSolution { states: chain.states.clone(), product, fg, closure_defect })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// `f = g = sqrt(fg)`.
    Unitary,
    /// `f = fg`, `g = 1`.
    Dyson,
    /// `J+ = f a.. `, `J- = f a..` with `f(n) f(n - step) = fg(n)`.
    Constrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadicandPolicy {
    /// Negative radicands are a DOMAIN error.
    #[default]
    Strict,
    /// Negative radicands give imaginary elements.
    Complex,
}

fn root(x: f64, at: State, policy: RadicandPolicy) -> Result<C64> {
    if x >= 0.0 {
        Ok(re(x.sqrt()))
    } else if x.is_nan() {
        Err(Error::Singular(at.0, at.1))
    } else {
        match policy {
            RadicandPolicy::Strict => Err(Error::Domain { n1: at.0, n2: at.1, value: x }),
            RadicandPolicy::Complex => Ok(C64::new(0.0, (-x).sqrt())),
        }
    }
}

/// Scale used to decide that a recursion coefficient vanishes.
pub(crate) fn coef_scale(p: &HiggsParams, s: State) -> f64 {
    let n = (s.0 * s.0 + s.1 * s.1 + 1) as f64;
    1e-12 * (p.c1.abs() + p.c3.abs() * n * n).max(1e-300)
}

/// Constrained coefficient `f` on every chain: `f(start) = 1`,
/// `f(n) = fg(n) / f(prev)`.
pub fn constrained_coefficients(
    space: FockSpace,
    step: (i64, i64),
    p: &HiggsParams,
    fg: &dyn Fn(State) -> f64,
) -> Result<Vec<f64>> {
    let mut f = vec![f64::NAN; space.dim()];
    for chain in crate::fock::chains(space, step) {
        let mut prev = 1.0;
        for (i, s) in chain.states.iter().enumerate() {
            let v = if i == 0 {
                1.0
            } else {
                let prev_state = chain.states[i - 1];
                if prev == 0.0 || (i > 1 && fg(prev_state).abs() <= coef_scale(p, prev_state)) {
                    return Err(Error::ZeroCoefficient(prev_state.0, prev_state.1));
                }
                fg(*s) / prev
            };
            f[space.index(s.0, s.1).unwrap()] = v;
            prev = v;
        }
    }
    Ok(f)
}

pub(crate) struct Ladders {
    pub jp: LinOp,
    pub jm: LinOp,
}

/// Assemble `J±` of the given style from `fg`. `fg` is only evaluated where
/// the ladder factor is nonzero.
pub(crate) fn assemble(
    fam: Family,
    space: FockSpace,
    k: usize,
    l: usize,
    p: &HiggsParams,
    fg: &dyn Fn(State) -> f64,
    style: Style,
    policy: RadicandPolicy,
) -> Result<Ladders> {
    let step = fam.step(k, l);
    let down = (-step.0, -step.1);
    let d = space.dim();
    let mut jp = LinOp::zeros(space);
    let mut jm = LinOp::zeros(space);
    let constrained = match style {
        Style::Constrained => Some(constrained_coefficients(space, step, p, fg)?),
        _ => None,
    };
    let fidx = |s: State| space.index(s.0, s.1).unwrap();
    for j in 0..d {
        let s = space.state(j);
        if let Some(t) = space.shifted(s, step) {
            let a = fam.raise_sq(k, l, s);
            if a != 0.0 {
                let lad = a.sqrt();
                let c = match style {
                    Style::Unitary => root(fg(t) * a, t, policy)?,
                    Style::Dyson => re(fg(t) * lad),
                    Style::Constrained => re(constrained.as_ref().unwrap()[fidx(t)] * lad),
                };
                jp.matrix[(fidx(t), j)] = c;
            }
        }
        if let Some(t) = space.shifted(s, down) {
            let a = fam.lower_sq(k, l, s);
            if a != 0.0 {
                let lad = a.sqrt();
                let c = match style {
                    Style::Unitary => root(fg(s) * a, s, policy)?,
                    Style::Dyson => re(lad),
                    Style::Constrained => re(constrained.as_ref().unwrap()[fidx(t)] * lad),
                };
                jm.matrix[(fidx(t), j)] = c;
            }
        }
    }
    Ok(Ladders { jp, jm })
}

/// `J3 = h(n)`.
pub(crate) fn j3_op(fam: Family, space: FockSpace, k: usize, l: usize, shift: f64) -> LinOp {
    LinOp::diag(space, |s| re(fam.h(k, l, shift, s)))
}

/// Compressed copy of `op` keeping only entries between states in `keep`.
pub fn compress(op: &LinOp, keep: &dyn Fn(State) -> bool) -> LinOp {
    let sp = op.space;
    let mut out = op.clone();
    for j in 0..sp.dim() {
        for i in 0..sp.dim() {
            if out.matrix[(i, j)] != ZERO && !(keep(sp.state(i)) && keep(sp.state(j))) {
                out.matrix[(i, j)] = ZERO;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_space, chains};
    use approx::assert_relative_eq;

    #[test]
    fn ladder_factors() {
        assert_eq!(Family::First.lower_sq(1, 1, (2, 3)), 2.0 * 4.0);
        assert_eq!(Family::First.raise_sq(1, 1, (1, 1)), 2.0);
        assert_eq!(Family::First.raise_sq(1, 1, (1, 0)), 0.0);
        assert_eq!(Family::Second.lower_sq(2, 2, (2, 1)), 0.0);
        assert_eq!(Family::Second.raise_sq(2, 2, (0, 0)), 4.0);
        assert_eq!(Family::First.bottom(2, 2, (5, 1)), (1, 5));
        assert_eq!(Family::Second.bottom(1, 1, (5, 2)), (3, 0));
    }

    #[test]
    fn h_difference_equation() {
        for fam in [Family::First, Family::Second] {
            for (k, l) in [(1, 1), (2, 2), (1, 2), (3, 1)] {
                let (dk, dl) = fam.step(k, l);
                for s in [(5usize, 7usize), (9, 9), (3, 12)] {
                    let t = ((s.0 as i64 + dk) as usize, (s.1 as i64 + dl) as usize);
                    assert_relative_eq!(fam.h(k, l, 0.3, t) - fam.h(k, l, 0.3, s), 1.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn recursion_matches_telescoped_product() {
        let p = HiggsParams::new(2.0, 8.0);
        let sp = build_space(9, 9).unwrap();
        for (fam, k, l) in [(Family::First, 1, 1), (Family::First, 2, 2), (Family::First, 1, 2), (Family::Second, 2, 2)] {
            for ch in chains(sp, fam.step(k, l)) {
                if !ch.true_bottom || ch.states.len() < 2 {
                    continue;
                }
                let sol = solve_chain(fam, k, l, &p, 0.5, &ch).unwrap();
                for (s, pv) in sol.states.iter().zip(&sol.product) {
                    let t = telescoped_product(fam, k, l, &p, 0.5, *s);
                    assert_relative_eq!(*pv, t, max_relative = 1e-12, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn fg_at_one_one_is_five() {
        let p = HiggsParams::new(2.0, 8.0);
        assert_relative_eq!(telescoped_fg(Family::First, 1, 1, &p, 0.0, (1, 1)), 5.0, epsilon = 1e-13);
    }
}
