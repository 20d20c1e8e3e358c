//! Admissibility and nullspace analysis of the unitary (1,1) realizations.
//!
//! Ground truth is a direct scan: a state is admissible when every element
//! `<m|J±|n>` with a nonzero ladder factor and an image inside the caps has a
//! nonnegative radicand. Kernels are those of the operators compressed to a
//! state set; columns whose image falls outside the caps are left out,
//! since truncation alone would kill them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::{compress, Family};
use crate::fock::{FockSpace, LinOp, State, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DomainCase {
    WholeSpace,
    Restricted,
    Finite,
}

/// One printed nullspace statement, checked against a kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub claimed: Vec<State>,
    pub observed: Vec<State>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainReport {
    pub family: Family,
    pub case: DomainCase,
    pub caps: (usize, usize),
    /// Ladder-aware admissible states.
    pub admissible: Vec<State>,
    /// States satisfying the printed constraint inequalities in radicand form
    /// (no ladder conditions).
    pub radicand_set: Vec<State>,
    /// `ζ1(n1)` / `κ1(n1)` from the ceiling formula, indexed by n1.
    pub boundary1: Vec<i64>,
    /// Minimal n2 with a nonnegative radicand, by scan; `None` if none in caps.
    pub boundary1_scan: Vec<Option<i64>>,
    pub boundary2: Vec<i64>,
    pub boundary2_scan: Vec<Option<i64>>,
    /// `η` (first kind) or `λ̄` (second kind).
    pub eta: Option<i64>,
    pub eta_scan: Option<i64>,
    pub jp_kernel: Vec<State>,
    pub jm_kernel: Vec<State>,
    pub common_kernel: Vec<State>,
    /// Kernel sizes agree with SVD nullities.
    pub nullity_consistent: bool,
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

/// `ceil(sqrt(x))` for `x > 0`, else 0.
pub fn ceil_sqrt(x: f64) -> i64 {
    if x > 0.0 {
        x.sqrt().ceil() as i64
    } else {
        0
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Kernels {
    pub jp: Vec<State>,
    pub jm: Vec<State>,
    pub consistent: bool,
}

fn considered(space: FockSpace, s: State, step: (i64, i64)) -> bool {
    let a = s.0 as i64 + step.0;
    let b = s.1 as i64 + step.1;
    a < 0 || b < 0 || space.shifted(s, step).is_some()
}

fn svd_nullity(op: &LinOp, cols: &[usize]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let d = op.space.dim();
    let sub = DMatrix::<C64>::from_fn(d, cols.len(), |i, j| op.matrix[(i, cols[j])]);
    let sv = sub.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&x| x > 1e-9 * smax.max(1e-300)).count();
    cols.len() - rank
}

/// Kernels of `jp`, `jm` compressed to `keep`.
pub(crate) fn kernels(fam: Family, jp: &LinOp, jm: &LinOp, keep: &dyn Fn(State) -> bool) -> Kernels {
    let space = jp.space;
    let step = fam.step(1, 1);
    let down = (-step.0, -step.1);
    let mut out = Kernels { jp: vec![], jm: vec![], consistent: true };
    for (op, st, dst) in [(jp, step, &mut out.jp), (jm, down, &mut out.jm)] {
        let c = compress(op, keep);
        let tol = 1e-9 * (1.0 + c.max_abs());
        let cols: Vec<usize> = (0..space.dim())
            .filter(|&j| keep(space.state(j)) && considered(space, space.state(j), st))
            .collect();
        for &j in &cols {
            if c.column_norm(j) <= tol {
                dst.push(space.state(j));
            }
        }
        out.consistent &= svd_nullity(&c, &cols) == dst.len();
    }
    out
}

pub(crate) fn intersect(a: &[State], b: &[State]) -> Vec<State> {
    a.iter().filter(|s| b.contains(s)).cloned().collect()
}

/// `claimed ⊆ observed` (`exact = false`) or equality (`exact = true`).
pub(crate) fn claim(name: &str, mut claimed: Vec<State>, mut observed: Vec<State>, exact: bool) -> Claim {
    claimed.sort();
    observed.sort();
    let holds = if exact { claimed == observed } else { claimed.iter().all(|s| observed.contains(s)) };
    Claim { name: name.into(), claimed, observed, holds }
}
