//! Truncated two-mode Fock spaces and dense operators on them.
//!
//! Basis states |n1, n2> with 0 <= ni <= ni_max, ordered row-major:
//! `index = n1 * (n2_max + 1) + n2`. Creation at a cap maps to zero, so
//! identities such as `[a, a+] = 1` only hold away from the edge; use a
//! [`Window`] to compare operators on the columns where they are exact.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type State = (usize, usize);

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FockSpace {
    pub n1_max: usize,
    pub n2_max: usize,
}

pub fn build_space(n1_max: i64, n2_max: i64) -> Result<FockSpace> {
    if n1_max < 0 || n2_max < 0 {
        return Err(Error::NegativeBound(n1_max, n2_max));
    }
    Ok(FockSpace { n1_max: n1_max as usize, n2_max: n2_max as usize })
}

impl FockSpace {
    pub fn dim(&self) -> usize {
        (self.n1_max + 1) * (self.n2_max + 1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> Option<usize> {
        (n1 <= self.n1_max && n2 <= self.n2_max).then(|| n1 * (self.n2_max + 1) + n2)
    }

    pub fn state(&self, i: usize) -> State {
        (i / (self.n2_max + 1), i % (self.n2_max + 1))
    }

    pub fn basis(&self) -> Vec<State> {
        (0..self.dim()).map(|i| self.state(i)).collect()
    }

    /// `s + step` if it lies inside the caps.
    pub fn shifted(&self, s: State, step: (i64, i64)) -> Option<State> {
        let a = s.0 as i64 + step.0;
        let b = s.1 as i64 + step.1;
        (a >= 0 && b >= 0 && a as usize <= self.n1_max && b as usize <= self.n2_max)
            .then(|| (a as usize, b as usize))
    }
}

/// Dense complex operator on a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    pub space: FockSpace,
    pub matrix: DMatrix<C64>,
}

impl LinOp {
    pub fn zeros(space: FockSpace) -> Self {
        let d = space.dim();
        LinOp { space, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(space: FockSpace) -> Self {
        let d = space.dim();
        LinOp { space, matrix: DMatrix::identity(d, d) }
    }

    /// Diagonal operator with entries `f(n1, n2)`.
    pub fn diag(space: FockSpace, f: impl Fn(State) -> C64) -> Self {
        let mut op = Self::zeros(space);
        for i in 0..space.dim() {
            op.matrix[(i, i)] = f(space.state(i));
        }
        op
    }

    /// Operator sending |n> to `coef(n) |n + step>`; images outside the caps
    /// are dropped.
    pub fn shift(space: FockSpace, step: (i64, i64), coef: impl Fn(State) -> C64) -> Self {
        let mut op = Self::zeros(space);
        for j in 0..space.dim() {
            let s = space.state(j);
            if let Some(t) = space.shifted(s, step) {
                let c = coef(s);
                if c != ZERO {
                    op.matrix[(space.index(t.0, t.1).unwrap(), j)] = c;
                }
            }
        }
        op
    }

    pub fn get(&self, bra: State, ket: State) -> C64 {
        match (self.space.index(bra.0, bra.1), self.space.index(ket.0, ket.1)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => ZERO,
        }
    }

    fn check(&self, other: &LinOp) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// `self * other`, skipping zero entries of `other`. Ladder-type
    /// operators have at most one entry per column, so this is quadratic in
    /// the dimension for them.
    pub fn compose(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        let d = self.space.dim();
        let a = self.matrix.as_slice();
        let b = other.matrix.as_slice();
        let mut out = vec![ZERO; d * d];
        for j in 0..d {
            let col = &mut out[j * d..(j + 1) * d];
            for k in 0..d {
                let bkj = b[j * d + k];
                if bkj == ZERO {
                    continue;
                }
                let acol = &a[k * d..(k + 1) * d];
                for (o, x) in col.iter_mut().zip(acol) {
                    if *x != ZERO {
                        *o += x * bkj;
                    }
                }
            }
        }
        Ok(LinOp { space: self.space, matrix: DMatrix::from_vec(d, d, out) })
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        Ok(LinOp { space: self.space, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.check(other)?;
        Ok(LinOp { space: self.space, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, c: C64) -> LinOp {
        LinOp { space: self.space, matrix: &self.matrix * c }
    }

    pub fn adjoint(&self) -> LinOp {
        LinOp { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn commutator(&self, other: &LinOp) -> Result<LinOp> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn anticommutator(&self, other: &LinOp) -> Result<LinOp> {
        self.compose(other)?.add(&other.compose(self)?)
    }

    pub fn powi(&self, n: u32) -> LinOp {
        let mut acc = LinOp::identity(self.space);
        for _ in 0..n {
            acc = acc.compose(self).expect("same space");
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &LinOp) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.space.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.matrix[(i, j)] == ZERO))
    }

    pub fn diagonal_at(&self, s: State) -> C64 {
        self.get(s, s)
    }

    /// Euclidean norm of the column of basis state `j`.
    pub fn column_norm(&self, j: usize) -> f64 {
        self.matrix.column(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgebraOp {
    Compose,
    Add,
    Scale(C64),
    Adjoint,
    Commutator,
    Anticommutator,
}

/// Binary/unary operator algebra. `Scale` and `Adjoint` ignore `b`.
pub fn algebra(a: &LinOp, b: &LinOp, op: AlgebraOp) -> Result<LinOp> {
    match op {
        AlgebraOp::Compose => a.compose(b),
        AlgebraOp::Add => a.add(b),
        AlgebraOp::Scale(c) => Ok(a.scale(c)),
        AlgebraOp::Adjoint => Ok(a.adjoint()),
        AlgebraOp::Commutator => a.commutator(b),
        AlgebraOp::Anticommutator => a.anticommutator(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Annihilate,
    Create,
    Number,
}

pub fn ladder(space: FockSpace, mode: Mode, kind: LadderKind) -> LinOp {
    let pick = move |s: State| match mode {
        Mode::One => s.0,
        Mode::Two => s.1,
    };
    let step = |d: i64| match mode {
        Mode::One => (d, 0),
        Mode::Two => (0, d),
    };
    match kind {
        LadderKind::Annihilate => LinOp::shift(space, step(-1), |s| re((pick(s) as f64).sqrt())),
        LadderKind::Create => LinOp::shift(space, step(1), |s| re((pick(s) as f64 + 1.0).sqrt())),
        LadderKind::Number => LinOp::diag(space, |s| re(pick(s) as f64)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingularPolicy {
    Zero,
    Error,
    Limit(C64),
}

/// Diagonal function of the number operators. A point is singular when `f`
/// returns a non-finite value there.
pub fn diag_fn(space: FockSpace, f: impl Fn(State) -> C64, policy: SingularPolicy) -> Result<LinOp> {
    let mut op = LinOp::zeros(space);
    for i in 0..space.dim() {
        let s = space.state(i);
        let v = f(s);
        op.matrix[(i, i)] = if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            match policy {
                SingularPolicy::Zero => ZERO,
                SingularPolicy::Limit(c) => c,
                SingularPolicy::Error => return Err(Error::Singular(s.0, s.1)),
            }
        };
    }
    Ok(op)
}

/// A subset of basis columns used when comparing operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub space: FockSpace,
    pub label: String,
    mask: Vec<bool>,
}

impl Window {
    pub fn from_predicate(space: FockSpace, label: impl Into<String>, pred: impl Fn(State) -> bool) -> Self {
        let mask = (0..space.dim()).map(|i| pred(space.state(i))).collect();
        Window { space, label: label.into(), mask }
    }

    pub fn full(space: FockSpace) -> Self {
        Self::from_predicate(space, "full", |_| true)
    }

    /// States at distance at least `d` from both caps.
    pub fn margin(space: FockSpace, d: usize) -> Self {
        if d == 0 {
            return Self::full(space).relabel("margin(0)");
        }
        Self::from_predicate(space, format!("margin({d})"), move |(a, b)| {
            a + d <= space.n1_max && b + d <= space.n2_max
        })
    }

    pub fn sector(sector: &SectorBasis) -> Self {
        let members = sector.members.clone();
        Self::from_predicate(sector.space, format!("sector {}={}", sector.kind.tag(), sector.value), move |s| {
            members.contains(&s)
        })
    }

    pub fn from_states(space: FockSpace, label: impl Into<String>, states: &[State]) -> Self {
        Self::from_predicate(space, label, |s| states.contains(&s))
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window {
            space: self.space,
            label: format!("{} & {}", self.label, other.label),
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn restrict(&self, label: &str, pred: impl Fn(State) -> bool) -> Window {
        let mut w = self.clone();
        for (i, m) in w.mask.iter_mut().enumerate() {
            *m = *m && pred(self.space.state(i));
        }
        w.label = format!("{} & {}", self.label, label);
        w
    }

    pub fn contains(&self, s: State) -> bool {
        self.space.index(s.0, s.1).map(|i| self.mask[i]).unwrap_or(false)
    }

    pub fn columns(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn states(&self) -> Vec<State> {
        self.columns().into_iter().map(|i| self.space.state(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Max over window columns of `||(A - B) e_c||`.
pub fn window_residual(a: &LinOp, b: &LinOp, w: &Window) -> Result<f64> {
    a.check(b)?;
    if a.space != w.space {
        return Err(Error::SpaceMismatch);
    }
    column_residual(&a.sub(b)?, w)
}

/// Max over window columns of the column norm of `a`.
pub fn column_residual(a: &LinOp, w: &Window) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyWindow(w.label.clone()));
    }
    if a.space != w.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(w.columns().into_iter().map(|c| a.column_norm(c)).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectorKind {
    /// Conserves `l*n1 + k*n2` (first kind, step `(k, -l)`).
    Sum { k: usize, l: usize },
    /// Conserves `n1 - n2` (second kind).
    Diff,
}

impl SectorKind {
    fn tag(&self) -> String {
        match self {
            SectorKind::Sum { k, l } => format!("SUM({k},{l})"),
            SectorKind::Diff => "DIFF".into(),
        }
    }

    pub fn value(&self, s: State) -> i64 {
        match *self {
            SectorKind::Sum { k, l } => (l * s.0 + k * s.1) as i64,
            SectorKind::Diff => s.0 as i64 - s.1 as i64,
        }
    }
}

impl SectorKind {
    /// Sublattice label that the ladder step also preserves (`n1 mod k`).
    pub fn residue(&self, s: State) -> usize {
        match *self {
            SectorKind::Sum { k, .. } => s.0 % k,
            SectorKind::Diff => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorBasis {
    pub space: FockSpace,
    pub kind: SectorKind,
    pub value: i64,
    /// `n1 mod k`; SUM(k,l) sectors with k > 1 split into k classes.
    pub residue: usize,
    pub members: Vec<State>,
}

/// Partition of the basis into constraint classes, sorted by (value,
/// residue); members sorted by n1.
pub fn sectors(space: FockSpace, kind: SectorKind) -> Result<Vec<SectorBasis>> {
    if let SectorKind::Sum { k, l } = kind {
        if k == 0 || l == 0 {
            return Err(Error::InvalidParam("SUM sectors need k, l >= 1".into()));
        }
    }
    let mut map: std::collections::BTreeMap<(i64, usize), Vec<State>> = Default::default();
    for s in space.basis() {
        map.entry((kind.value(s), kind.residue(s))).or_default().push(s);
    }
    Ok(map
        .into_iter()
        .map(|((value, residue), mut members)| {
            members.sort();
            SectorBasis { space, kind, value, residue, members }
        })
        .collect())
}

/// A maximal run of states connected by `step` inside the caps.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub states: Vec<State>,
    /// The predecessor of the first state has a negative occupation.
    pub true_bottom: bool,
    /// The successor of the last state has a negative occupation.
    pub true_top: bool,
}

impl Chain {
    pub fn is_closed(&self) -> bool {
        self.true_bottom && self.true_top
    }
}

/// All chains generated by `step`, ordered by their first state.
pub fn chains(space: FockSpace, step: (i64, i64)) -> Vec<Chain> {
    let neg = |s: State, d: (i64, i64)| s.0 as i64 + d.0 < 0 || s.1 as i64 + d.1 < 0;
    let back = (-step.0, -step.1);
    let mut out = Vec::new();
    for s in space.basis() {
        if space.shifted(s, back).is_some() {
            continue;
        }
        let mut states = vec![s];
        let mut cur = s;
        while let Some(t) = space.shifted(cur, step) {
            states.push(t);
            cur = t;
        }
        out.push(Chain { true_bottom: neg(s, back), true_top: neg(cur, step), states });
    }
    out
}
