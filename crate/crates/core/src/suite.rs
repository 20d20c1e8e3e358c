//! Verification runners behind the CLI subcommands. Each returns a
//! [`Report`]; `Err` is reserved for invalid parameter combinations.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{Family, RadicandPolicy};
use crate::domain::DomainCase;
use crate::error::{Error, Result};
use crate::fock::{column_residual, ladder, sectors, window_residual, FockSpace, LadderKind, LinOp, Mode, SectorKind, State, Window, ZERO};
use crate::higgs::{casimir, higgs_residuals, irrep, irrep_radicand, HiggsParams, IrrepLabel, Realization};
use crate::kepler::{self, KeplerParams, SpectrumTable};
use crate::phase::{exact_shift_phase, higgs_phase, phase_checks, phase_difference, single_mode_phase, Convention};
use crate::realize_one::{closing_window, contained_window, domain_first, realize_first, FirstKindSpec, FirstVariant};
use crate::realize_two::{domain_second, realize_second, SecondKindSpec, SecondVariant};
use crate::report::Report;
use crate::unitarize::{check_conjugation, check_unitarization, nonunitarizable_states, similarity_diag, Flavor, SimilarityDiag};

/// Tolerance for relative Casimir-diagonal agreement.
pub const CASIMIR_REL_TOL: f64 = 1e-10;

pub const FIRST_VARIANTS: [FirstVariant; 5] =
    [FirstVariant::U11, FirstVariant::D11, FirstVariant::K11, FirstVariant::U22, FirstVariant::D22];
pub const SECOND_VARIANTS: [SecondVariant; 5] =
    [SecondVariant::U11, SecondVariant::D11, SecondVariant::K11, SecondVariant::U22, SecondVariant::D22];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub c1: Vec<f64>,
    pub c3: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { c1: vec![-6.0, -2.0, 0.5, 2.0, 6.0], c3: vec![-8.0, -1.0, 1.0, 8.0] }
    }
}

impl Grid {
    pub fn points(&self) -> Vec<HiggsParams> {
        self.c1.iter().flat_map(|&a| self.c3.iter().map(move |&b| HiggsParams::new(a, b))).collect()
    }
}

/// What a DOMAIN error does to the report: a declared skip on grid runs,
/// a failure on single-point runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gating {
    Skip,
    Fail,
}

fn gated(e: &Error) -> bool {
    e.is_domain() || matches!(e, Error::Singular(..))
}

fn space_of(caps: (usize, usize)) -> FockSpace {
    FockSpace { n1_max: caps.0, n2_max: caps.1 }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("tolerance must be positive, got {tol}")))
    }
}

fn second_caps(caps: (usize, usize)) -> Result<()> {
    if caps.0 < 4 || caps.1 < 4 {
        return Err(Error::InvalidParam(format!("second-kind checks need caps >= 4, got {caps:?}")));
    }
    Ok(())
}

fn params(rep: &mut Report, p: &HiggsParams, caps: (usize, usize), tol: f64) {
    rep.param("c1", p.c1).param("c3", p.c3).param("caps", caps).param("tol", tol);
    rep.space = Some(space_of(caps));
}

fn tag(p: &HiggsParams) -> String {
    format!("({}, {})", p.c1, p.c3)
}

fn domain_event(rep: &mut Report, gating: Gating, msg: String) {
    match gating {
        Gating::Skip => rep.note("DOMAIN", msg),
        Gating::Fail => rep.error(msg),
    }
}

/// Largest relative deviation of the Casimir diagonal from `c(h_bottom - 1)`
/// over `w`.
pub fn casimir_diagonal_deviation(r: &Realization, p: &HiggsParams, fam: Family, w: &Window) -> f64 {
    let c = casimir(r, p);
    let (k, l) = r.order;
    w.states()
        .into_iter()
        .map(|s| {
            let want = p.casimir_at(fam.h(k, l, r.shift, fam.bottom(k, l, s)) - 1.0);
            (c.get(s, s) - want).norm() / want.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// `[C, Jμ]` residuals on `w`. `C J` and `J C` cancel exactly, so the
/// tolerance is raised to the rounding level of those two terms when that
/// exceeds `tol`; the reported value stays absolute.
pub fn casimir_commutators(r: &Realization, p: &HiggsParams, w: &Window, tol: f64) -> Result<Vec<(String, f64, f64)>> {
    let c = casimir(r, p);
    let mut out = Vec::new();
    for (name, op) in r.ops() {
        let (cj, jc) = (c.compose(op)?, op.compose(&c)?);
        let size = w.columns().into_iter().map(|j| cj.column_norm(j) + jc.column_norm(j)).fold(0.0, f64::max);
        let floor = 64.0 * f64::EPSILON * size;
        out.push((format!("[C,{name}]"), column_residual(&cj.sub(&jc)?, w)?, tol.max(floor)));
    }
    Ok(out)
}

/// Window on which `[C, Jμ]` is free of truncation: `C` at the image of a
/// second-kind ladder needs one more step inside the caps.
pub fn casimir_window(r: &Realization, fam: Family, w: &Window) -> Window {
    match fam {
        Family::First => w.clone(),
        Family::Second => {
            let d = 2 * r.order.0.max(r.order.1);
            w.intersect(&Window::margin(r.space(), d))
        }
    }
}

fn check_realization(rep: &mut Report, ctx: &str, r: &Realization, p: &HiggsParams, fam: Family, w: &Window, tol: f64) -> Result<()> {
    rep.absorb(ctx, higgs_residuals(r, p, w, tol)?);
    let cw = casimir_window(r, fam, w);
    rep.window(cw.label.clone());
    for (name, v, t) in casimir_commutators(r, p, &cw, tol)? {
        rep.residual(format!("{ctx}: {name}"), v, t);
    }
    rep.residual(format!("{ctx}: Casimir diagonal (relative)"), casimir_diagonal_deviation(r, p, fam, w), CASIMIR_REL_TOL);
    Ok(())
}

fn is_unitary_first(v: FirstVariant) -> bool {
    matches!(v, FirstVariant::U11 | FirstVariant::U22 | FirstVariant::GenericA | FirstVariant::UChain)
}

pub fn verify_first(p: &HiggsParams, variant: FirstVariant, caps: (usize, usize), tol: f64, gating: Gating) -> Result<Report> {
    check_tol(tol)?;
    let mut rep = Report::new("verify-first");
    params(&mut rep, p, caps, tol);
    rep.param("variant", variant);
    let space = space_of(caps);
    let spec = FirstKindSpec::new(variant);
    let (k, l) = spec.order;
    let w = closing_window(space, p, k, l, 0.0);
    if w.is_empty() {
        rep.note("INFO", format!("{variant:?} {}: no closing SUM({k},{l}) chain inside the caps", tag(p)));
        return Ok(rep);
    }
    let ctx = format!("{variant:?} {}", tag(p));
    match realize_first(space, p, &spec) {
        Ok(r) => check_realization(&mut rep, &ctx, &r, p, Family::First, &w, tol)?,
        Err(Error::InvalidParam(m)) => return Err(Error::InvalidParam(m)),
        Err(e) if gated(&e) => {
            domain_event(&mut rep, gating, format!("{ctx} skipped: {e}"));
            if is_unitary_first(variant) && matches!(e, Error::Domain { .. }) {
                let r = realize_first(space, p, &spec.clone().with_policy(RadicandPolicy::Complex))?;
                check_realization(&mut rep, &format!("{ctx} complex radicands"), &r, p, Family::First, &w, tol)?;
            }
        }
        Err(e) => rep.error(format!("{ctx}: {e}")),
    }
    Ok(rep)
}

pub fn verify_second(p: &HiggsParams, variant: SecondVariant, caps: (usize, usize), tol: f64, gating: Gating) -> Result<Report> {
    check_tol(tol)?;
    second_caps(caps)?;
    let mut rep = Report::new("verify-second");
    params(&mut rep, p, caps, tol);
    rep.param("variant", variant);
    let space = space_of(caps);
    let spec = SecondKindSpec::new(variant);
    let w = Window::margin(space, spec.order.0.max(spec.order.1));
    let ctx = format!("{variant:?} {}", tag(p));
    match realize_second(space, p, &spec) {
        Ok(r) => check_realization(&mut rep, &ctx, &r, p, Family::Second, &w, tol)?,
        Err(Error::InvalidParam(m)) => return Err(Error::InvalidParam(m)),
        Err(e) if gated(&e) => {
            domain_event(&mut rep, gating, format!("{ctx} skipped: {e}"));
            let unitary = matches!(variant, SecondVariant::U11 | SecondVariant::U22 | SecondVariant::GenericB);
            if unitary && matches!(e, Error::Domain { .. }) {
                let r = realize_second(space, p, &spec.clone().with_policy(RadicandPolicy::Complex))?;
                check_realization(&mut rep, &format!("{ctx} complex radicands"), &r, p, Family::Second, &w, tol)?;
            }
        }
        Err(e) => rep.error(format!("{ctx}: {e}")),
    }
    Ok(rep)
}

fn fg_zero_somewhere(fam: Family, p: &HiggsParams, space: FockSpace) -> bool {
    space.basis().into_iter().any(|s| {
        let v = match fam {
            Family::First => crate::realize_one::fg_u11(p, s.0 as f64, s.1 as f64),
            Family::Second => crate::realize_two::fg_u11_second(p, s.0 as f64, s.1 as f64),
        };
        v == 0.0
    })
}

/// Number of states in exactly one of the two sets.
pub fn symmetric_difference(a: &[State], b: &[State]) -> usize {
    a.iter().filter(|s| !b.contains(s)).count() + b.iter().filter(|s| !a.contains(s)).count()
}

fn similarity_pair(
    rep: &mut Report,
    flavor: Flavor,
    nonunitary: Result<Realization>,
    unitary: &Realization,
    p: &HiggsParams,
    w: &Window,
    tol: f64,
    gating: Gating,
) -> Result<Option<SimilarityDiag>> {
    let ctx = format!("{flavor:?} {}", tag(p));
    let rnu = match nonunitary {
        Ok(r) => r,
        Err(e) if gated(&e) => {
            domain_event(rep, gating, format!("{ctx} skipped: {e}"));
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let s = match similarity_diag(flavor, p, unitary.space()) {
        Ok(s) => s,
        Err(e) if gated(&e) => {
            domain_event(rep, gating, format!("{ctx} skipped: {e}"));
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    match check_conjugation(&s, &rnu, unitary, w, tol) {
        Ok(c) => rep.absorb(&ctx, c),
        Err(e) if gated(&e) => {
            domain_event(rep, gating, format!("{ctx} skipped: {e}"));
            return Ok(None);
        }
        Err(e) => return Err(e),
    }
    rep.absorb(&ctx, check_unitarization(&s, &rnu, w, tol)?);
    let scaled = s.rescale_chains(|first| 1.0 + 0.5 * (first.0 + first.1) as f64);
    let again = check_conjugation(&scaled, &rnu, unitary, w, tol)?;
    rep.residual(format!("{ctx}: per-chain rescaling"), again.max(), tol);
    Ok(Some(s))
}

/// S1, SBAR1 (recursive), S2, SBAR2 (recursive) against their unitary
/// targets. With `printed`, the printed SBAR forms are also tried and
/// reported as notes.
pub fn verify_similarity(
    p: &HiggsParams,
    kinds: &[Family],
    caps: (usize, usize),
    tol: f64,
    printed: bool,
    gating: Gating,
) -> Result<Report> {
    check_tol(tol)?;
    second_caps(caps)?;
    let mut rep = Report::new("verify-similarity");
    params(&mut rep, p, caps, tol);
    rep.param("printed", printed);
    rep.param("kinds", kinds.iter().map(|f| format!("{f:?}").to_lowercase()).collect::<Vec<_>>());
    let space = space_of(caps);

    for &fam in kinds {
        let (u, d, k, w, flavors) = match fam {
            Family::First => (
                realize_first(space, p, &FirstKindSpec::new(FirstVariant::U11)),
                realize_first(space, p, &FirstKindSpec::new(FirstVariant::D11)),
                realize_first(space, p, &FirstKindSpec::new(FirstVariant::K11)),
                contained_window(space, 1, 1),
                [Flavor::S1, Flavor::Sbar1Rec, Flavor::Sbar1],
            ),
            Family::Second => (
                realize_second(space, p, &SecondKindSpec::new(SecondVariant::U11)),
                realize_second(space, p, &SecondKindSpec::new(SecondVariant::D11)),
                realize_second(space, p, &SecondKindSpec::new(SecondVariant::K11)),
                Window::margin(space, 1),
                [Flavor::S2, Flavor::Sbar2Rec, Flavor::Sbar2],
            ),
        };

        if fg_zero_somewhere(fam, p, space) {
            rep.note("INFO", format!("{fam:?} {}: a coefficient vanishes inside the caps; set comparison skipped", tag(p)));
        } else {
            let bad = nonunitarizable_states(fam, p, space);
            let dom = match fam {
                Family::First => domain_first(p, caps)?,
                Family::Second => domain_second(p, caps)?,
            };
            let inadmissible: Vec<State> = space.basis().into_iter().filter(|s| !dom.admissible.contains(s)).collect();
            rep.residual(
                format!("{fam:?} {}: |nonunitarizable xor inadmissible|", tag(p)),
                symmetric_difference(&bad, &inadmissible) as f64,
                0.0,
            );
        }

        let u = match u {
            Ok(u) => u,
            Err(e) if gated(&e) => {
                domain_event(&mut rep, gating, format!("{fam:?} U11 {} not unitary on the caps: {e}", tag(p)));
                continue;
            }
            Err(e) => return Err(e),
        };
        let k = match k {
            Err(Error::InvalidParam(_)) => Err(Error::ZeroCoefficient(0, 0)),
            other => other,
        };
        if p.c3 == 0.0 {
            rep.note("INFO", format!("{fam:?} {}: K11 needs C3 != 0; SBAR skipped", tag(p)));
        }
        similarity_pair(&mut rep, flavors[0], d, &u, p, &w, tol, gating)?;
        if p.c3 != 0.0 {
            similarity_pair(&mut rep, flavors[1], k.clone(), &u, p, &w, tol, gating)?;
        }
        if printed && p.c3 != 0.0 {
            if let (Ok(kr), Ok(sb)) = (k, similarity_diag(flavors[2], p, space)) {
                match check_conjugation(&sb, &kr, &u, &w, tol) {
                    Ok(c) if c.pass => rep.note("INFO", format!("{:?} {}: printed form conjugates K11 to U11", flavors[2], tag(p))),
                    Ok(c) => rep.note(
                        "PAPER",
                        format!("{:?} {}: printed form fails to conjugate K11 to U11 (max residual {:e})", flavors[2], tag(p), c.max()),
                    ),
                    Err(e) => rep.note("INFO", format!("{:?} {}: printed form not evaluable: {e}", flavors[2], tag(p))),
                }
            }
        }
    }
    Ok(rep)
}

/// Irrep matrices plus their agreement with U11 on sector `N = 2j` of
/// `FockSpace(N, N)` under `n1 = j + m`, `n2 = j - m`.
pub fn irrep_run(p: &HiggsParams, jtilde: f64, tol: f64) -> Result<(Report, Realization, IrrepLabel)> {
    check_tol(tol)?;
    let (r, label) = irrep(p, jtilde)?;
    let mut rep = Report::new("irrep");
    rep.param("c1", p.c1).param("c3", p.c3).param("jtilde", jtilde).param("tol", tol);
    rep.space = Some(r.space());
    rep.domain = Some(serde_json::to_value(&label).expect("serializable"));
    let w = crate::higgs::irrep_window(&r, &label);
    let n = r.space().n1_max;
    rep.window(w.label.clone());
    if label.blocks.len() > 1 {
        rep.note("INFO", format!("admissible m split into {} blocks", label.blocks.len()));
    }
    rep.absorb("irrep", higgs_residuals(&r, p, &w, tol)?);

    let sp = FockSpace { n1_max: n, n2_max: n };
    let u = realize_first(sp, p, &FirstKindSpec::new(FirstVariant::U11).with_policy(RadicandPolicy::Complex))?;
    let to_fock = |a: usize| (a, n - a);
    let adm: Vec<usize> = (0..=n).filter(|&a| w.contains((a, 0))).collect();
    let mut dev: f64 = 0.0;
    for &a in &adm {
        for &b in &adm {
            for (x, y) in [(&r.jp, &u.jp), (&r.jm, &u.jm), (&r.j3, &u.j3)] {
                dev = dev.max((x.get((a, 0), (b, 0)) - y.get(to_fock(a), to_fock(b))).norm());
            }
        }
    }
    rep.residual(format!("U11 sector N={n} - irrep (entrywise)"), dev, tol);
    Ok((rep, r, label))
}

/// One row per m: `m,J3,J+,radicand,admissible` with `J+ = <m+1|J+|m>`.
pub fn write_irrep_csv<W: std::io::Write>(r: &Realization, label: &IrrepLabel, p: &HiggsParams, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "J3", "J+", "radicand", "admissible"])?;
    let d = r.space().n1_max;
    for a in 0..=d {
        let m = a as f64 - label.jtilde;
        let jp = if a < d { r.jp.get((a + 1, 0), (a, 0)).re } else { 0.0 };
        w.write_record([
            format!("{m}"),
            format!("{:.16e}", r.j3.get((a, 0), (a, 0)).re),
            format!("{jp:.16e}"),
            format!("{:.16e}", if a < d { irrep_radicand(p, label.jtilde, m) } else { 0.0 }),
            label.admissible.contains(&m).to_string(),
        ])?;
    }
    w.flush()
}

fn boundary_mismatches(formula: &[i64], scan: &[Option<i64>], cap: usize) -> usize {
    formula
        .iter()
        .zip(scan)
        .filter(|(f, s)| if **f as usize <= cap { **s != Some(**f) } else { s.is_some() })
        .count()
}

pub fn domain_run(p: &HiggsParams, fam: Family, caps: (usize, usize)) -> Result<Report> {
    if fam == Family::Second {
        second_caps(caps)?;
    }
    let mut rep = Report::new("domain");
    rep.param("c1", p.c1).param("c3", p.c3).param("caps", caps).param("kind", fam);
    rep.space = Some(space_of(caps));
    let d = match fam {
        Family::First => domain_first(p, caps)?,
        Family::Second => domain_second(p, caps)?,
    };
    let ctx = format!("{fam:?} {}", tag(p));
    if !d.boundary1.is_empty() {
        rep.residual(format!("{ctx}: boundary1 formula vs scan"), boundary_mismatches(&d.boundary1, &d.boundary1_scan, caps.1) as f64, 0.0);
        rep.residual(format!("{ctx}: boundary2 formula vs scan"), boundary_mismatches(&d.boundary2, &d.boundary2_scan, caps.0) as f64, 0.0);
    }
    if let (Some(e), Some(s)) = (d.eta, d.eta_scan) {
        if e as usize <= caps.0 {
            rep.residual(format!("{ctx}: eta formula - scan"), (e - s).abs() as f64, 0.0);
        }
    }
    rep.residual(format!("{ctx}: kernel sizes vs SVD nullity"), if d.nullity_consistent { 0.0 } else { 1.0 }, 0.0);
    // The whole-space statements assume strictly positive coefficients; an
    // exact zero inside the caps enlarges the kernels without contradicting them.
    let degenerate = d.case == DomainCase::WholeSpace && fg_zero_somewhere(fam, p, space_of(caps));
    for c in d.claims.iter().filter(|c| !c.holds) {
        rep.note(if degenerate { "INFO" } else { "PAPER" }, format!("{ctx}: claim \"{}\" not reproduced{} (claimed {:?}, observed {:?})", c.name, if degenerate { " with a coefficient vanishing inside the caps" } else { "" }, c.claimed, c.observed));
    }
    for n in &d.notes {
        rep.note("INFO", format!("{ctx}: {n}"));
    }
    rep.domain = Some(serde_json::to_value(&d).expect("serializable"));
    Ok(rep)
}

/// Largest `N` for which the Casimir matrix identity is checked on the full
/// `(N, N)` space.
pub const KEPLER_MATRIX_NMAX: usize = 16;

pub fn kepler_run(kp: &KeplerParams) -> Result<(Report, SpectrumTable)> {
    let table = kepler::classify(kp)?;
    let mut rep = Report::new("kepler");
    rep.param("lambda", kp.lambda).param("mu", kp.mu).param("nmax", kp.n_max).param("include_odd", kp.include_odd);
    let scale = 1f64.max(kp.lambda.abs()).max(kp.mu * kp.mu);
    let mut lin: f64 = 0.0;
    let mut cas: f64 = 0.0;
    let mut mat: f64 = 0.0;
    for r in &table.rows {
        let oracle = kepler::self_consistent_energy(kp.lambda, kp.mu, r.n);
        lin = lin.max((r.energy - oracle).abs() / oracle.abs().max(1.0));
        cas = cas.max((kepler::hamiltonian_from_casimir(kp.lambda, kp.mu, r.n, r.energy) - r.energy).abs() / scale);
        if r.n <= KEPLER_MATRIX_NMAX {
            mat = mat.max(kepler::matrix_identity_residual(kp.lambda, kp.mu, r.n)? / scale);
        }
    }
    rep.residual("E_N closed form vs linear solve (relative)", lin, 1e-12);
    rep.residual("E_0 + 2 mu^2", (kepler::energy(kp.lambda, kp.mu, 0) + 2.0 * kp.mu * kp.mu).abs(), 0.0);
    rep.residual("2(C - mu^2) - E (scalar)", cas, 1e-10);
    rep.residual(format!("2(C - mu^2) - E (matrix, N <= {KEPLER_MATRIX_NMAX})"), mat, 1e-10);
    rep.residual("degeneracy - (N+1)", table.rows.iter().filter(|r| r.degeneracy != r.n + 1).count() as f64, 0.0);
    if let Some(z) = &table.zero_level {
        let e = table.rows.iter().find(|r| r.n == z.n).map(|r| r.energy);
        if let Some(e) = e {
            rep.residual(format!("E_{} at the zero-level condition", z.n), e.abs() / scale, 1e-10);
        }
        rep.residual("bound levels below the zero level - l", (z.bound_below as f64 - z.l as f64).abs(), 0.0);
    }
    rep.domain = Some(serde_json::to_value(&table.zero_level).expect("serializable"));
    Ok((rep, table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseFlavor {
    Literal,
    ExactShift,
}

pub fn phase_run(
    p: &HiggsParams,
    caps: (usize, usize),
    n: usize,
    convention: Convention,
    flavor: PhaseFlavor,
    tol: f64,
    gating: Gating,
) -> Result<Report> {
    check_tol(tol)?;
    if n > caps.0 || n > caps.1 {
        return Err(Error::InvalidParam(format!("sector N = {n} is not contained in caps {caps:?}")));
    }
    let mut rep = Report::new("phase");
    params(&mut rep, p, caps, tol);
    rep.param("sector", n).param("convention", convention).param("flavor", flavor);
    let space = space_of(caps);
    let ctx = format!("{convention:?} {}", tag(p));
    let built = match flavor {
        PhaseFlavor::Literal => higgs_phase(space, p, convention),
        PhaseFlavor::ExactShift => exact_shift_phase(space, p, convention),
    };
    let ops = match built {
        Ok(o) => o,
        Err(e) if gated(&e) => {
            domain_event(&mut rep, gating, format!("{ctx} phase operators unavailable: {e}"));
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    let u = realize_first(space, p, &FirstKindSpec::new(FirstVariant::U11))?;
    let sec = sectors(space, SectorKind::Sum { k: 1, l: 1 })?.into_iter().find(|s| s.value == n as i64).expect("sector exists");
    let pr = phase_checks(&ops, &u.j3, &sec, tol)?;
    rep.absorb(&ctx, pr.residuals);

    let full = Window::full(space);
    let (e, ed) = phase_difference(space);
    if flavor == PhaseFlavor::Literal {
        rep.residual(format!("{ctx}: E+ - expIdiff w"), window_residual(&ops.eplus, &e.compose(&ops.w_diag)?, &full)?, tol);
        rep.residual(format!("{ctx}: E- - w expMinusIdiff"), window_residual(&ops.eminus, &ops.w_diag.compose(&ed)?, &full)?, tol);
    }
    let m1 = Window::margin(space, 1);
    for (label, mode) in [("1", Mode::One), ("2", Mode::Two)] {
        let sm = single_mode_phase(space, mode);
        let id = LinOp::identity(space);
        let up = sm.exp_minus_i.adjoint().compose(&sm.exp_minus_i)?;
        rep.residual(format!("mode {label}: E-^dag E- - 1"), window_residual(&up, &id, &m1)?, tol);
        let vac = LinOp::diag(space, |s| {
            let occ = if mode == Mode::One { s.0 } else { s.1 };
            if occ == 0 { ZERO } else { crate::fock::re(1.0) }
        });
        let down = sm.exp_minus_i.compose(&sm.exp_minus_i.adjoint())?;
        rep.residual(format!("mode {label}: E- E-^dag - (1 - |0><0|)"), window_residual(&down, &vac, &full)?, tol);
        let num = ladder(space, mode, LadderKind::Number);
        let lower = num.commutator(&sm.exp_i)?.add(&sm.exp_i)?;
        rep.residual(format!("mode {label}: [n, E+] + E+"), column_residual(&lower, &full)?, tol);
    }

    if pr.unit_deviation > tol {
        rep.note(
            "PAPER_LITERAL",
            format!("{ctx}: unit-coefficient action fails on sector N={n}: max |coef - 1| = {:e} at {:?}", pr.unit_deviation, pr.unit_deviation_at),
        );
    }
    if convention == Convention::PaperLiteral {
        rep.note(
            "PAPER_LITERAL",
            format!("{ctx}: ||[J3,cos]+i sin|| = {:e}, ||[J3,sin]-i cos|| = {:e} (not judged)", pr.cos_sin.0, pr.cos_sin.1),
        );
    }
    rep.param("unit_deviation", pr.unit_deviation);
    Ok(rep)
}

/// Everything over the grid. Per-point work runs on the rayon pool; the
/// merge order is fixed so the output is deterministic.
pub fn run_all(grid: &Grid, caps: (usize, usize), tol: f64) -> Result<Report> {
    check_tol(tol)?;
    second_caps(caps)?;
    let pts = grid.points();
    let mut rep = Report::new("all");
    rep.param("grid", grid).param("caps", caps).param("tol", tol);
    rep.space = Some(space_of(caps));

    let per_point: Vec<Result<Vec<Report>>> = pts
        .par_iter()
        .map(|p| {
            let mut out = Vec::new();
            for v in FIRST_VARIANTS {
                out.push(verify_first(p, v, caps, tol, Gating::Skip)?);
            }
            for v in SECOND_VARIANTS {
                out.push(verify_second(p, v, caps, tol, Gating::Skip)?);
            }
            out.push(verify_similarity(p, &[Family::First, Family::Second], caps, tol, false, Gating::Skip)?);
            out.push(domain_run(p, Family::First, caps)?);
            out.push(domain_run(p, Family::Second, caps)?);
            if p.c1 > 0.0 && p.c3 > 0.0 {
                let n = caps.0.min(caps.1).min(8);
                for conv in [Convention::LoweringConsistent, Convention::PaperLiteral] {
                    out.push(phase_run(p, caps, n, conv, PhaseFlavor::Literal, tol, Gating::Skip)?);
                }
                for j in 0..=6 {
                    match irrep_run(p, j as f64 / 2.0, tol) {
                        Ok((r, _, _)) => out.push(r),
                        Err(Error::EmptyAdmissible(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(out)
        })
        .collect();
    for r in per_point {
        for sub in r? {
            rep.merge(sub);
        }
    }
    let (k, _) = kepler_run(&KeplerParams::from_mu2(1.0, 4.5, 40)?)?;
    rep.merge(k);
    Ok(rep)
}
