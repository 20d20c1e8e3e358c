//! Kepler problem on a two-dimensional curved space of curvature λ.
//!
//! The conserved quantities close into a Higgs algebra with
//! `C1 = λ/2 - 4E`, `C3 = 4λ`, and `H = 2(C - μ²)`. On SUM sector `N` this
//! gives `E (1 + N(N+2)) = -2μ² + (λ/8) N(N+2)(1 + N(N+2))`, i.e.
//!
//! ```text
//! E_N = λ N (N+2) / 8 - 2 μ² / (N+1)²
//! ```

use serde::Serialize;

use crate::chain::RadicandPolicy;
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::higgs::{casimir, HiggsParams};
use crate::realize_one::{casimir_first_value, realize_first, FirstKindSpec, FirstVariant};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeplerParams {
    pub lambda: f64,
    pub mu: f64,
    pub n_max: usize,
    /// Also tabulate odd N (not part of the physical spectrum).
    pub include_odd: bool,
}

impl KeplerParams {
    pub fn new(lambda: f64, mu: f64, n_max: usize) -> Self {
        KeplerParams { lambda, mu, n_max, include_odd: false }
    }

    pub fn from_mu2(lambda: f64, mu2: f64, n_max: usize) -> Result<Self> {
        if mu2 < 0.0 {
            return Err(Error::InvalidParam("mu^2 must be nonnegative".into()));
        }
        Ok(Self::new(lambda, mu2.sqrt(), n_max))
    }

    fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::InvalidParam("lambda and mu must be finite".into()));
        }
        if self.n_max % 2 != 0 && !self.include_odd {
            return Err(Error::InvalidParam(format!("N_max = {} must be even", self.n_max)));
        }
        Ok(())
    }

    fn zero_tolerance(&self) -> f64 {
        1e-12 * 1f64.max(self.lambda.abs()).max(self.mu * self.mu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelClass {
    Bound,
    Zero,
    Scattering,
}

impl LevelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LevelClass::Bound => "bound",
            LevelClass::Zero => "zero",
            LevelClass::Scattering => "scattering",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub energy: f64,
    pub degeneracy: usize,
    pub class: LevelClass,
    pub physical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroLevel {
    pub l: usize,
    pub n: usize,
    /// Levels below `N = 2l` with negative energy.
    pub bound_below: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub params: KeplerParams,
    pub rows: Vec<SpectrumRow>,
    pub zero_level: Option<ZeroLevel>,
}

pub fn higgs_params_of(lambda: f64, e: f64) -> HiggsParams {
    HiggsParams::new(lambda / 2.0 - 4.0 * e, 4.0 * lambda)
}

/// Closed-form level `E_N`.
pub fn energy(lambda: f64, mu: f64, n: usize) -> f64 {
    let nf = n as f64;
    lambda * nf * (nf + 2.0) / 8.0 - 2.0 * mu * mu / ((nf + 1.0) * (nf + 1.0))
}

/// Solves the linear self-consistency equation for `E` directly.
pub fn self_consistent_energy(lambda: f64, mu: f64, n: usize) -> f64 {
    let t = (n * (n + 2)) as f64;
    (-2.0 * mu * mu + lambda / 8.0 * t + lambda / 8.0 * t * t) / (1.0 + t)
}

/// `2 (C - μ²)` with the Casimir eigenvalue of sector `N` at `p = higgs_params_of(λ, E)`.
pub fn hamiltonian_from_casimir(lambda: f64, mu: f64, n: usize, e: f64) -> f64 {
    2.0 * (casimir_first_value(&higgs_params_of(lambda, e), 0.0, n) - mu * mu)
}

/// Largest `|2(C_ss - μ²) - E_N|` over sector `N` of the U11 Casimir matrix.
/// The radicands are negative on part of the sector, so the matrix is built
/// with complex square roots; `C` only involves products of paired elements.
pub fn matrix_identity_residual(lambda: f64, mu: f64, n: usize) -> Result<f64> {
    let e = energy(lambda, mu, n);
    let p = higgs_params_of(lambda, e);
    let space = FockSpace { n1_max: n, n2_max: n };
    let spec = FirstKindSpec::new(FirstVariant::U11).with_policy(RadicandPolicy::Complex);
    let r = realize_first(space, &p, &spec)?;
    let c = casimir(&r, &p);
    Ok((0..=n)
        .map(|a| {
            let s = (a, n - a);
            (2.0 * (c.get(s, s) - mu * mu) - e).norm()
        })
        .fold(0.0, f64::max))
}

fn classify_energy(e: f64, tol: f64) -> LevelClass {
    if e.abs() <= tol {
        LevelClass::Zero
    } else if e < 0.0 {
        LevelClass::Bound
    } else {
        LevelClass::Scattering
    }
}

pub fn energy_levels(kp: &KeplerParams) -> Result<SpectrumTable> {
    kp.validate()?;
    let tol = kp.zero_tolerance();
    let rows = (0..=kp.n_max)
        .filter(|n| kp.include_odd || n % 2 == 0)
        .map(|n| {
            let e = energy(kp.lambda, kp.mu, n);
            SpectrumRow { n, energy: e, degeneracy: n + 1, class: classify_energy(e, tol), physical: n % 2 == 0 }
        })
        .collect();
    Ok(SpectrumTable { params: kp.clone(), rows, zero_level: None })
}

/// `l` with `μ²/λ = l(l+½)²(l+1)` to relative 1e-9, searching `l = 0..=64`.
pub fn zero_level_index(lambda: f64, mu: f64) -> Option<usize> {
    if lambda <= 0.0 {
        return None;
    }
    let ratio = mu * mu / lambda;
    (0..=64usize).find(|&l| {
        let lf = l as f64;
        let target = lf * (lf + 0.5).powi(2) * (lf + 1.0);
        if l == 0 {
            ratio.abs() <= 1e-12
        } else {
            (ratio - target).abs() <= 1e-9 * target
        }
    })
}

/// Spectrum plus the zero-level statement: when the condition holds,
/// `E_{2l} = 0` with `l` bound levels below it and scattering levels above.
pub fn classify(kp: &KeplerParams) -> Result<SpectrumTable> {
    let mut table = energy_levels(kp)?;
    if let Some(l) = zero_level_index(kp.lambda, kp.mu) {
        let n = 2 * l;
        let bound_below = table.rows.iter().filter(|r| r.physical && r.n < n && r.energy < 0.0).count();
        // A level that sits exactly on the condition is zero even if the
        // closed form leaves rounding noise above the class tolerance.
        for r in table.rows.iter_mut().filter(|r| r.n == n) {
            if r.energy.abs() <= 1e-10 * 1f64.max(kp.lambda.abs()).max(kp.mu * kp.mu) {
                r.class = LevelClass::Zero;
            }
        }
        table.zero_level = Some(ZeroLevel { l, n, bound_below });
    }
    Ok(table)
}

/// CSV with header `N,E_N,degeneracy,class`, 17 significant digits.
pub fn write_csv<W: std::io::Write>(table: &SpectrumTable, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "E_N", "degeneracy", "class"])?;
    for r in &table.rows {
        let class = if r.physical { r.class.as_str().to_string() } else { format!("{} (unphysical)", r.class.as_str()) };
        w.write_record([r.n.to_string(), format!("{:.16e}", r.energy), r.degeneracy.to_string(), class])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_map() {
        assert_eq!(higgs_params_of(0.0, 1.5), HiggsParams::new(-6.0, 0.0));
        assert_eq!(higgs_params_of(8.0, 1.0), HiggsParams::new(0.0, 32.0));
        assert_eq!(higgs_params_of(1.0, 0.0), HiggsParams::new(0.5, 4.0));
    }

    #[test]
    fn level_examples() {
        assert_eq!(energy(3.0, 1.5, 0), -4.5);
        assert_eq!(self_consistent_energy(3.0, 1.5, 0), -4.5);
        assert_relative_eq!(energy(8.0, 1.0, 2), 70.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(self_consistent_energy(8.0, 1.0, 2), 70.0 / 9.0, max_relative = 1e-15);
        let mu = 4.5f64.sqrt();
        assert!(energy(1.0, mu, 2).abs() < 1e-14);
        assert!(self_consistent_energy(1.0, mu, 2).abs() < 1e-14);
    }

    #[test]
    fn zero_level_l1() {
        let kp = KeplerParams::from_mu2(1.0, 4.5, 8).unwrap();
        let t = classify(&kp).unwrap();
        let z = t.zero_level.clone().unwrap();
        assert_eq!((z.l, z.n, z.bound_below), (1, 2, 1));
        assert_eq!(t.rows[0].class, LevelClass::Bound);
        assert_relative_eq!(t.rows[0].energy, -9.0);
        assert_eq!(t.rows[1].class, LevelClass::Zero);
        assert!(t.rows[2..].iter().all(|r| r.class == LevelClass::Scattering));
        assert!(t.rows.iter().all(|r| r.degeneracy == r.n + 1));
    }

    #[test]
    fn no_zero_level_and_free_case() {
        assert_eq!(zero_level_index(1.0, 15f64.sqrt()), None);
        let t = classify(&KeplerParams::new(2.0, 0.0, 6)).unwrap();
        assert_eq!(t.zero_level.unwrap().n, 0);
        assert!(t.rows.iter().all(|r| r.energy >= 0.0));
        assert!(KeplerParams::new(1.0, 1.0, 5).validate().is_err());
    }

    #[test]
    fn casimir_identity() {
        for n in [0, 2, 4, 8] {
            let e = energy(1.3, 0.7, n);
            assert_relative_eq!(hamiltonian_from_casimir(1.3, 0.7, n, e), e, epsilon = 1e-12);
        }
        assert!(matrix_identity_residual(1.3, 0.7, 6).unwrap() < 1e-10);
    }

    #[test]
    fn csv_layout() {
        let t = classify(&KeplerParams::from_mu2(1.0, 4.5, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "N,E_N,degeneracy,class");
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!((f[0], f[2], f[3]), ("0", "1", "bound"));
        assert!(f[1].contains('e') && f[1].trim_start_matches('-').split('e').next().unwrap().len() == 18);
        assert_relative_eq!(f[1].parse::<f64>().unwrap(), -9.0, max_relative = 1e-15);
        assert!(lines[2].ends_with(",3,zero"));
    }
}
