use proptest::prelude::*;

use polyfock::chain::{telescoped_product, Family};
use polyfock::fock::{build_space, window_residual, LinOp, Window};
use polyfock::higgs::{higgs_residuals, HiggsParams};
use polyfock::kepler;
use polyfock::phase::{higgs_phase, Convention};
use polyfock::realize_one::{closing_window, realize_first, FirstKindSpec, FirstVariant};
use polyfock::realize_two::{realize_second, SecondKindSpec, SecondVariant};
use polyfock::unitarize::{check_conjugation, similarity_diag, Flavor};

fn positive() -> impl Strategy<Value = HiggsParams> {
    (0.1f64..8.0, 0.1f64..8.0).prop_map(|(a, b)| HiggsParams::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_kind_u11_satisfies_higgs(p in positive(), n1 in 3i64..9, n2 in 3i64..9) {
        let sp = build_space(n1, n2).unwrap();
        let r = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let w = closing_window(sp, &p, 1, 1, 0.0);
        let rep = higgs_residuals(&r, &p, &w, 1e-9).unwrap();
        prop_assert!(rep.max() <= 1e-9 * (1.0 + p.c3 * ((n1 + n2) as f64).powi(3)), "{}", rep.max());
        prop_assert!(r.adjoint_gap() <= 1e-12);
    }

    #[test]
    fn second_kind_d11_satisfies_higgs(c1 in -8.0f64..-0.1, c3 in -8.0f64..-0.1) {
        let p = HiggsParams::new(c1, c3);
        let sp = build_space(8, 8).unwrap();
        let r = realize_second(sp, &p, &SecondKindSpec::new(SecondVariant::D11)).unwrap();
        let rep = higgs_residuals(&r, &p, &Window::margin(sp, 1), 1e-9).unwrap();
        prop_assert!(rep.max() <= 1e-8, "{}", rep.max());
    }

    #[test]
    fn telescoped_product_difference(c1 in -8.0f64..8.0, c3 in -8.0f64..8.0, a in 0usize..12, b in 0usize..12) {
        let p = HiggsParams::new(c1, c3);
        let f = Family::First;
        let next = (a + 1, b.saturating_sub(1));
        prop_assume!(b >= 1);
        let lhs = telescoped_product(f, 1, 1, &p, 0.0, (a, b)) - telescoped_product(f, 1, 1, &p, 0.0, next);
        let h = f.h(1, 1, 0.0, (a, b));
        let rhs = p.structure(h);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn phase_pair_is_adjoint_and_shifts_j3(p in positive()) {
        let sp = build_space(6, 6).unwrap();
        let ops = higgs_phase(sp, &p, Convention::LoweringConsistent).unwrap();
        prop_assert_eq!(ops.eminus.max_abs_diff(&ops.eplus.adjoint()).unwrap(), 0.0);
        let j3 = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap().j3;
        let shifted = j3.commutator(&ops.eplus).unwrap().add(&ops.eplus).unwrap();
        prop_assert!(shifted.max_abs() <= 1e-12);
    }

    #[test]
    fn similarity_survives_chain_rescaling(c1 in 0.5f64..6.0, c3 in 0.5f64..6.0, k in 0.1f64..5.0) {
        let p = HiggsParams::new(c1, c3);
        let sp = build_space(6, 6).unwrap();
        let u = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::U11)).unwrap();
        let d = realize_first(sp, &p, &FirstKindSpec::new(FirstVariant::D11)).unwrap();
        let s = similarity_diag(Flavor::S1, &p, sp).unwrap().rescale_chains(|f| k + f.0 as f64);
        let w = Window::full(sp);
        let rep = check_conjugation(&s, &d, &u, &w, 1e-8).unwrap();
        prop_assert!(rep.pass, "{}", rep.max());
    }

    #[test]
    fn kepler_closed_form_is_self_consistent(lambda in -3.0f64..3.0, mu in 0.1f64..4.0, n in 0usize..40) {
        let a = kepler::energy(lambda, mu, n);
        let b = kepler::self_consistent_energy(lambda, mu, n);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn adjoint_is_an_involution(re in proptest::collection::vec(-5.0f64..5.0, 25), im in proptest::collection::vec(-5.0f64..5.0, 25)) {
        let sp = build_space(4, 0).unwrap();
        let m = LinOp::shift(sp, (1, 0), |s| num_complex::Complex64::new(re[s.0], im[s.0]))
            .add(&LinOp::diag(sp, |s| num_complex::Complex64::new(im[s.0 + 5], re[s.0 + 5]))).unwrap();
        prop_assert_eq!(m.adjoint().adjoint().max_abs_diff(&m).unwrap(), 0.0);
        let r = window_residual(&m.adjoint().compose(&m).unwrap(), &m.adjoint().compose(&m).unwrap().adjoint(), &Window::full(sp)).unwrap();
        prop_assert!(r <= 1e-12);
    }
}
