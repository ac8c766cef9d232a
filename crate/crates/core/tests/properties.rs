mod common;

use abeta_prion::diagnostics::Context;
use abeta_prion::ode::{self, rhs, OdeOptions, OdeState};
use abeta_prion::pde::{trace_characteristic, CharacteristicField};
use abeta_prion::stability::{
    analyze, characteristic_coefficients, find_steady_state, jacobian_at, polynomial_from_roots, q_evaluate,
    LyapunovCertificate,
};
use abeta_prion::{Parameters, RateModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> impl Strategy<Value = (Parameters, RateModel)> {
    any::<u64>().prop_map(|seed| common::draw(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn q_changes_sign_once((p, r) in model()) {
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let hi = 4.0 * ss.u_inf.max(p.lambda_u / p.gamma_u);
        let xs: Vec<f64> = (0..=400).map(|i| hi * i as f64 / 400.0).collect();
        let q: Vec<f64> = xs.iter().map(|&x| q_evaluate(x, &p, &r).unwrap()).collect();
        let changes = q.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0) && w[1] != 0.0).count();
        prop_assert_eq!(changes, 1);
        prop_assert!(q[0] > 0.0);
    }

    #[test]
    fn coefficients_match_eigenvalues((p, r) in model()) {
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let st = analyze(&ss, &p, &r).unwrap();
        let poly = polynomial_from_roots(&st.eigenvalues);
        let a = characteristic_coefficients(&ss, &p, &r).unwrap();
        for (c, want) in poly.iter().zip(a) {
            prop_assert!((c - want).abs() <= 1e-8 * want.abs(), "{c} vs {want}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences((p, r) in model()) {
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let jac = jacobian_at(&ss, &p, &r).unwrap();
        let base = ss.state().to_array();
        for j in 0..4 {
            let h = 1e-6 * base[j].abs().max(1e-3);
            let (mut hi, mut lo) = (base, base);
            hi[j] += h;
            lo[j] -= h;
            let fh = rhs(&OdeState::from_array(hi), &p, &r).unwrap().to_array();
            let fl = rhs(&OdeState::from_array(lo), &p, &r).unwrap().to_array();
            for i in 0..4 {
                let fd = (fh[i] - fl[i]) / (2.0 * h);
                prop_assert!((fd - jac[i][j]).abs() <= 1e-5 * (1.0 + jac[i][j].abs()), "d{i}/d{j}: {fd} vs {}", jac[i][j]);
            }
        }
    }

    #[test]
    fn routh_hurwitz_holds((p, r) in model()) {
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let st = analyze(&ss, &p, &r).unwrap();
        prop_assert!(st.coefficients.iter().all(|&a| a > 0.0));
        prop_assert!(st.routh_hurwitz.margin > 0.0);
        prop_assert!(st.max_real_part() < 0.0);
    }

    #[test]
    fn prion_balance_identity((p, r) in model(), s in prop::array::uniform5(0.0f64..5.0)) {
        let st = OdeState::from_array(s);
        let d = rhs(&st, &p, &r).unwrap();
        let law = p.lambda_p - p.gamma_p * st.prion - p.delta * st.complex;
        prop_assert!((d.prion + d.complex - law).abs() <= 1e-12 * (1.0 + law.abs() + p.tau * 25.0));
    }

    #[test]
    fn context_hash_is_reproducible((p, r) in model(), tag in "[a-z0-9=;]{0,20}") {
        let a = Context::new(&p, &r, tag.clone()).hash("check");
        prop_assert_eq!(&a, &Context::new(&p, &r, tag.clone()).hash("check"));
        let q = Parameters { tau: p.tau * 1.5, ..p };
        prop_assert_ne!(&a, &Context::new(&q, &r, tag).hash("check"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn characteristic_sandwich(
        x in 1.0f64..30.0,
        s1 in 0.0f64..2.0,
        len in 0.0f64..2.0,
        theta in 0.0f64..1.0,
        c in 0.1f64..3.0,
    ) {
        let s2 = (s1 + len).min(2.0);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
        let u: Vec<f64> = times.iter().map(|t| 0.5 + (2.0 * t).cos().abs()).collect();
        let field = CharacteristicField::new(times, u, RateModel::power_law(c, theta, 0.3, 1.0)).unwrap();
        let a = field.a_bound();
        let x1 = trace_characteristic(x, 0.0, s1, &field).unwrap().position;
        let x2 = trace_characteristic(x, 0.0, s2, &field).unwrap().position;
        prop_assert!(x1 <= x2 * (1.0 + 1e-13));
        prop_assert!(x2 <= x1 * (a * (s2 - s1)).exp() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lyapunov_decreases_along_trajectories(s in prop::array::uniform5(0.0f64..1.0)) {
        let p = common::chain_params();
        let r = RateModel::constant(1.0, 1.0, 1.0);
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let cert = LyapunovCertificate::new(&ss, &p, &r).unwrap();
        let start = OdeState::from_array(s.map(|v| 4.0 * v));
        let traj = ode::integrate(&start, &p, &r, 50.0, &OdeOptions::with_tolerance(1e-11)).unwrap();
        let phi: Vec<f64> = traj.states.iter().map(|x| cert.phi(x)).collect();
        for w in phi.windows(2) {
            prop_assert!(w[1] - w[0] < 1e-9, "{} -> {}", w[0], w[1]);
        }
        for st in &traj.states {
            let v = cert.evaluate(st);
            prop_assert!(v.phi >= -1e-12);
            prop_assert!(v.phi_dot <= 1e-9 && v.phi_dot_chain <= 1e-9);
        }
    }
}

#[test]
fn random_draws_match_oracle_equilibrium() {
    for (p, r) in common::draws(7, 50) {
        let (rho, mu) = r.constants().unwrap();
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let want = common::oracle_state(&p, rho, mu);
        let got = [ss.a_inf, ss.u_inf, ss.p_inf, ss.b_inf];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-10 * w.abs().max(1e-12), "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn benchmark_values_are_frozen() {
    let ss = find_steady_state(&Parameters::unit(), &RateModel::constant(1.0, 1.0, 1.0), 1e-13).unwrap();
    let st = analyze(&ss, &Parameters::unit(), &RateModel::constant(1.0, 1.0, 1.0)).unwrap();
    assert!((ss.u_inf - 0.359_304_085_971_776_43).abs() < 1e-13);
    assert!((ss.p_inf - 0.847_707_598_139_566_6).abs() < 1e-13);
    assert!((ss.b_inf - 0.152_292_401_860_433_47).abs() < 1e-13);
    assert!((st.trace() + 7.566_315_770_083_119).abs() < 1e-12);
}
