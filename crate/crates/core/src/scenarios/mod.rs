//! Concrete device models, their readout, and comparison with the closed forms.
//!
//! Builders are generic over the scalar; the JSON-facing config layer is `f64`.
//! Quantum runs are meant for desk-scale pumps (a few photons); the
//! 1e10-photon regime of real devices is covered by the closed forms only.

mod build;
mod config;
mod run;

pub use build::{
    build_asymmetric, build_noon, build_physical_two_mode, build_physical_two_mode_from_inputs, build_semiclassical,
    build_three_waveguide, build_two_mode, FrameFn, Scenario, ScenarioKind, MAX_NOON_DIM,
};
pub use config::{
    run_and_compare, run_config, PhysicalCoupling, RunMode, ScenarioConfig, ScenarioOutput, SolverConfig, TimeGrid,
    MAX_TIME_POINTS, SCENARIO_SCHEMA,
};
pub use run::{
    analytic_curves, compare, compared_observables, deviation_columns, fit_decay_rate, peak_relative_deviation, relative_deviation, simulate,
    ComparisonReport, Curves, DeviationMetric, ObservableDeviation, ScenarioRun, BASE_COLUMNS, NOON_COLUMNS,
    NOON_RATIO_TOLERANCE, NOON_SETTLE, SOLVER_ALLOWANCE, VALIDITY_LIMIT,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::PairGenParams;
    use crate::error::ScenarioError;
    use crate::fock::{destroy, embed, Operator};
    use crate::lindblad::{Hamiltonian, SolverOptions};
    use crate::scalar::C;

    fn params(u: f64, gamma: f64, big: f64, a: f64) -> PairGenParams<f64> {
        PairGenParams::new(u, gamma, big, a).unwrap()
    }

    fn grid(stop: f64, n: usize) -> Vec<f64> {
        TimeGrid::uniform(0.0, stop, n).samples().unwrap()
    }

    fn opts() -> SolverOptions<f64> {
        SolverOptions::default()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn static_h(s: &Scenario<f64>) -> Operator<f64> {
        match s.model.hamiltonian() {
            Hamiltonian::Static(h) => h.clone(),
            _ => panic!("expected a static Hamiltonian"),
        }
    }

    #[test]
    fn two_mode_without_kerr_leaves_pair_mode_empty() {
        let s = build_two_mode(&params(0.0, 0.5, 10.0, 2.0), [12, 4]).unwrap();
        let run = simulate(&s, &grid(1.0, 11), &opts()).unwrap();
        assert!(run.curves.get("n_minus").unwrap().iter().all(|x| x.abs() < 1e-14));
        let n = run.curves.get("n_plus").unwrap();
        assert!((n[10] - 2.0 * (-10.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn two_mode_hamiltonian_is_hermitian_and_keeps_parity() {
        let dims = [8, 5];
        let s = build_two_mode(&params(0.3, 0.0, 4.0, 1.5), dims).unwrap();
        let h = static_h(&s);
        assert!(h.hermiticity_residual() < 1e-14);
        let parity = Operator::diagonal(&dims, |i| {
            let n = i / dims[1] + i % dims[1];
            C::from(if n % 2 == 0 { 1.0 } else { -1.0 })
        })
        .unwrap();
        assert!(h.commutator(&parity).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn physical_and_collective_bases_agree() {
        let p = params(0.2, 0.3, 6.0, 1.0);
        let times = grid(1.5, 16);
        let col = simulate(&build_two_mode(&p, [14, 6]).unwrap(), &times, &opts()).unwrap();
        let phys = simulate(&build_physical_two_mode(&p, [12, 12]).unwrap(), &times, &opts()).unwrap();
        for name in ["n_plus", "n_minus", "p1", "p2"] {
            let d = max_abs_diff(col.curves.get(name).unwrap(), phys.curves.get(name).unwrap());
            assert!(d < 1e-6, "{name}: {d}");
        }
    }

    #[test]
    fn antisymmetric_input_is_dark() {
        let p = params(0.0, 0.4, 8.0, 2.0);
        let a = C::new(1.0, 0.0);
        let s = build_physical_two_mode_from_inputs(&p, [12, 12], [a, -a]).unwrap();
        let times = grid(2.0, 5);
        let run = simulate(&s, &times, &opts()).unwrap();
        let np = run.curves.get("n_plus").unwrap();
        let nm = run.curves.get("n_minus").unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert!(np[i].abs() < 1e-7, "{}", np[i]);
            assert!((nm[i] - 2.0 * (-0.4 * t).exp()).abs() < 1e-7, "{}", nm[i]);
        }
    }

    #[test]
    fn lossless_semiclassical_run_has_no_odd_photons() {
        let s = build_semiclassical(&params(0.5, 0.0, 5.0, 2.0), 8).unwrap();
        let times = grid(2.0, 21);
        let mut odd_max = 0.0f64;
        let model = &s.model;
        crate::lindblad::propagate(model, &s.initial, &times, &opts(), |_, _, rho| {
            let odd: f64 = (1..8).step_by(2).map(|n| rho.get(n, n).re).sum();
            odd_max = odd_max.max(odd.abs());
            Ok(())
        })
        .unwrap();
        assert!(odd_max < 1e-10, "{odd_max}");
    }

    #[test]
    fn symmetric_asymmetric_model_matches_three_waveguide() {
        let p = params(0.1, 0.2, 8.0, 1.0);
        let a = build_asymmetric(2.0, 0.0, 4.0, &p, [6, 6, 3]).unwrap();
        let b = build_three_waveguide(2.0, 4.0, &p, [6, 6, 3]).unwrap();
        assert_eq!(static_h(&a).max_abs_diff(&static_h(&b)), 0.0);
        assert_eq!(b.kind, ScenarioKind::ThreeWaveguide);
        assert_eq!(b.effective.big_gamma, 8.0);
    }

    #[test]
    fn uncoupled_waveguides_only_feel_linear_loss() {
        let p = params(0.0, 0.5, 1.0, 2.0);
        let s = build_three_waveguide(0.0, 4.0, &p, [12, 12, 3]).unwrap();
        let times = grid(1.0, 3);
        let run = simulate(&s, &times, &opts()).unwrap();
        let total: Vec<f64> = run.curves.get("n_plus").unwrap().iter().zip(run.curves.get("n_minus").unwrap()).map(|(a, b)| a + b).collect();
        for (n, t) in total.iter().zip(&times) {
            assert!((n - 2.0 * (-0.5 * t).exp()).abs() < 1e-7, "{n}");
        }
    }

    #[test]
    fn decoupled_reduced_noon_halves() {
        let p = params(0.2, 0.0, 4.0, 1.0);
        let times = grid(2.0, 9);
        let noon = simulate(&build_noon(&p, &[6, 6], true).unwrap(), &times, &opts()).unwrap();
        let single = simulate(&build_semiclassical(&p, 6).unwrap(), &times, &opts()).unwrap();
        assert!(noon.curves.get("p11").unwrap().iter().all(|x| x.abs() < 1e-12));
        let d = max_abs_diff(noon.curves.get("p2").unwrap(), single.curves.get("p2").unwrap());
        assert!(d < 1e-9, "{d}");
        let (p2, p0) = (single.curves.get("p2").unwrap(), single.curves.get("p0").unwrap());
        let product: Vec<f64> = p2.iter().zip(p0).map(|(a, b)| a * b).collect();
        assert!(max_abs_diff(noon.curves.get("p20").unwrap(), &product) < 1e-9);
    }

    #[test]
    fn collective_noon_guard() {
        let p = params(0.1, 0.0, 4.0, 1.0);
        assert!(matches!(build_noon(&p, &[8, 8, 8, 9], false), Err(ScenarioError::InvalidConfig(_))));
        assert!(build_noon(&p, &[4, 4, 4], false).is_err());
        assert!(build_noon(&p, &[4, 4, 4, 4], false).is_ok());
    }

    #[test]
    fn truncation_guard_is_enforced() {
        let p = params(0.1, 0.0, 4.0, 3.0);
        assert!(matches!(build_two_mode(&p, [10, 4]), Err(ScenarioError::Fock(_))));
        assert!(build_two_mode(&p, [12, 2]).is_err());
    }

    #[test]
    fn readout_operators_match_mode_algebra() {
        let s = build_two_mode(&params(0.1, 0.0, 4.0, 1.0), [6, 4]).unwrap();
        let am = embed(&destroy::<f64>(4).unwrap(), 1, &[6, 4]).unwrap();
        let n = &am.dagger() * &am;
        assert!(s.observable("n_minus").unwrap().max_abs_diff(&n) < 1e-15);
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let times = grid(3.0, 31);
        let y: Vec<f64> = times.iter().map(|t| 5.0 * (-1.7 * t).exp()).collect();
        let r = fit_decay_rate(&times, &y, (0.5, 2.5)).unwrap();
        assert!((r - 1.7).abs() < 1e-12);
        assert!(fit_decay_rate(&times, &y, (10.0, 11.0)).is_err());
    }

    #[test]
    fn relative_deviation_uses_a_floor() {
        let a = [0.0f64, 1e-6, 1.0];
        let q = [1e-5f64, 2e-6, 1.1];
        let d = relative_deviation(&q, &a);
        assert!((d[0] - 1e-2).abs() < 1e-12);
        assert!((d[1] - 1e-3).abs() < 1e-12);
        assert!((d[2] - 0.1).abs() < 1e-12);
        assert_eq!(relative_deviation(&[3e-9], &[0.0]), vec![3e-9]);
    }

    fn weak_two_mode(lambda: f64) -> ScenarioConfig {
        let (big, a) = (20.0, 2.0);
        let p = params(lambda * big / a, 1.0, big, a);
        ScenarioConfig::new(ScenarioKind::TwoModeCollective, p, vec![14, 6], TimeGrid::uniform(0.0, 0.5, 26))
    }

    #[test]
    fn weak_pump_two_mode_passes_comparison() {
        let out = run_and_compare(&weak_two_mode(0.0025)).unwrap();
        let rep = out.report.unwrap();
        assert!(!rep.validity_breach);
        assert!(rep.pass, "{rep:#?}");
        for name in ["analytic_n_plus", "rel_dev_n_minus", "rel_dev_p2"] {
            assert!(out.table.get(name).is_some(), "{name}");
        }
    }

    #[test]
    fn strong_pump_is_flagged() {
        let rep = run_and_compare(&weak_two_mode(0.25)).unwrap().report.unwrap();
        assert!(rep.validity_breach);
        assert!(rep.lambda > VALIDITY_LIMIT);
    }

    #[test]
    fn no_kerr_means_no_deviation() {
        let mut cfg = weak_two_mode(0.0);
        cfg.params.gamma = 0.0;
        let rep = run_and_compare(&cfg).unwrap().report.unwrap();
        assert!(rep.pass, "{rep:#?}");
        for d in &rep.deviations {
            assert!(d.max_deviation < 1e-5, "{d:?}");
        }
    }

    #[test]
    fn analytic_mode_needs_no_dims() {
        let p = params(1e-10, 1.0, 400.0, 1e10);
        let mut cfg = ScenarioConfig::new(ScenarioKind::TwoModeCollective, p, vec![], TimeGrid::uniform(0.0, 0.2, 5));
        cfg.mode = RunMode::Analytic;
        let out = run_config(&cfg).unwrap();
        assert_eq!(out.table.columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), BASE_COLUMNS);
        cfg.mode = RunMode::Quantum;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trip_and_errors() {
        let cfg = weak_two_mode(0.01);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
        let err = ScenarioConfig::from_json(&text.replace("\"gamma\"", "\"gama\"")).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        assert!(ScenarioConfig::from_json(&text.replace(SCENARIO_SCHEMA, "pairgen.scenario/0")).is_err());
        let mut three = cfg.clone();
        three.kind = ScenarioKind::ThreeWaveguide;
        three.dims = vec![6, 6, 3];
        assert!(three.validate().is_err());
        three.physical = Some(PhysicalCoupling { g: 5.0, gamma3: 10.0, delta: 0.0 });
        assert!(three.validate().is_ok());
        three.physical = Some(PhysicalCoupling { g: 5.0, gamma3: 20.0, delta: 0.0 });
        assert!(three.validate().is_err());
    }

    #[test]
    fn time_grids() {
        assert_eq!(TimeGrid::uniform(0.0, 1.0, 3).samples().unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(TimeGrid::uniform(0.0, 1.0, 0).samples().is_err());
        assert!(TimeGrid::explicit(vec![0.0, 0.0]).samples().is_err());
        assert!(TimeGrid::explicit(vec![]).samples().is_err());
        assert!(TimeGrid::default().samples().is_err());
    }
}
