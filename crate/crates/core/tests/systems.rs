use mvop_core::lax::verify_structural;
use mvop_core::systems::*;
use mvop_core::*;

fn lax_at(spec: &WeightSpec, s: f64, n: usize) -> LaxQuantities {
    compute_lax(&build_family(&spec.with_s(s), n).unwrap(), n).unwrap()
}

#[test]
fn structural_scalar_tight() {
    let fam = build_family(&WeightSpec::scalar(1.0, 1.0), 5).unwrap();
    for n in 0..=5 {
        let r = verify_structural(&fam, &compute_lax(&fam, n).unwrap(), 1e-8).unwrap();
        assert!(r.all_pass(), "n={n}: {:?}", r.failures().collect::<Vec<_>>());
    }
}

#[test]
fn discrete_and_closed_discrete_for_three_by_three() {
    for s in [0.5, 1.0, 2.0] {
        let chain = lax_chain(&build_family(&WeightSpec::dg1(&[1.0, 2.0], 1.0, s), 5).unwrap()).unwrap();
        for n in 0..=4 {
            let mut r = residual_dp_system(&chain, n, "", 1e-6).unwrap();
            r.merge(residual_closed_discrete(&chain, n, "", 1e-6, None).unwrap());
            assert!(r.all_pass(), "s={s} n={n}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }
}

#[test]
fn closed_discrete_reading_is_reported() {
    let chain = lax_chain(&build_family(&WeightSpec::dg1(&[1.0], 1.0, 1.0), 4).unwrap()).unwrap();
    let chosen = residual_closed_discrete(&chain, 2, "", 1e-6, None).unwrap();
    let d = chosen.find("second_order_difference_d", 2).unwrap();
    assert!(d.note.as_deref().unwrap().starts_with(&format!("reading: {}", Reading::Inverse.label())));
    let inverse = residual_closed_discrete(&chain, 2, "", 1e-6, Some(Reading::Inverse)).unwrap();
    assert!(inverse.all_pass());
    let literal = residual_closed_discrete(&chain, 2, "", 1e-6, Some(Reading::Literal)).unwrap();
    assert!(literal.find("second_order_difference_d", 2).unwrap().rel_residual > 1e-3);
    assert!(literal.find("bhat_from_ab", 2).unwrap().rel_residual > 1e-3);
}

#[test]
fn n_zero_boundary_skips() {
    let chain = lax_chain(&build_family(&WeightSpec::scalar(1.0, 1.0), 2).unwrap()).unwrap();
    let r = residual_dp_system(&chain, 0, "", 1e-6).unwrap();
    assert!(r.find("dp4_beta_difference", 0).unwrap().skipped);
    assert!(!r.find("dp3_b_quadratic", 0).unwrap().skipped);
    let last = residual_dp_system(&chain, 2, "", 1e-6).unwrap();
    assert!(last.find("dp2_shifted_b", 2).unwrap().skipped);
}

#[test]
fn scalar_reduction_gives_identical_residuals() {
    let spec = WeightSpec::scalar(1.3, 0.9);
    let chain = lax_chain(&build_family(&spec, 4).unwrap()).unwrap();
    for n in 0..=3 {
        let r = residual_dp_system(&chain, n, "", 1.0).unwrap();
        let (lq, nx) = (&chain[n], &chain[n + 1]);
        let v = |m: &CMatrix| m.get(0, 0);
        let dp1 = (v(&lq.alpha_rec) - (2.0 * n as f64 + 1.3 + 1.0 + v(&lq.a))).norm();
        let beta1 = v(nx.beta_rec.as_ref().unwrap());
        let dp3 = (v(&nx.b) * v(&nx.b) - v(&nx.b) * 0.9 - v(&nx.a) * beta1 * v(&lq.a)).norm();
        assert!((r.find("dp1_alpha_rec", n).unwrap().abs_residual - dp1).abs() <= 1e-15 * (1.0 + v(&lq.alpha_rec).norm()));
        assert!((r.find("dp3_b_quadratic", n).unwrap().abs_residual - dp3).abs() <= 1e-14 * (1.0 + v(&nx.b).norm().powi(2)));
    }
}

#[test]
fn continuous_systems_three_by_three() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0, 2.0], 1.0, 1.0)).unwrap();
    for n in 0..=3 {
        let mut r = residual_p_system(&w, n, 1.0, 1e-4, 1e-5).unwrap();
        r.merge(residual_closed_continuous(&w, n, 1.0, 1e-4, 1e-3, 1e-5, 1e-3).unwrap());
        assert!(r.all_pass(), "n={n}: {:?}", r.failures().collect::<Vec<_>>());
    }
}

#[test]
fn second_order_a_equation_records_the_printed_form() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0)).unwrap();
    let r = residual_closed_continuous(&w, 2, 1.0, 1e-4, 1e-3, 1e-5, 1e-3).unwrap();
    let e = r.find("second_order_flow_a", 2).unwrap();
    assert!(e.pass);
    let note = e.note.as_deref().unwrap();
    let printed: f64 = note.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(printed > 1e-2, "{note}");
}

#[test]
fn halving_ratios_near_four() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0)).unwrap();
    let r = fd_halving(&w, 2, 1.0, 0.04, 3, 1e-9).unwrap();
    let ratios: Vec<f64> = r.entries.iter().filter(|e| !e.skipped).map(|e| e.abs_residual).collect();
    assert!(ratios.len() > 10);
    assert!(ratios.iter().all(|&q| (3.5..=4.5).contains(&q)), "{ratios:?}");
}

#[test]
fn evolution_matches_moment_route() {
    for spec in [WeightSpec::scalar(1.0, 1.0), WeightSpec::dg1(&[1.0], 1.0, 1.0)] {
        let w = Weight::new(&spec).unwrap();
        for n in 0..=3 {
            let tr = evolve_from_weight(&w, n, 1.0, 1.6, &OdeOptions::default(), false).unwrap();
            let end = EvolvedState::from_lax(&lax_at(&spec, 1.6, n));
            assert!(tr.last().max_rel_deviation(&end) <= 1e-5, "n={n}");
        }
    }
}

#[test]
fn zero_length_evolution_returns_initial_data() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0)).unwrap();
    let tr = evolve_from_weight(&w, 1, 1.0, 1.0, &OdeOptions::default(), true).unwrap();
    assert_eq!(tr.points.len(), 1);
    let init = EvolvedState::from_lax(&lax_at(w.spec(), 1.0, 1));
    assert_eq!(tr.last().max_rel_deviation(&init), 0.0);
    assert_eq!(tr.to_csv().lines().count(), 2);
}

#[test]
fn evolution_backwards_and_domain() {
    let spec = WeightSpec::scalar(1.0, 1.0);
    let w = Weight::new(&spec).unwrap();
    let tr = evolve_from_weight(&w, 1, 1.5, 0.6, &OdeOptions::default(), false).unwrap();
    assert!(tr.last().max_rel_deviation(&EvolvedState::from_lax(&lax_at(&spec, 0.6, 1))) <= 1e-5);
    assert!(evolve_from_weight(&w, 1, 1.0, 0.01, &OdeOptions::default(), false).is_err());
}

#[test]
fn bootstrap_needs_normalized_frame() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0)).unwrap();
    assert!(matches!(bootstrap_discrete(&w, None, 3), Err(Error::InvalidArgument(_))));
}

#[test]
fn bootstrap_tracks_moment_route() {
    for spec in [WeightSpec::scalar(1.0, 1.0).normalized(true), WeightSpec::dg1(&[1.0, 2.0], 1.0, 0.5).normalized(true)] {
        let steps = bootstrap_discrete(&Weight::new(&spec).unwrap(), None, 4).unwrap();
        for st in &steps {
            assert!(st.deviation <= 1e-6 * 10f64.powi(st.n as i32), "n={} {}", st.n, st.deviation);
        }
    }
}

#[test]
fn bootstrap_flags_a_wrong_start() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0).normalized(true)).unwrap();
    let a0 = w.moment(-1).unwrap() * 1.7;
    assert!(matches!(bootstrap_discrete(&w, Some(a0), 4), Err(Error::IterationDiverged { degree: 0, .. })));
}

#[test]
fn initial_slopes() {
    let w = Weight::new(&WeightSpec::scalar(2.0, 1.0)).unwrap();
    // ȧ_0(0) = Γ(α)/Γ(α+1)
    let d0 = initial_derivatives(&w, 0).unwrap();
    assert_eq!(d0.route, InitialRoute::Overlap);
    assert!((d0.adot.get(0, 0).re - 0.5).abs() < 1e-14);
    assert!(d0.bdot.is_none());
    let wd = Weight::new(&WeightSpec::dg1(&[1.0], 2.0, 1.0)).unwrap();
    assert!(initial_derivatives_by(&wd, 1, InitialRoute::Overlap).is_err());
    for n in 0..=3 {
        let q = initial_derivatives(&wd, n).unwrap();
        assert_eq!(q.route, InitialRoute::Quadrature);
        let slope = &lax_at(wd.spec(), 1e-5, n).a * 1e5;
        assert!((&slope - &q.adot).fro() <= 1e-2 * q.adot.fro(), "n={n}");
    }
}

#[test]
fn painleve_scan_domain() {
    let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0)).unwrap();
    assert!(scalar_piii_residual(&w, 1, &uniform_grid(0.5, 1.0, 0.1).unwrap(), 1e-4).is_err());
    let ws = Weight::new(&WeightSpec::scalar(1.0, 1.0)).unwrap();
    assert!(scalar_piii_residual(&ws, 1, &[0.5, 0.6], 1e-4).is_err());
    assert!(scalar_piii_residual(&ws, 1, &[0.5, 0.6, 0.8], 1e-4).is_err());
    assert!(uniform_grid(1.0, 0.5, 0.1).is_err());
    let scan = scalar_piii_residual(&ws, 2, &uniform_grid(0.8, 1.2, 0.01).unwrap(), 1e-4).unwrap();
    assert!(scan.max_piii <= 1e-3 && scan.max_first_order <= 1e-6);
}

#[test]
fn suite_reports_are_sorted_finite_and_complete() {
    let spec = WeightSpec::dg1(&[1.0], 1.0, 1.0);
    let r = run_suite(&spec, Suite::All, 2, &[1.0, 0.5]).unwrap();
    assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
    for e in r.entries.iter().filter(|e| !e.skipped) {
        assert!(e.abs_residual.is_finite() && e.abs_residual >= 0.0, "{}", e.identity);
        assert!(e.rel_residual.is_finite() && e.rel_residual >= 0.0, "{}", e.identity);
    }
    let keys: Vec<_> = r.entries.iter().map(|e| (e.suite.clone(), e.n, e.identity.clone())).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    let suites: std::collections::BTreeSet<_> = r.entries.iter().map(|e| e.suite.as_str()).collect();
    for s in ["structural", "discrete", "continuous", "closed", "section-final", "orthogonality"] {
        assert!(suites.contains(s), "{s}");
    }
    assert_eq!(run_suite(&spec, Suite::All, 2, &[1.0, 0.5]).unwrap(), r);
}

#[test]
fn section_final_suite_needs_the_special_family() {
    let spec = WeightSpec::scalar(1.0, 1.0);
    assert!(run_suite(&spec, Suite::SectionFinal, 1, &[1.0]).is_err());
    let r = run_suite(&spec, Suite::All, 1, &[1.0]).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("section-final")));
    assert_eq!("section-final".parse::<Suite>().unwrap(), Suite::SectionFinal);
    assert!("everything".parse::<Suite>().is_err());
}
