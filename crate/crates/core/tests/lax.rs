use mvop_core::lax::{ab_by_quadrature, assemble_lax_matrices, verify_structural};
use mvop_core::linalg::two_pi_i;
use mvop_core::*;
use num_complex::Complex64;

#[test]
fn structural_rows_cover_every_identity() {
    let fam = build_family(&WeightSpec::dg1(&[1.0], 1.0, 0.5), 3).unwrap();
    let r = verify_structural(&fam, &compute_lax(&fam, 2).unwrap(), 1e-8).unwrap();
    for id in [
        "liouville_ostrogradski",
        "p_skew_hermitian",
        "q_skew_hermitian",
        "gamma_hermitian",
        "conjugate_b",
        "beta_minus_b",
        "dual_route_a",
        "dual_route_b",
        "a_minus2_two_forms",
        "a_minus2_from_q",
        "q_times_q_inverse",
        "y_minus1_lower_right",
    ] {
        let e = r.find(id, 2).unwrap_or_else(|| panic!("missing {id}"));
        assert!(e.pass && !e.skipped, "{id}: {:.2e}", e.rel_residual);
    }
}

#[test]
fn degree_zero_lax_data() {
    let spec = WeightSpec::dg1(&[1.0], 1.0, 1.0);
    let fam = build_family(&spec, 1).unwrap();
    let lq = compute_lax(&fam, 0).unwrap();
    let b = Weight::new(&spec).unwrap().b().clone();
    assert_eq!(lq.b, CMatrix::zeros(2));
    let conj = &lq.gamma_n * &b * &lq.gamma_inv_n;
    assert!((&lq.bn - &conj).fro() <= 1e-12 * conj.fro());
    let norm = build_family(&spec.clone().normalized(true), 1).unwrap();
    let lqn = compute_lax(&norm, 0).unwrap();
    assert!((&lqn.bn - norm.weight().b()).fro() <= 1e-12);
    assert!(lq.gamma_nm1.is_none() && lq.beta_rec.is_none());
    // a_0 = s M_{−1} M_0⁻¹
    let w = fam.weight();
    let a0 = w.moment(-1).unwrap() * w.moment(0).unwrap().inverse().unwrap() * 1.0;
    assert!((&lq.a - &a0).fro() <= 1e-12 * a0.fro());
}

#[test]
fn quadrature_route_for_a_and_b() {
    let fam = build_family(&WeightSpec::dg1(&[1.0, 2.0], 1.0, 1.0), 3).unwrap();
    for n in 0..=3 {
        let lq = compute_lax(&fam, n).unwrap();
        let (a, b) = ab_by_quadrature(&fam, n).unwrap();
        assert!((&a - &lq.a).fro() <= 1e-8 * (1.0 + lq.a.fro()));
        match b {
            Some(b) => assert!((&b - &lq.b).fro() <= 1e-8 * (1.0 + lq.b.fro())),
            None => assert_eq!(n, 0),
        }
    }
}

#[test]
fn u_matrix_blocks() {
    let fam = build_family(&WeightSpec::dg1(&[1.0], 1.0, 1.0), 3).unwrap();
    let lq = compute_lax(&fam, 2).unwrap();
    let m = assemble_lax_matrices(&lq).unwrap();
    let z = Complex64::new(0.4, 0.0);
    let u = m.u_at(z);
    let id = CMatrix::identity(2);
    assert!((&u.b11 - &(&id * z - &lq.alpha_rec)).fro() < 1e-14);
    assert!((&u.b12 - &(&lq.gamma_inv_n * (1.0 / two_pi_i()))).fro() < 1e-14 * (1.0 + u.b12.fro()));
    assert!((&u.b21 - &(&lq.gamma_n * -two_pi_i())).fro() < 1e-14 * (1.0 + u.b21.fro()));
    assert_eq!(u.b22, CMatrix::zeros(2));
}

#[test]
fn degree_beyond_family_is_rejected() {
    let fam = build_family(&WeightSpec::scalar(1.0, 1.0), 2).unwrap();
    assert!(matches!(compute_lax(&fam, 3), Err(Error::IndexOutOfRange { .. })));
}
