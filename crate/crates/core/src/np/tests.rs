use num_complex::Complex64;

use super::*;
use crate::expr::{Params, Point, Program};
use crate::frame::{gauge_transform, h_tensor, GaugeTransform, SQRT_2};
use crate::testutil::{self, Golden};

fn evc(q: &ComplexField, p: Point) -> Complex64 {
    q.eval(p, &Params::new()).unwrap()
}

fn assert_const_c(q: &ComplexField, want: Complex64, pts: &[Point], tol: f64) {
    for &p in pts {
        let v = evc(q, p);
        assert!(
            (v - want).norm() < tol,
            "expected {want} got {v} at {p:?}"
        );
    }
}

#[test]
fn convention_calibration_is_frozen() {
    // The sign conventions are pinned, once, by the hyperbolic example:
    // with Ric = -2g the first Sachs residual vanishes only for the chosen
    // Riemann sign together with rho = +g(nabla_delbar xi, del) (so that the
    // warped product has rho = +1, not -1). Any convention drift breaks
    // this test before it can corrupt downstream reports.
    let g = testutil::hyperbolic_kenmotsu();
    let sc = spin_coefficients(&g.m, &g.frame);
    let ric = ricci_frame_components(&g.m, &g.frame);
    assert_const_c(&sc.rho, Complex64::from(1.0), &g.grid.points, 1e-11);
    assert_const_c(&ric.xi_xi, Complex64::from(-2.0), &g.grid.points, 1e-9);
    let res = sachs_residuals(&g.m, &g.frame, &sc);
    assert!(max_residual(&res[..1], &g.grid.points) < 1e-11);
}

#[test]
fn flat_spin_coefficients_vanish() {
    let g = testutil::flat();
    let sc = spin_coefficients(&g.m, &g.frame);
    let zero = Complex64::new(0.0, 0.0);
    for q in [&sc.kappa, &sc.rho, &sc.sigma, &sc.epsilon, &sc.beta] {
        assert_const_c(q, zero, &g.grid.points, 1e-14);
    }
}

#[test]
fn hyperbolic_kenmotsu_oracle() {
    // Hand oracle from nabla_{e2} xi = e2: kappa = sigma = 0, rho = 1.
    let g = testutil::hyperbolic_kenmotsu();
    let sc = spin_coefficients(&g.m, &g.frame);
    assert_const_c(&sc.kappa, 0.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.sigma, 0.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.rho, 1.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.epsilon, 0.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.beta, 0.0.into(), &g.grid.points, 1e-11);
}

#[test]
fn heisenberg_oracle() {
    // CAS oracle (orientation +1): kappa = sigma = Theta = 0, omega = -1/2,
    // epsilon = i/2, beta = 0.
    let g = testutil::heisenberg();
    let sc = spin_coefficients(&g.m, &g.frame);
    assert_const_c(&sc.kappa, 0.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.sigma, 0.0.into(), &g.grid.points, 1e-11);
    assert_const_c(&sc.rho, Complex64::new(0.0, -0.5), &g.grid.points, 1e-11);
    assert_const_c(&sc.epsilon, Complex64::new(0.0, 0.5), &g.grid.points, 1e-11);
    assert_const_c(&sc.beta, 0.0.into(), &g.grid.points, 1e-11);
}

#[test]
fn sheared_contact_oracle() {
    // Milnor-frame oracle, transported to the built frame (a constant
    // gauge rotation by pi): omega = 1, Theta = 0, sigma = -i/4,
    // epsilon = -5i/4, beta = 0.
    let g = testutil::sheared_contact();
    let sc = spin_coefficients(&g.m, &g.frame);
    assert_const_c(&sc.kappa, 0.0.into(), &g.grid.points, 1e-10);
    assert_const_c(&sc.rho, Complex64::new(0.0, 1.0), &g.grid.points, 1e-10);
    assert_const_c(&sc.sigma, Complex64::new(0.0, -0.25), &g.grid.points, 1e-10);
    assert_const_c(&sc.epsilon, Complex64::new(0.0, -1.25), &g.grid.points, 1e-10);
    assert_const_c(&sc.beta, 0.0.into(), &g.grid.points, 1e-10);
}

#[test]
fn warped_sheared_oracle() {
    // f = e^z, h = e^{0.3 z^2}: Theta = (1 + 0.6z)/2, sigma = (0.6z - 1)/2,
    // omega = 0, epsilon = beta = 0.
    let g = testutil::warped_sheared();
    let sc = spin_coefficients(&g.m, &g.frame);
    for &p in &g.grid.points {
        let z = p[2];
        assert!((evc(&sc.rho, p) - Complex64::from((1.0 + 0.6 * z) / 2.0)).norm() < 1e-10);
        assert!((evc(&sc.sigma, p) - Complex64::from((0.6 * z - 1.0) / 2.0)).norm() < 1e-10);
        assert!(evc(&sc.kappa, p).norm() < 1e-11);
        assert!(evc(&sc.epsilon, p).norm() < 1e-11);
        assert!(evc(&sc.beta, p).norm() < 1e-11);
    }
}

#[test]
fn epsilon_is_purely_imaginary() {
    for g in [
        testutil::flat(),
        testutil::heisenberg(),
        testutil::sheared_contact(),
        testutil::remark(),
        testutil::tilted_flat(),
    ] {
        let sc = spin_coefficients(&g.m, &g.frame);
        for &p in &g.grid.points {
            assert!(sc.epsilon.re.eval(p, &g.params).unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn tilted_flat_is_not_geodesic() {
    let g = testutil::tilted_flat();
    let sc = spin_coefficients(&g.m, &g.frame);
    let max_kappa = g
        .grid
        .points
        .iter()
        .map(|&p| evc(&sc.kappa, p).norm())
        .fold(0.0, f64::max);
    assert!(max_kappa > 1e-2, "tilted frame should have kappa != 0");
}

#[test]
fn frame_derivative_examples() {
    let g = testutil::flat();
    let z = ComplexField::from_real(crate::expr::Expr::coord(2));
    let x = ComplexField::from_real(crate::expr::Expr::coord(0));
    let dz = frame_derivative(&z, FrameDir::Xi, &g.frame);
    let dx = frame_derivative(&x, FrameDir::Del, &g.frame);
    for &p in &g.grid.points {
        assert!((evc(&dz, p) - Complex64::from(1.0)).norm() < 1e-15);
        assert!((evc(&dx, p) - Complex64::from(1.0 / SQRT_2)).norm() < 1e-15);
    }
}

#[test]
fn thorn_of_constant_weight_zero_vanishes() {
    let g = testutil::sheared_contact();
    let sc = spin_coefficients(&g.m, &g.frame);
    let q = SpinWeightedField::new(ComplexField::constant(Complex64::new(2.0, -1.0)), 0);
    let pq = thorn(&q, &sc, &g.frame);
    assert_eq!(pq.weight, 0);
    assert_const_c(&pq.value, 0.0.into(), &g.grid.points, 1e-14);
}

#[test]
fn eth_bar_conjugation_identity() {
    // conj(eth_bar(q)) = eth(conj(q)) for random weighted fields
    let g = testutil::heisenberg();
    let sc = spin_coefficients(&g.m, &g.frame);
    let q = SpinWeightedField::new(
        ComplexField::new(testutil::parse("sin(x)*z"), testutil::parse("cos(y) + x")),
        2,
    );
    let lhs = eth_bar(&q, &sc, &g.frame).value.conj();
    let rhs = eth(&q.conj(), &sc, &g.frame).value;
    assert_eq!(eth_bar(&q, &sc, &g.frame).weight, 1);
    assert_eq!(eth(&q.conj(), &sc, &g.frame).weight, -1);
    let diff = lhs.sub(&rhs);
    assert_const_c(&diff, 0.0.into(), &g.grid.points, 1e-11);
}

fn max_residual(res: &[ComplexField], grid: &[Point]) -> f64 {
    let exprs: Vec<crate::expr::Expr> = res
        .iter()
        .flat_map(|q| [q.re.clone(), q.im.clone()])
        .collect();
    let prog = Program::compile(&exprs);
    let mut worst = 0.0f64;
    let params = Params::new();
    for &p in grid {
        let vals = prog.eval(p, &params).unwrap();
        for pair in vals.chunks(2) {
            worst = worst.max(Complex64::new(pair[0], pair[1]).norm());
        }
    }
    worst
}

#[test]
fn sachs_residuals_vanish_on_goldens() {
    for (name, g) in [
        ("flat", testutil::flat()),
        ("hyperbolic", testutil::hyperbolic_kenmotsu()),
        ("heisenberg", testutil::heisenberg()),
        ("sheared_contact", testutil::sheared_contact()),
        ("warped_sheared", testutil::warped_sheared()),
        ("remark", testutil::remark()),
        ("tilted_flat", testutil::tilted_flat()),
    ] {
        let sc = spin_coefficients(&g.m, &g.frame);
        let res = sachs_residuals(&g.m, &g.frame, &sc);
        let worst = max_residual(&res, &g.grid.points);
        assert!(worst < 1e-8, "{name}: worst sachs residual {worst:.3e}");
    }
}

#[test]
fn bianchi_residuals_vanish_on_goldens() {
    for (name, g) in [
        ("flat", testutil::flat()),
        ("hyperbolic", testutil::hyperbolic_kenmotsu()),
        ("heisenberg", testutil::heisenberg()),
        ("sheared_contact", testutil::sheared_contact()),
        ("warped_sheared", testutil::warped_sheared()),
        ("remark", testutil::remark()),
        ("tilted_flat", testutil::tilted_flat()),
    ] {
        let sc = spin_coefficients(&g.m, &g.frame);
        let res = bianchi2_residuals(&g.m, &g.frame, &sc);
        let worst = max_residual(&res, &g.grid.points);
        assert!(worst < 1e-7, "{name}: worst bianchi residual {worst:.3e}");
    }
}

#[test]
fn ricci_frame_component_values() {
    let g = testutil::hyperbolic_kenmotsu();
    let ric = ricci_frame_components(&g.m, &g.frame);
    assert_const_c(&ric.xi_xi, Complex64::from(-2.0), &g.grid.points, 1e-9);
    assert_const_c(&ric.del_delbar, Complex64::from(-2.0), &g.grid.points, 1e-9);
    assert_const_c(&ric.xi_del, 0.0.into(), &g.grid.points, 1e-9);
    assert_const_c(&ric.del_del, 0.0.into(), &g.grid.points, 1e-9);

    // reality of Ric(xi,xi) and Ric(del,delbar) on a generic structure
    let g = testutil::remark();
    let ric = ricci_frame_components(&g.m, &g.frame);
    for &p in &g.grid.points {
        assert!(ric.xi_xi.im.eval(p, &g.params).unwrap().abs() < 1e-10);
        assert!(ric.del_delbar.im.eval(p, &g.params).unwrap().abs() < 1e-10);
    }
}

#[test]
fn kappa_zero_ricci_displays() {
    // With kappa = 0 the Sachs system gives
    //   Ric(xi,xi)   = -2 xi(Theta) - 2|sigma|^2 - 2 Theta^2 + 2 omega^2
    //   Ric(del,del) = P(sigma) + 2 Theta sigma
    // (signs pinned by the warped-product calibration).
    for g in [
        testutil::warped_sheared(),
        testutil::remark(),
        testutil::sheared_contact(),
    ] {
        let sc = spin_coefficients(&g.m, &g.frame);
        let ric = ricci_frame_components(&g.m, &g.frame);
        let theta = ComplexField::from_real(sc.theta());
        let xi_theta = frame_derivative(&theta, FrameDir::Xi, &g.frame);
        let expect_xixi = xi_theta
            .scale_f64(-2.0)
            .sub(&ComplexField::from_real(sc.sigma.modulus_sq()).scale_f64(2.0))
            .sub(&ComplexField::from_real(sc.theta().powi(2)).scale_f64(2.0))
            .add(&ComplexField::from_real(sc.omega().powi(2)).scale_f64(2.0));
        let r1 = ric.xi_xi.sub(&expect_xixi);

        let p_sigma = thorn(&SpinWeightedField::new(sc.sigma.clone(), 2), &sc, &g.frame).value;
        let expect_dd = p_sigma.add(&sc.sigma.scale(&sc.theta()).scale_f64(2.0));
        let r2 = ric.del_del.sub(&expect_dd);

        assert!(max_residual(&[r1, r2], &g.grid.points) < 1e-8);
    }
}

#[test]
fn spin_coefficient_gauge_laws() {
    // epsilon' = epsilon + i xi(theta) with theta = z on the flat frame
    let g = testutil::flat();
    let t = GaugeTransform {
        theta: crate::expr::Expr::coord(2),
    };
    let f2 = gauge_transform(&g.frame, &t);
    let sc2 = spin_coefficients(&g.m, &f2);
    assert_const_c(&sc2.epsilon, Complex64::new(0.0, 1.0), &g.grid.points, 1e-12);

    // full law check on a curved example with non-constant theta
    let g = testutil::heisenberg();
    let theta = testutil::parse("0.3*sin(x + y) + 0.2*z");
    let sc = spin_coefficients(&g.m, &g.frame);
    let f2 = gauge_transform(&g.frame, &GaugeTransform { theta: theta.clone() });
    let sc2 = spin_coefficients(&g.m, &f2);

    let phase = |s: f64| {
        ComplexField::phase(&theta.mul(&crate::expr::Expr::constant(s)))
    };
    let xi_theta = frame_derivative(&ComplexField::from_real(theta.clone()), FrameDir::Xi, &g.frame);
    let del_theta = frame_derivative(&ComplexField::from_real(theta.clone()), FrameDir::Del, &g.frame);

    let laws = [
        sc2.kappa.sub(&phase(1.0).mul(&sc.kappa)),
        sc2.rho.sub(&sc.rho),
        sc2.sigma.sub(&phase(2.0).mul(&sc.sigma)),
        sc2.epsilon.sub(&sc.epsilon.add(&xi_theta.mul_i())),
        sc2.beta.sub(&phase(1.0).mul(&sc.beta.add(&del_theta.mul_i()))),
    ];
    assert!(max_residual(&laws, &g.grid.points) < 1e-10);
}

#[test]
fn h_routes_agree_and_block_matches_sigma() {
    for g in [testutil::heisenberg(), testutil::sheared_contact(), testutil::warped_sheared()] {
        let sc = spin_coefficients(&g.m, &g.frame);
        let acm = crate::frame::AcmStructure::from_frame(&g.frame, &g.m);
        let h_lie = h_tensor(&acm);
        let h_spin = h_from_spin(&sc, &g.frame);
        let mut diffs = Vec::new();
        for k in 0..3 {
            for l in 0..3 {
                diffs.push(ComplexField::from_real(h_lie[k][l].sub(&h_spin[k][l])));
            }
        }
        assert!(max_residual(&diffs, &g.grid.points) < 1e-8);

        // block entries (-Im s, -Re s; -Re s, Im s) for kappa = 0
        let block = h_block(&h_lie, &g.frame, &g.m);
        let want = h_matrix_from_sigma(&sc);
        let mut diffs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                diffs.push(ComplexField::from_real(block[a][b].sub(&want[a][b])));
            }
        }
        assert!(max_residual(&diffs, &g.grid.points) < 1e-8);
    }
}

#[test]
fn h_eigen_report_on_sheared_contact() {
    // eigenvalues are exactly -+|sigma| = -+1/4, constant over the grid
    let g = testutil::sheared_contact();
    let sc = spin_coefficients(&g.m, &g.frame);
    let acm = crate::frame::AcmStructure::from_frame(&g.frame, &g.m);
    let r = h_eigen_report(&acm, &g.m, &sc, &g.grid, &g.params).unwrap();
    assert!(r.eigen_deviation_max < 1e-10);
    assert!(r.route_deviation_max < 1e-10);
    for (_, lam_plus, lam_minus, sigma_abs, _) in &r.per_point {
        assert!((lam_plus - 0.25).abs() < 1e-10);
        assert!((lam_minus + 0.25).abs() < 1e-10);
        assert!((sigma_abs - 0.25).abs() < 1e-10);
    }
}

#[test]
fn xi_omega_identity_on_geodesic_structures() {
    // xi(omega) + 2 Theta omega = 0 whenever kappa = 0
    for g in [testutil::remark(), testutil::warped_sheared(), testutil::heisenberg()] {
        let sc = spin_coefficients(&g.m, &g.frame);
        let omega = ComplexField::from_real(sc.omega());
        let xi_omega = frame_derivative(&omega, FrameDir::Xi, &g.frame);
        let res = xi_omega.add(&ComplexField::from_real(
            sc.theta().mul(&sc.omega()).mul(&crate::expr::Expr::constant(2.0)),
        ));
        assert!(max_residual(&[res], &g.grid.points) < 1e-9);
    }
}

#[test]
fn gauge_invariants_pointwise() {
    // |kappa|, |sigma|, rho are unchanged by an arbitrary gauge rotation
    let g: Golden = testutil::tilted_flat();
    let sc = spin_coefficients(&g.m, &g.frame);
    let f2 = gauge_transform(
        &g.frame,
        &GaugeTransform {
            theta: testutil::parse("x*y - 0.5*z"),
        },
    );
    let sc2 = spin_coefficients(&g.m, &f2);
    for &p in &g.grid.points {
        assert!((evc(&sc.kappa, p).norm() - evc(&sc2.kappa, p).norm()).abs() < 1e-10);
        assert!((evc(&sc.sigma, p).norm() - evc(&sc2.sigma, p).norm()).abs() < 1e-10);
        assert!((evc(&sc.rho, p) - evc(&sc2.rho, p)).norm() < 1e-10);
    }
}
