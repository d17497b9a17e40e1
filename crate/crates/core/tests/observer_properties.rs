mod common;

use nalgebra::Complex;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use regforge::lti::{char_poly, tf_to_ss, Matrix, StateSpaceModel, TransferFunction};
use regforge::observer::{
    build_observer_controller, place_observer_poles, place_poles, Convention,
};

fn stable_roots(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    let mut roots = Vec::new();
    while roots.len() < n {
        let re = rng.gen_range(-6.0..-0.3);
        if n - roots.len() >= 2 && rng.gen_bool(0.4) {
            let im = rng.gen_range(0.1..3.0);
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        } else {
            roots.push(Complex64::new(re, 0.0));
        }
    }
    roots
}

fn random_plant(rng: &mut StdRng, n: usize) -> StateSpaceModel {
    let mut den = vec![1.0];
    den.extend((0..n).map(|_| rng.gen_range(-3.0..3.0)));
    let num: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    tf_to_ss(&TransferFunction::from_coeffs(&num, &den).unwrap()).unwrap()
}

fn sorted_close(got: &[Complex<f64>], want: &[Complex64], tol: f64) -> bool {
    let key = |z: &Complex<f64>| (z.re, z.im);
    let mut g: Vec<_> = got.iter().map(key).collect();
    let mut w: Vec<_> = want.iter().map(|z| (z.re, z.im)).collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.iter()
        .zip(&w)
        .all(|(a, b)| (a.0 - b.0).abs() < tol && (a.1 - b.1).abs() < tol)
}

/// Closed-loop characteristic polynomial of the standard observer loop is
/// the product of the regulator and estimator polynomials.
#[test]
fn separation_principle_on_random_designs() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1..=3);
        let plant = random_plant(&mut rng, n);
        if !common::controllable(plant.a(), plant.b())
            || !common::controllable(&plant.a().transpose(), &plant.c().transpose())
        {
            continue;
        }
        let k = place_poles(plant.a(), plant.b(), &stable_roots(&mut rng, n)).unwrap();
        let h = place_observer_poles(plant.a(), plant.c(), &stable_roots(&mut rng, n)).unwrap();
        let ctrl =
            build_observer_controller(&plant, &k, &h, Convention::StandardLuenberger).unwrap();
        assert!(ctrl.error_dynamics().hurwitz);
        let closed = ctrl.close_loop(&plant).unwrap();
        let got = char_poly(closed.a());
        let a_bk = plant.a() - &(plant.b() * &Matrix::row(&k));
        let a_hc = plant.a() - &(h.matrix() * plant.c());
        let want = char_poly(&a_bk).mul(&char_poly(&a_hc));
        assert_eq!(got.degree(), 2 * n);
        for (x, y) in got.coeffs().iter().zip(want.coeffs()) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()), "{got} vs {want}");
        }
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn placed_poles_are_eigenvalues(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let plant = random_plant(&mut rng, n);
        let desired = stable_roots(&mut rng, n);
        let k = place_poles(plant.a(), plant.b(), &desired).unwrap();
        let closed = plant.a() - &(plant.b() * &Matrix::row(&k));
        prop_assert!(sorted_close(&common::eigenvalues(&closed), &desired, 1e-5));
    }

    #[test]
    fn observer_poles_by_duality(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let plant = random_plant(&mut rng, n);
        prop_assume!(common::controllable(&plant.a().transpose(), &plant.c().transpose()));
        let desired = stable_roots(&mut rng, n);
        let h = place_observer_poles(plant.a(), plant.c(), &desired).unwrap();
        let est = plant.a() - &(h.matrix() * plant.c());
        let cond = common::to_na(h.matrix()).norm();
        prop_assume!(cond < 1e6);
        prop_assert!(sorted_close(&common::eigenvalues(&est), &desired, 1e-4));
    }
}

#[test]
fn uncontrollable_pair_is_rejected() {
    let a = Matrix::from_diagonal(&[-1.0, -1.0]);
    let b = Matrix::column(&[1.0, 1.0]);
    let err = place_poles(
        &a,
        &b,
        &[Complex64::new(-2.0, 0.0), Complex64::new(-3.0, 0.0)],
    )
    .unwrap_err();
    assert!(matches!(
        err,
        regforge::Error::Uncontrollable { rank: 1, n: 2 }
    ));
}
