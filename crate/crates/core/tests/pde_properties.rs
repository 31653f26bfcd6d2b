use nalgebra::SymmetricEigen;
use nlpdhgm::pde::{
    apply_ds, apply_ds_adjoint, assemble_system, solve_state, DualMetric, PotentialCoefficient,
    UniformMesh1D,
};
use nlpdhgm::problems::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> PotentialCoefficient {
    PotentialCoefficient::with_default_floor(Vector::from_fn(n, |_, _| {
        rng.random_range(1e-3..10.0)
    }))
    .unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn adjoint_identity_in_both_metrics() {
    let mesh = UniformMesh1D::symmetric(100).unwrap();
    let f = Vector::from_element(101, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for metric in [DualMetric::Consistent, DualMetric::Lumped] {
        for _ in 0..100 {
            let x = random_potential(&mut rng, 100);
            let z = solve_state(&mesh, &x, &f).unwrap();
            let h = random_vector(&mut rng, 100);
            let w = random_vector(&mut rng, 101);
            let lhs = metric.inner(&mesh, &apply_ds(&mesh, &x, &z, &h).unwrap().values, &w);
            let rhs = mesh.p0_inner(&h, &apply_ds_adjoint(&mesh, &x, &z, &w, metric).unwrap());
            assert!(
                (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()),
                "{lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn taylor_remainder_is_second_order() {
    let mesh = UniformMesh1D::symmetric(100).unwrap();
    let f = Vector::from_element(101, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = random_potential(&mut rng, 100);
        let h = random_vector(&mut rng, 100).map(|v| v + 1.5);
        let z = solve_state(&mesh, &x, &f).unwrap();
        let dz = apply_ds(&mesh, &x, &z, &h).unwrap().values;
        let eps: Vec<f64> = (0..7).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect();
        let logs: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                let xe = PotentialCoefficient::with_default_floor(x.values() + &h * e).unwrap();
                let ze = solve_state(&mesh, &xe, &f).unwrap().values;
                let r = (ze - &z.values - &dz * e).norm();
                (e.ln(), r.ln())
            })
            .collect();
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!(slope >= 1.9, "slope {slope}");
    }
}

#[test]
fn system_is_positive_definite_on_sampled_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2, 5, 17, 50] {
        let mesh = UniformMesh1D::new(-1.0, 1.0, n).unwrap();
        for _ in 0..10 {
            let x = random_potential(&mut rng, n);
            let a = assemble_system(&mesh, &x).unwrap().to_dense();
            let eig = SymmetricEigen::new(a);
            assert!(eig.eigenvalues.min() > 0.0);
        }
    }
}

#[test]
fn constant_data_is_solved_exactly() {
    for n in [2, 3, 50, 1000] {
        let mesh = UniformMesh1D::symmetric(n).unwrap();
        for (c, fval) in [(2.0, 1.0), (0.25, 3.0), (7.0, -2.0), (1e-3, 1.0)] {
            let x = PotentialCoefficient::constant(&mesh, c).unwrap();
            let z = solve_state(&mesh, &x, &Vector::from_element(n + 1, fval)).unwrap();
            for v in z.values.iter() {
                assert!(
                    (v - fval / c).abs() <= 1e-12 * (fval / c).abs().max(1.0),
                    "n={n} c={c} err={}",
                    (v - fval / c).abs()
                );
            }
        }
    }
}

#[test]
fn state_map_is_lipschitz_on_the_box() {
    let mesh = UniformMesh1D::symmetric(60).unwrap();
    let f = Vector::from_element(61, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x1 = random_potential(&mut rng, 60);
        let x2 = random_potential(&mut rng, 60);
        let z1 = solve_state(&mesh, &x1, &f).unwrap().values;
        let z2 = solve_state(&mesh, &x2, &f).unwrap().values;
        let dz = DualMetric::Consistent
            .inner(&mesh, &(&z1 - &z2), &(&z1 - &z2))
            .sqrt();
        let dx = x1.values() - x2.values();
        worst = worst.max(dz / mesh.p0_inner(&dx, &dx).sqrt());
    }
    // ||S(x₁) - S(x₂)|| ≤ C ||x₁ - x₂|| with a moderate C uniformly over the box
    assert!(worst.is_finite() && worst < 1e3, "ratio {worst}");
}

#[test]
fn coefficient_below_floor_is_rejected() {
    let err = PotentialCoefficient::with_default_floor(Vector::from_element(4, 1e-4)).unwrap_err();
    assert_eq!(err.category(), "coefficient");
}
