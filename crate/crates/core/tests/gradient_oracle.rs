use vav_core::gradcheck::check_gradient;
use vav_core::harness::presets;
use vav_core::problems::{make_sine_regression, rosenbrock_value_grad, Rosenbrock};
use vav_core::rng::{sample_batch, RngStream};
use vav_core::Objective;

fn check_all(obj: &dyn Objective, points: Vec<Vec<f64>>, rng: &mut RngStream) {
    for x in points {
        let batch = (obj.dataset_size() > 0).then(|| sample_batch(rng, obj.dataset_size(), 16).unwrap());
        let check = check_gradient(obj, &x, batch.as_ref(), 1e-6, 1e-4, 1e-8).unwrap();
        assert!(check.passed, "{} at {x:?}: {:?}", obj.name(), check.worst_coordinate);
    }
}

#[test]
fn rosenbrock_known_values() {
    assert_eq!(rosenbrock_value_grad([1.0, 1.0]), (0.0, [0.0, 0.0]));
    let (f, g) = rosenbrock_value_grad([-2.0, -2.0]);
    // direct substitution: 9 + 100 * 36
    assert_eq!(f, 3609.0);
    assert_eq!(g, [-2.0 * 3.0 - 4.0 * 100.0 * -2.0 * -6.0, 200.0 * -6.0]);
}

#[test]
fn every_shipped_problem_passes_at_100_points() {
    let mut rng = RngStream::new(99);
    for cfg in [presets::rosenbrock_rows()[0].clone(), presets::quadratic_vav()] {
        let (p, x0) = cfg.build().unwrap();
        let pts = (0..100).map(|_| x0.iter().map(|_| rng.uniform(-2.5, 2.5)).collect()).collect();
        check_all(&p, pts, &mut rng);
    }
    let plain = Rosenbrock::default();
    let pts = (0..100).map(|_| vec![rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5)]).collect();
    check_all(&plain, pts, &mut rng);

    let sine = make_sine_regression(256, 0.05, 3).unwrap();
    let pts = (0..100).map(|s| sine.init_params(s)).collect();
    check_all(&sine, pts, &mut rng);
}
