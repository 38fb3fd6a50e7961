mod common;

use redlens::nn::Activation;

#[test]
fn every_activation_matches_finite_differences() {
    for (k, act) in Activation::all().into_iter().enumerate() {
        let (model, x, labels) = common::gradcheck_fixture(act, 10 + k as u64);
        let worst = common::gradcheck(&model, &x, &labels, 1e-6, 1e-7);
        assert!(worst < 1e-4, "{act}: worst relative error {worst:e}");
    }
}

#[test]
fn output_gradient_rows_sum_to_zero() {
    let (model, x, labels) = common::gradcheck_fixture(Activation::Sigmoid, 4);
    let (logits, _) = model.forward(&x).unwrap();
    let (_, d) = redlens::nn::softmax_xent(&logits, &labels).unwrap();
    for r in 0..d.rows() {
        let s: f64 = d.row(r).iter().sum();
        assert!(s.abs() < 1e-15, "row {r} sums to {s}");
    }
}
