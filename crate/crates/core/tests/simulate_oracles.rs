//! Simulator output checked against the OU spectral oracle through EDMD.

use transop::basis::{evaluate, Dictionary};
use transop::data::DataPairs;
use transop::estimators::{edmd, eigenfunctions, EdmdOperator};
use transop::simulate::{
    integrate_pairs, ou_oracle, quadratic_gradient, smoluchowski_system, uniform_points,
    NoiseConvention, OuParams,
};

fn lambda2(pairs: &DataPairs) -> f64 {
    let dict = Dictionary::monomials(1, 1).unwrap();
    let fm = evaluate(&dict, pairs).unwrap();
    let spec = eigenfunctions(&edmd(&fm, EdmdOperator::Koopman, 1e-12).unwrap()).unwrap();
    spec.real_eigenvalues(1e-12).unwrap()[1]
}

#[test]
fn quadratic_smoluchowski_is_ou() {
    let tau = 0.5;
    let sys = smoluchowski_system(quadratic_gradient(vec![1.0]), 1.0, 1, NoiseConvention::Standard).unwrap();
    let starts = uniform_points(&[-2.0], &[2.0], 20_000, 4);
    let pairs = integrate_pairs(&sys, &starts, 1e-3, 500, 5).unwrap();
    let exact = ou_oracle(&OuParams::new(1.0, 1.0).unwrap(), 2, tau).unwrap().lambda;
    let est = lambda2(&pairs);
    assert!((est - exact).abs() < 0.03, "{est} vs {exact}");
}

#[test]
fn paper_convention_matches_standard_in_one_dimension() {
    let grad = quadratic_gradient(vec![2.0]);
    let a = smoluchowski_system(grad.clone(), 0.7, 1, NoiseConvention::Standard).unwrap();
    let b = smoluchowski_system(grad, 0.7, 1, NoiseConvention::Paper).unwrap();
    let starts = uniform_points(&[-1.0], &[1.0], 50, 1);
    let pa = integrate_pairs(&a, &starts, 1e-2, 20, 2).unwrap();
    let pb = integrate_pairs(&b, &starts, 1e-2, 20, 2).unwrap();
    assert!(pa.y == pb.y);
}

#[test]
fn euler_maruyama_bias_shrinks_with_step() {
    // αD = 4, τ = 0.25: analytic λ₂ = e^{−1}.
    let (tau, rate) = (0.25, 4.0);
    let sys = smoluchowski_system(quadratic_gradient(vec![rate]), 1.0, 1, NoiseConvention::Standard).unwrap();
    let exact = ou_oracle(&OuParams::new(rate, 1.0).unwrap(), 2, tau).unwrap().lambda;
    let starts = uniform_points(&[-2.0], &[2.0], 200_000, 8);
    let err = |h: f64| {
        let steps = (tau / h).round() as usize;
        (lambda2(&integrate_pairs(&sys, &starts, h, steps, 9).unwrap()) - exact).abs()
    };
    let (coarse, fine) = (err(1e-2), err(1e-3));
    assert!(fine < coarse, "h=1e-2: {coarse}, h=1e-3: {fine}");
}
