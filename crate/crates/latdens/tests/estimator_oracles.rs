//! Estimator checks against dense solvers, Fourier-side closed forms, and
//! statistical expectations.

use latdens::estimator::{
    assemble_rhs, assemble_system, circulant_solve, exact_rhs, fit, fit_exact, fit_from_rhs,
};
use latdens::kernel::{KorobovKernel, ProductWeights};
use latdens::lattice::LatticeRule;
use latdens::rng::derive_rng;
use latdens::sampling::TestDensity;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn dense_solve(rule: &LatticeRule, kernel: &KorobovKernel, lambda: f64, b: &[f64]) -> Vec<f64> {
    let points = rule.points();
    let n = points.len();
    let a = DMatrix::from_fn(n, n, |j, k| {
        kernel.l2_eval(&points[j], &points[k]).unwrap()
            + lambda * kernel.eval(&points[j], &points[k]).unwrap()
    });
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("dense system is nonsingular");
    x.iter().copied().collect()
}

fn random_rule(n: u64, d: usize, rng: &mut impl Rng) -> LatticeRule {
    let z: Vec<u64> = (0..d).map(|_| rng.gen_range(1..n.max(2))).collect();
    LatticeRule::new(n, z).unwrap()
}

#[test]
fn gram_matrix_entries_expand_the_first_row() {
    let rule = LatticeRule::new(7, vec![1, 3, 5]).unwrap();
    let kernel =
        KorobovKernel::new(2.0, ProductWeights::polynomial_decay(3, 2.0).unwrap()).unwrap();
    let lambda = 0.2;
    let sys = assemble_system(&rule, &kernel, lambda).unwrap();
    let points = rule.points();
    for j in 0..7usize {
        for k in 0..7usize {
            let dense = kernel.l2_eval(&points[j], &points[k]).unwrap()
                + lambda * kernel.eval(&points[j], &points[k]).unwrap();
            let circulant = sys.first_row()[(k + 7 - j) % 7];
            assert!(
                (dense - circulant).abs() <= 1e-13 * dense.abs(),
                "entry ({j},{k}): dense {dense}, circulant {circulant}"
            );
        }
    }
}

#[test]
fn circulant_and_dense_solutions_agree() {
    let mut rng = derive_rng(77, 0);
    for &n in &[2u64, 3, 5, 7, 11] {
        for &d in &[1usize, 2, 6] {
            let alpha = if rng.gen::<bool>() { 2.0 } else { 4.0 };
            let weights = ProductWeights::polynomial_decay(d, alpha).unwrap();
            let kernel = KorobovKernel::new(alpha, weights).unwrap();
            let rule = random_rule(n, d, &mut rng);
            let lambda = 10f64.powf(rng.gen_range(-3.0..0.0));
            let density = TestDensity::new(d).unwrap();
            let (sample, _) = density.sample(25, rng.gen());
            let b = assemble_rhs(&rule, &kernel, &sample).unwrap();

            let fast = circulant_solve(
                assemble_system(&rule, &kernel, lambda).unwrap().first_row(),
                &b,
            )
            .unwrap();
            let dense = dense_solve(&rule, &kernel, lambda, &b);
            let err: f64 = fast
                .iter()
                .zip(&dense)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(
                err <= 1e-10 * norm,
                "N {n}, d {d}: relative gap {}",
                err / norm
            );
        }
    }
}

#[test]
fn exact_functional_matches_truncated_embedding() {
    // Closed-form route vs the generic truncated-Fourier mean embedding.
    for (d, alpha, h_max) in [(1usize, 2.0, 64i64), (2, 2.0, 48), (2, 4.0, 32)] {
        let weights = ProductWeights::polynomial_decay(d, alpha).unwrap();
        let kernel = KorobovKernel::new(alpha, weights).unwrap();
        let rule = match d {
            1 => LatticeRule::new(11, vec![1]).unwrap(),
            _ => LatticeRule::new(11, vec![1, 7]).unwrap(),
        };
        let density = TestDensity::new(d).unwrap();
        let closed = exact_rhs(&rule, &kernel, &density).unwrap();

        let coeffs = density.fourier_coefficients(h_max).unwrap();
        let embedding = kernel.mean_embedding(&coeffs).unwrap();
        for (k, b_closed) in (1..=rule.modulus()).zip(&closed) {
            let b_series = embedding.eval(&rule.point(k));
            assert!(
                (b_closed - b_series).abs() <= 1e-8,
                "d {d}, alpha {alpha}, point {k}: closed {b_closed}, series {b_series}"
            );
        }
    }
}

#[test]
fn exact_functional_matches_direct_quadrature() {
    let kernel = KorobovKernel::new(2.0, ProductWeights::new(vec![1.0]).unwrap()).unwrap();
    let rule = LatticeRule::new(7, vec![1]).unwrap();
    let density = TestDensity::new(1).unwrap();
    let closed = exact_rhs(&rule, &kernel, &density).unwrap();

    // The alpha = 2 kernel has a derivative kink at the diagonal, so the
    // rectangle rule converges at O(n^-2); 2^20 nodes push that to ~2e-12.
    let n = 1 << 20;
    for (k, b_closed) in (1..=7u64).zip(&closed) {
        let x = rule.point(k);
        let quad: f64 = (0..n)
            .map(|i| {
                let y = [i as f64 / n as f64];
                kernel.eval(&x, &y).unwrap() * density.eval(&y).unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!(
            (b_closed - quad).abs() <= 1e-10,
            "point {k}: closed {b_closed}, quadrature {quad}"
        );
    }
}

/// Dual-lattice Fourier mass of the plain (`exponent = alpha`) or squared
/// (`exponent = 2 alpha`, squared weights) kernel: the lattice average of
/// the kernel row equals the sum of reciprocal weights over frequencies
/// aliasing to zero.
fn dual_lattice_mass(rule: &LatticeRule, gamma: &[f64], exponent: i32, h_max: i64) -> f64 {
    let n = rule.modulus() as i64;
    let z = rule.generating_vector();
    match gamma.len() {
        1 => {
            let mut total = 1.0;
            for h in -h_max..=h_max {
                if h != 0 && (h * z[0] as i64).rem_euclid(n) == 0 {
                    total += gamma[0] * (h.abs() as f64).powi(-exponent);
                }
            }
            total
        }
        2 => {
            let mut total = 0.0;
            for h1 in -h_max..=h_max {
                for h2 in -h_max..=h_max {
                    if (h1 * z[0] as i64 + h2 * z[1] as i64).rem_euclid(n) != 0 {
                        continue;
                    }
                    let mut term = 1.0;
                    if h1 != 0 {
                        term *= gamma[0] * (h1.abs() as f64).powi(-exponent);
                    }
                    if h2 != 0 {
                        term *= gamma[1] * (h2.abs() as f64).powi(-exponent);
                    }
                    total += term;
                }
            }
            total
        }
        _ => unreachable!(),
    }
}

#[test]
fn uniform_target_integral_matches_dual_lattice_oracle() {
    // The all-ones right-hand side is the exact embedding of the uniform
    // density; the fitted integral has the closed form
    // 1 / (G2_0 + lambda G_0) with the dual-lattice masses G_0, G2_0.
    for (rule, gamma) in [
        (LatticeRule::new(7, vec![1]).unwrap(), vec![1.0]),
        (
            LatticeRule::new(5, vec![1, 2]).unwrap(),
            vec![1.0, 1.0 / 16.0],
        ),
    ] {
        let alpha = 4.0;
        let kernel =
            KorobovKernel::new(alpha, ProductWeights::new(gamma.clone()).unwrap()).unwrap();
        let lambda = 0.3;
        let sys = assemble_system(&rule, &kernel, lambda).unwrap();
        let est = fit_from_rhs(&sys, &vec![1.0; rule.point_count()]).unwrap();

        let g = dual_lattice_mass(&rule, &gamma, 4, 200);
        let gamma_sq: Vec<f64> = gamma.iter().map(|g| g * g).collect();
        let g2 = dual_lattice_mass(&rule, &gamma_sq, 8, 200);
        let oracle = 1.0 / (g2 + lambda * g);
        assert!(
            (est.integral() - oracle).abs() <= 1e-7 * oracle,
            "integral {}, oracle {oracle}",
            est.integral()
        );

        let residual = est
            .galerkin_residual(&vec![1.0; rule.point_count()])
            .unwrap();
        assert!(residual <= 1e-10, "residual {residual}");
    }
}

#[test]
fn stronger_regularization_shrinks_the_estimate() {
    let rule = LatticeRule::new(11, vec![1, 7]).unwrap();
    let kernel =
        KorobovKernel::new(2.0, ProductWeights::polynomial_decay(2, 2.0).unwrap()).unwrap();
    let density = TestDensity::new(2).unwrap();
    let mut lambda = 1.0;
    let mut previous_norm = f64::NEG_INFINITY;
    for _ in 0..12 {
        let est = fit_exact(&rule, &kernel, lambda, &density).unwrap();
        let norm = est.rkhs_norm_squared();
        assert!(
            norm >= previous_norm - 1e-12,
            "norm {norm} fell below {previous_norm} at lambda {lambda}"
        );
        previous_norm = norm;
        lambda *= 0.7;
    }
}

#[test]
fn sampled_coefficients_are_unbiased_for_the_exact_fit() {
    let rule = LatticeRule::new(5, vec![1]).unwrap();
    let kernel = KorobovKernel::new(2.0, ProductWeights::new(vec![1.0]).unwrap()).unwrap();
    let lambda = 0.1;
    let density = TestDensity::new(1).unwrap();
    let target = fit_exact(&rule, &kernel, lambda, &density).unwrap();
    let system = assemble_system(&rule, &kernel, lambda).unwrap();

    let replications = 400;
    let m = 32;
    let mut sums = vec![0.0f64; 5];
    let mut squares = vec![0.0f64; 5];
    for r in 0..replications {
        let mut rng = derive_rng(2024, r as u64 + 1);
        let (sample, _) = density.sample_with(m, &mut rng);
        let b = assemble_rhs(&rule, &kernel, &sample).unwrap();
        let est = fit_from_rhs(&system, &b).unwrap();
        for (j, c) in est.coefficients().iter().enumerate() {
            sums[j] += c;
            squares[j] += c * c;
        }
    }
    for j in 0..5 {
        let mean = sums[j] / replications as f64;
        let var = (squares[j] / replications as f64 - mean * mean).max(0.0);
        let se = (var / replications as f64).sqrt();
        let gap = (mean - target.coefficients()[j]).abs();
        assert!(
            gap <= 5.0 * se,
            "coefficient {j}: gap {gap}, standard error {se}"
        );
    }
}

#[test]
fn exact_fit_integral_near_one_for_reference_setup() {
    let rule = LatticeRule::new(11, vec![1, 7, 4, 6, 2, 3]).unwrap();
    let kernel =
        KorobovKernel::new(2.0, ProductWeights::polynomial_decay(6, 2.0).unwrap()).unwrap();
    let density = TestDensity::new(6).unwrap();
    let est = fit_exact(&rule, &kernel, 0.01, &density).unwrap();
    let integral = est.integral();
    assert!(
        (0.9..=1.0).contains(&integral),
        "integral {integral} outside [0.9, 1.0]"
    );
}

#[test]
fn artifact_file_round_trip_preserves_bits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("estimator.txt");
    let rule = LatticeRule::new(11, vec![1, 7]).unwrap();
    let kernel =
        KorobovKernel::new(4.0, ProductWeights::polynomial_decay(2, 4.0).unwrap()).unwrap();
    let density = TestDensity::new(2).unwrap();
    let (sample, _) = density.sample(500, 99);
    let est = fit(&rule, &kernel, 0.02, &sample).unwrap();
    est.save(&path).unwrap();
    let back = latdens::estimator::DensityEstimator::load(&path).unwrap();
    assert_eq!(est.coefficients(), back.coefficients());
    for x in [[0.1, 0.9], [0.33, 0.77]] {
        assert_eq!(
            est.evaluate(&x).unwrap().to_bits(),
            back.evaluate(&x).unwrap().to_bits()
        );
    }
}
