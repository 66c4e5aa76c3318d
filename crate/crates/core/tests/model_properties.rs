use approx::assert_relative_eq;
use proptest::prelude::*;

use sandwichpost::sandwich::{compute_a, compute_s, sandwich_cov, wald_interval};
use sandwichpost::stochastics::{cholesky, normal_quantile, SymMatrix};
use sandwichpost::working_model::{
    expfam_pseudo_true, FiniteExpFamily, NormalMean, NormalRegression, RegressionObs, WorkingModel,
};

fn dataset(p: usize, rows: &[(f64, Vec<f64>)]) -> Vec<RegressionObs> {
    rows.iter()
        .map(|(y, x)| RegressionObs::with_intercept(*y, &x[..p - 1]))
        .collect()
}

fn rows_strategy() -> impl Strategy<Value = Vec<(f64, Vec<f64>)>> {
    prop::collection::vec(
        (-10.0..10.0f64, prop::collection::vec(-3.0..3.0f64, 3)),
        12..40,
    )
}

fn sum_score<M: WorkingModel>(model: &M, theta: &[f64], data: &[M::Obs]) -> Vec<f64> {
    let mut total = vec![0.0; model.dim()];
    for obs in data {
        for (t, s) in total.iter_mut().zip(model.score(theta, obs).unwrap()) {
            *t += s;
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regression_mle_is_a_stationary_point(rows in rows_strategy(), p in 2usize..=4) {
        let data = dataset(p, &rows);
        let model = NormalRegression::new(p);
        let beta = model.fit_mle(&data).unwrap();
        let scale: f64 = data.iter().map(|o| o.y().abs() * o.x().iter().map(|v| v.abs()).sum::<f64>()).sum();
        for g in sum_score(&model, &beta, &data) {
            prop_assert!(g.abs() <= 1e-9 * (1.0 + scale), "gradient {g}");
        }
    }

    #[test]
    fn score_squares_are_positive_semidefinite(
        rows in rows_strategy(),
        theta in prop::collection::vec(-5.0..5.0f64, 3),
        v in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let data = dataset(3, &rows);
        let s = compute_s(&NormalRegression::new(3), &theta, &data).unwrap();
        let scale = s.norm_inf();
        prop_assert!(s.quad_form(&v) >= -1e-12 * scale);
    }

    #[test]
    fn moment_shortcut_matches_direct_sum(
        rows in rows_strategy(),
        theta in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let data = dataset(3, &rows);
        let model = NormalRegression::new(3);
        let fast = model.score_outer_fn(&data).unwrap()(&theta).unwrap();
        let direct = compute_s(&model, &theta, &data).unwrap();
        let scale = direct.norm_inf();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((fast.get(i, j) - direct.get(i, j)).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn sandwich_covariance_is_symmetric_psd(rows in rows_strategy()) {
        let data = dataset(3, &rows);
        let fit = sandwich_cov(&NormalRegression::new(3), &data).unwrap();
        let c = &fit.c_hat;
        for i in 0..3 {
            prop_assert!(c.get(i, i) >= 0.0);
            for j in 0..3 {
                prop_assert_eq!(c.get(i, j), c.get(j, i));
            }
        }
        let jitter = 1e-12 * c.norm_inf().max(1e-300);
        prop_assert!(cholesky(&c.add(&SymMatrix::identity(3).scaled(jitter))).is_ok());
    }

    #[test]
    fn duplicating_the_data_halves_the_covariance(rows in rows_strategy()) {
        let once = dataset(2, &rows);
        let twice: Vec<_> = once.iter().chain(&once).cloned().collect();
        let model = NormalRegression::new(2);
        let a = sandwich_cov(&model, &once).unwrap();
        let b = sandwich_cov(&model, &twice).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((b.c_hat.get(i, j) - 0.5 * a.c_hat.get(i, j)).abs() <= 1e-9 * a.c_hat.norm_inf());
            }
        }
        // B̂ is an average, so it does not change
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((b.b_hat.get(i, j) - a.b_hat.get(i, j)).abs() <= 1e-9 * a.b_hat.norm_inf());
            }
        }
    }

    #[test]
    fn wald_interval_is_symmetric_about_the_estimate(rows in rows_strategy(), level in 0.5..0.999f64) {
        let data = dataset(2, &rows);
        let fit = sandwich_cov(&NormalRegression::new(2), &data).unwrap();
        let (lo, hi) = wald_interval(&fit, 1, level).unwrap();
        let se = fit.std_error(1).unwrap();
        let z = normal_quantile(0.5 + level / 2.0);
        prop_assert!(((lo + hi) / 2.0 - fit.theta_hat[1]).abs() <= 1e-9 * (1.0 + fit.theta_hat[1].abs()));
        prop_assert!(((hi - lo) - 2.0 * z * se).abs() <= 1e-9 * (1.0 + se));
    }
}

#[test]
fn normal_mean_mle_is_stationary_and_bread_is_minus_n() {
    let model = NormalMean::new(2.0).unwrap();
    let data = [0.3, -1.2, 4.4, 2.0, 0.0, 7.5];
    let theta = model.fit_mle(&data).unwrap();
    assert!(sum_score(&model, &theta, &data)[0].abs() < 1e-12);
    let a = compute_a(&model, &theta, &data).unwrap();
    assert_relative_eq!(
        a.get(0, 0),
        -(data.len() as f64) / 4.0,
        max_relative = 1e-14
    );
}

#[test]
fn expfam_mle_is_stationary() {
    let fam = FiniteExpFamily::new(vec![0.0, 1.0, 2.0, 3.0], |x| vec![x, x * x], |_| 1.0).unwrap();
    let data = [0usize, 1, 1, 2, 2, 2, 3, 1, 0, 2];
    let theta = fam.fit_mle(&data).unwrap();
    for g in sum_score(&fam, &theta, &data) {
        assert!(g.abs() < 1e-9, "gradient {g}");
    }
    // the MLE is the pseudo-true value for the empirical distribution
    let mut emp = vec![0.0; 4];
    data.iter().for_each(|&i| emp[i] += 1.0 / data.len() as f64);
    let star = expfam_pseudo_true(&fam, &emp).unwrap();
    for (a, b) in theta.iter().zip(&star) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn normal_mean_pseudo_true_is_population_mean_for_skewed_law() {
    // p₀: a discretised, strongly skewed mixture
    let support: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    let mut p0: Vec<f64> = support
        .iter()
        .map(|&x| 0.7 * (-x).exp() + 0.3 * (-(x - 6.0) * (x - 6.0)).exp())
        .collect();
    let total: f64 = p0.iter().sum();
    p0.iter_mut().for_each(|w| *w /= total);
    let mean: f64 = support.iter().zip(&p0).map(|(x, w)| x * w).sum();

    // KL(p₀‖N(θ,σ²)) = const − E₀ l(θ : x); minimise by exhaustive search
    let model = NormalMean::new(1.3).unwrap();
    let step = 1e-4;
    let expected_loglik = |theta: f64| -> f64 {
        support
            .iter()
            .zip(&p0)
            .map(|(x, w)| w * model.log_lik(&[theta], x).unwrap())
            .sum()
    };
    let best = (0..100_000)
        .map(|i| i as f64 * step)
        .max_by(|a, b| expected_loglik(*a).total_cmp(&expected_loglik(*b)))
        .unwrap();
    assert!(
        (best - mean).abs() <= step,
        "grid argmin {best}, population mean {mean}"
    );
}
