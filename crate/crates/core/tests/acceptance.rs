//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p sandwichpost-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use sandwichpost::bayes_sandwich::{
    posterior_interval, run_gibbs, BPrior, ChainConfig, PriorSpec, ThetaPrior,
};
use sandwichpost::sandwich::{sandwich_cov, wald_interval};
use sandwichpost::stochastics::{sample_mvnorm, sample_wishart, RngStream, SymMatrix};
use sandwichpost::study::{
    generate_dataset, run_table1, DgpConfig, Procedure, StudyCell, StudyConfig, StudyReport,
    ThetaPriorKind,
};
use sandwichpost::working_model::{
    expfam_pseudo_true, kl_divergence, kl_oracle_pseudo_true, FiniteExpFamily, NormalMean,
    NormalRegression, RegressionObs, WorkingModel,
};

const STUDY_SEED: u64 = 1;
const STUDY_REPS: usize = 2_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let table = table_run();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    results.push(("C1  table, n = 10 block", c1_small_sample_block(&table)));
    results.push(("C2  table, n = 500 block", c2_large_sample_block(&table)));
    results.push((
        "C3  Wald vs uniform x plug-in posterior",
        c3_wald_equivalence(&table),
    ));
    results.push((
        "C4  naive model baseline at n = 500",
        c4_naive_baseline(&table),
    ));
    results.push((
        "C5  artificial posterior KS oracle",
        c5_artificial_posterior(),
    ));
    results.push(("C6  pseudo-true moment matching", c6_pseudo_true()));
    results.push(("C7  sandwich identity and HC0", c7_sandwich_identity()));
    results.push(("C8  score/Hessian finite differences", c8_derivatives()));
    results.push(("C9  sampler moments", c9_sampler_moments()));
    results.push(("C10 determinism across thread counts", c10_determinism()));
    results.push(("P1  n = 10 width ordering", p1_width_ordering(&table)));
    results.push((
        "P2  n = 500 coverages in [0.91, 0.96]",
        p2_convergence(&table),
    ));
    results.push((
        "P3  half-study coverage consistency",
        p3_half_studies(&table),
    ));

    println!();
    println!("acceptance suite ({:.1?})", started.elapsed());
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", o.detail);
    }
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- study

fn table_run() -> StudyReport {
    let mut procedures = Procedure::table_default();
    procedures.push(Procedure::PlugInChain);
    procedures.push(Procedure::Naive {
        theta: ThetaPriorKind::Informative,
    });
    let cfg = StudyConfig {
        procedures,
        n_reps: STUDY_REPS,
        ..StudyConfig::table1(STUDY_SEED)
    };
    let t = Instant::now();
    let report = run_table1(&cfg).expect("study run failed");
    println!(
        "study: {} reps x {:?} in {:.1?}",
        STUDY_REPS,
        cfg.n_values,
        t.elapsed()
    );
    for c in report.cells() {
        println!(
            "  n={:<4} {:<12} {:<13} coverage {:.4} (se {:.4})  width {:.3}",
            c.n, c.prior_beta, c.prior_b, c.coverage, c.mc_se_coverage, c.mean_width
        );
    }
    report
}

fn cell<'a>(cells: &'a [StudyCell], n: usize, beta: &str, b: &str) -> &'a StudyCell {
    cells
        .iter()
        .find(|c| c.n == n && c.prior_beta == beta && c.prior_b == b)
        .unwrap_or_else(|| panic!("missing cell n={n} {beta}/{b}"))
}

const GRID: [(&str, &str); 4] = [
    ("informative", "jeffreys"),
    ("uniform", "jeffreys"),
    ("informative", "plugin"),
    ("uniform", "plugin"),
];

fn compare_block(
    report: &StudyReport,
    n: usize,
    coverage: [f64; 4],
    width: [f64; 4],
    cov_tol: f64,
    width_rel_tol: f64,
) -> Outcome {
    let cells = report.cells();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (beta, b)) in GRID.iter().enumerate() {
        let c = cell(&cells, n, beta, b);
        let ok_cov = (c.coverage - coverage[k]).abs() <= cov_tol;
        let ok_w = (c.mean_width / width[k] - 1.0).abs() <= width_rel_tol;
        pass &= ok_cov && ok_w;
        parts.push(format!(
            "{beta}/{b} {:.4} vs {:.2}{} ({:.3} vs {:.2}{})",
            c.coverage,
            coverage[k],
            if ok_cov { "" } else { " !" },
            c.mean_width,
            width[k],
            if ok_w { "" } else { " !" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c1_small_sample_block(report: &StudyReport) -> Outcome {
    compare_block(
        report,
        10,
        [0.95, 0.87, 0.69, 0.65],
        [2.86, 4.80, 2.14, 2.63],
        0.03,
        0.15,
    )
}

fn c2_large_sample_block(report: &StudyReport) -> Outcome {
    compare_block(
        report,
        500,
        [0.94, 0.94, 0.93, 0.93],
        [0.74, 0.76, 0.73, 0.74],
        0.02,
        0.10,
    )
}

fn c3_wald_equivalence(report: &StudyReport) -> Outcome {
    let cells = report.cells();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [10, 500] {
        let wald = cell(&cells, n, "wald", "plugin");
        let chain = cell(&cells, n, "uniform", "plugin-gibbs");
        let closed = cell(&cells, n, "uniform", "plugin");
        let dc = (wald.coverage - chain.coverage).abs();
        let dw = (chain.mean_width / wald.mean_width - 1.0).abs();
        let exact = wald.coverage == closed.coverage && wald.mean_width == closed.mean_width;
        pass &= dc <= 0.01 && dw <= 0.02 && exact;
        parts.push(format!(
            "n={n}: |dcov| {dc:.4}, |dwidth| {:.2}%, closed form identical: {exact}",
            100.0 * dw
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c4_naive_baseline(report: &StudyReport) -> Outcome {
    let cells = report.cells();
    let c = cell(&cells, 500, "informative", "naive");
    let pass = (c.coverage - 0.68).abs() <= 0.08;
    outcome(
        pass,
        format!(
            "coverage {:.4} (se {:.4}) vs 0.68 +/- 0.08, width {:.3}; sigma^2 estimated under pi(sigma^2) ~ 1/sigma^2",
            c.coverage, c.mc_se_coverage, c.mean_width
        ),
    )
}

fn p1_width_ordering(report: &StudyReport) -> Outcome {
    let cells = report.cells();
    let w = |beta, b| cell(&cells, 10, beta, b).mean_width;
    let plug_lt_jef = w("informative", "plugin") < w("informative", "jeffreys")
        && w("uniform", "plugin") < w("uniform", "jeffreys");
    let inf_lt_unif = w("informative", "jeffreys") < w("uniform", "jeffreys")
        && w("informative", "plugin") < w("uniform", "plugin");
    outcome(
        plug_lt_jef && inf_lt_unif,
        format!("plug-in < Jeffreys: {plug_lt_jef}; informative < uniform: {inf_lt_unif}"),
    )
}

fn p2_convergence(report: &StudyReport) -> Outcome {
    let cells = report.cells();
    let covs: Vec<f64> = GRID
        .iter()
        .map(|(a, b)| cell(&cells, 500, a, b).coverage)
        .collect();
    let pass = covs.iter().all(|c| (0.91..=0.96).contains(c));
    outcome(pass, format!("{covs:.4?}"))
}

fn p3_half_studies(report: &StudyReport) -> Outcome {
    let mut worst: f64 = 0.0;
    for run in &report.runs {
        for outs in &run.outcomes {
            let half = outs.len() / 2;
            let rate = |s: &[sandwichpost::study::IntervalOutcome]| {
                s.iter().filter(|o| o.covered).count() as f64 / s.len() as f64
            };
            let (a, b) = (rate(&outs[..half]), rate(&outs[half..]));
            let se =
                (a * (1.0 - a) / half as f64 + b * (1.0 - b) / (outs.len() - half) as f64).sqrt();
            if se > 0.0 {
                worst = worst.max((a - b).abs() / se);
            }
        }
    }
    outcome(
        worst <= 3.0,
        format!("largest |difference| / combined se = {worst:.2}"),
    )
}

// ---------------------------------------------------------- C5: KS oracle

fn ks_distance(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let m = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

fn c5_artificial_posterior() -> Outcome {
    let data = generate_dataset(&mut RngStream::new(505, 0), &DgpConfig::heteroscedastic(10));
    let model = NormalRegression::new(2);
    let fit = sandwich_cov(&model, &data).unwrap();
    let prior = PriorSpec::new(
        ThetaPrior::ImproperUniform,
        BPrior::PointMass(fit.b_hat.clone()),
    );
    let cfg = ChainConfig::new(100_500, 500).unwrap();
    let chain = run_gibbs(&mut RngStream::new(505, 1), &model, &data, &prior, &cfg).unwrap();
    let mut pass = chain.n_keep == 100_000;
    let mut parts = Vec::new();
    for j in 0..2 {
        let law = Normal::new(fit.theta_hat[j], fit.c_hat.get(j, j).sqrt()).unwrap();
        let d = ks_distance(chain.coordinate(j), |x| law.cdf(x));
        pass &= d <= 0.01;
        parts.push(format!("coord {j}: D = {d:.5}"));
    }
    let (lo, hi) = posterior_interval(&chain, 1, 0.95).unwrap();
    let (wlo, whi) = wald_interval(&fit, 1, 0.95).unwrap();
    parts.push(format!(
        "95% interval ({lo:.3}, {hi:.3}) vs Wald ({wlo:.3}, {whi:.3})"
    ));
    outcome(pass, parts.join("; "))
}

// ------------------------------------------------ C6: pseudo-true parameter

fn c6_pseudo_true() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut accepted = 0;
    let mut worst_moment: f64 = 0.0;
    let mut worst_grid_steps: f64 = 0.0;
    let mut worst_global_excess = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    while accepted < 50 {
        let p = if accepted % 2 == 0 { 1 } else { 2 };
        let k = rng.random_range(3..=6);
        let support: Vec<f64> = (0..k)
            .map(|i| i as f64 + rng.random_range(-0.3..0.3))
            .collect();
        let coefs: Vec<f64> = (0..p).map(|_| rng.random_range(0.3..1.0)).collect();
        let fam = match FiniteExpFamily::new(
            support,
            |x| (0..p).map(|j| coefs[j] * x.powi(j as i32 + 1)).collect(),
            |x| 1.0 + 0.5 * x.abs(),
        ) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p0: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let theta = match expfam_pseudo_true(&fam, &p0) {
            Ok(t) => t,
            Err(e) => {
                failures.push(format!("{e}"));
                accepted += 1;
                continue;
            }
        };
        let span = 4.0;
        if theta.iter().any(|t| t.abs() > span - 0.5) {
            // outside the oracle's box; draw another instance
            continue;
        }
        let pop = fam.moments(&p0);
        let fitted = fam.mean_stats(&theta);
        for (a, b) in pop.iter().zip(&fitted) {
            worst_moment = worst_moment.max((a - b).abs());
        }
        // local oracle: a fine mesh around the Newton solution; its argmin
        // must be within one mesh step of it
        let (step, radius) = if p == 1 { (1e-3, 200) } else { (1e-2, 40) };
        let local = mesh(&theta, step, radius);
        let oracle = kl_oracle_pseudo_true(&fam, &p0, &local).unwrap();
        let steps = oracle
            .iter()
            .zip(&theta)
            .map(|(o, t)| (o - t).abs() / step)
            .fold(0.0, f64::max);
        worst_grid_steps = worst_grid_steps.max(steps);
        // global oracle: no point of a coarse lattice over the box beats it
        let global = mesh(
            &vec![0.0; p],
            if p == 1 { 1e-3 } else { 0.02 },
            if p == 1 { 4000 } else { 200 },
        );
        let best = kl_oracle_pseudo_true(&fam, &p0, &global).unwrap();
        let excess = kl_divergence(&fam, &p0, &theta) - kl_divergence(&fam, &p0, &best);
        worst_global_excess = worst_global_excess.max(excess);
        accepted += 1;
    }
    let pass = failures.is_empty()
        && worst_moment <= 1e-9
        && worst_grid_steps <= 1.0
        && worst_global_excess <= 1e-12;
    outcome(
        pass,
        format!(
            "50 instances: max |E[g|theta*] - E0[g]| = {worst_moment:.2e}, max local oracle gap = {worst_grid_steps:.2} mesh steps, max KL excess over global lattice = {worst_global_excess:.1e}, solver failures {}",
            failures.len()
        ),
    )
}

/// Cartesian mesh `center + step * (i₁, …, i_p)`, `|i_j| ≤ radius`.
fn mesh(center: &[f64], step: f64, radius: i64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for c in center {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-radius..=radius).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(c + i as f64 * step);
                    v
                })
            })
            .collect();
    }
    out
}

// --------------------------------------------------- C7: sandwich identity

/// HC0 from the residual-weighted textbook form with a Gauss-Jordan inverse.
fn hc0_reference(data: &[RegressionObs]) -> Vec<Vec<f64>> {
    let p = data[0].x().len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for o in data {
        for i in 0..p {
            xty[i] += o.x()[i] * o.y();
            for j in 0..p {
                xtx[i][j] += o.x()[i] * o.x()[j];
            }
        }
    }
    let inv = gauss_jordan_inverse(xtx);
    let beta: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let mut meat = vec![vec![0.0; p]; p];
    for o in data {
        let e = o.y() - (0..p).map(|j| beta[j] * o.x()[j]).sum::<f64>();
        for i in 0..p {
            for j in 0..p {
                meat[i][j] += o.x()[i] * o.x()[j] * e * e;
            }
        }
    }
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| (0..p).map(|k| a[i][k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    mul(&mul(&inv, &meat), &inv)
}

fn gauss_jordan_inverse(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let p = a.len();
    let mut inv: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..p {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..p {
            if i != col {
                let f = a[i][col];
                for j in 0..p {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Scores and Hessians multiplied by `c`: the working model with error
/// variance `1/c`.
struct Rescaled(NormalRegression, f64);

impl WorkingModel for Rescaled {
    type Obs = RegressionObs;
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn log_lik(&self, t: &[f64], o: &RegressionObs) -> sandwichpost::Result<f64> {
        Ok(self.1 * self.0.log_lik(t, o)?)
    }
    fn score(&self, t: &[f64], o: &RegressionObs) -> sandwichpost::Result<Vec<f64>> {
        Ok(self.0.score(t, o)?.iter().map(|v| v * self.1).collect())
    }
    fn hessian(&self, t: &[f64], o: &RegressionObs) -> sandwichpost::Result<SymMatrix> {
        Ok(self.0.hessian(t, o)?.scaled(self.1))
    }
    fn fit_mle(&self, data: &[RegressionObs]) -> sandwichpost::Result<Vec<f64>> {
        self.0.fit_mle(data)
    }
}

fn rel_err(got: &SymMatrix, want: &[Vec<f64>]) -> f64 {
    let p = got.dim();
    let scale = want.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut e: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            e = e.max((got.get(i, j) - want[i][j]).abs());
        }
    }
    e / scale
}

fn c7_sandwich_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_hc0: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for t in 0..100 {
        let p = 2 + t % 3;
        let n = rng.random_range(p + 3..60);
        let data: Vec<RegressionObs> = (0..n)
            .map(|_| {
                let x: Vec<f64> = (1..p).map(|_| rng.random_range(-2.0..3.0)).collect();
                let noise = (1.0 + x[0].abs()) * rng.random_range(-1.5..1.5);
                let y = 0.5 + x.iter().sum::<f64>() + noise;
                RegressionObs::with_intercept(y, &x)
            })
            .collect();
        let model = NormalRegression::new(p);
        let fit = sandwich_cov(&model, &data).unwrap();
        worst_hc0 = worst_hc0.max(rel_err(&fit.c_hat, &hc0_reference(&data)));

        let a_inv = fit.a.scaled(-1.0).inverse().unwrap();
        let alt = fit.score_squares().sandwiched_by(&a_inv);
        worst_identity = worst_identity.max(rel_err(&alt, &fit.c_hat.to_rows()));

        let c = rng.random_range(0.05..20.0);
        let scaled = sandwich_cov(&Rescaled(model, c), &data).unwrap();
        worst_scale = worst_scale.max(rel_err(&scaled.c_hat, &fit.c_hat.to_rows()));
    }
    let pass = worst_hc0 <= 1e-10 && worst_identity <= 1e-10 && worst_scale <= 1e-10;
    outcome(
        pass,
        format!(
            "100 datasets: HC0 rel err {worst_hc0:.1e}, A^-1 S A^-1 rel err {worst_identity:.1e}, variance rescaling rel err {worst_scale:.1e}"
        ),
    )
}

// ---------------------------------------------------- C8: finite differences

fn fd_check<M: WorkingModel>(model: &M, theta: &[f64], obs: &M::Obs) -> (f64, f64) {
    let h = 1e-5;
    let p = theta.len();
    let score = model.score(theta, obs).unwrap();
    let hess = model.hessian(theta, obs).unwrap();
    let mut score_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    for j in 0..p {
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[j] += h;
        dn[j] -= h;
        let fd = (model.log_lik(&up, obs).unwrap() - model.log_lik(&dn, obs).unwrap()) / (2.0 * h);
        score_err = score_err.max((fd - score[j]).abs() / (1.0 + score[j].abs()));
        let su = model.score(&up, obs).unwrap();
        let sd = model.score(&dn, obs).unwrap();
        for i in 0..p {
            let fd = (su[i] - sd[i]) / (2.0 * h);
            hess_err = hess_err.max((fd - hess.get(i, j)).abs() / (1.0 + hess.get(i, j).abs()));
        }
    }
    (score_err, hess_err)
}

fn c8_derivatives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let reg = NormalRegression::new(3);
    let mean = NormalMean::new(1.7).unwrap();
    let fam = FiniteExpFamily::new(
        vec![-1.0, 0.0, 0.5, 2.0],
        |x| vec![x, x * x],
        |x| 1.0 + x * x,
    )
    .unwrap();
    let (mut se, mut he) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let beta: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let obs = RegressionObs::with_intercept(rng.random_range(-5.0..5.0), &x);
        let (a, b) = fd_check(&reg, &beta, &obs);
        se = se.max(a);
        he = he.max(b);

        let (a, b) = fd_check(
            &mean,
            &[rng.random_range(-3.0..3.0)],
            &rng.random_range(-5.0..5.0),
        );
        se = se.max(a);
        he = he.max(b);

        let theta = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (a, b) = fd_check(&fam, &theta, &rng.random_range(0..4usize));
        se = se.max(a);
        he = he.max(b);
    }
    // central differences at h = 1e-5: O(h²) truncation plus rounding ~1e-11/h
    let tol = 1e-6;
    outcome(
        se <= tol && he <= tol,
        format!("300 points over 3 models: max score err {se:.1e}, max Hessian err {he:.1e} (tol {tol:.0e})"),
    )
}

// -------------------------------------------------------- C9: sampler moments

struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
            count: 0,
        }
    }
    fn push(&mut self, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
        self.count += 1;
    }
    /// Largest |mean − target| in units of the Monte Carlo standard error.
    fn worst_z(&self, target: &[f64]) -> f64 {
        let m = self.count as f64;
        target
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mean = self.sum[i] / m;
                let var = self.sum_sq[i] / m - mean * mean;
                (mean - t).abs() / (var / m).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn c9_sampler_moments() -> Outcome {
    const DRAWS: usize = 100_000;
    let mut parts = Vec::new();
    let mut pass = true;

    // multivariate normal: first and second moments
    let mean = [5.0, -1.0];
    let cov = SymMatrix::from_rows(&[vec![2.0, 0.6], vec![0.6, 1.0]]).unwrap();
    let mut rng = RngStream::new(909, 0);
    let mut first = Moments::new(2);
    let mut second = Moments::new(3);
    for _ in 0..DRAWS {
        let d = sample_mvnorm(&mut rng, &mean, &cov).unwrap();
        first.push(&d);
        let c = [d[0] - mean[0], d[1] - mean[1]];
        second.push(&[c[0] * c[0], c[0] * c[1], c[1] * c[1]]);
    }
    let z1 = first.worst_z(&mean);
    let z2 = second.worst_z(&[2.0, 0.6, 1.0]);
    pass &= z1 <= 3.0 && z2 <= 3.0;
    parts.push(format!("mvnorm mean z {z1:.2}, cov z {z2:.2}"));

    // Wishart: E[W] = ν Σ
    for (dof, scale) in [
        (2.0, SymMatrix::identity(2)),
        (
            5.5,
            SymMatrix::from_rows(&[vec![1.0, -0.4], vec![-0.4, 0.5]]).unwrap(),
        ),
    ] {
        let mut rng = RngStream::new(909, dof as u64 + 1);
        let mut m = Moments::new(3);
        for _ in 0..DRAWS {
            let w = sample_wishart(&mut rng, dof, &scale).unwrap();
            m.push(&[w.get(0, 0), w.get(0, 1), w.get(1, 1)]);
        }
        let target = [
            dof * scale.get(0, 0),
            dof * scale.get(0, 1),
            dof * scale.get(1, 1),
        ];
        let z = m.worst_z(&target);
        pass &= z <= 3.0;
        parts.push(format!("Wishart(nu={dof}) mean z {z:.2}"));
    }

    // p = 1 reduces to chi-squared
    let mut rng = RngStream::new(909, 77);
    let mut m = Moments::new(1);
    for _ in 0..DRAWS {
        m.push(&[sample_wishart(&mut rng, 7.0, &SymMatrix::identity(1))
            .unwrap()
            .get(0, 0)]);
    }
    let z = m.worst_z(&[7.0]);
    pass &= z <= 3.0;
    parts.push(format!("chi2(7) mean z {z:.2}"));
    outcome(pass, parts.join("; "))
}

// --------------------------------------------------------- C10: determinism

fn c10_determinism() -> Outcome {
    let render = |threads: usize| {
        let mut procedures = Procedure::table_default();
        procedures.push(Procedure::Naive {
            theta: ThetaPriorKind::Informative,
        });
        let cfg = StudyConfig {
            n_values: vec![10, 40],
            n_reps: 48,
            chain: ChainConfig::new(600, 100).unwrap(),
            procedures,
            threads: Some(threads),
            ..StudyConfig::table1(1010)
        };
        let report = run_table1(&cfg).unwrap();
        let mut out = String::new();
        for c in report.cells() {
            out.push_str(&format!(
                "{} {} {} {:016x} {:016x} {:016x}\n",
                c.n,
                c.prior_beta,
                c.prior_b,
                c.coverage.to_bits(),
                c.mean_width.to_bits(),
                c.mc_se_coverage.to_bits()
            ));
        }
        for r in report.trace() {
            out.push_str(&format!(
                "{} {} {:016x} {:016x}\n",
                r.replicate,
                r.cell,
                r.lower.to_bits(),
                r.upper.to_bits()
            ));
        }
        out
    };
    let one = render(1);
    let four = render(4);
    let again = render(3);
    outcome(
        one == four && one == again,
        format!(
            "threads 1/4/3 byte-identical: {} ({} bytes)",
            one == four && one == again,
            one.len()
        ),
    )
}
