use std::fmt::Write as _;

use serde::Serialize;

use sandwichpost::bayes_sandwich::{
    plugin_posterior_interval, posterior_interval, run_gibbs_from_fit, BPrior, PriorSpec,
    ThetaPrior,
};
use sandwichpost::sandwich::{sandwich_cov, wald_interval, SandwichFit};
use sandwichpost::stochastics::{RngStream, SymMatrix};
use sandwichpost::study::{BPriorKind, ThetaPriorKind};
use sandwichpost::working_model::{NormalRegression, WorkingModel};

use crate::args::{parse_prior_b, parse_prior_beta, Args, OutputFormat};
use crate::{input, CliError};

const NAMES: [&str; 2] = ["intercept", "slope"];

#[derive(Debug, Serialize)]
struct CoefficientRow {
    name: &'static str,
    estimate: f64,
    std_error: f64,
    wald: [f64; 2],
    bayes: [f64; 2],
}

#[derive(Debug, Serialize)]
struct FitConfig {
    input: String,
    level: f64,
    seed: u64,
    gibbs_iters: usize,
    burn_in: usize,
    prior_beta: ThetaPriorKind,
    prior_b: BPriorKind,
}

#[derive(Debug, Serialize)]
struct FitReport {
    config: FitConfig,
    n: usize,
    theta_hat: Vec<f64>,
    a: Vec<Vec<f64>>,
    b_hat: Vec<Vec<f64>>,
    c_hat: Vec<Vec<f64>>,
    coefficients: Vec<CoefficientRow>,
    warnings: Vec<String>,
    version: &'static str,
}

pub fn run(args: &Args) -> Result<String, CliError> {
    let path = args
        .input
        .as_deref()
        .ok_or_else(|| CliError::usage("`fit` needs --input FILE"))?;
    let chain_cfg = args.chain()?;
    let prior_beta = parse_prior_beta(args.prior_beta.as_deref().unwrap_or("uniform"))?;
    let prior_b = parse_prior_b(args.prior_b.as_deref().unwrap_or("jeffreys"))?;

    let data = input::read_dataset(path)?;
    let model = NormalRegression::new(2);
    let fit = sandwich_cov(&model, &data)?;
    let prior = PriorSpec::new(prior_beta.resolve(&data)?, prior_b.resolve(&fit));
    prior.validate(2)?;

    let mut warnings = Vec::new();
    let bayes: Vec<(f64, f64)> = if fit.b_hat.norm_inf() == 0.0 {
        warnings.push(
            "all scores vanish at the estimate (zero residuals): the sandwich covariance is zero \
             and every interval is degenerate; no chain was run"
                .to_string(),
        );
        fit.theta_hat.iter().map(|&t| (t, t)).collect()
    } else if prior.theta == ThetaPrior::ImproperUniform && matches!(prior.b, BPrior::PointMass(_))
    {
        (0..2)
            .map(|j| plugin_posterior_interval(&fit, j, args.level))
            .collect::<Result<_, _>>()?
    } else {
        let s_fn = model.score_outer_fn(&data)?;
        let mut rng = RngStream::new(args.seed, 0);
        let chain = run_gibbs_from_fit(&mut rng, &fit, &*s_fn, &prior, &chain_cfg)?;
        (0..2)
            .map(|j| posterior_interval(&chain, j, args.level))
            .collect::<Result<_, _>>()?
    };

    let coefficients = (0..2)
        .map(|j| {
            let (lo, hi) = wald_interval(&fit, j, args.level)?;
            Ok(CoefficientRow {
                name: NAMES[j],
                estimate: fit.theta_hat[j],
                std_error: fit.std_error(j).unwrap_or(f64::NAN),
                wald: [lo, hi],
                bayes: [bayes[j].0, bayes[j].1],
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let report = FitReport {
        config: FitConfig {
            input: path.display().to_string(),
            level: args.level,
            seed: args.seed,
            gibbs_iters: args.gibbs_iters,
            burn_in: args.burn_in,
            prior_beta,
            prior_b,
        },
        n: fit.n,
        theta_hat: fit.theta_hat.clone(),
        a: fit.a.to_rows(),
        b_hat: fit.b_hat.to_rows(),
        c_hat: fit.c_hat.to_rows(),
        coefficients,
        warnings,
        version: env!("CARGO_PKG_VERSION"),
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(match args.output_format {
        OutputFormat::Markdown => markdown(&report, &fit),
        OutputFormat::Csv => csv(&report),
        OutputFormat::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    })
}

fn matrix_block(out: &mut String, title: &str, m: &SymMatrix) {
    let _ = writeln!(out, "{title}:");
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>14.6e}")).collect();
        let _ = writeln!(out, "    {}", cells.join(" "));
    }
}

fn markdown(r: &FitReport, fit: &SandwichFit) -> String {
    let mut out = String::new();
    let pct = 100.0 * r.config.level;
    let _ = writeln!(out, "# Sandwich fit: {} (n = {})\n", r.config.input, r.n);
    let _ = writeln!(
        out,
        "Priors: beta {}, B {}; seed {}; {} Gibbs iterations ({} burn-in)\n",
        r.config.prior_beta.label(),
        r.config.prior_b.label(),
        r.config.seed,
        r.config.gibbs_iters,
        r.config.burn_in
    );
    let _ = writeln!(
        out,
        "| coefficient | estimate | sandwich se | {pct}% Wald | {pct}% Bayesian sandwich |"
    );
    let _ = writeln!(out, "|---|---:|---:|---:|---:|");
    for c in &r.coefficients {
        let _ = writeln!(
            out,
            "| {} | {:.4} | {:.4} | ({:.4}, {:.4}) | ({:.4}, {:.4}) |",
            c.name, c.estimate, c.std_error, c.wald[0], c.wald[1], c.bayes[0], c.bayes[1]
        );
    }
    out.push_str("\n```text\n");
    matrix_block(&mut out, "A (summed Hessian)", &fit.a);
    matrix_block(&mut out, "B-hat (mean score outer product)", &fit.b_hat);
    matrix_block(&mut out, "C-hat (sandwich covariance)", &fit.c_hat);
    out.push_str("```\n");
    for w in &r.warnings {
        let _ = writeln!(out, "\n> warning: {w}");
    }
    out
}

fn csv(r: &FitReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "coefficient",
        "estimate",
        "std_error",
        "wald_lower",
        "wald_upper",
        "bayes_lower",
        "bayes_upper",
    ])
    .expect("in-memory write");
    for c in &r.coefficients {
        w.write_record([
            c.name.to_string(),
            c.estimate.to_string(),
            c.std_error.to_string(),
            c.wald[0].to_string(),
            c.wald[1].to_string(),
            c.bayes[0].to_string(),
            c.bayes[1].to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
