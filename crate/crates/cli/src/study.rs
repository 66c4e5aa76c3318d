use std::fmt::Write as _;
use std::fs;

use serde::Serialize;

use sandwichpost::study::{
    run_table1, BPriorKind, Procedure, StudyCell, StudyConfig, StudyReport, ThetaPriorKind,
};

use crate::args::{parse_prior_b, parse_prior_beta, Args, OutputFormat};
use crate::CliError;

#[derive(Debug, Serialize)]
struct CellRow {
    n: usize,
    prior_beta: String,
    prior_b: String,
    coverage: f64,
    mean_width: f64,
    mc_se: f64,
    reps: usize,
}

impl From<&StudyCell> for CellRow {
    fn from(c: &StudyCell) -> Self {
        Self {
            n: c.n,
            prior_beta: c.prior_beta.clone(),
            prior_b: c.prior_b.clone(),
            coverage: c.coverage,
            mean_width: c.mean_width,
            mc_se: c.mc_se_coverage,
            reps: c.n_reps,
        }
    }
}

/// Everything that determines the numbers; the thread count does not.
#[derive(Debug, Serialize)]
struct RunConfigEcho {
    command: &'static str,
    model: &'static str,
    n: Vec<usize>,
    reps: usize,
    level: f64,
    seed: u64,
    gibbs_iters: usize,
    burn_in: usize,
    prior_beta: Vec<ThetaPriorKind>,
    prior_b: Vec<BPriorKind>,
    with_naive: bool,
}

#[derive(Debug, Serialize)]
struct JsonReport<'a> {
    config: &'a RunConfigEcho,
    cells: Vec<CellRow>,
    version: &'static str,
}

/// Markdown table for stdout and, if requested, the rendering for `--output`.
pub struct StudyOutput {
    pub stdout: String,
    pub file: Option<String>,
}

pub fn run(args: &Args) -> Result<StudyOutput, CliError> {
    let chain = args.chain()?;
    let thetas = match &args.prior_beta {
        Some(spec) => vec![parse_prior_beta(spec)?],
        None => vec![ThetaPriorKind::Informative, ThetaPriorKind::Uniform],
    };
    let bs = match &args.prior_b {
        Some(spec) => vec![parse_prior_b(spec)?],
        None => vec![BPriorKind::Jeffreys, BPriorKind::PlugIn],
    };
    let mut procedures = Vec::new();
    for b in &bs {
        for t in &thetas {
            procedures.push(Procedure::bayes(t.clone(), b.clone()));
        }
    }
    // the Wald interval is the frequentist twin of uniform × plug-in
    if thetas.contains(&ThetaPriorKind::Uniform) && bs.contains(&BPriorKind::PlugIn) {
        procedures.push(Procedure::Wald);
    }
    if args.with_naive {
        for t in &thetas {
            procedures.push(Procedure::Naive { theta: t.clone() });
        }
    }

    let cfg = StudyConfig {
        n_values: args.n.clone(),
        n_reps: args.reps,
        level: args.level,
        chain,
        procedures,
        threads: args.threads,
        ..StudyConfig::table1(args.seed)
    };
    let echo = RunConfigEcho {
        command: "study",
        model: "regression",
        n: args.n.clone(),
        reps: args.reps,
        level: args.level,
        seed: args.seed,
        gibbs_iters: args.gibbs_iters,
        burn_in: args.burn_in,
        prior_beta: thetas.clone(),
        prior_b: bs.clone(),
        with_naive: args.with_naive,
    };

    let report = run_table1(&cfg)?;
    if let Some(path) = &args.trace {
        fs::write(path, trace_csv(&report))
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }

    let cells = report.cells();
    let rendered = match args.output_format {
        OutputFormat::Markdown => markdown(&cells, &echo, &thetas, &bs),
        OutputFormat::Csv => csv(&cells),
        OutputFormat::Json => json(&cells, &echo),
    };
    Ok(match args.output {
        Some(_) => StudyOutput {
            stdout: markdown(&cells, &echo, &thetas, &bs),
            file: Some(rendered),
        },
        None => StudyOutput {
            stdout: rendered,
            file: None,
        },
    })
}

fn find<'a>(cells: &'a [StudyCell], n: usize, beta: &str, b: &str) -> Option<&'a StudyCell> {
    cells
        .iter()
        .find(|c| c.n == n && c.prior_beta == beta && c.prior_b == b)
}

fn cell_text(c: Option<&StudyCell>) -> String {
    c.map_or("–".into(), |c| {
        format!("{:.4} ({:.3})", c.coverage, c.mean_width)
    })
}

fn display_b(label: &str) -> &str {
    match label {
        "jeffreys" => "Jeffreys",
        "plugin" => "plug-in",
        other => other,
    }
}

fn markdown(
    cells: &[StudyCell],
    echo: &RunConfigEcho,
    thetas: &[ThetaPriorKind],
    bs: &[BPriorKind],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# Coverage of {}% intervals for the slope\n",
        100.0 * echo.level
    );
    let _ = writeln!(
        out,
        "Each cell: coverage (average width). {} replicates per sample size, seed {}, {} Gibbs iterations ({} burn-in).",
        echo.reps, echo.seed, echo.gibbs_iters, echo.burn_in
    );
    for &n in &echo.n {
        let _ = writeln!(out, "\n## n = {n}\n");
        let mut header = String::from("| π(B) \\ π(β) |");
        let mut rule = String::from("|---|");
        for t in thetas {
            let _ = write!(header, " {} |", t.label());
            rule.push_str("---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for b in bs {
            let mut row = format!("| {} |", display_b(b.label()));
            for t in thetas {
                let _ = write!(
                    row,
                    " {} |",
                    cell_text(find(cells, n, t.label(), b.label()))
                );
            }
            let _ = writeln!(out, "{row}");
        }

        let grid = |c: &&StudyCell| {
            thetas.iter().any(|t| t.label() == c.prior_beta)
                && bs.iter().any(|b| b.label() == c.prior_b)
        };
        let extra: Vec<&StudyCell> = cells.iter().filter(|c| c.n == n && !grid(c)).collect();
        if !extra.is_empty() {
            let _ = writeln!(out, "\n| other procedure | coverage (width) |\n|---|---:|");
            for c in &extra {
                let name = match (c.prior_beta.as_str(), c.prior_b.as_str()) {
                    ("wald", _) => "plug-in sandwich Wald".to_string(),
                    (beta, "naive") => format!("working-model posterior, {beta} π(β)"),
                    (beta, b) => format!("{beta} / {b}"),
                };
                let _ = writeln!(out, "| {name} | {} |", cell_text(Some(c)));
            }
        }

        let ses: Vec<String> = cells
            .iter()
            .filter(|c| c.n == n)
            .map(|c| {
                format!(
                    "{}/{} {:.4}",
                    c.prior_beta,
                    display_b(&c.prior_b),
                    c.mc_se_coverage
                )
            })
            .collect();
        let _ = writeln!(
            out,
            "\nMonte Carlo standard errors of the coverages: {}.",
            ses.join("; ")
        );
    }
    out
}

fn csv(cells: &[StudyCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(CellRow::from(c)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn json(cells: &[StudyCell], echo: &RunConfigEcho) -> String {
    let report = JsonReport {
        config: echo,
        cells: cells.iter().map(CellRow::from).collect(),
        version: env!("CARGO_PKG_VERSION"),
    };
    serde_json::to_string_pretty(&report).expect("serializable") + "\n"
}

fn trace_csv(report: &StudyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in report.trace() {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
