//! Run the axiom-compliance harness from the command line and print the
//! method-by-axiom table, plus the ranking-metric sensitivity checks.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rankshap::axioms::{
    check_position_sensitivity, check_relevance_sensitivity, compliance_table, AxiomOutcome,
    AxiomReport,
};
use rankshap::value::{graded_value_of_labels, ndcg_of_labels, DiscountFn, GainFn};
use rankshap::Result;

use crate::common::{write_json, SCHEMA};

pub struct AxiomsArgs {
    pub trials: usize,
    pub seed: u64,
    pub metric_trials: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub trial: usize,
    pub seed: u64,
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AxiomCell {
    pub axiom: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub tolerance: f64,
    pub axioms: Vec<AxiomCell>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub axiom: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AxiomsJson {
    pub schema: String,
    pub trials: usize,
    pub metric_trials: usize,
    pub seed: u64,
    pub methods: Vec<MethodRow>,
    pub metrics: Vec<MetricRow>,
}

fn cell(report: &AxiomReport) -> AxiomCell {
    match &report.outcome {
        AxiomOutcome::NoViolationFound { trials } => AxiomCell {
            axiom: report.axiom.name().into(),
            passed: true,
            trials: Some(*trials),
            counterexample: None,
        },
        AxiomOutcome::Violated(ce) => AxiomCell {
            axiom: report.axiom.name().into(),
            passed: false,
            trials: None,
            counterexample: Some(CounterexampleRecord {
                trial: ce.trial,
                seed: ce.seed,
                magnitude: ce.magnitude,
                detail: ce.detail.clone(),
            }),
        },
    }
}

pub fn cmd_axioms(args: &AxiomsArgs) -> Result<()> {
    println!(
        "attribution axioms over {} seeded games (base seed {}):",
        args.trials, args.seed
    );
    let rows = compliance_table(args.trials, args.seed)?;
    let methods: Vec<MethodRow> = rows
        .iter()
        .map(|row| MethodRow {
            method: row.method.clone(),
            tolerance: row.tolerance,
            axioms: row.reports.iter().map(cell).collect(),
        })
        .collect();
    print_method_table(&methods);

    println!();
    println!("ranking-metric sensitivity over {} trials:", args.metric_trials);
    let metrics = metric_rows(args.metric_trials, args.seed);
    print_metric_table(&metrics);

    if let Some(out) = &args.out {
        write_json(
            out,
            &AxiomsJson {
                schema: SCHEMA.into(),
                trials: args.trials,
                metric_trials: args.metric_trials,
                seed: args.seed,
                methods,
                metrics,
            },
        )?;
        println!();
        println!("report -> {}", out.display());
    }
    Ok(())
}

fn metric_rows(trials: usize, seed: u64) -> Vec<MetricRow> {
    type Metric = (&'static str, Box<dyn Fn(&[f64]) -> f64>);
    let metrics: Vec<Metric> = vec![
        (
            "cg",
            Box::new(|l: &[f64]| graded_value_of_labels(l, GainFn::Linear, DiscountFn::Flat, None)),
        ),
        (
            "dcg",
            Box::new(|l: &[f64]| {
                graded_value_of_labels(l, GainFn::Linear, DiscountFn::Logarithmic, None)
            }),
        ),
        ("ndcg", Box::new(|l: &[f64]| ndcg_of_labels(l, None))),
        (
            // rewards putting good labels late: must fail the position axiom
            "broken-increasing-discount",
            Box::new(|l: &[f64]| {
                l.iter()
                    .enumerate()
                    .map(|(k, &r)| r * (k + 1) as f64)
                    .sum()
            }),
        ),
    ];

    let mut rows = Vec::new();
    for (name, metric) in &metrics {
        let pos = check_position_sensitivity(metric.as_ref(), trials, seed);
        rows.push(metric_row(name, &pos));
        let rel = check_relevance_sensitivity(metric.as_ref(), trials, seed);
        rows.push(metric_row(name, &rel));
    }
    rows
}

fn metric_row(name: &str, report: &AxiomReport) -> MetricRow {
    let c = cell(report);
    MetricRow {
        metric: name.into(),
        axiom: c.axiom,
        passed: c.passed,
        counterexample: c.counterexample,
    }
}

fn print_method_table(methods: &[MethodRow]) {
    println!(
        "{:<22} {:>9}  {:<13} {:<13} {:<13} {:<13}",
        "method", "tolerance", "efficiency", "missingness", "symmetry", "monotonicity"
    );
    for row in methods {
        let cells: Vec<String> = row.axioms.iter().map(outcome_word).collect();
        println!(
            "{:<22} {:>9}  {:<13} {:<13} {:<13} {:<13}",
            row.method,
            format!("{:.0e}", row.tolerance),
            cells.first().map(String::as_str).unwrap_or("-"),
            cells.get(1).map(String::as_str).unwrap_or("-"),
            cells.get(2).map(String::as_str).unwrap_or("-"),
            cells.get(3).map(String::as_str).unwrap_or("-"),
        );
    }
    print_counterexamples(methods);
}

fn outcome_word(cell: &AxiomCell) -> String {
    if cell.passed {
        "pass".into()
    } else {
        let m = cell
            .counterexample
            .as_ref()
            .map(|c| c.magnitude)
            .unwrap_or(f64::NAN);
        format!("FAIL({m:.3})")
    }
}

fn print_counterexamples(methods: &[MethodRow]) {
    for row in methods {
        for cell in &row.axioms {
            if let Some(ce) = &cell.counterexample {
                println!(
                    "  {}/{}: trial {} (seed {}): {}",
                    row.method, cell.axiom, ce.trial, ce.seed, ce.detail
                );
            }
        }
    }
}

fn print_metric_table(metrics: &[MetricRow]) {
    println!(
        "{:<28} {:<22} {:<10}",
        "metric", "axiom", "outcome"
    );
    for row in metrics {
        let word = if row.passed {
            "pass".to_string()
        } else {
            format!(
                "FAIL({:.3})",
                row.counterexample
                    .as_ref()
                    .map(|c| c.magnitude)
                    .unwrap_or(f64::NAN)
            )
        };
        println!("{:<28} {:<22} {:<10}", row.metric, row.axiom, word);
        if let Some(ce) = &row.counterexample {
            println!("  trial {} (seed {}): {}", ce.trial, ce.seed, ce.detail);
        }
    }
}
