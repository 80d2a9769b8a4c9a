use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use qtsvm::eval::{self, TABLE_HEADER};

use crate::manifest::{beside, Clock, RunManifest};
use crate::{Cli, CliError, NemenyiArgs};

/// Datasets (rows) by methods (columns).
#[derive(Debug, PartialEq)]
pub(crate) struct ScoreMatrix {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> anyhow::Result<f64> {
    cell.trim().parse().map_err(|_| {
        anyhow!(
            "{}: row {row}, column {col}: cannot parse {cell:?} as a number",
            path.display()
        )
    })
}

/// Mean accuracy per (dataset, noise ratio) and method from a benchmark results table.
fn from_long(path: &Path, records: &[csv::StringRecord]) -> anyhow::Result<ScoreMatrix> {
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    let mut rows: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        let row_name = format!("{}@{}", &rec[0], &rec[2]);
        if !rows.contains(&row_name) {
            rows.push(row_name.clone());
        }
        if !methods.iter().any(|m| m == &rec[1]) {
            methods.push(rec[1].to_string());
        }
        let acc = parse_cell(path, r + 2, 8, &rec[7])?;
        let e = sums.entry((row_name, rec[1].to_string())).or_insert((0.0, 0));
        e.0 += acc;
        e.1 += 1;
    }
    let scores = rows
        .iter()
        .map(|d| {
            methods
                .iter()
                .map(|m| {
                    sums.get(&(d.clone(), m.clone()))
                        .map(|(s, n)| s / *n as f64)
                        .ok_or_else(|| anyhow!("{}: no rows for method {m} on {d}", path.display()))
                })
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(ScoreMatrix {
        datasets: rows,
        methods,
        scores,
    })
}

pub(crate) fn read_matrix(path: &Path) -> anyhow::Result<ScoreMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    if records.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    if header == TABLE_HEADER {
        return from_long(path, &records);
    }
    let methods = header[1..].to_vec();
    let mut datasets = Vec::new();
    let mut scores = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        datasets.push(rec[0].to_string());
        scores.push(
            rec.iter()
                .enumerate()
                .skip(1)
                .map(|(c, cell)| parse_cell(path, r + 2, c + 1, cell))
                .collect::<anyhow::Result<Vec<f64>>>()?,
        );
    }
    Ok(ScoreMatrix {
        datasets,
        methods,
        scores,
    })
}

#[derive(Serialize)]
struct Output<'a> {
    methods: &'a [String],
    datasets: usize,
    alpha: f64,
    #[serde(flatten)]
    result: &'a eval::NemenyiResult,
}

pub fn run(a: &NemenyiArgs, cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let clock = Clock::start();
    let m = read_matrix(&a.results)?;
    let res = eval::nemenyi(&m.scores, a.alpha, !a.lower_is_better)?;
    println!(
        "k = {}, N = {}, q = {:.4}, CD = {:.4}",
        m.methods.len(),
        m.datasets.len(),
        res.q_alpha,
        res.cd
    );
    let mut order: Vec<usize> = (0..m.methods.len()).collect();
    order.sort_by(|&i, &j| res.mean_ranks[i].total_cmp(&res.mean_ranks[j]).then(i.cmp(&j)));
    for &i in &order {
        println!("{:<20} {:.4}", m.methods[i], res.mean_ranks[i]);
    }
    let mut any = false;
    for i in 0..m.methods.len() {
        for j in i + 1..m.methods.len() {
            if res.significant[i][j] {
                println!("significant: {} vs {}", m.methods[i], m.methods[j]);
                any = true;
            }
        }
    }
    if !any {
        println!("no pair differs by more than the critical difference");
    }
    if let Some(out) = &a.out {
        let doc = Output {
            methods: &m.methods,
            datasets: m.datasets.len(),
            alpha: a.alpha,
            result: &res,
        };
        let text = serde_json::to_string_pretty(&doc).context("serializing ranks")? + "\n";
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
        RunManifest::new("nemenyi", argv, a, cli.seed.unwrap_or(0), &clock, vec![out.clone()])?.save(&beside(out))?;
    }
    Ok(())
}
