//! The four locality / efficiency configurations run side by side.

use serde::Serialize;

use crate::error::Result;
use crate::infomodel::InformationMode;

use super::{run_epr, Efficiency, ExperimentConfig, ExperimentReport, Normalization};

/// `(mode, normalization, efficiency)` of each row.
pub const ROWS: [(InformationMode, Normalization, Efficiency); 4] = [
    (InformationMode::Local, Normalization::Singles, Efficiency::Efficient),
    (InformationMode::Local, Normalization::Coincidences, Efficiency::Inefficient),
    (InformationMode::Nonlocal, Normalization::Singles, Efficiency::Efficient),
    (InformationMode::Nonlocal, Normalization::Coincidences, Efficiency::Inefficient),
];

/// Row configurations built from shared physics. Every row reuses the base
/// seed, so rows differ only in the information and loss model. In the
/// inefficient rows every in-flight switch ejects the particle
/// (`kick_threshold = 0`).
pub fn row_configs(base: &ExperimentConfig) -> [ExperimentConfig; 4] {
    ROWS.map(|(mode, normalization, efficiency)| {
        let mut cfg = base.clone();
        cfg.experiment.mode = mode;
        cfg.experiment.normalization = normalization;
        cfg.experiment.efficiency = efficiency;
        if efficiency == Efficiency::Inefficient {
            cfg.experiment.kick_threshold = 0.0;
        }
        cfg
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub mode: InformationMode,
    pub normalization: Normalization,
    pub efficiency: Efficiency,
    /// `None` when a setting pair had no events.
    pub s_signed: Option<f64>,
    pub s_abs: Option<f64>,
    pub sigma_s: Option<f64>,
    pub coincidences: u64,
    pub launched: u64,
}

impl TableRow {
    fn from_report(report: &ExperimentReport) -> Self {
        let bell = report.bell.as_ref().ok();
        let e = &report.config.experiment;
        Self {
            mode: e.mode,
            normalization: e.normalization,
            efficiency: e.efficiency,
            s_signed: bell.map(|b| b.s_signed),
            s_abs: bell.map(|b| b.s_abs),
            sigma_s: bell.map(|b| b.sigma_s),
            coincidences: report.records.iter().filter(|r| r.is_coincidence()).count() as u64,
            launched: report.records.len() as u64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub seed: u64,
    pub n_pairs: u64,
    pub rows: Vec<TableRow>,
}

pub fn run_table(base: &ExperimentConfig) -> Result<(Table, Vec<ExperimentReport>)> {
    let reports = row_configs(base)
        .iter()
        .map(run_epr)
        .collect::<Result<Vec<_>>>()?;
    let rows = reports.iter().map(TableRow::from_report).collect();
    Ok((
        Table {
            seed: base.experiment.master_seed,
            n_pairs: base.experiment.n_pairs,
            rows,
        },
        reports,
    ))
}

/// Mean and sample standard deviation of `S` per row over replicate seeds
/// `base_seed, base_seed + 1, ...`.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateSummary {
    pub replicates: usize,
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRow {
    pub mode: InformationMode,
    pub normalization: Normalization,
    pub efficiency: Efficiency,
    pub s_values: Vec<f64>,
    pub mean_s: f64,
    pub std_s: f64,
    /// Mean of the per-run binomial error estimates.
    pub mean_sigma_s: f64,
}

pub fn run_replicates(base: &ExperimentConfig, replicates: usize) -> Result<ReplicateSummary> {
    let mut per_row: Vec<Vec<TableRow>> = vec![Vec::with_capacity(replicates); ROWS.len()];
    for r in 0..replicates {
        let mut cfg = base.clone();
        cfg.experiment.master_seed = base.experiment.master_seed.wrapping_add(r as u64);
        let (table, reports) = run_table(&cfg)?;
        // A replicate with an empty cell has no S; surface it as an error.
        for report in &reports {
            report.bell()?;
        }
        for (i, row) in table.rows.into_iter().enumerate() {
            per_row[i].push(row);
        }
    }
    let rows = per_row
        .into_iter()
        .zip(ROWS)
        .map(|(runs, (mode, normalization, efficiency))| {
            let s_values: Vec<f64> = runs.iter().filter_map(|r| r.s_signed).collect();
            let (mean_s, std_s) = mean_std(&s_values);
            let sigmas: Vec<f64> = runs.iter().filter_map(|r| r.sigma_s).collect();
            let (mean_sigma_s, _) = mean_std(&sigmas);
            ReplicateRow {
                mode,
                normalization,
                efficiency,
                s_values,
                mean_s,
                std_s,
                mean_sigma_s,
            }
        })
        .collect();
    Ok(ReplicateSummary { replicates, rows })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn label(mode: InformationMode) -> &'static str {
    match mode {
        InformationMode::Local => "Loc",
        InformationMode::Nonlocal => "NonL",
    }
}

impl Table {
    /// Plain-text rendering with one line per row.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<6} {:<14} {:<12} {:>10} {:>9}\n",
            "Loc", "Normalization", "Efficiency", "S_Bell", "std.dev."
        );
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.5}"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<6} {:<14} {:<12} {:>10} {:>9}\n",
                label(r.mode),
                format!("{:?}", r.normalization).to_lowercase(),
                format!("{:?}", r.efficiency),
                show(r.s_signed),
                show(r.sigma_s)
            ));
        }
        out
    }
}

impl ReplicateSummary {
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<6} {:<14} {:<12} {:>10} {:>9} {:>9}   ({} replicates)\n",
            "Loc", "Normalization", "Efficiency", "mean S", "std S", "mean sig", self.replicates
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<6} {:<14} {:<12} {:>10.5} {:>9.5} {:>9.5}\n",
                label(r.mode),
                format!("{:?}", r.normalization).to_lowercase(),
                format!("{:?}", r.efficiency),
                r.mean_s,
                r.std_s,
                r.mean_sigma_s
            ));
        }
        out
    }
}
