//! Machine-readable outputs: the JSON run report and the CSV streams.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::{ExperimentConfig, ExperimentReport, SideRates, CELL_LABELS};
use crate::hooke::{SpringMode, SpringState};
use crate::integrate::{Outcome, PairViews};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    #[serde(rename = "E")]
    pub e: Option<f64>,
    #[serde(rename = "N")]
    pub n: f64,
    pub launched: u64,
    pub alice_singles: u64,
    pub bob_singles: u64,
    pub coincidences: u64,
}

/// The JSON run report. `Q1`/`C2` are the quiescent rates and
/// `Q1p`/`C2p` the rates with switching; for a run without switching the
/// run's own rates are `Q1`/`C2` and the primed fields are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub config_echo: ExperimentConfig,
    pub per_setting: BTreeMap<String, CellJson>,
    #[serde(rename = "S_signed")]
    pub s_signed: Option<f64>,
    #[serde(rename = "S_abs")]
    pub s_abs: Option<f64>,
    #[serde(rename = "sigma_S")]
    pub sigma_s: Option<f64>,
    #[serde(rename = "Q1")]
    pub q1: SideRates,
    #[serde(rename = "Q1p")]
    pub q1p: Option<SideRates>,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C2p")]
    pub c2p: Option<f64>,
    pub runtime_s: f64,
    pub seed: u64,
}

impl ReportJson {
    pub fn from_report(report: &ExperimentReport) -> Self {
        let norm = report.config.experiment.normalization;
        let mut per_setting = BTreeMap::new();
        for (i, row) in report.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let label = CELL_LABELS[i][j];
                let corr = cell.correlator(label, norm);
                per_setting.insert(
                    label.to_string(),
                    CellJson {
                        e: (corr.count > 0.0).then_some(corr.value),
                        n: corr.count,
                        launched: cell.launched,
                        alice_singles: cell.alice_singles,
                        bob_singles: cell.bob_singles,
                        coincidences: cell.coincidences,
                    },
                );
            }
        }
        let bell = report.bell.as_ref().ok();
        let (q1, q1p, c2, c2p) = match &report.quiescent {
            Some(q) => (
                q.singles,
                Some(report.rates.singles),
                q.coincidences,
                Some(report.rates.coincidences),
            ),
            None => (report.rates.singles, None, report.rates.coincidences, None),
        };
        Self {
            config_echo: report.config.clone(),
            per_setting,
            s_signed: bell.map(|b| b.s_signed),
            s_abs: bell.map(|b| b.s_abs),
            sigma_s: bell.map(|b| b.sigma_s),
            q1,
            q1p,
            c2,
            c2p,
            runtime_s: report.runtime_s,
            seed: report.config.experiment.master_seed,
        }
    }
}

fn outcome_field(o: Option<Outcome>) -> String {
    o.map(|o| o.value().to_string()).unwrap_or_default()
}

/// `pair_id,setting_A,setting_B,effective_B_seen_by_A,effective_A_seen_by_B,
/// outcome_A,outcome_B,survived_A,survived_B`; angles in radians, outcomes
/// `+1`/`-1`, empty for a lost particle.
pub fn write_event_log<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "pair_id",
        "setting_A",
        "setting_B",
        "effective_B_seen_by_A",
        "effective_A_seen_by_B",
        "outcome_A",
        "outcome_B",
        "survived_A",
        "survived_B",
    ])?;
    for r in &report.records {
        w.write_record([
            r.pair_id.to_string(),
            r.angle_a.to_string(),
            r.angle_b.to_string(),
            r.alice_view.theta_b().to_string(),
            r.bob_view.theta_a().to_string(),
            outcome_field(r.outcome_a),
            outcome_field(r.outcome_b),
            r.survived_a.to_string(),
            r.survived_b.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `pair_id,view,step,t,z_L,z_R`, one row per recorded state.
pub fn write_trajectories<W: Write>(pairs: &[(u64, PairViews)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pair_id", "view", "step", "t", "z_L", "z_R"])?;
    for (pair_id, views) in pairs {
        for (view, traj) in [("alice", &views.alice), ("bob", &views.bob)] {
            for (step, s) in &traj.samples {
                w.write_record([
                    pair_id.to_string(),
                    view.to_string(),
                    step.to_string(),
                    s.t.to_string(),
                    s.z_l.to_string(),
                    s.z_r.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,x1,x2`
pub fn write_spring<W: Write>(states: &[SpringState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x1", "x2"])?;
    for s in states {
        w.write_record([s.t.to_string(), s.x1.to_string(), s.x2.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn spring_file_name(mode: SpringMode) -> String {
    format!("hooke_{}.csv", mode.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run_epr;

    #[test]
    fn event_log_shape() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.n_pairs = 5;
        cfg.integration.dt = 1e-5;
        let report = run_epr(&cfg).unwrap();
        let mut buf = Vec::new();
        write_event_log(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(
            lines[0],
            "pair_id,setting_A,setting_B,effective_B_seen_by_A,effective_A_seen_by_B,outcome_A,outcome_B,survived_A,survived_B"
        );
        assert!(lines[1].starts_with("0,"));
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn report_json_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.n_pairs = 40;
        cfg.integration.dt = 1e-5;
        let report = run_epr(&cfg).unwrap();
        let json = serde_json::to_value(ReportJson::from_report(&report)).unwrap();
        for key in [
            "config_echo",
            "per_setting",
            "S_signed",
            "S_abs",
            "sigma_S",
            "Q1",
            "Q1p",
            "C2",
            "C2p",
            "runtime_s",
            "seed",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["per_setting"]["a'b'"]["E"].is_number());
        assert_eq!(json["Q1"]["A"], 1.0);
    }
}
