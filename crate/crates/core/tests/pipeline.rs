use std::f64::consts::PI;

use bohm_epr::experiment::{
    count_rates, run_epr, run_epr_with_workers, setting_timeline, trace_pairs, Efficiency, ExperimentConfig,
    Normalization, SwitchPolicy, SwitchingSides,
};
use bohm_epr::output::{write_event_log, write_trajectories, ReportJson};
use bohm_epr::{InformationMode, Side};

fn small(n: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.n_pairs = n;
    cfg
}

#[test]
fn same_seed_same_report() {
    let cfg = small(200);
    let a = run_epr(&cfg).unwrap();
    let b = run_epr(&cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.cells, b.cells);
    let mut other = cfg.clone();
    other.experiment.master_seed = 1;
    assert_ne!(run_epr(&other).unwrap().records, a.records);
}

#[test]
fn prefix_of_longer_run_is_unchanged() {
    // Per-pair streams: pair i does not depend on how many pairs follow.
    let short = run_epr(&small(50)).unwrap();
    let long = run_epr(&small(120)).unwrap();
    assert_eq!(&long.records[..50], &short.records[..]);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut cfg = small(300);
    cfg.experiment.mode = InformationMode::Local;
    let one = run_epr_with_workers(&cfg, 1).unwrap();
    let three = run_epr_with_workers(&cfg, 3).unwrap();
    let strip = |r| {
        let mut j = ReportJson::from_report(r);
        j.runtime_s = 0.0;
        serde_json::to_string(&j).unwrap()
    };
    assert_eq!(strip(&one), strip(&three));
}

#[test]
fn aligned_magnets_always_anticorrelate() {
    let mut cfg = small(1000);
    cfg.experiment.switch_policy = SwitchPolicy::Static;
    cfg.experiment.angle_a = 0.4;
    cfg.experiment.angle_b = 0.4;
    let report = run_epr(&cfg).unwrap();
    for r in &report.records {
        assert_eq!(r.outcome_a.unwrap().value(), -r.outcome_b.unwrap().value(), "pair {}", r.pair_id);
    }
    assert!(report.bell.is_err());
    assert!(report.quiescent.is_none());
}

#[test]
fn nonlocal_violates_chsh_and_local_does_not() {
    let mut cfg = small(2000);
    let nonlocal = run_epr(&cfg).unwrap();
    let s = nonlocal.bell().unwrap().s_signed;
    assert!(s < -2.5, "nonlocal S = {s}");
    cfg.experiment.mode = InformationMode::Local;
    let local = run_epr(&cfg).unwrap();
    let s = local.bell().unwrap().s_signed;
    assert!(s.abs() < 2.0, "local S = {s}");
}

#[test]
fn local_alice_sees_previous_bob_setting() {
    let mut cfg = small(40);
    cfg.experiment.mode = InformationMode::Local;
    let report = run_epr(&cfg).unwrap();
    let timeline = setting_timeline(&cfg).unwrap();
    for w in report.records.windows(2) {
        assert_eq!(w[1].alice_view.theta_b(), w[0].angle_b);
        assert_eq!(w[1].bob_view.theta_a(), w[0].angle_a);
    }
    assert_eq!(timeline.history(Side::Left).len(), 41);
}

#[test]
fn one_sided_switching_halves_that_side() {
    let mut cfg = small(6000);
    cfg.experiment.efficiency = Efficiency::Inefficient;
    cfg.experiment.kick_threshold = 0.0;
    cfg.experiment.switching_sides = SwitchingSides::Alice;
    let report = run_epr(&cfg).unwrap();
    let r = count_rates(&report).unwrap();
    assert!((r.singles_ratio.alice - 0.5).abs() < 0.03, "{:?}", r);
    assert_eq!(r.singles_ratio.bob, 1.0);
    assert!((r.coincidence_ratio - 0.5).abs() < 0.03, "{:?}", r);
}

#[test]
fn efficient_runs_lose_nothing() {
    let report = run_epr(&small(500)).unwrap();
    assert!(report.records.iter().all(|r| r.survived_a && r.survived_b));
    let r = count_rates(&report).unwrap();
    assert_eq!((r.singles_ratio.alice, r.coincidence_ratio), (1.0, 1.0));
}

#[test]
fn light_speed_signals_make_local_equal_nonlocal() {
    let mut cfg = small(200);
    cfg.experiment.signal_speed = cfg.physics.light_speed;
    let nonlocal = run_epr(&cfg).unwrap();
    cfg.experiment.mode = InformationMode::Local;
    let local = run_epr(&cfg).unwrap();
    assert_eq!(local.records, nonlocal.records);
}

#[test]
fn explicit_switch_lists_drive_settings() {
    let mut cfg = small(6);
    cfg.experiment.switch_policy = SwitchPolicy::ExplicitList;
    cfg.experiment.switches_a = vec![[-1.0, 0.0], [0.025, PI / 2.0]];
    cfg.experiment.switches_b = vec![[-1.0, PI / 4.0]];
    let report = run_epr(&cfg).unwrap();
    let angles: Vec<f64> = report.records.iter().map(|r| r.angle_a).collect();
    assert_eq!(angles, vec![0.0, 0.0, 0.0, PI / 2.0, PI / 2.0, PI / 2.0]);
    assert!(report.records.iter().all(|r| r.angle_b == PI / 4.0));
}

#[test]
fn coincidence_normalization_uses_surviving_pairs() {
    let mut cfg = small(1500);
    cfg.experiment.efficiency = Efficiency::Inefficient;
    cfg.experiment.kick_threshold = 0.0;
    cfg.experiment.normalization = Normalization::Coincidences;
    let report = run_epr(&cfg).unwrap();
    let bell = report.bell().unwrap();
    let n: f64 = bell.correlators.iter().map(|c| c.count).sum();
    let coincidences = report.records.iter().filter(|r| r.is_coincidence()).count() as f64;
    assert_eq!(n, coincidences);
    assert!(bell.s_signed < -2.0);
}

#[test]
fn outputs_round_trip_through_files() {
    let cfg = small(30);
    let report = run_epr(&cfg).unwrap();
    let mut log = Vec::new();
    write_event_log(&report, &mut log).unwrap();
    let mut rdr = csv::Reader::from_reader(log.as_slice());
    assert_eq!(rdr.records().count(), 30);

    let json = serde_json::to_string(&ReportJson::from_report(&report)).unwrap();
    let back: ReportJson = serde_json::from_str(&json).unwrap();
    assert_eq!(back.config_echo, cfg);
    assert_eq!(back.seed, 0);

    let mut traced_cfg = cfg.clone();
    traced_cfg.integration.record_every = 300;
    let traces = trace_pairs(&traced_cfg, 3).unwrap();
    assert_eq!(traces.len(), 3);
    let mut buf = Vec::new();
    write_trajectories(&traces, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("pair_id,view,step,t,z_L,z_R\n"));
    // 3000 steps recorded every 300 plus the start: 11 rows per view.
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 11);
}
