//! Monte Carlo EPR harness.
//!
//! Pairs are launched at fixed intervals. At every launch each switching
//! side draws a new magnet orientation from its two-angle menu. Each
//! observer integrates both particles under the settings she can know at
//! magnet entry, reads off her own particle, and the harness tallies the
//! four CHSH correlators.
//!
//! Every pair draws from its own ChaCha stream keyed by `(master_seed,
//! pair_id)`, so results do not depend on how pairs are spread over threads.

pub mod config;
pub mod loss;
pub mod rates;
pub mod stats;
pub mod table1;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, EstimateError, Result};
use crate::infomodel::{effective_settings, SettingTimeline, Switch};
use crate::integrate::{integrate_pair, sample_initial, IntegrationConfig, Outcome, PairViews};
use crate::physconst::DerivedCoefficients;
use crate::velocity::{SettingPair, Side};

pub use config::{ExperimentConfig, ExperimentSettings, IntegrationSettings, SwitchPolicy, SwitchingSides};
pub use loss::{detector_loss, kick_ratio, Efficiency};
pub use rates::{count_rates, CountRates, Rates, SideRates};
pub use stats::{chsh, BellEstimate, CellTally, Correlator, Normalization, CELL_LABELS};

/// Stream reserved for the magnet orientations in place before the first launch.
const INITIAL_SETTINGS_STREAM: u64 = u64::MAX;

/// Everything recorded about one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRecord {
    pub pair_id: u64,
    /// Orientations in force at magnet entry, radians.
    pub angle_a: f64,
    pub angle_b: f64,
    /// Position of those orientations in the menus, if they are menu angles.
    pub choice_a: Option<usize>,
    pub choice_b: Option<usize>,
    /// Settings Alice and Bob fed into the velocity law.
    pub alice_view: SettingPair,
    pub bob_view: SettingPair,
    /// `None` when the particle never reached its detector.
    pub outcome_a: Option<Outcome>,
    pub outcome_b: Option<Outcome>,
    pub survived_a: bool,
    pub survived_b: bool,
}

impl PairRecord {
    pub fn is_coincidence(&self) -> bool {
        self.survived_a && self.survived_b
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<PairRecord>,
    /// `[alice choice][bob choice]`
    pub cells: [[CellTally; 2]; 2],
    /// Fails when some setting pair never occurred.
    pub bell: std::result::Result<BellEstimate, EstimateError>,
    pub rates: Rates,
    /// Rates of the same launches with both magnets held still; absent when
    /// this run is itself quiescent.
    pub quiescent: Option<Rates>,
    pub runtime_s: f64,
}

impl ExperimentReport {
    pub fn bell(&self) -> Result<&BellEstimate> {
        self.bell.as_ref().map_err(|e| e.clone().into())
    }
}

#[derive(Debug, Clone, Copy)]
struct PairDraw {
    pair_id: u64,
    choice_a: usize,
    choice_b: usize,
    init: (f64, f64),
}

fn pair_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_pairs(cfg: &ExperimentConfig) -> ((usize, usize), Vec<PairDraw>) {
    let seed = cfg.experiment.master_seed;
    let mut first = pair_rng(seed, INITIAL_SETTINGS_STREAM);
    let initial = (first.gen_range(0..2), first.gen_range(0..2));
    let draws = (0..cfg.experiment.n_pairs)
        .map(|pair_id| {
            let mut rng = pair_rng(seed, pair_id);
            let choice_a = rng.gen_range(0..2);
            let choice_b = rng.gen_range(0..2);
            let init = sample_initial(&mut rng, cfg.physics.packet_width);
            PairDraw {
                pair_id,
                choice_a,
                choice_b,
                init,
            }
        })
        .collect();
    (initial, draws)
}

fn side_policy(cfg: &ExperimentConfig, side: Side) -> SwitchPolicy {
    let switching = match cfg.experiment.switching_sides {
        SwitchingSides::Both => true,
        SwitchingSides::Alice => side == Side::Left,
        SwitchingSides::Bob => side == Side::Right,
    };
    if switching {
        cfg.experiment.switch_policy
    } else {
        SwitchPolicy::Static
    }
}

fn launch_time(cfg: &ExperimentConfig, pair_id: u64) -> f64 {
    pair_id as f64 * cfg.experiment.launch_interval
}

fn side_history(
    cfg: &ExperimentConfig,
    side: Side,
    policy: SwitchPolicy,
    initial: usize,
    draws: &[PairDraw],
) -> Vec<Switch> {
    let (menu, explicit) = match side {
        Side::Left => (cfg.alice_menu(), &cfg.experiment.switches_a),
        Side::Right => (cfg.bob_menu(), &cfg.experiment.switches_b),
    };
    match policy {
        SwitchPolicy::Static => vec![Switch::new(f64::NEG_INFINITY, menu[0])],
        SwitchPolicy::ExplicitList => explicit.iter().map(|&[t, a]| Switch::new(t, a)).collect(),
        SwitchPolicy::PerPairRandom => {
            let mut history = Vec::with_capacity(draws.len() + 1);
            history.push(Switch::new(f64::NEG_INFINITY, menu[initial]));
            history.extend(draws.iter().map(|d| {
                let choice = if side == Side::Left { d.choice_a } else { d.choice_b };
                Switch::new(launch_time(cfg, d.pair_id), menu[choice])
            }));
            history
        }
    }
}

fn build_timeline(
    cfg: &ExperimentConfig,
    policies: (SwitchPolicy, SwitchPolicy),
    initial: (usize, usize),
    draws: &[PairDraw],
) -> Result<SettingTimeline> {
    Ok(SettingTimeline::new(
        side_history(cfg, Side::Left, policies.0, initial.0, draws),
        side_history(cfg, Side::Right, policies.1, initial.1, draws),
        cfg.experiment.separation,
        cfg.experiment.signal_speed,
    )?)
}

/// The magnet-orientation history a run with this config will use.
pub fn setting_timeline(cfg: &ExperimentConfig) -> Result<SettingTimeline> {
    let (initial, draws) = draw_pairs(cfg);
    build_timeline(
        cfg,
        (side_policy(cfg, Side::Left), side_policy(cfg, Side::Right)),
        initial,
        &draws,
    )
}

fn survival(cfg: &ExperimentConfig, timeline: &SettingTimeline, pair_id: u64) -> (bool, bool) {
    let launch = launch_time(cfg, pair_id);
    let entry = launch + cfg.flight_time();
    let e = &cfg.experiment;
    let p = &cfg.physics;
    let survives = |side| {
        detector_loss(
            e.efficiency,
            timeline.switched_during(side, launch, entry),
            p.beam_speed,
            p.light_speed,
            e.kick_threshold,
        )
    };
    (survives(Side::Left), survives(Side::Right))
}

fn menu_index(menu: [f64; 2], angle: f64) -> Option<usize> {
    menu.iter().position(|&m| (m - angle).abs() <= 1e-12)
}

/// Settings each observer uses for a pair, fixed at magnet entry.
fn pair_settings(
    cfg: &ExperimentConfig,
    timeline: &SettingTimeline,
    pair_id: u64,
) -> Result<(f64, f64, SettingPair, SettingPair)> {
    let entry = launch_time(cfg, pair_id) + cfg.flight_time();
    let mode = cfg.experiment.mode;
    let angle_a = timeline.angle_at(Side::Left, entry)?;
    let angle_b = timeline.angle_at(Side::Right, entry)?;
    let alice = effective_settings(Side::Left, entry, timeline, mode)?;
    let bob = effective_settings(Side::Right, entry, timeline, mode)?;
    Ok((angle_a, angle_b, alice, bob))
}

fn run_pair(
    cfg: &ExperimentConfig,
    coeff: &DerivedCoefficients,
    icfg: &IntegrationConfig,
    timeline: &SettingTimeline,
    draw: &PairDraw,
) -> Result<PairRecord> {
    let (angle_a, angle_b, alice_view, bob_view) = pair_settings(cfg, timeline, draw.pair_id)?;
    let (survived_a, survived_b) = survival(cfg, timeline, draw.pair_id);

    let (outcome_a, outcome_b) = if survived_a || survived_b {
        let views = integrate_pair(draw.init, &alice_view, &bob_view, coeff, icfg).map_err(|source| {
            Error::Pair {
                pair_id: draw.pair_id,
                source,
            }
        })?;
        let (a, b) = views.outcomes();
        (survived_a.then_some(a), survived_b.then_some(b))
    } else {
        (None, None)
    };

    Ok(PairRecord {
        pair_id: draw.pair_id,
        angle_a,
        angle_b,
        choice_a: menu_index(cfg.alice_menu(), angle_a),
        choice_b: menu_index(cfg.bob_menu(), angle_b),
        alice_view,
        bob_view,
        outcome_a,
        outcome_b,
        survived_a,
        survived_b,
    })
}

/// Runs the experiment on rayon's current thread pool.
pub fn run_epr(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let (initial, draws) = draw_pairs(cfg);
    let policies = (side_policy(cfg, Side::Left), side_policy(cfg, Side::Right));
    let timeline = build_timeline(cfg, policies, initial, &draws)?;
    let coeff = cfg.coefficients()?;
    let icfg = cfg.integration_config();

    let records = draws
        .par_iter()
        .map(|d| run_pair(cfg, &coeff, &icfg, &timeline, d))
        .collect::<Result<Vec<_>>>()?;

    let quiescent = if policies == (SwitchPolicy::Static, SwitchPolicy::Static) {
        None
    } else {
        let still = build_timeline(cfg, (SwitchPolicy::Static, SwitchPolicy::Static), initial, &draws)?;
        Some(tally_survival(cfg, &still, &draws))
    };

    let mut report = aggregate(cfg, records);
    report.quiescent = quiescent;
    report.runtime_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs the experiment on a dedicated pool of `workers` threads.
pub fn run_epr_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_epr(cfg))
}

fn tally_survival(cfg: &ExperimentConfig, timeline: &SettingTimeline, draws: &[PairDraw]) -> Rates {
    let (mut a, mut b, mut both) = (0, 0, 0);
    for d in draws {
        let (sa, sb) = survival(cfg, timeline, d.pair_id);
        a += sa as u64;
        b += sb as u64;
        both += (sa && sb) as u64;
    }
    Rates::from_counts(draws.len() as u64, a, b, both)
}

fn aggregate(cfg: &ExperimentConfig, records: Vec<PairRecord>) -> ExperimentReport {
    let mut cells = [[CellTally::default(); 2]; 2];
    let (mut a, mut b, mut both) = (0, 0, 0);
    for r in &records {
        a += r.survived_a as u64;
        b += r.survived_b as u64;
        both += r.is_coincidence() as u64;
        let (Some(i), Some(j)) = (r.choice_a, r.choice_b) else {
            continue;
        };
        let cell = &mut cells[i][j];
        cell.launched += 1;
        cell.alice_singles += r.survived_a as u64;
        cell.bob_singles += r.survived_b as u64;
        if let (Some(oa), Some(ob)) = (r.outcome_a, r.outcome_b) {
            cell.coincidences += 1;
            cell.product_sum += i64::from(oa.value() * ob.value());
        }
    }
    let bell = BellEstimate::from_cells(&cells, cfg.experiment.normalization);
    ExperimentReport {
        config: cfg.clone(),
        rates: Rates::from_counts(records.len() as u64, a, b, both),
        records,
        cells,
        bell,
        quiescent: None,
        runtime_s: 0.0,
    }
}

/// Full trajectories of the first `n_pairs` pairs, as both observers
/// computed them.
pub fn trace_pairs(cfg: &ExperimentConfig, n_pairs: u64) -> Result<Vec<(u64, PairViews)>> {
    let mut cfg = cfg.clone();
    cfg.experiment.n_pairs = cfg.experiment.n_pairs.max(n_pairs).max(4);
    cfg.validate()?;
    let coeff = cfg.coefficients()?;
    let icfg = cfg.integration_config();
    let (initial, draws) = draw_pairs(&cfg);
    let policies = (side_policy(&cfg, Side::Left), side_policy(&cfg, Side::Right));
    let timeline = build_timeline(&cfg, policies, initial, &draws)?;
    draws
        .iter()
        .take(n_pairs as usize)
        .map(|d| {
            let (_, _, alice, bob) = pair_settings(&cfg, &timeline, d.pair_id)?;
            let views = integrate_pair(d.init, &alice, &bob, &coeff, &icfg).map_err(|source| Error::Pair {
                pair_id: d.pair_id,
                source,
            })?;
            Ok((d.pair_id, views))
        })
        .collect()
}
