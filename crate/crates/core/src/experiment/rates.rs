//! Absolute count rates, per launched pair.

use serde::{Deserialize, Serialize};

use crate::error::EstimateError;

use super::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideRates {
    #[serde(rename = "A")]
    pub alice: f64,
    #[serde(rename = "B")]
    pub bob: f64,
}

/// Singles and coincidence rates of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub launched: u64,
    pub singles: SideRates,
    pub coincidences: f64,
}

impl Rates {
    pub fn from_counts(launched: u64, alice: u64, bob: u64, both: u64) -> Self {
        let n = launched.max(1) as f64;
        Self {
            launched,
            singles: SideRates {
                alice: alice as f64 / n,
                bob: bob as f64 / n,
            },
            coincidences: both as f64 / n,
        }
    }
}

/// Quiescent (`q1`, `c2`) against switching (`q1p`, `c2p`) rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRates {
    pub q1: SideRates,
    pub q1p: SideRates,
    pub c2: f64,
    pub c2p: f64,
    pub singles_ratio: SideRates,
    pub coincidence_ratio: f64,
}

/// Compares a switching run with its quiescent baseline.
pub fn count_rates(report: &ExperimentReport) -> Result<CountRates, EstimateError> {
    let baseline = report.quiescent.as_ref().ok_or(EstimateError::MissingBaseline)?;
    Ok(compare(baseline, &report.rates))
}

pub fn compare(quiescent: &Rates, switching: &Rates) -> CountRates {
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
    CountRates {
        q1: quiescent.singles,
        q1p: switching.singles,
        c2: quiescent.coincidences,
        c2p: switching.coincidences,
        singles_ratio: SideRates {
            alice: ratio(switching.singles.alice, quiescent.singles.alice),
            bob: ratio(switching.singles.bob, quiescent.singles.bob),
        },
        coincidence_ratio: ratio(switching.coincidences, quiescent.coincidences),
    }
}
