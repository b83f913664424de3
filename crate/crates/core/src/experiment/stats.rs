//! Correlators and the CHSH combination.

use serde::{Deserialize, Serialize};

use crate::error::EstimateError;

/// Labels of the four CHSH setting pairs, in `[alice][bob]` menu order.
pub const CELL_LABELS: [[&str; 2]; 2] = [["ab", "ab'"], ["a'b", "a'b'"]];

/// Raw tallies of one setting-pair cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellTally {
    pub launched: u64,
    pub alice_singles: u64,
    pub bob_singles: u64,
    pub coincidences: u64,
    /// Sum of `A * B` over coincident events.
    pub product_sum: i64,
}

/// How correlators are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divide by the geometric mean of the two sides' detection counts.
    Singles,
    /// Divide by the number of two-sided detections.
    Coincidences,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlator {
    pub label: &'static str,
    /// `E`, in `[-1, 1]`.
    pub value: f64,
    /// Effective event count behind `value`.
    pub count: f64,
}

impl CellTally {
    pub fn correlator(&self, label: &'static str, norm: Normalization) -> Correlator {
        let count = match norm {
            Normalization::Coincidences => self.coincidences as f64,
            Normalization::Singles => ((self.alice_singles as f64) * (self.bob_singles as f64)).sqrt(),
        };
        let value = if count > 0.0 {
            self.product_sum as f64 / count
        } else {
            0.0
        };
        Correlator { label, value, count }
    }
}

/// Signed CHSH value and its binomial standard error.
///
/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`,
/// `sigma_S = sqrt(sum_i (1 - E_i^2) / N_i)`.
pub fn chsh(cells: &[Correlator; 4]) -> Result<(f64, f64), EstimateError> {
    if let Some(empty) = cells.iter().find(|c| !(c.count > 0.0)) {
        return Err(EstimateError::EmptyCell(empty.label));
    }
    let [ab, abp, apb, apbp] = cells;
    let s = ab.value - abp.value + apb.value + apbp.value;
    let var: f64 = cells
        .iter()
        .map(|c| (1.0 - c.value * c.value).max(0.0) / c.count)
        .sum();
    Ok((s, var.sqrt()))
}

/// `|E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|`, bounded by 2 for
/// setting-independent local models.
pub fn chsh_abs(cells: &[Correlator; 4]) -> f64 {
    let [ab, abp, apb, apbp] = cells;
    (ab.value - abp.value).abs() + (apb.value + apbp.value).abs()
}

/// Correlators of all four cells plus the Bell statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellEstimate {
    pub correlators: [Correlator; 4],
    pub s_signed: f64,
    pub s_abs: f64,
    pub sigma_s: f64,
}

impl BellEstimate {
    pub fn from_cells(cells: &[[CellTally; 2]; 2], norm: Normalization) -> Result<Self, EstimateError> {
        let correlators = [
            cells[0][0].correlator(CELL_LABELS[0][0], norm),
            cells[0][1].correlator(CELL_LABELS[0][1], norm),
            cells[1][0].correlator(CELL_LABELS[1][0], norm),
            cells[1][1].correlator(CELL_LABELS[1][1], norm),
        ];
        let (s_signed, sigma_s) = chsh(&correlators)?;
        Ok(Self {
            s_abs: chsh_abs(&correlators),
            correlators,
            s_signed,
            sigma_s,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(values: [f64; 4], n: f64) -> [Correlator; 4] {
        let labels = ["ab", "ab'", "a'b", "a'b'"];
        std::array::from_fn(|i| Correlator {
            label: labels[i],
            value: values[i],
            count: n,
        })
    }

    #[test]
    fn singlet_optimum() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (s, _) = chsh(&cells([-h, h, -h, -h], 1000.0)).unwrap();
        assert!((s + 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((chsh_abs(&cells([-h, h, -h, -h], 1000.0)) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_data() {
        let (s, sigma) = chsh(&cells([0.0; 4], 400.0)).unwrap();
        assert_eq!(s, 0.0);
        assert!((sigma - 2.0 / 400f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn deterministic_extreme() {
        let (s, sigma) = chsh(&cells([-1.0, 1.0, -1.0, -1.0], 10.0)).unwrap();
        assert_eq!(s, -4.0);
        assert_eq!(sigma, 0.0);
    }

    #[test]
    fn empty_cell_named() {
        let mut c = cells([0.1; 4], 10.0);
        c[2].count = 0.0;
        assert_eq!(chsh(&c), Err(EstimateError::EmptyCell("a'b")));
    }

    #[test]
    fn normalizations_agree_without_losses() {
        let t = CellTally {
            launched: 10,
            alice_singles: 10,
            bob_singles: 10,
            coincidences: 10,
            product_sum: -6,
        };
        assert_eq!(
            t.correlator("ab", Normalization::Singles),
            t.correlator("ab", Normalization::Coincidences)
        );
        let lossy = CellTally {
            launched: 10,
            alice_singles: 5,
            bob_singles: 5,
            coincidences: 2,
            product_sum: -2,
        };
        assert_eq!(lossy.correlator("ab", Normalization::Coincidences).value, -1.0);
        assert!((lossy.correlator("ab", Normalization::Singles).value + 0.4).abs() < 1e-15);
    }
}
