use serde::{Deserialize, Serialize};

use super::graph::EdgeLabel;
use super::ArchError;
use crate::num::Scalar;

/// Operation durations in microseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimingModel<T = f64> {
    pub split: T,
    pub merge: T,
    /// Transit between two segments through a junction.
    #[serde(rename = "move")]
    pub move_: T,
    /// Reordering of two neighbouring ions; also used for a shift into an empty slot.
    pub inner_swap: T,
    pub gate_1q: T,
    pub gate_2q: T,
}

impl<T: Scalar> Default for TimingModel<T> {
    fn default() -> Self {
        TimingModel {
            split: T::lit(80.0),
            merge: T::lit(80.0),
            move_: T::lit(100.0),
            inner_swap: T::lit(120.0),
            gate_1q: T::lit(30.0),
            gate_2q: T::lit(100.0),
        }
    }
}

impl<T: Scalar> TimingModel<T> {
    /// Every duration set to `value`.
    pub fn uniform(value: T) -> Self {
        TimingModel {
            split: value,
            merge: value,
            move_: value,
            inner_swap: value,
            gate_1q: value,
            gate_2q: value,
        }
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        let all = [
            ("split", self.split),
            ("merge", self.merge),
            ("move", self.move_),
            ("inner_swap", self.inner_swap),
            ("gate_1q", self.gate_1q),
            ("gate_2q", self.gate_2q),
        ];
        for (name, value) in all {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(ArchError::Timing(format!(
                    "{name} must be a positive finite duration"
                )));
            }
        }
        Ok(())
    }

    /// Weight of one edge traversal in the distance matrix. Merge/split edges are direction-free
    /// and take the larger of the two durations.
    pub fn edge_weight(&self, label: EdgeLabel) -> T {
        match label {
            EdgeLabel::Swap => self.inner_swap,
            EdgeLabel::MergeSplit => {
                if self.split > self.merge {
                    self.split
                } else {
                    self.merge
                }
            }
            EdgeLabel::Move => self.move_,
        }
    }

    pub fn block_duration(&self, one_qubit_gates: usize, two_qubit_gates: usize) -> T {
        self.gate_1q * T::from_usize_lossy(one_qubit_gates)
            + self.gate_2q * T::from_usize_lossy(two_qubit_gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_weights() {
        let t = TimingModel::<f64>::default();
        t.validate().unwrap();
        assert_eq!(t.edge_weight(EdgeLabel::Move), 100.0);
        assert_eq!(t.edge_weight(EdgeLabel::MergeSplit), 80.0);
        let skewed = TimingModel {
            merge: 95.0,
            ..TimingModel::<f32>::default()
        };
        assert_eq!(skewed.edge_weight(EdgeLabel::MergeSplit), 95.0);
        assert_eq!(t.block_duration(2, 3), 360.0);
    }

    #[test]
    fn rejects_non_positive() {
        let t = TimingModel {
            split: 0.0,
            ..TimingModel::<f64>::default()
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn json_uses_move_key() {
        let text = serde_json::to_string(&TimingModel::<f64>::default()).unwrap();
        assert!(text.contains("\"move\":100"));
        let back: TimingModel<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, TimingModel::default());
    }
}
