//! JSON model files: `{"S": int, "A": int, "P": [[[float]]], "mu": [[float]]}`
//! with `P[s][a][s']` and optional `mu[s][a]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::MdpModel;
use crate::objective::CoverageWeights;

/// Rows further than this from summing to one are rejected; closer rows are
/// renormalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    #[serde(rename = "P")]
    pub kernel: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Vec<f64>>>,
}

impl ModelFile {
    pub fn from_model(model: &MdpModel<f64>, weights: Option<&CoverageWeights<f64>>) -> Self {
        let na = model.num_actions();
        Self {
            num_states: model.num_states(),
            num_actions: na,
            kernel: model.to_nested(),
            mu: weights.map(|w| w.values().chunks(na).map(<[f64]>::to_vec).collect()),
        }
    }

    /// Checks shapes, renormalizes near-stochastic rows and builds the model.
    pub fn into_model(self) -> Result<(MdpModel<f64>, Option<CoverageWeights<f64>>)> {
        let (ns, na) = (self.num_states, self.num_actions);
        if self.kernel.len() != ns {
            return Err(Error::Dimension {
                what: "P states",
                expected: ns,
                found: self.kernel.len(),
            });
        }
        let mut kernel = self.kernel;
        for (s, per_state) in kernel.iter_mut().enumerate() {
            if per_state.len() != na {
                return Err(Error::Dimension {
                    what: "P actions",
                    expected: na,
                    found: per_state.len(),
                });
            }
            for (a, row) in per_state.iter_mut().enumerate() {
                if row.len() != ns {
                    return Err(Error::Dimension {
                        what: "P row",
                        expected: ns,
                        found: row.len(),
                    });
                }
                let sum: f64 = row.iter().sum();
                if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
                    return Err(Error::ModelFile(format!(
                        "row ({s},{a}) sums to {sum}, off by more than {ROW_SUM_TOLERANCE}"
                    )));
                }
                if sum != 1.0 {
                    for p in row.iter_mut() {
                        *p /= sum;
                    }
                }
            }
        }
        let model = MdpModel::from_nested(&kernel)?;
        let weights = match self.mu {
            None => None,
            Some(mu) => {
                if mu.len() != ns || mu.iter().any(|r| r.len() != na) {
                    return Err(Error::Dimension {
                        what: "mu",
                        expected: ns * na,
                        found: mu.iter().map(Vec::len).sum(),
                    });
                }
                Some(CoverageWeights::new(mu.into_iter().flatten().collect())?)
            }
        };
        Ok((model, weights))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn load_model(path: &Path) -> Result<(MdpModel<f64>, Option<CoverageWeights<f64>>)> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.into_model()
}

pub fn save_model(
    path: &Path,
    model: &MdpModel<f64>,
    weights: Option<&CoverageWeights<f64>>,
) -> Result<()> {
    fs::write(path, ModelFile::from_model(model, weights).to_json()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(rows: Vec<Vec<Vec<f64>>>) -> ModelFile {
        ModelFile {
            num_states: rows.len(),
            num_actions: rows[0].len(),
            kernel: rows,
            mu: None,
        }
    }

    #[test]
    fn near_stochastic_rows_are_renormalized() {
        let (model, _) = file(vec![vec![vec![0.5, 0.5 + 5e-10]], vec![vec![0.3, 0.7]]])
            .into_model()
            .unwrap();
        let sum: f64 = model.row(0, 0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn far_rows_are_rejected() {
        let err = file(vec![vec![vec![0.5, 0.5 + 1e-6]], vec![vec![0.3, 0.7]]])
            .into_model()
            .unwrap_err();
        assert!(matches!(err, Error::ModelFile(_)));
    }

    #[test]
    fn parses_schema_with_weights() {
        let text = r#"{"S": 1, "A": 2, "P": [[[1.0], [1.0]]], "mu": [[2.0, 1.0]]}"#;
        let parsed: ModelFile = serde_json::from_str(text).unwrap();
        let (model, mu) = parsed.into_model().unwrap();
        assert_eq!(model.num_actions(), 2);
        assert_eq!(mu.unwrap().values(), &[2.0, 1.0]);
    }

    #[test]
    fn shape_errors_are_structural() {
        let mut f = file(vec![vec![vec![1.0]]]);
        f.num_states = 2;
        assert!(matches!(f.into_model(), Err(Error::Dimension { .. })));
    }
}
