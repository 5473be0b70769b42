use crate::error::{Error, Result};

const NORM_SLACK: f64 = 1e-12;

/// One stream element: a vector with coordinates in `[0, 1]` and ℓ2 norm at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamElement {
    value: Vec<f64>,
}

impl StreamElement {
    pub fn new(value: Vec<f64>) -> Result<Self> {
        if value.is_empty() {
            return Err(Error::InvalidElement("element has dimension 0".into()));
        }
        if let Some((i, v)) = value
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::InvalidElement(format!(
                "coordinate {i} is {v}, expected a value in [0, 1]"
            )));
        }
        let norm = value.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::InvalidElement(format!(
                "l2 norm {norm} exceeds 1"
            )));
        }
        Ok(Self { value })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    /// The all-zero element of dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Self {
            value: vec![0.0; dim.max(1)],
        }
    }

    pub fn bit(set: bool) -> Self {
        Self {
            value: vec![if set { 1.0 } else { 0.0 }],
        }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.value
    }
}

/// What a mechanism releases at one step, plus instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutput {
    pub estimate: Vec<f64>,
    /// 1-based time index.
    pub step: u64,
    /// Stored noise terms retired at this step.
    pub replacements: usize,
    /// Fresh noise terms drawn and stored at this step.
    pub admitted: usize,
    /// Noise terms held after this step.
    pub live_nodes: usize,
}
