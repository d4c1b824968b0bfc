use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};

/// Orientation of a working regression: which column is the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Regress y on x (candidate model X -> Y).
    XToY,
    /// Regress x on y (candidate model Y -> X).
    YToX,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::XToY => Direction::YToX,
            Direction::YToX => Direction::XToY,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::XToY => "x_to_y",
            Direction::YToX => "y_to_x",
        }
    }
}

/// Paired observations `(x_i, y_i)`, all finite, at least three of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

pub const MIN_SAMPLE_SIZE: usize = 3;

impl BivariateSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(CdspError::DimensionMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if xs.len() < MIN_SAMPLE_SIZE {
            return Err(CdspError::InvalidInput(format!(
                "need at least {MIN_SAMPLE_SIZE} observations, got {}",
                xs.len()
            )));
        }
        if let Some(i) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(CdspError::InvalidInput(format!(
                "non-finite value at observation {i}"
            )));
        }
        Ok(BivariateSample { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// `(predictor, response)` for the given orientation.
    pub fn oriented(&self, direction: Direction) -> (&[f64], &[f64]) {
        match direction {
            Direction::XToY => (&self.xs, &self.ys),
            Direction::YToX => (&self.ys, &self.xs),
        }
    }

    /// The same data with the column roles exchanged.
    pub fn swapped(&self) -> BivariateSample {
        BivariateSample {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// Rows picked by `idx` (repeats allowed). Indices must be in range.
    pub fn select(&self, idx: &[usize]) -> BivariateSample {
        BivariateSample {
            xs: idx.iter().map(|&i| self.xs[i]).collect(),
            ys: idx.iter().map(|&i| self.ys[i]).collect(),
        }
    }

    /// Both columns mapped through `x -> a*x + b` style transforms.
    pub fn map_columns(&self, fx: impl Fn(f64) -> f64, fy: impl Fn(f64) -> f64) -> Result<Self> {
        BivariateSample::new(
            self.xs.iter().map(|&v| fx(v)).collect(),
            self.ys.iter().map(|&v| fy(v)).collect(),
        )
    }
}
