use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::rng::{substream, StreamRng, TAG_GENERATE};
use crate::sample::BivariateSample;

/// Exponential law restricted to `(lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExponential {
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedExponential {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(CdspError::InvalidInput(format!("cause rate must be positive, got {}", self.rate)));
        }
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(CdspError::InvalidInput(format!(
                "cause support ({}, {}) is empty",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        let mass = -(-self.rate * (self.upper - self.lower)).exp_m1();
        let x = self.lower - (-u * mass).ln_1p() / self.rate;
        x.clamp(self.lower, self.upper)
    }

    pub fn mean(&self) -> f64 {
        let w = self.upper - self.lower;
        let e = (-self.rate * w).exp();
        self.lower + 1.0 / self.rate - w * e / (1.0 - e)
    }
}

/// Finite Gaussian mixture; drawn as a categorical component then a normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl GaussianMixture {
    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.sds.len() != k {
            return Err(CdspError::InvalidInput(format!(
                "noise mixture needs equally many weights, means and sds (got {}, {}, {})",
                k,
                self.means.len(),
                self.sds.len()
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(CdspError::InvalidInput(format!(
                "noise weights must be a probability vector (sum {total})"
            )));
        }
        // sd == 0 is a point mass and allowed.
        if self.sds.iter().any(|&s| !(s >= 0.0 && s.is_finite())) || self.means.iter().any(|m| !m.is_finite()) {
            return Err(CdspError::InvalidInput("noise means must be finite and sds non-negative".into()));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// Component means shifted so that the mixture has mean exactly zero.
    pub fn centred_means(&self) -> Vec<f64> {
        let mu = self.mean();
        self.means.iter().map(|m| m - mu).collect()
    }

    fn sample_with(&self, rng: &mut StreamRng, means: &[f64]) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = self.weights.len() - 1;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = j;
                break;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        means[comp] + self.sds[comp] * z
    }
}

/// Generator `Y = β sign(X − a)|X − a|^d + η` with truncated-exponential
/// `X` and zero-mean Gaussian-mixture `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimScenario {
    pub degree_d: f64,
    pub shift_a: f64,
    pub slope_beta: f64,
    pub cause: TruncatedExponential,
    pub noise: GaussianMixture,
    pub n: usize,
    pub m_reps: usize,
    pub seed: u64,
}

pub const DESK_N: usize = 500;
pub const DESK_REPS: usize = 50;
pub const DEFAULT_SIM_SEED: u64 = 20_240_601;

/// Degrees of the named presets `paper-d<degree>`.
pub const PRESET_DEGREES: [(&str, f64); 7] = [
    ("paper-d1", 1.0),
    ("paper-d1.2", 1.2),
    ("paper-d1.25", 1.25),
    ("paper-d1.3", 1.3),
    ("paper-d1.4", 1.4),
    ("paper-d1.5", 1.5),
    ("paper-d3", 3.0),
];

impl Default for SimScenario {
    fn default() -> Self {
        SimScenario {
            degree_d: 1.0,
            shift_a: 0.25,
            slope_beta: 3.0,
            cause: TruncatedExponential {
                rate: 2.77,
                lower: 0.0,
                upper: 3.0,
            },
            noise: GaussianMixture {
                weights: vec![0.364, 0.2646, 0.3714],
                means: vec![-0.2168, 0.2458, -0.0502],
                sds: vec![0.0036, 0.1635, 0.0915],
            },
            n: DESK_N,
            m_reps: DESK_REPS,
            seed: DEFAULT_SIM_SEED,
        }
    }
}

impl SimScenario {
    pub fn with_degree(degree_d: f64) -> Self {
        SimScenario {
            degree_d,
            ..SimScenario::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESET_DEGREES
            .iter()
            .find(|(p, _)| *p == name)
            .map(|&(_, d)| SimScenario::with_degree(d))
    }

    pub fn preset_names() -> Vec<&'static str> {
        PRESET_DEGREES.iter().map(|(p, _)| *p).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.degree_d > 0.0 && self.degree_d.is_finite()) {
            return Err(CdspError::InvalidInput(format!("degree must be positive, got {}", self.degree_d)));
        }
        if !self.shift_a.is_finite() || !self.slope_beta.is_finite() {
            return Err(CdspError::InvalidInput("shift and slope must be finite".into()));
        }
        if self.n < crate::sample::MIN_SAMPLE_SIZE {
            return Err(CdspError::InvalidInput(format!("sample size {} too small", self.n)));
        }
        if self.m_reps == 0 {
            return Err(CdspError::InvalidInput("need at least one replication".into()));
        }
        self.cause.validate()?;
        self.noise.validate()
    }

    /// `β sign(x − a) |x − a|^d`.
    pub fn regression_fn(&self, x: f64) -> f64 {
        let u = x - self.shift_a;
        self.slope_beta * u.signum() * u.abs().powf(self.degree_d)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: SimScenario = toml::from_str(s).map_err(|e| CdspError::InvalidInput(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CdspError::Serialize(e.to_string()))
    }
}

/// `n` draws from the scenario's law using `rng`.
pub fn generate_n(scenario: &SimScenario, n: usize, rng: &mut StreamRng) -> Result<BivariateSample> {
    let means = scenario.noise.centred_means();
    let xs: Vec<f64> = (0..n).map(|_| scenario.cause.sample(rng)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| scenario.regression_fn(x) + scenario.noise.sample_with(rng, &means))
        .collect();
    BivariateSample::new(xs, ys)
}

/// Replication `rep_index` of the scenario; deterministic in `(seed, rep_index)`.
pub fn generate(scenario: &SimScenario, rep_index: usize) -> Result<BivariateSample> {
    scenario.validate()?;
    let mut rng = substream(scenario.seed, &[TAG_GENERATE, rep_index as u64]);
    generate_n(scenario, scenario.n, &mut rng)
}
