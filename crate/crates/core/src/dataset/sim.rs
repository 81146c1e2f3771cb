use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AngleUnit, Dataset, Repetition};
use crate::error::{Error, Result};

/// Phase lead of the second joint in dataset A, radians.
pub const SIM_PHASE_A: f64 = 1.0;
/// Phase lead of the second joint in dataset B, radians.
pub const SIM_PHASE_B: f64 = FRAC_PI_2;

/// Parameters of the two-joint sine validation datasets.
///
/// Both datasets share `theta1(t) = amplitude * sin(omega * t)`. The second
/// joint has twice the amplitude and leads by 1 rad in A and by pi/2 in B.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub amplitude: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Seconds.
    pub duration: f64,
    pub samples: usize,
    /// Standard deviation of i.i.d. Gaussian noise added to every sample.
    pub noise_sigma: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub unit: AngleUnit,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            omega: std::f64::consts::TAU,
            duration: 1.0,
            samples: 1000,
            noise_sigma: 0.0,
            repetitions: 1,
            seed: 0,
            unit: AngleUnit::Rad,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.amplitude, "amplitude")?;
        positive(self.omega, "angular frequency")?;
        positive(self.duration, "duration")?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if self.samples < super::MIN_SAMPLES {
            return Err(Error::Config(format!(
                "need at least {} samples, got {}",
                super::MIN_SAMPLES,
                self.samples
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("need at least one repetition".into()));
        }
        Ok(())
    }

    pub fn time(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| self.duration * i as f64 / last)
            .collect()
    }
}

/// Builds the simulated datasets A and B. Noise, when enabled, is drawn from
/// a ChaCha stream seeded by `config.seed`: all of A's repetitions first,
/// then B's.
pub fn generate_simulated(config: &SimConfig) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let time = config.time();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;

    let mut build = |name: &str, shift: f64| -> Result<Dataset> {
        let reps = (0..config.repetitions)
            .map(|_| {
                let mut joint = |amp: f64, phase: f64| -> Vec<f64> {
                    time.iter()
                        .map(|t| {
                            let clean = amp * (config.omega * t + phase).sin();
                            if config.noise_sigma > 0.0 {
                                clean + noise.sample(&mut rng)
                            } else {
                                clean
                            }
                        })
                        .collect()
                };
                let theta1 = joint(config.amplitude, 0.0);
                let theta2 = joint(2.0 * config.amplitude, shift);
                Repetition::new(time.clone(), vec![theta1, theta2])
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(
            name,
            vec!["theta1".into(), "theta2".into()],
            reps,
            config.unit,
        )
    };

    let a = build("A", SIM_PHASE_A)?;
    let b = build("B", SIM_PHASE_B)?;
    Ok((a, b))
}
