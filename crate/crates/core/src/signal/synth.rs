//! Seeded synthetic sEMG-like trials: band-limited Gaussian noise per
//! channel with class-specific channel gains and spectral centres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SignalRecord;
use crate::error::{Error, Result};
use crate::preprocess::ButterworthBandpass;

const MIN_FS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub n_channels: usize,
    pub fs: f64,
    pub trials_per_class: usize,
    pub trial_seconds: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_classes: 8,
            n_channels: 8,
            fs: 2048.0,
            trials_per_class: 5,
            trial_seconds: 10.0,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn class_names(&self) -> Vec<String> {
        (0..self.n_classes).map(|g| format!("gesture_{g}")).collect()
    }

    pub fn generate(&self) -> Result<Vec<SignalRecord>> {
        generate_synthetic(
            self.n_classes,
            self.n_channels,
            self.fs,
            self.trials_per_class,
            self.trial_seconds,
            self.seed,
        )
    }
}

struct ClassProfile {
    gains: Vec<f64>,
    filter: ButterworthBandpass,
}

/// Returns `n_classes * trials_per_class` records ordered by trial then
/// class. Trial `t` of every class carries subject tag `s{t:02}`.
pub fn generate_synthetic(
    n_classes: usize,
    n_channels: usize,
    fs: f64,
    trials_per_class: usize,
    trial_seconds: f64,
    seed: u64,
) -> Result<Vec<SignalRecord>> {
    if n_classes == 0 || n_channels == 0 || trials_per_class == 0 {
        return Err(Error::Config("class, channel and trial counts must be >= 1".into()));
    }
    if !(fs >= MIN_FS) {
        return Err(Error::Config(format!(
            "fs = {fs} Hz is too low for the 450 Hz band edge; synthetic data needs fs >= {MIN_FS} Hz"
        )));
    }
    let n = (trial_seconds * fs).round() as usize;
    if !(trial_seconds > 0.0) || n < 2 {
        return Err(Error::Config(format!(
            "trial of {trial_seconds} s at {fs} Hz has fewer than 2 samples"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = 300.0 / n_classes as f64;
    let profiles = (0..n_classes)
        .map(|g| {
            let jitter: f64 = rng.gen_range(-0.25..0.25);
            let centre = 60.0 + (g as f64 + 0.5 + jitter) * spacing;
            let half_width = (0.2 * centre).max(10.0);
            let filter = ButterworthBandpass::design(centre - half_width, centre + half_width, 2, fs)?;
            let gains = (0..n_channels).map(|_| rng.gen_range(-1.2f64..1.2).exp()).collect();
            Ok(ClassProfile { gains, filter })
        })
        .collect::<Result<Vec<_>>>()?;
    let broadband = ButterworthBandpass::design(20.0, 450.0, 2, fs)?;

    let mut records = Vec::with_capacity(n_classes * trials_per_class);
    for trial in 0..trials_per_class {
        for (g, profile) in profiles.iter().enumerate() {
            let noise = |filter: &ButterworthBandpass, rng: &mut ChaCha8Rng| {
                let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                filter.filtfilt(&raw)
            };
            let shared = noise(&profile.filter, &mut rng)?;
            let mut samples = Vec::with_capacity(n_channels);
            for &gain in &profile.gains {
                let trial_gain = gain * (0.1 * rng.sample::<f64, _>(StandardNormal)).exp();
                let own = noise(&profile.filter, &mut rng)?;
                let floor = noise(&broadband, &mut rng)?;
                samples.push(
                    own.iter()
                        .zip(&shared)
                        .zip(&floor)
                        .map(|((o, s), f)| trial_gain * (o + 0.5 * s) + 0.05 * f)
                        .collect(),
                );
            }
            records.push(SignalRecord::new(samples, fs, g, format!("s{trial:02}"), "d1")?);
        }
    }
    Ok(records)
}
