//! Moment-based time-domain descriptors: the six-feature base set, its
//! fused (fTDD) form and the temporal-spatial (TSD) variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the moment normalization factor is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// Median of `m0_raw^k` over the channels of the current window.
    ChannelMedian,
    Fixed(f64),
}

/// Which irregularity-factor expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrfMode {
    /// `log(sqrt(m2 / (m0 * m4)))`
    SqrtRatio,
    /// `log(m2 / sqrt(m0 * m4))`
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TddParams {
    pub k: f64,
    pub lambda_mode: LambdaMode,
    pub eps: f64,
    pub irf: IrfMode,
}

impl Default for TddParams {
    fn default() -> Self {
        Self {
            k: 0.1,
            lambda_mode: LambdaMode::ChannelMedian,
            eps: 1e-10,
            irf: IrfMode::SqrtRatio,
        }
    }
}

impl TddParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::Config(format!("k must lie in (0, 1], got {}", self.k)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be > 0, got {}", self.eps)));
        }
        if let LambdaMode::Fixed(l) = self.lambda_mode {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("fixed lambda must be > 0, got {l}")));
            }
        }
        Ok(())
    }

    /// Resolves λ for a group of signals from their raw zero-order moments.
    pub fn resolve_lambda(&self, raw_m0: impl IntoIterator<Item = f64>) -> f64 {
        match self.lambda_mode {
            LambdaMode::Fixed(l) => l,
            LambdaMode::ChannelMedian => median(raw_m0.into_iter().map(|m| m.powf(self.k)).collect()),
        }
    }
}

pub const TDD_FEATURES: [&str; 6] = ["m0", "m2", "m4", "sparseness", "irf", "wlr"];
pub const TSD_FEATURES: [&str; 7] = ["m0", "m2", "m4", "sparseness", "irf", "cov", "tkeo"];

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn check_len(x: &[f64]) -> Result<()> {
    if x.len() < 3 {
        return Err(Error::Feature(format!(
            "descriptors need at least 3 samples, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// Root-mean-square of the signal, its first difference and its second
/// difference, each divided by the window length `N`.
pub fn raw_moments(x: &[f64]) -> [f64; 3] {
    let n = x.len() as f64;
    let mut s0 = 0.0;
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        s0 += v * v;
        if i >= 1 {
            let d = v - x[i - 1];
            s2 += d * d;
        }
        if i >= 2 {
            let dd = v - 2.0 * x[i - 1] + x[i - 2];
            s4 += dd * dd;
        }
    }
    [(s0 / n).sqrt(), (s2 / n).sqrt(), (s4 / n).sqrt()]
}

/// Shared part of the base and TSD vectors: log moments, sparseness, IRF.
fn moment_features(x: &[f64], params: &TddParams, lambda: f64) -> [f64; 5] {
    let eps = params.eps;
    let lambda = lambda.max(eps);
    let [r0, r2, r4] = raw_moments(x);
    let m0 = r0.powf(params.k) / lambda;
    let m2 = r2.powf(params.k) / lambda;
    let m4 = r4.powf(params.k) / lambda;
    let sparseness = m0 / ((m0 - m2).abs().sqrt() * (m0 - m4).abs().sqrt() + eps);
    let irf = match params.irf {
        IrfMode::SqrtRatio => (m2 / (m0 * m4 + eps)).sqrt(),
        IrfMode::Classic => m2 / ((m0 * m4).sqrt() + eps),
    };
    [
        (m0 + eps).ln(),
        (m2 + eps).ln(),
        (m4 + eps).ln(),
        (sparseness + eps).ln(),
        (irf + eps).ln(),
    ]
}

/// `log(Σ|Δ²x| / Σ|Δx|)` with eps guards.
fn waveform_length_ratio(x: &[f64], eps: f64) -> f64 {
    let d1: f64 = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let d2: f64 = x.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).sum();
    (d2 / (d1 + eps) + eps).ln()
}

/// Sum of the Teager-Kaiser operator `x[j]^2 - x[j-1] x[j+1]` over `1..N-1`.
pub fn tkeo_sum(x: &[f64]) -> f64 {
    x.windows(3).map(|w| w[1] * w[1] - w[0] * w[2]).sum()
}

/// Base descriptor with an explicit normalization factor λ.
pub fn tdd_base_with_lambda(x: &[f64], params: &TddParams, lambda: f64) -> Result<[f64; 6]> {
    check_len(x)?;
    let [a, b, c, d, e] = moment_features(x, params, lambda);
    Ok([a, b, c, d, e, waveform_length_ratio(x, params.eps)])
}

/// Base descriptor for a lone signal; with [`LambdaMode::ChannelMedian`]
/// the median runs over this one signal.
pub fn tdd_base(x: &[f64], params: &TddParams) -> Result<[f64; 6]> {
    check_len(x)?;
    let lambda = params.resolve_lambda([raw_moments(x)[0]]);
    tdd_base_with_lambda(x, params, lambda)
}

/// Element-wise cosine contributions `a_j b_j / (|a| |b| + eps)`; their sum
/// is the cosine similarity of `a` and `b`.
pub fn fuse(a: &[f64; 6], b: &[f64; 6], eps: f64) -> [f64; 6] {
    let norm = |v: &[f64; 6]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = norm(a) * norm(b) + eps;
    std::array::from_fn(|j| a[j] * b[j] / denom)
}

/// `log(x^2 + eps)`, the nonlinear copy the fused descriptor is compared with.
pub fn log_power(x: &[f64], eps: f64) -> Vec<f64> {
    x.iter().map(|v| (v * v + eps).ln()).collect()
}

/// Fused time-domain descriptors for a channel-major window: six entries per
/// channel.
pub fn ftdd_window(channels: &[Vec<f64>], params: &TddParams) -> Result<Vec<f64>> {
    if channels.is_empty() {
        return Err(Error::Feature("window has no channels".into()));
    }
    for ch in channels {
        check_len(ch)?;
    }
    let transformed: Vec<Vec<f64>> = channels.iter().map(|ch| log_power(ch, params.eps)).collect();
    let lambda_a = params.resolve_lambda(channels.iter().map(|c| raw_moments(c)[0]));
    let lambda_b = params.resolve_lambda(transformed.iter().map(|c| raw_moments(c)[0]));
    let mut row = Vec::with_capacity(6 * channels.len());
    for (x, t) in channels.iter().zip(&transformed) {
        let a = tdd_base_with_lambda(x, params, lambda_a)?;
        let b = tdd_base_with_lambda(t, params, lambda_b)?;
        row.extend(fuse(&a, &b, params.eps));
    }
    Ok(row)
}

pub fn ftdd_names(n_channels: usize) -> Vec<String> {
    (0..n_channels)
        .flat_map(|c| (0..6).map(move |j| format!("ch{c}_ftdd{j}")))
        .collect()
}

/// Seven TSD features of one signal with an explicit λ.
pub fn tsd_signal_features_with_lambda(x: &[f64], params: &TddParams, lambda: f64) -> Result<[f64; 7]> {
    check_len(x)?;
    let eps = params.eps;
    let [a, b, c, d, e] = moment_features(x, params, lambda);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let cov = (var.sqrt() / (mean.abs() + eps) + eps).ln();
    let tkeo = (tkeo_sum(x).abs() + eps).ln();
    Ok([a, b, c, d, e, cov, tkeo])
}

pub fn tsd_signal_features(x: &[f64], params: &TddParams) -> Result<[f64; 7]> {
    check_len(x)?;
    let lambda = params.resolve_lambda([raw_moments(x)[0]]);
    tsd_signal_features_with_lambda(x, params, lambda)
}

/// Unordered channel pairs in lexicographic order.
pub fn channel_pairs(n_channels: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_channels).flat_map(move |i| (i + 1..n_channels).map(move |j| (i, j)))
}

/// Within-channel features for every channel followed by features of every
/// pairwise difference `x_i - x_j`, `i < j`. λ comes from the channels and
/// is shared by all signals of the window.
pub fn tsd_window(channels: &[Vec<f64>], params: &TddParams) -> Result<Vec<f64>> {
    let c = channels.len();
    if c < 2 {
        return Err(Error::Feature(format!(
            "temporal-spatial descriptors need at least 2 channels, got {c}"
        )));
    }
    for ch in channels {
        check_len(ch)?;
    }
    let lambda = params.resolve_lambda(channels.iter().map(|ch| raw_moments(ch)[0]));
    let mut row = Vec::with_capacity(7 * (c + c * (c - 1) / 2));
    for ch in channels {
        row.extend(tsd_signal_features_with_lambda(ch, params, lambda)?);
    }
    for (i, j) in channel_pairs(c) {
        let diff: Vec<f64> = channels[i].iter().zip(&channels[j]).map(|(a, b)| a - b).collect();
        row.extend(tsd_signal_features_with_lambda(&diff, params, lambda)?);
    }
    Ok(row)
}

pub fn tsd_names(n_channels: usize) -> Vec<String> {
    let within = (0..n_channels).map(|c| format!("ch{c}"));
    let between = channel_pairs(n_channels).map(|(i, j)| format!("ch{i}-ch{j}"));
    within
        .chain(between)
        .flat_map(|prefix| TSD_FEATURES.iter().map(move |f| format!("{prefix}_{f}")))
        .collect()
}
