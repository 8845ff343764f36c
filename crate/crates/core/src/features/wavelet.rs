//! Periodized discrete wavelet transform with the sym8 filter bank, and
//! per-subband statistics.

use crate::error::{Error, Result};

/// Decomposition lowpass of the Symlet-8 wavelet.
const SYM8_DEC_LO: [f64; 16] = [
    -0.0033824159510061256,
    -0.0005421323317911481,
    0.03169508781149298,
    0.007607487324917605,
    -0.1432942383508097,
    -0.061273359067658524,
    0.4813596512583722,
    0.7771857517005235,
    0.3644418948353314,
    -0.05194583810770904,
    -0.027219029917056003,
    0.049137179673607506,
    0.003808752013890615,
    -0.01495225833704823,
    -0.0003029205147213668,
    0.0018899503327594609,
];

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    pub name: &'static str,
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
}

impl WaveletFilter {
    /// Builds an orthonormal two-channel bank from its lowpass; the highpass
    /// is the quadrature mirror `g[n] = (-1)^(n+1) h[L-1-n]`.
    pub fn from_lowpass(name: &'static str, dec_lo: Vec<f64>) -> Result<Self> {
        let l = dec_lo.len();
        if l < 2 || !l.is_multiple_of(2) {
            return Err(Error::Feature(format!("{name}: filter length {l} must be even")));
        }
        for m in 0..l / 2 {
            let corr: f64 = (0..l - 2 * m).map(|n| dec_lo[n] * dec_lo[n + 2 * m]).sum();
            let want = if m == 0 { 1.0 } else { 0.0 };
            if (corr - want).abs() > 1e-10 {
                return Err(Error::Feature(format!(
                    "{name}: lowpass is not orthonormal at shift {m} ({corr})"
                )));
            }
        }
        let dec_hi = (0..l)
            .map(|n| {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                sign * dec_lo[l - 1 - n]
            })
            .collect();
        Ok(Self { name, dec_lo, dec_hi })
    }

    pub fn sym8() -> Self {
        Self::from_lowpass("sym8", SYM8_DEC_LO.to_vec()).expect("sym8 coefficients are orthonormal")
    }

    pub fn len(&self) -> usize {
        self.dec_lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dec_lo.is_empty()
    }
}

/// Detail bands `D1..DJ` (finest first) and the level-`J` approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub details: Vec<Vec<f64>>,
    pub approximation: Vec<f64>,
}

impl SubbandSet {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// `D1, ..., DJ, AJ`.
    pub fn bands(&self) -> impl Iterator<Item = &[f64]> {
        self.details
            .iter()
            .map(Vec::as_slice)
            .chain(std::iter::once(self.approximation.as_slice()))
    }

    pub fn coefficient_count(&self) -> usize {
        self.bands().map(<[f64]>::len).sum()
    }
}

/// One analysis step on an even-length signal with circular extension.
fn analysis_step(x: &[f64], filter: &WaveletFilter) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let l = filter.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for i in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for k in 0..l {
            // index 2i + L/2 - k, wrapped into [0, n)
            let idx = (2 * i + l / 2 + n * l - k) % n;
            a += filter.dec_lo[k] * x[idx];
            d += filter.dec_hi[k] * x[idx];
        }
        approx[i] = a;
        detail[i] = d;
    }
    (approx, detail)
}

/// `levels`-deep periodized decomposition. When a level's input has odd
/// length, its last sample bypasses the filter bank and is appended to that
/// level's detail band, so the transform stays orthogonal and the total
/// coefficient count equals the input length.
pub fn dwt(x: &[f64], filter: &WaveletFilter, levels: usize) -> Result<SubbandSet> {
    if levels == 0 {
        return Err(Error::Feature("wavelet depth must be >= 1".into()));
    }
    let min_len = 1usize << levels;
    if x.len() < min_len {
        return Err(Error::Feature(format!(
            "signal of {} samples is too short for {levels} wavelet levels (needs {min_len})",
            x.len()
        )));
    }
    let mut current = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let carry = (current.len() % 2 == 1).then(|| current.pop().unwrap_or_default());
        let (approx, mut detail) = analysis_step(&current, filter);
        if let Some(v) = carry {
            detail.push(v);
        }
        details.push(detail);
        current = approx;
    }
    Ok(SubbandSet {
        details,
        approximation: current,
    })
}

pub const WAVELET_FEATURES: [&str; 5] = ["energy", "var", "std", "wl", "entropy"];

/// Energy, variance (population), standard deviation, waveform length and
/// `-Σ W² log(W² + c)` for one band.
pub fn band_features(w: &[f64], c: f64) -> Result<[f64; 5]> {
    if w.is_empty() {
        return Err(Error::Feature("empty subband".into()));
    }
    let n = w.len() as f64;
    let energy: f64 = w.iter().map(|v| v * v).sum();
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let wl: f64 = w.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    let entropy = -w
        .iter()
        .map(|v| {
            let p = v * v;
            p * (p + c).ln()
        })
        .sum::<f64>();
    // -0.0 from an all-zero band
    let entropy = if entropy == 0.0 { 0.0 } else { entropy };
    Ok([energy, var, var.sqrt(), wl, entropy])
}

/// Five statistics for each band in `D1..DJ, AJ` order.
pub fn wavelet_features(subbands: &SubbandSet, c: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(5 * (subbands.levels() + 1));
    for band in subbands.bands() {
        out.extend(band_features(band, c)?);
    }
    Ok(out)
}

pub fn band_names(levels: usize) -> Vec<String> {
    (1..=levels)
        .map(|j| format!("D{j}"))
        .chain(std::iter::once(format!("A{levels}")))
        .collect()
}

pub fn wavelet_names(n_channels: usize, levels: usize) -> Vec<String> {
    let bands = band_names(levels);
    (0..n_channels)
        .flat_map(|c| {
            bands.iter().flat_map(move |b| {
                WAVELET_FEATURES.iter().map(move |f| format!("ch{c}_{b}_{f}"))
            })
        })
        .collect()
}

pub fn wavelet_window(
    channels: &[Vec<f64>],
    filter: &WaveletFilter,
    levels: usize,
    c: f64,
) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(channels.len() * 5 * (levels + 1));
    for ch in channels {
        row.extend(wavelet_features(&dwt(ch, filter, levels)?, c)?);
    }
    Ok(row)
}
