//! Digital Butterworth bandpass as cascaded second-order sections, designed
//! by the lowpass-to-bandpass transform of the analog prototype followed by
//! a prewarped bilinear transform, and applied forward-backward.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SignalRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandpassConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Prototype order; the bandpass has `2 * order` poles.
    pub order: usize,
}

impl Default for BandpassConfig {
    fn default() -> Self {
        Self {
            low_hz: 20.0,
            high_hz: 450.0,
            order: 8,
        }
    }
}

/// One biquad in transposed direct form II, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn dc_gain(&self) -> f64 {
        let den: f64 = self.a.iter().sum();
        self.b.iter().sum::<f64>() / den
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = self.a[0] + z_inv * (self.a[1] + z_inv * self.a[2]);
        num / den
    }

    /// State after an infinitely long unit-constant input.
    fn steady_state(&self, gain: f64) -> [f64; 2] {
        let z2 = self.b[2] - self.a[2] * gain;
        let z1 = self.b[1] - self.a[1] * gain + z2;
        [z1, z2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterworthBandpass {
    pub sections: Vec<Section>,
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
    pub fs: f64,
}

impl ButterworthBandpass {
    pub fn design(low_hz: f64, high_hz: f64, order: usize, fs: f64) -> Result<Self> {
        let nyquist = fs / 2.0;
        if order == 0 {
            return Err(Error::Filter("order must be >= 1".into()));
        }
        if !(low_hz > 0.0 && low_hz < high_hz) {
            return Err(Error::Filter(format!(
                "band edges must satisfy 0 < low < high, got {low_hz} Hz and {high_hz} Hz"
            )));
        }
        if high_hz >= nyquist {
            return Err(Error::Filter(format!(
                "high cutoff {high_hz} Hz must be below the Nyquist frequency {nyquist} Hz (fs = {fs} Hz)"
            )));
        }

        let two_fs = 2.0 * fs;
        let wl = two_fs * (PI * low_hz / fs).tan();
        let wh = two_fs * (PI * high_hz / fs).tan();
        let bw = wh - wl;
        let w0_sq = wl * wh;

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + 1 + order) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let half = p * (bw / 2.0);
            let disc = (half * half - w0_sq).sqrt();
            for s in [half + disc, half - disc] {
                poles.push((two_fs + s) / (two_fs - s));
            }
        }

        let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > 1e-12).collect();
        let mut real: Vec<f64> = poles
            .iter()
            .filter(|p| p.im.abs() <= 1e-12)
            .map(|p| p.re)
            .collect();
        upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        real.sort_by(f64::total_cmp);

        let mut sections: Vec<Section> = upper
            .iter()
            .map(|p| Section {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -2.0 * p.re, p.norm_sqr()],
            })
            .collect();
        for pair in real.chunks(2) {
            let (p1, p2) = (pair[0], pair.get(1).copied().unwrap_or(0.0));
            sections.push(Section {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(p1 + p2), p1 * p2],
            });
        }

        let mut filter = Self {
            sections,
            low_hz,
            high_hz,
            order,
            fs,
        };
        // unit gain at the digital image of the analog center frequency
        let center = 2.0 * (w0_sq.sqrt() / two_fs).atan();
        let g = filter.response_at_omega(center).norm();
        let per_section = g.powf(-1.0 / filter.sections.len() as f64);
        for s in &mut filter.sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(filter)
    }

    fn response_at_omega(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Complex response of a single forward pass at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        self.response_at_omega(2.0 * PI * freq_hz / self.fs)
    }

    /// Magnitude of the forward-backward application, `|H|^2`.
    pub fn zero_phase_gain(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm_sqr()
    }

    /// Samples of odd reflection added at each end before filtering.
    pub fn pad_len(&self) -> usize {
        3 * 2 * self.order
    }

    /// Single causal pass starting from `initial` section states.
    fn run(&self, x: &mut [f64], initial: &[[f64; 2]]) {
        for (s, z0) in self.sections.iter().zip(initial) {
            let [z1, z2] = z0;
            let (mut z1, mut z2) = (*z1, *z2);
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[1] * y + z2;
                z2 = s.b[2] * input - s.a[2] * y;
                *v = y;
            }
        }
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.run(&mut y, &vec![[0.0; 2]; self.sections.len()]);
        y
    }

    fn steady_states(&self, value: f64) -> Vec<[f64; 2]> {
        let mut level = value;
        self.sections
            .iter()
            .map(|s| {
                let g = s.dc_gain();
                let [z1, z2] = s.steady_state(g);
                let z = [z1 * level, z2 * level];
                level *= g;
                z
            })
            .collect()
    }

    /// Zero-phase forward-backward filtering. Both ends are extended by odd
    /// reflection and each pass starts from the steady state of its first
    /// sample; the output has the input's length.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pad = self.pad_len();
        if x.len() <= pad {
            return Err(Error::Filter(format!(
                "signal of {} samples is shorter than the filter warm-up length of {} samples",
                x.len(),
                pad + 1
            )));
        }
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let zi = self.steady_states(ext[0]);
        self.run(&mut ext, &zi);
        ext.reverse();
        let zi = self.steady_states(ext[0]);
        self.run(&mut ext, &zi);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }
}

/// Filters every channel of `record` with a zero-phase Butterworth bandpass.
pub fn bandpass(record: &SignalRecord, config: &BandpassConfig) -> Result<SignalRecord> {
    let filter = ButterworthBandpass::design(config.low_hz, config.high_hz, config.order, record.fs())?;
    let samples = record
        .samples()
        .iter()
        .map(|ch| filter.filtfilt(ch))
        .collect::<Result<Vec<_>>>()?;
    record.clone().with_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 2048.0;

    /// Butterworth magnitude through the bilinear frequency warp, computed
    /// without the pole/section machinery.
    fn analytic_gain(f: f64, low: f64, high: f64, order: usize, fs: f64) -> f64 {
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (wl, wh, w) = (warp(low), warp(high), warp(f));
        let omega = (w * w - wl * wh) / (w * (wh - wl));
        1.0 / (1.0 + omega.abs().powi(2 * order as i32)).sqrt()
    }

    fn sine(freq: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / FS).sin()).collect()
    }

    /// Amplitude of the `freq` component by least squares on the middle half.
    fn amplitude(x: &[f64], freq: f64) -> f64 {
        let (lo, hi) = (x.len() / 4, 3 * x.len() / 4);
        let (mut ss, mut cc, mut sc, mut xs, mut xc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &v) in x.iter().enumerate().take(hi).skip(lo) {
            let ph = 2.0 * PI * freq * i as f64 / FS;
            let (s, c) = ph.sin_cos();
            ss += s * s;
            cc += c * c;
            sc += s * c;
            xs += v * s;
            xc += v * c;
        }
        let det = ss * cc - sc * sc;
        let a = (xs * cc - xc * sc) / det;
        let b = (xc * ss - xs * sc) / det;
        a.hypot(b)
    }

    #[test]
    fn section_response_matches_analytic_magnitude() {
        for order in [2, 4, 8] {
            let f = ButterworthBandpass::design(20.0, 450.0, order, FS).unwrap();
            assert_eq!(f.sections.len(), order);
            for freq in [5.0, 20.0, 60.0, 100.0, 300.0, 450.0, 500.0, 900.0] {
                let got = f.response(freq).norm();
                let want = analytic_gain(freq, 20.0, 450.0, order, FS);
                assert!((got - want).abs() < 1e-9, "order {order} at {freq}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn sections_are_stable() {
        let f = ButterworthBandpass::design(20.0, 450.0, 8, FS).unwrap();
        for s in &f.sections {
            assert!(s.a[2].abs() < 1.0);
        }
    }

    #[test]
    fn dc_is_removed() {
        let x = vec![3.5; 4096];
        let y = filter_default(&x);
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 1e-6 * 3.5, "peak {peak}");
    }

    fn filter_default(x: &[f64]) -> Vec<f64> {
        let c = BandpassConfig::default();
        ButterworthBandpass::design(c.low_hz, c.high_hz, c.order, FS)
            .unwrap()
            .filtfilt(x)
            .unwrap()
    }

    #[test]
    fn passband_sine_keeps_amplitude() {
        let y = filter_default(&sine(100.0, 4096));
        let a = amplitude(&y, 100.0);
        let c = BandpassConfig::default();
        let oracle = analytic_gain(100.0, c.low_hz, c.high_hz, c.order, FS).powi(2);
        assert!((a - 1.0).abs() < 0.02, "amplitude {a}");
        assert!((a - oracle).abs() < 0.02 * oracle, "amplitude {a} vs {oracle}");
    }

    #[test]
    fn low_frequency_sine_is_attenuated() {
        let y = filter_default(&sine(5.0, 8192));
        assert!(amplitude(&y, 5.0) < 0.1);
    }

    #[test]
    fn refiltering_passband_sine_is_stable() {
        let once = filter_default(&sine(150.0, 4096));
        let twice = filter_default(&once);
        let (a1, a2) = (amplitude(&once, 150.0), amplitude(&twice, 150.0));
        assert!((a1 - a2).abs() / a1 < 0.04);
    }

    #[test]
    fn length_preserved_and_short_input_rejected() {
        let f = ButterworthBandpass::design(20.0, 450.0, 4, FS).unwrap();
        assert_eq!(f.filtfilt(&sine(50.0, 100)).unwrap().len(), 100);
        let err = f.filtfilt(&[0.0; 24]).unwrap_err().to_string();
        assert!(err.contains("warm-up"), "{err}");
    }

    #[test]
    fn high_edge_at_nyquist_rejected() {
        let err = ButterworthBandpass::design(20.0, 450.0, 4, 900.0).unwrap_err().to_string();
        assert!(err.contains("Nyquist"), "{err}");
        assert!(ButterworthBandpass::design(450.0, 20.0, 4, FS).is_err());
    }

    #[test]
    fn record_channels_filtered_independently() {
        let rec = SignalRecord::new(vec![sine(100.0, 2048), vec![1.0; 2048]], FS, 3, "s", "d").unwrap();
        let out = bandpass(&rec, &BandpassConfig::default()).unwrap();
        assert_eq!(out.label(), 3);
        assert_eq!(out.len(), 2048);
        assert!(out.channel(1).iter().all(|v| v.abs() < 1e-6));
        assert!(amplitude(out.channel(0), 100.0) > 0.98);
    }
}
