// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-series diagnostics for magnetization traces: power spectra, peak
//! detection, equilibration times and damping fits.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::trace::DynamicsTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

/// One-sided power per qubit.
///
/// With `X_k = Σ_t m_t e^{-2πikt/T}`: `P_0 = |X_0|²/T`, `P_k = 2|X_k|²/T` for
/// `0 < k < T/2` and `P_{T/2} = |X_{T/2}|²/T`, so that `Σ_k P_k = Σ_t m_t²`
/// for the rectangular window. Frequencies are `k / (T dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub frequencies: Vec<f64>,
    pub power: Vec<Vec<f64>>,
    pub window: Window,
    pub n_samples: usize,
    pub dt: f64,
}

pub const MIN_SAMPLES: usize = 8;

pub fn power_spectrum(trace: &DynamicsTrace) -> Result<PowerSpectrum> {
    power_spectrum_with(trace, Window::Rectangular)
}

pub fn power_spectrum_with(trace: &DynamicsTrace, window: Window) -> Result<PowerSpectrum> {
    trace.validate()?;
    let t = trace.len();
    if t < MIN_SAMPLES {
        return Err(validation(format!("power spectrum needs at least {MIN_SAMPLES} samples, got {t}")));
    }
    let dt = trace.uniform_dt()?;
    let weights: Vec<f64> = match window {
        Window::Rectangular => vec![1.0; t],
        Window::Hann => {
            (0..t).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (t - 1) as f64).cos()).collect()
        }
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t);
    let n_bins = t / 2 + 1;
    let power = trace
        .magnetization
        .iter()
        .map(|row| {
            let mut buf: Vec<Complex64> = row.iter().zip(&weights).map(|(x, w)| Complex64::new(x * w, 0.0)).collect();
            fft.process(&mut buf);
            (0..n_bins)
                .map(|k| {
                    let p = buf[k].norm_sqr() / t as f64;
                    if k == 0 || 2 * k == t {
                        p
                    } else {
                        2.0 * p
                    }
                })
                .collect()
        })
        .collect();
    let frequencies = (0..n_bins).map(|k| k as f64 / (t as f64 * dt)).collect();
    Ok(PowerSpectrum { frequencies, power, window, n_samples: t, dt })
}

impl PowerSpectrum {
    pub fn n_qubits(&self) -> usize {
        self.power.len()
    }

    /// Power outside the DC bin.
    pub fn ac_power(&self, qubit: usize) -> f64 {
        self.power[qubit][1..].iter().sum()
    }

    /// `frequency,qubit,power`, qubits from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "frequency,qubit,power")?;
        for (k, f) in self.frequencies.iter().enumerate() {
            for (q, row) in self.power.iter().enumerate() {
                writeln!(w, "{},{},{}", f, q + 1, row[k])?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// 1-based.
    pub qubit: usize,
    pub frequency: f64,
    pub power: f64,
    pub prominence: f64,
}

/// Strict local maxima of the spectrum above DC with prominence at least
/// `min_prominence`, strongest first. Prominence is the peak power minus the
/// higher of the lowest points reached on each side before the spectrum
/// rises above the peak (or ends).
pub fn detect_peaks(spectrum: &PowerSpectrum, qubit: usize, min_prominence: f64) -> Vec<Peak> {
    let p = &spectrum.power[qubit][1..];
    // Rounding noise in empty bins is not a peak.
    let floor = 1e-12 * spectrum.power[qubit].iter().fold(0.0f64, |m, x| m.max(*x));
    let mut peaks = Vec::new();
    for k in 1..p.len().saturating_sub(1) {
        if !(p[k] > p[k - 1] && p[k] > p[k + 1]) {
            continue;
        }
        let mut left_min = p[k];
        for &v in p[..k].iter().rev() {
            if v > p[k] {
                break;
            }
            left_min = left_min.min(v);
        }
        let mut right_min = p[k];
        for &v in &p[k + 1..] {
            if v > p[k] {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = p[k] - left_min.max(right_min);
        if prominence > floor && prominence >= min_prominence {
            peaks.push(Peak { qubit: qubit + 1, frequency: spectrum.frequencies[k + 1], power: p[k], prominence });
        }
    }
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power));
    peaks
}

/// Largest prominence of any peak on `qubit`, or zero.
pub fn max_prominence(spectrum: &PowerSpectrum, qubit: usize) -> f64 {
    detect_peaks(spectrum, qubit, 0.0).iter().map(|p| p.prominence).fold(0.0, f64::max)
}

/// Peaks whose prominence is at least `fraction` of the qubit's AC power.
pub fn detect_relative_peaks(spectrum: &PowerSpectrum, qubit: usize, fraction: f64) -> Vec<Peak> {
    detect_peaks(spectrum, qubit, fraction * spectrum.ac_power(qubit))
}

/// Default fraction of AC power a peak must carry to count as a mode signature.
pub const DEFAULT_PEAK_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationEntry {
    /// 1-based.
    pub qubit: usize,
    /// First time the signal meets its mean; `None` if it never does.
    pub t_eq: Option<f64>,
    pub reached: bool,
    pub mean: f64,
    pub fluctuation: f64,
}

/// `Ā`, `δA = sqrt(mean(A²) - Ā²)` and the first crossing of `Ā`, linearly
/// interpolated between samples.
pub fn equilibration_time(trace: &DynamicsTrace, qubit: usize) -> EquilibrationEntry {
    let a = trace.qubit(qubit);
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    let var = (a.iter().map(|x| x * x).sum::<f64>() / n - mean * mean).max(0.0);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let zero = 1e-12 * scale;
    let dev: Vec<f64> = a.iter().map(|x| x - mean).collect();
    let mut t_eq = None;
    for k in 0..dev.len() {
        if dev[k].abs() <= zero {
            t_eq = Some(trace.times[k]);
            break;
        }
        if k + 1 < dev.len() && dev[k].signum() != dev[k + 1].signum() && dev[k + 1].abs() > zero {
            let frac = dev[k] / (dev[k] - dev[k + 1]);
            t_eq = Some(trace.times[k] + frac * (trace.times[k + 1] - trace.times[k]));
            break;
        }
    }
    EquilibrationEntry { qubit: qubit + 1, t_eq, reached: t_eq.is_some(), mean, fluctuation: var.sqrt() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingFit {
    /// 1-based.
    pub qubit: usize,
    pub gamma: f64,
    pub amplitude: f64,
    /// RMS residual of the log-envelope fit.
    pub residual: f64,
    pub window: (f64, f64),
    pub n_extrema: usize,
}

/// Fit `a e^{-γt}` to the local maxima of `|m(t) - Ā|` inside `window`
/// (the whole trace when `None`). Maxima are refined by a parabola through
/// the three samples around them; `γ` is clamped at zero.
pub fn fit_damping(trace: &DynamicsTrace, qubit: usize, window: Option<(f64, f64)>) -> Result<DampingFit> {
    let times = &trace.times;
    let m = trace.qubit(qubit);
    if times.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let (lo, hi) = window.unwrap_or((times[0], times[times.len() - 1]));
    if lo > hi || lo < times[0] - 1e-12 || hi > times[times.len() - 1] + 1e-12 {
        return Err(validation(format!("window ({lo}, {hi}) lies outside the trace")));
    }
    let mean = m.iter().sum::<f64>() / m.len() as f64;
    let y: Vec<f64> = m.iter().map(|x| (x - mean).abs()).collect();
    let mut points = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if times[k] < lo || times[k] > hi {
            continue;
        }
        if y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > 0.0 {
            let (ym, y0, yp) = (y[k - 1], y[k], y[k + 1]);
            let denom = ym - 2.0 * y0 + yp;
            let (shift, peak) = if denom < 0.0 {
                let s = 0.5 * (ym - yp) / denom;
                (s, y0 - 0.25 * (ym - yp) * s)
            } else {
                (0.0, y0)
            };
            let dt = times[k + 1] - times[k];
            points.push((times[k] + shift * dt, peak));
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("{} envelope extrema in window, need at least 3", points.len())));
    }
    let n = points.len() as f64;
    let (mt, ml) = points.iter().fold((0.0, 0.0), |(st, sl), (t, p)| (st + t / n, sl + p.ln() / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, p) in &points {
        sxy += (t - mt) * (p.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let gamma = (-slope).max(0.0);
    let log_a = ml + gamma * mt;
    let residual = (points.iter().map(|(t, p)| (p.ln() - (log_a - gamma * t)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DampingFit {
        qubit: qubit + 1,
        gamma,
        amplitude: log_a.exp(),
        residual,
        window: (lo, hi),
        n_extrema: points.len(),
    })
}

/// Per-qubit damping fit or the reason it could not be made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingEntry {
    pub qubit: usize,
    pub fit: Option<DampingFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// All analyses of one trace, in their serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAnalysis {
    pub spectrum: PowerSpectrum,
    pub peaks: Vec<Peak>,
    pub equilibration: Vec<EquilibrationEntry>,
    pub damping: Vec<DampingEntry>,
}

/// Spectrum, thresholded peaks (fraction of AC power), equilibration and damping for every qubit.
pub fn analyze_trace(trace: &DynamicsTrace, window: Window, peak_fraction: f64) -> Result<TraceAnalysis> {
    let spectrum = power_spectrum_with(trace, window)?;
    let n = trace.n_qubits();
    let peaks = (0..n).flat_map(|q| detect_relative_peaks(&spectrum, q, peak_fraction)).collect();
    let equilibration = (0..n).map(|q| equilibration_time(trace, q)).collect();
    let damping = (0..n)
        .map(|q| match fit_damping(trace, q, None) {
            Ok(fit) => DampingEntry { qubit: q + 1, fit: Some(fit), error: None },
            Err(e) => DampingEntry { qubit: q + 1, fit: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(TraceAnalysis { spectrum, peaks, equilibration, damping })
}
