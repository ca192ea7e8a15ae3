//! Counting distinct peaks of a line profile.
//!
//! The histogram is smoothed with a Gaussian kernel and a local maximum counts
//! as a mode when its topographic prominence reaches a fraction of the global
//! maximum.

use serde::{Deserialize, Serialize};

use super::histogram::{SpectrumHistogram, Units};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeCountOptions {
    /// Kernel bandwidth in `Y′` units (scaled by `ΔE` for energy histograms).
    pub bandwidth: f64,
    /// Minimum prominence as a fraction of the global maximum.
    pub prominence_floor: f64,
    /// Evaluation points per bin.
    pub oversample: usize,
}

impl Default for ModeCountOptions {
    fn default() -> Self {
        Self {
            bandwidth: 0.15,
            prominence_floor: 0.1,
            oversample: 4,
        }
    }
}

fn smoothed(hist: &SpectrumHistogram, bw: f64, oversample: usize) -> Vec<f64> {
    let centers = hist.centers();
    let masses = hist.masses();
    let edges = hist.edges();
    let (lo, hi) = (edges[0] - 4.0 * bw, edges[edges.len() - 1] + 4.0 * bw);
    let step = (edges[edges.len() - 1] - edges[0]) / (hist.bins() * oversample.max(1)) as f64;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    (0..n)
        .map(|i| {
            let x = lo + i as f64 * step;
            centers
                .iter()
                .zip(&masses)
                .map(|(c, m)| {
                    let z = (x - c) / bw;
                    m * (-0.5 * z * z).exp()
                })
                .sum()
        })
        .collect()
}

/// Prominence of every strict local maximum of `y`.
fn prominences(y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let mut left_min = y[i];
        for j in (0..i).rev() {
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        for &v in &y[i + 1..] {
            if v > y[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        out.push(y[i] - left_min.max(right_min));
    }
    out
}

/// Number of prominent local maxima of the kernel-smoothed histogram.
pub fn mode_count(hist: &SpectrumHistogram, opts: &ModeCountOptions) -> usize {
    let scale = match hist.units() {
        Units::Energy {
            e_gamma,
            resolution,
        } => e_gamma / resolution,
        Units::Pointer | Units::Field => 1.0,
    };
    let y = smoothed(hist, opts.bandwidth * scale, opts.oversample);
    let peak = y.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return 0;
    }
    prominences(&y)
        .into_iter()
        .filter(|p| *p >= opts.prominence_floor * peak)
        .count()
}
