use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What the horizontal axis of a histogram measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Units {
    /// Shifted pointer `Y′ = (E − E_γ)/ΔE`.
    Pointer,
    /// Photon-mode amplitude `Q`.
    Field,
    /// Recorded energy for a line at `e_gamma` seen with resolution `T`.
    Energy { e_gamma: f64, resolution: f64 },
}

/// A binned probability density. Mass outside the bins is kept in
/// `out_of_range_mass` so that `Σ density·width + out_of_range_mass = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumHistogram {
    edges: Vec<f64>,
    densities: Vec<f64>,
    units: Units,
    out_of_range_mass: f64,
}

pub fn uniform_edges(bins: usize, (lo, hi): (f64, f64)) -> Result<Vec<f64>> {
    if bins < 1 {
        return Err(Error::invalid("bins", "need at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(
            "range",
            format!("empty or non-finite range [{lo}, {hi}]"),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    Ok(edges)
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::invalid("edges", "need at least two edges"));
    }
    if !edges.iter().all(|e| e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "edges",
            "must be finite and strictly increasing",
        ));
    }
    Ok(())
}

impl SpectrumHistogram {
    /// Bins `samples` uniformly over `range`; the last bin is closed on the right.
    pub fn from_samples(
        samples: &[f64],
        bins: usize,
        range: (f64, f64),
        units: Units,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid(
                "samples",
                "cannot histogram an empty sample",
            ));
        }
        if bins < 2 {
            return Err(Error::invalid(
                "bins",
                format!("need at least 2 bins, got {bins}"),
            ));
        }
        let edges = uniform_edges(bins, range)?;
        let (lo, hi) = range;
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        let mut outside = 0u64;
        for &x in samples {
            if !(x >= lo && x <= hi) {
                outside += 1;
                continue;
            }
            let i = (((x - lo) / width) as usize).min(bins - 1);
            // guard against rounding at interior edges
            let i = if x < edges[i] {
                i - 1
            } else if x >= edges[i + 1] && i + 1 < bins {
                i + 1
            } else {
                i
            };
            counts[i] += 1;
        }
        let n = samples.len() as f64;
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
            .collect();
        Ok(Self {
            edges,
            densities,
            units,
            out_of_range_mass: outside as f64 / n,
        })
    }

    /// Builds a histogram from per-bin probability masses; whatever is missing
    /// from unity is booked as out-of-range.
    pub fn from_masses(edges: Vec<f64>, masses: &[f64], units: Units) -> Result<Self> {
        check_edges(&edges)?;
        if masses.len() + 1 != edges.len() {
            return Err(Error::LengthMismatch {
                what: "masses",
                got: masses.len(),
                expected: edges.len() - 1,
            });
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("masses", "must be finite and ≥ 0"));
        }
        let total: f64 = masses.iter().sum();
        let scale = if total > 1.0 { 1.0 / total } else { 1.0 };
        let densities = masses
            .iter()
            .zip(edges.windows(2))
            .map(|(m, e)| m * scale / (e[1] - e[0]))
            .collect();
        let mut h = Self {
            edges,
            densities,
            units,
            out_of_range_mass: 0.0,
        };
        h.out_of_range_mass = (1.0 - h.in_range_mass()).max(0.0);
        Ok(h)
    }

    /// Reassembles a histogram from stored parts, enforcing the invariants.
    pub fn from_parts(
        edges: Vec<f64>,
        densities: Vec<f64>,
        units: Units,
        out_of_range_mass: f64,
    ) -> Result<Self> {
        check_edges(&edges)?;
        if densities.len() + 1 != edges.len() {
            return Err(Error::LengthMismatch {
                what: "densities",
                got: densities.len(),
                expected: edges.len() - 1,
            });
        }
        let h = Self {
            edges,
            densities,
            units,
            out_of_range_mass,
        };
        h.validate(1e-12)?;
        Ok(h)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("densities", "must be finite and ≥ 0"));
        }
        if !(self.out_of_range_mass >= 0.0) {
            return Err(Error::invalid("out_of_range_mass", "must be ≥ 0"));
        }
        let total = self.in_range_mass() + self.out_of_range_mass;
        if (total - 1.0).abs() > tol {
            return Err(Error::invalid(
                "densities",
                format!("total mass {total} differs from 1"),
            ));
        }
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn out_of_range_mass(&self) -> f64 {
        self.out_of_range_mass
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.center(i)).collect()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.densities[i] * self.width(i)
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.mass(i)).collect()
    }

    pub fn in_range_mass(&self) -> f64 {
        (0..self.bins()).map(|i| self.mass(i)).sum()
    }

    /// Redistributes the mass of `self` onto `edges` by bin overlap. Mass that
    /// falls outside the new edges joins the out-of-range mass.
    pub fn rebin(&self, edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        let mut masses = vec![0.0; edges.len() - 1];
        for i in 0..self.bins() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            let d = self.densities[i];
            if d == 0.0 {
                continue;
            }
            for (j, m) in masses.iter_mut().enumerate() {
                let lo = a.max(edges[j]);
                let hi = b.min(edges[j + 1]);
                if hi > lo {
                    *m += d * (hi - lo);
                }
            }
        }
        let in_new: f64 = masses.iter().sum();
        let densities = masses
            .iter()
            .zip(edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect();
        let out = self.out_of_range_mass + (self.in_range_mass() - in_new).max(0.0);
        Ok(Self {
            edges,
            densities,
            units: self.units,
            out_of_range_mass: out,
        })
    }
}
