//! Harper equation `chi_{x+1} + chi_{x-1} + 2 cos(2 pi x alpha - k_y) chi_x = eps chi_x`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarperParams {
    n_sites: usize,
    alpha: f64,
    k_y: f64,
    boundary: Boundary,
}

impl HarperParams {
    pub fn new(n_sites: usize, alpha: f64, k_y: f64, boundary: Boundary) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidParams(
                "Harper chain needs at least 2 sites".into(),
            ));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha} is outside [0, 1]"
            )));
        }
        if !k_y.is_finite() {
            return Err(Error::InvalidParams("k_y must be finite".into()));
        }
        Ok(Self {
            n_sites,
            alpha,
            k_y,
            boundary,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_y(&self) -> f64 {
        self.k_y
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
}

/// Sites are numbered `x = 1..=N`.
pub fn harper_matrix(p: &HarperParams) -> Mat<f64> {
    let n = p.n_sites;
    let mut h = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let x = (i + 1) as f64;
        h[(i, i)] = 2.0 * (2.0 * PI * x * p.alpha - p.k_y).cos();
        if i + 1 < n {
            h[(i, i + 1)] = 1.0;
            h[(i + 1, i)] = 1.0;
        }
    }
    if p.boundary == Boundary::Periodic && n > 2 {
        h[(0, n - 1)] = 1.0;
        h[(n - 1, 0)] = 1.0;
    }
    h
}

#[derive(Debug, Clone)]
pub struct HarperSpectrum {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Unit-norm real eigenvectors, one per energy.
    pub vectors: Vec<Vec<f64>>,
    pub ipr: Vec<f64>,
}

pub fn harper_spectrum(p: &HarperParams) -> Result<HarperSpectrum> {
    let h = harper_matrix(p);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let n = p.n_sites;
    let energies: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| evd.U()[(r, c)]).collect())
        .collect();
    let ipr = vectors
        .iter()
        .map(|v| {
            let s2: f64 = v.iter().map(|x| x * x).sum();
            v.iter().map(|x| x.powi(4)).sum::<f64>() / (s2 * s2)
        })
        .collect();
    Ok(HarperSpectrum {
        energies,
        vectors,
        ipr,
    })
}

/// Number of bands in a sorted spectrum: one more than the number of spacings
/// wider than `ratio` times the median spacing. Levels closer than `1e-9` are
/// merged first, so the two-fold `+-k` degeneracy of a ring does not drag the
/// median to zero.
pub fn count_bands(sorted: &[f64], ratio: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    let mut levels: Vec<f64> = Vec::with_capacity(sorted.len());
    for &e in sorted {
        if levels.last().is_none_or(|&l| e - l > 1e-9) {
            levels.push(e);
        }
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return 1;
    }
    let mut s = gaps.clone();
    s.sort_by(f64::total_cmp);
    let median = s[s.len() / 2];
    1 + gaps.iter().filter(|&&g| g > ratio * median).count()
}

/// Band intervals `[lo, hi]` of a sorted spectrum, split as in [`count_bands`].
pub fn band_edges(sorted: &[f64], ratio: f64) -> Vec<(f64, f64)> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let mut levels: Vec<f64> = Vec::with_capacity(sorted.len());
    for &e in sorted {
        if levels.last().is_none_or(|&l| e - l > 1e-9) {
            levels.push(e);
        }
    }
    let mut s: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    s.sort_by(f64::total_cmp);
    let median = s.get(s.len() / 2).copied().unwrap_or(0.0);
    let mut bands = Vec::new();
    let mut lo = levels[0];
    for w in levels.windows(2) {
        if w[1] - w[0] > ratio * median {
            bands.push((lo, w[0]));
            lo = w[1];
        }
    }
    bands.push((lo, *levels.last().unwrap()));
    bands
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HofstadterPoint {
    pub alpha: f64,
    pub energy: f64,
    pub ipr: f64,
}

/// Flux values `0, step, 2 step, ...` up to 1 inclusive.
pub fn flux_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "alpha step {step} is outside (0, 1]"
        )));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| (i as f64 * step).min(1.0)).collect())
}

/// Open-boundary butterfly, sorted by `(alpha, energy)`.
pub fn hofstadter_butterfly(
    n_sites: usize,
    alpha_step: f64,
    k_y: f64,
) -> Result<Vec<HofstadterPoint>> {
    let grid = flux_grid(alpha_step)?;
    let columns: Vec<Vec<HofstadterPoint>> = grid
        .par_iter()
        .map(|&alpha| {
            let p = HarperParams::new(n_sites, alpha, k_y, Boundary::Open)?;
            let s = harper_spectrum(&p)?;
            Ok(s.energies
                .iter()
                .zip(&s.ipr)
                .map(|(&energy, &ipr)| HofstadterPoint { alpha, energy, ipr })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}
