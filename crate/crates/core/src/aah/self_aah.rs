//! Self-induced AAH model: the second polariton moves in the `cos^2` potential
//! of the first one's standing wave,
//!
//! `d2 chi + chi / (a_x - eps'/phi) = 0`,
//! `a_x = (omega_j - omega0) / (2 phi) + 4/(N k_j^2) cos^2[k_j (x - 1/2)]`.
//!
//! Multiplying by the denominator gives the pencil `A chi = eps' B chi` with
//! `A = diag(a) d2 + I` and `B = d2 / phi`.

use faer::{c64, Mat};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{group_levels, LevelGroup};
use crate::error::{Error, Result};
use crate::model::{build_single_hamiltonian, eigensolve_single, laplacian};
use crate::params::{ModelParams, ALIGN_OFFSET, GAMMA0};

/// Back-substitution tolerance on the relative residual of the original equation.
pub const BACKSUB_TOL: f64 = 1e-8;

/// Denominators below this make a site singular; its residual is not checked.
const DENOM_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaMode {
    /// `omega_j - omega0 = -2 phi Gamma0 / k_j^2`; poor near `k_j -> pi`.
    Analytic,
    /// Real part of the single-particle eigenvalue with standing-wave index `j`.
    #[default]
    Exact,
}

/// Diagonal corner entries of the second difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Corner {
    /// `-1`, the open-array Green-function structure.
    #[default]
    Open,
    /// `-2`, a plain Dirichlet chain. Kept for comparison only.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAahParams {
    model: ModelParams,
    j: usize,
    pub omega_mode: OmegaMode,
    /// Keep `Im omega_j` in the potential. Experimental: the spectrum turns complex.
    pub keep_imag: bool,
    pub corner: Corner,
}

impl SelfAahParams {
    pub fn new(model: ModelParams, j: usize) -> Result<Self> {
        let n = model.n_atoms();
        if j < 1 || j >= n {
            return Err(Error::InvalidParams(format!("j = {j} is outside 1..{n}")));
        }
        Ok(Self {
            model,
            j,
            omega_mode: OmegaMode::default(),
            keep_imag: false,
            corner: Corner::default(),
        })
    }

    pub fn with_omega_mode(mut self, mode: OmegaMode) -> Self {
        self.omega_mode = mode;
        self
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k_j(&self) -> f64 {
        self.model.k_j(self.j)
    }
}

/// Complex single-particle energies indexed by `j` (entry 0 is the superradiant mode).
pub fn omega_table(model: &ModelParams) -> Result<Vec<Option<Complex64>>> {
    let modes = eigensolve_single(&build_single_hamiltonian(model))?;
    let mut table = vec![None; model.n_atoms()];
    for m in modes {
        if m.index_j < table.len() && table[m.index_j].is_none() {
            table[m.index_j] = Some(m.energy.0);
        }
    }
    Ok(table)
}

/// `omega_j - omega0` in units of `Gamma0`, imaginary part dropped unless `keep_imag`.
pub fn omega_j(p: &SelfAahParams) -> Result<Complex64> {
    match p.omega_mode {
        OmegaMode::Analytic => Ok(analytic_omega(p)),
        OmegaMode::Exact => {
            let w = omega_table(&p.model)?[p.j].ok_or(Error::MissingMode(p.j))?;
            Ok(if p.keep_imag {
                w
            } else {
                Complex64::new(w.re, 0.0)
            })
        }
    }
}

fn analytic_omega(p: &SelfAahParams) -> Complex64 {
    let k = p.k_j();
    Complex64::new(-2.0 * p.model.phi() * GAMMA0 / (k * k), 0.0)
}

/// `a_x` for `x = 1..=N`.
pub fn potential(p: &SelfAahParams, omega: Complex64) -> Vec<Complex64> {
    let n = p.model.n_atoms();
    let k = p.k_j();
    let phi = p.model.phi();
    let amp = 4.0 / (n as f64 * k * k);
    (1..=n)
        .map(|x| omega / (2.0 * phi * GAMMA0) + amp * (k * (x as f64 - 0.5)).cos().powi(2))
        .collect()
}

fn second_difference(n: usize, corner: Corner) -> Mat<f64> {
    let mut l = laplacian(n);
    if corner == Corner::Dirichlet && n > 1 {
        l[(0, 0)] = -2.0;
        l[(n - 1, n - 1)] = -2.0;
    }
    l
}

#[derive(Debug, Clone)]
pub struct SelfAahSpectrum {
    pub j: usize,
    pub omega: Complex64,
    /// `eps - omega0`, ascending by real part.
    pub energies: Vec<Complex64>,
    /// Unit-norm eigenvectors `chi`, parallel to `energies`.
    pub vectors: Vec<Vec<Complex64>>,
    /// Relative residual of `d2 chi + chi / D = 0`; `None` where some `D_x` vanishes.
    pub residuals: Vec<Option<f64>>,
    /// Infinite eigenvalues removed from the pencil (the constant vector spans `ker d2`).
    pub dropped: usize,
}

impl SelfAahSpectrum {
    pub fn real_energies(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e.re).collect()
    }

    /// Real energies, top first, the order in which the Landau ladder appears.
    pub fn descending(&self) -> Vec<f64> {
        self.energies.iter().rev().map(|e| e.re).collect()
    }

    /// Level groups of [`descending`](Self::descending); quasi-degenerate ones are Landau levels.
    pub fn level_groups(&self) -> Vec<LevelGroup> {
        group_levels(&self.descending(), 10.0, 0.1)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.energies.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }
}

pub fn self_aah_spectrum(p: &SelfAahParams) -> Result<SelfAahSpectrum> {
    self_aah_spectrum_with(p, omega_j(p)?)
}

/// Same as [`self_aah_spectrum`] with `omega_j - omega0` supplied by the caller.
pub fn self_aah_spectrum_with(p: &SelfAahParams, omega: Complex64) -> Result<SelfAahSpectrum> {
    let n = p.model.n_atoms();
    let phi = p.model.phi() * GAMMA0;
    let a = potential(p, omega);
    let l = second_difference(n, p.corner);
    let (mus, u) = pencil_eigen(&l, &a, phi)?;
    let scale = mus
        .iter()
        .map(|m| m.norm())
        .filter(|m| m.is_finite())
        .fold(0.0, f64::max);
    let mut pairs = Vec::with_capacity(n);
    let mut dropped = 0;
    for (i, mu) in mus.iter().enumerate() {
        if !mu.is_finite() || mu.norm() <= 1e-10 * scale.max(1.0) {
            dropped += 1;
            continue;
        }
        let mut v: Vec<Complex64> = (0..n).map(|r| u[(r, i)]).collect();
        let (imax, _) = v
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .unwrap();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ph = v[imax].conj() / v[imax].norm();
        for z in &mut v {
            *z = *z * ph / norm;
        }
        pairs.push((mu.inv(), v));
    }
    pairs.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let residuals = pairs
        .iter()
        .map(|(e, v)| backsub_residual(&l, &a, *e, phi, v))
        .collect();
    let (energies, vectors) = pairs.into_iter().unzip();
    Ok(SelfAahSpectrum {
        j: p.j,
        omega,
        energies,
        vectors,
        residuals,
        dropped,
    })
}

/// Eigenpairs of `B chi = mu A chi`. `A` is regular for any physical
/// potential, so the pencil reduces to the standard problem for `A^-1 B`, and
/// `mu = 0` carries the infinite `eps'` of the constant vector. (faer's QZ
/// underflows an index on pencils of this size, so it is avoided.)
fn pencil_eigen(l: &Mat<f64>, a: &[Complex64], phi: f64) -> Result<(Vec<Complex64>, Mat<c64>)> {
    let n = a.len();
    let big_a = Mat::<c64>::from_fn(n, n, |r, c| {
        a[r] * l[(r, c)]
            + if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
    });
    let big_b = Mat::<c64>::from_fn(n, n, |r, c| Complex64::new(l[(r, c)] / phi, 0.0));
    let m = crate::linalg::inverse(&big_a)? * &big_b;
    crate::linalg::eig(&m)
}

fn backsub_residual(
    l: &Mat<f64>,
    a: &[Complex64],
    e: Complex64,
    phi: f64,
    v: &[Complex64],
) -> Option<f64> {
    let n = v.len();
    let d: Vec<Complex64> = a.iter().map(|&ax| ax - e / phi).collect();
    if d.iter().any(|z| z.norm() < DENOM_FLOOR) {
        return None;
    }
    let mut r2 = 0.0;
    let mut s2 = 0.0;
    for x in 0..n {
        let lo = x.saturating_sub(1);
        let hi = (x + 1).min(n - 1);
        let lv: Complex64 = (lo..=hi).map(|k| v[k] * l[(x, k)]).sum();
        let pot = v[x] / d[x];
        r2 += (lv + pot).norm_sqr();
        s2 += lv.norm_sqr() + pot.norm_sqr();
    }
    Some((r2 / s2.max(f64::MIN_POSITIVE)).sqrt())
}

/// Absolute fourth finite difference of a sorted sequence, central where
/// possible and one-sided within two entries of either end. Shorter sequences
/// than five get zeros.
pub fn fourth_difference(e: &[f64]) -> Vec<f64> {
    let n = e.len();
    if n < 5 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let s = i.saturating_sub(2).min(n - 5);
            let w = &e[s..s + 5];
            (w[0] - 4.0 * w[1] + 6.0 * w[2] - 4.0 * w[3] + w[4]).abs()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemianalyticPoint {
    /// `j / N`.
    pub flux: f64,
    pub j: usize,
    /// `eps - omega0` (real part).
    pub energy: f64,
    /// `top - energy + ALIGN_OFFSET`, as in the exact butterfly.
    pub energy_aligned: f64,
    /// `|fourth difference|` of the ascending spectrum; small means dense.
    pub fourth_diff: f64,
}

impl SemianalyticPoint {
    /// `log10 |fourth difference|`; `-inf` inside an exactly degenerate group.
    pub fn dos_color(&self) -> f64 {
        self.fourth_diff.log10()
    }
}

/// Self-AAH spectra for every `j = 1..N-1`, sorted by `(flux, energy)`.
pub fn semianalytic_butterfly(
    model: &ModelParams,
    mode: OmegaMode,
) -> Result<Vec<SemianalyticPoint>> {
    let n = model.n_atoms();
    let table = match mode {
        OmegaMode::Exact => Some(omega_table(model)?),
        OmegaMode::Analytic => None,
    };
    let columns: Vec<Vec<SemianalyticPoint>> = (1..n)
        .into_par_iter()
        .map(|j| {
            let p = SelfAahParams::new(*model, j)?.with_omega_mode(mode);
            let omega = match &table {
                Some(t) => Complex64::new(t[j].ok_or(Error::MissingMode(j))?.re, 0.0),
                None => analytic_omega(&p),
            };
            Ok(semianalytic_column(&self_aah_spectrum_with(&p, omega)?, n))
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

pub fn semianalytic_column(s: &SelfAahSpectrum, n: usize) -> Vec<SemianalyticPoint> {
    let e = s.real_energies();
    let d4 = fourth_difference(&e);
    let top = e.last().copied().unwrap_or(0.0);
    e.iter()
        .zip(&d4)
        .map(|(&energy, &fourth_diff)| SemianalyticPoint {
            flux: s.j as f64 / n as f64,
            j: s.j,
            energy,
            energy_aligned: top - energy + ALIGN_OFFSET,
            fourth_diff,
        })
        .collect()
}
