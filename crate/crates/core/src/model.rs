//! Single-excitation operator of an atom array coupled to a waveguide.
//!
//! With `Gamma0 = 1` and energies measured from `omega0`, the operator is
//! `H_nm = -i exp(i phi |n - m|)`: complex symmetric, not Hermitian.

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::measures;
use crate::params::{ComplexEnergy, ModelParams, Parity, GAMMA0};

/// Distance to the light line below which `dispersion` reports a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// `|sum psi^2|` below this marks a quasi-defective eigenvector.
pub const QUASI_DEFECTIVE_TOL: f64 = 1e-12;

/// Mirror overlap needed to call a vector even or odd.
pub const PARITY_THRESHOLD: f64 = 0.9;

/// Relative eigenvalue separation under which two modes count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// O(N) action of `H` using the recursions
/// `s_n = e^{i phi} s_{n-1} + v_n` (forward) and the mirrored backward sweep;
/// `(Hv)_n = -i (s_n + t_n - v_n)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpKernel {
    n: usize,
    step: Complex64,
}

impl ExpKernel {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            n: params.n_atoms(),
            step: Complex64::from_polar(1.0, params.phi()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(v.len(), n);
        assert_eq!(out.len(), n);
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..n {
            s = self.step * s + v[x];
            out[x] = s;
        }
        let mut t = Complex64::new(0.0, 0.0);
        let minus_i = Complex64::new(0.0, -GAMMA0);
        for x in (0..n).rev() {
            t = self.step * t + v[x];
            out[x] = minus_i * (out[x] + t - v[x]);
        }
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply(v, &mut out);
        out
    }

    /// `H * M`, column by column.
    pub fn apply_columns(&self, m: &Mat<c64>) -> Mat<c64> {
        let mut out = Mat::<c64>::zeros(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            self.apply(m.col_as_slice(j), out.col_as_slice_mut(j));
        }
        out
    }
}

pub fn build_single_hamiltonian(params: &ModelParams) -> Mat<c64> {
    let n = params.n_atoms();
    let phi = params.phi();
    Mat::from_fn(n, n, |a, b| {
        let d = a.abs_diff(b) as f64;
        Complex64::new(0.0, -GAMMA0) * Complex64::from_polar(1.0, phi * d)
    })
}

/// Continuum polariton dispersion `Gamma0 / (cos kd - cos phi)`, relative to `omega0`.
pub fn dispersion(k: f64, params: &ModelParams) -> Result<f64> {
    let gap = k.cos() - params.phi().cos();
    if !(k > 0.0 && k <= std::f64::consts::PI) {
        return Err(Error::InvalidParams(format!("kd = {k} is outside (0, pi]")));
    }
    if gap.abs() < POLE_TOLERANCE {
        return Err(Error::DispersionPole { k, gap: gap.abs() });
    }
    Ok(GAMMA0 / gap)
}

/// Lattice sum of the kernel, `Gamma0 sin(phi) / (cos kd - cos phi)`.
///
/// Differs from [`dispersion`] by the factor `sin phi`; this is the form the
/// finite-array eigenvalues converge to, with `-2 phi / k^2` as its small-k limit.
pub fn lattice_dispersion(k: f64, params: &ModelParams) -> Result<f64> {
    Ok(params.phi().sin() * dispersion(k, params)?)
}

#[derive(Debug, Clone)]
pub struct PolaritonMode {
    pub energy: ComplexEnergy,
    /// Bilinearly normalized: `sum psi_x^2 = 1`.
    pub vector: Vec<Complex64>,
    /// Standing-wave index; 0 marks the uniform (superradiant) mode.
    pub index_j: usize,
    pub parity: Parity,
    pub k_max: f64,
    pub quasi_defective: bool,
    pub degenerate: bool,
}

/// Full spectrum of `H`, sorted by real part then imaginary part.
pub fn eigensolve_single(h: &Mat<c64>) -> Result<Vec<PolaritonMode>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Shape {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", n, h.ncols()),
        });
    }
    let (values, vectors) = linalg::eig(h)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ComplexEnergy(values[a]).total_cmp(&ComplexEnergy(values[b])));
    let scale = values.iter().map(|z| z.norm()).fold(1.0f64, f64::max);

    let mut modes = Vec::with_capacity(n);
    for (pos, &c) in order.iter().enumerate() {
        let mut v = linalg::column(&vectors, c);
        let (root, sq) = measures::bilinear_scale(&v);
        let quasi_defective = sq.norm() < QUASI_DEFECTIVE_TOL * measures::norm_sqr(&v);
        if !quasi_defective {
            for z in v.iter_mut() {
                *z /= root;
            }
        }
        let e = values[c];
        let near = |other: usize| (values[other] - e).norm() < DEGENERACY_TOL * scale;
        let degenerate = (pos > 0 && near(order[pos - 1])) || (pos + 1 < n && near(order[pos + 1]));

        let overlap = measures::mirror_overlap(&v);
        let parity = Parity::from_overlap(overlap, PARITY_THRESHOLD);
        let k_max = measures::fourier_kmax(&v)?;
        let index_j = if k_max <= measures::fourier_grid_floor(n) {
            0
        } else {
            measures::standing_wave_index(k_max, parity, n)
        };
        modes.push(PolaritonMode {
            energy: ComplexEnergy(e),
            vector: v,
            index_j,
            parity,
            k_max,
            quasi_defective,
            degenerate,
        });
    }
    Ok(modes)
}

/// Bilinear Gram matrix `G_ab = sum_x psi^a_x psi^b_x` of a mode set.
pub fn bilinear_gram(modes: &[PolaritonMode]) -> Mat<c64> {
    let n = modes.len();
    Mat::from_fn(n, n, |a, b| {
        measures::bilinear_dot(&modes[a].vector, &modes[b].vector)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    /// Matrix inverse of `H`.
    Exact,
    /// `d2 / (2 phi Gamma0)` with the open-boundary Laplacian.
    Laplacian,
}

/// Discrete Laplacian with corner diagonal entries `-1`:
/// first row `(-1, 1, 0, ...)`, interior rows `(1, -2, 1)`.
pub fn laplacian(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |a, b| {
        if a == b {
            if n == 1 {
                0.0
            } else if a == 0 || a == n - 1 {
                -1.0
            } else {
                -2.0
            }
        } else if a.abs_diff(b) == 1 {
            1.0
        } else {
            0.0
        }
    })
}

pub fn build_k_operator(params: &ModelParams, mode: KMode) -> Result<Mat<c64>> {
    match mode {
        KMode::Exact => linalg::inverse(&build_single_hamiltonian(params)),
        KMode::Laplacian => {
            let l = laplacian(params.n_atoms());
            let s = 1.0 / (2.0 * params.phi() * GAMMA0);
            Ok(Mat::from_fn(l.nrows(), l.ncols(), |a, b| {
                Complex64::new(s * l[(a, b)], 0.0)
            }))
        }
    }
}
