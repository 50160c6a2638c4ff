//! Two-excitation sector: amplitudes `psi_nm` on pairs of distinct atoms.
//!
//! The Schroedinger equation reads `H psi + psi H - 2 diag[diag(H psi)] = 2 eps psi`.
//! For symmetric `psi` the last term only cancels the diagonal, so the action is
//! "multiply, symmetrize, zero the diagonal".

mod basis;
mod solver;

pub use basis::{PairBasis, ParityBasis, Sector};
pub use solver::{eigensolve_two, SolveOptions, SolverMode, TwoPolaritonSpectrum};

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_k_operator, ExpKernel, KMode};
use crate::params::{ComplexEnergy, MemoryBudget, ModelParams};
use basis::check_square;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// `psi_nm` over atom pairs, zero on the diagonal.
    Atomic,
    /// `psi'_xy` over Green-function orbitals, `psi' = H psi H`.
    Transformed,
}

#[derive(Debug, Clone)]
pub struct TwoExcitationState {
    /// Per excitation: half the eigenvalue of the pair operator.
    pub energy: ComplexEnergy,
    /// Symmetric, unit Frobenius norm.
    pub amplitude: Mat<c64>,
    pub basis: BasisTag,
    pub sector: Option<Sector>,
}

/// `H psi + (H psi)^T` with the diagonal set to zero, in O(N^2).
pub fn apply_two_polariton(kernel: &ExpKernel, psi: &Mat<c64>) -> Result<Mat<c64>> {
    let n = kernel.n();
    check_square(psi, n)?;
    let x = kernel.apply_columns(psi);
    let mut out = Mat::<c64>::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            out[(a, b)] = if a == b {
                Complex64::new(0.0, 0.0)
            } else {
                x[(a, b)] + x[(b, a)]
            };
        }
    }
    Ok(out)
}

/// Same action on packed pair coordinates.
pub fn apply_packed(kernel: &ExpKernel, basis: &PairBasis, c: &[Complex64]) -> Vec<Complex64> {
    let psi = basis.to_matrix(c);
    let out = apply_two_polariton(kernel, &psi).expect("basis and kernel sizes agree");
    basis.from_matrix(&out).expect("square output")
}

/// Bytes needed for a dense `dim x dim` complex matrix.
pub fn dense_bytes(dim: usize) -> u64 {
    (dim as u64) * (dim as u64) * std::mem::size_of::<c64>() as u64
}

/// Nonzero entries of row `(n, m)` of the pair operator:
/// `H_nk` on `{k, m}` for `k != m` and `H_mk` on `{n, k}` for `k != n`.
pub(crate) fn pair_row(
    h: &Mat<c64>,
    basis: &PairBasis,
    p: usize,
    mut visit: impl FnMut(usize, Complex64),
) {
    let (n, m) = basis.unpack(p);
    for k in 0..basis.n_atoms() {
        if k != m {
            visit(basis.pack(k, m), h[(n, k)]);
        }
        if k != n {
            visit(basis.pack(n, k), h[(m, k)]);
        }
    }
}

/// Dense pair operator in the packed basis; eigenvalues are `2 eps`.
pub fn assemble_h2(params: &ModelParams, h: &Mat<c64>, budget: &MemoryBudget) -> Result<Mat<c64>> {
    let basis = PairBasis::new(params.n_atoms());
    check_square(h, params.n_atoms())?;
    let dim = basis.len();
    budget.check(dense_bytes(dim))?;
    let mut out = Mat::<c64>::zeros(dim, dim);
    for p in 0..dim {
        pair_row(h, &basis, p, |q, v| out[(p, q)] += v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToTransformed,
    ToAtomic,
}

/// Change of basis `psi' = H psi H` and its exact inverse `psi = K psi' K`.
#[derive(Debug, Clone)]
pub struct Transformer {
    kernel: ExpKernel,
    k: Mat<c64>,
}

impl Transformer {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Ok(Self {
            kernel: ExpKernel::new(params),
            k: build_k_operator(params, KMode::Exact)?,
        })
    }

    /// Unnormalized `H psi H`.
    pub fn sandwich_h(&self, psi: &Mat<c64>) -> Mat<c64> {
        let x = self.kernel.apply_columns(psi);
        self.kernel.apply_columns(&x.transpose().to_owned())
    }

    pub fn transform(
        &self,
        state: &TwoExcitationState,
        direction: Direction,
    ) -> Result<TwoExcitationState> {
        check_square(&state.amplitude, self.kernel.n())?;
        let (expected, target) = match direction {
            Direction::ToTransformed => (BasisTag::Atomic, BasisTag::Transformed),
            Direction::ToAtomic => (BasisTag::Transformed, BasisTag::Atomic),
        };
        if state.basis != expected {
            return Err(Error::InvalidParams(format!(
                "state is already in the {target:?} basis"
            )));
        }
        let raw = match direction {
            Direction::ToTransformed => self.sandwich_h(&state.amplitude),
            Direction::ToAtomic => &self.k * &state.amplitude * &self.k,
        };
        Ok(TwoExcitationState {
            energy: state.energy,
            amplitude: normalized(raw)?,
            basis: target,
            sector: state.sector,
        })
    }
}

pub fn transform_basis(
    transformer: &Transformer,
    state: &TwoExcitationState,
    direction: Direction,
) -> Result<TwoExcitationState> {
    transformer.transform(state, direction)
}

pub(crate) fn normalized(m: Mat<c64>) -> Result<Mat<c64>> {
    let norm = linalg::frobenius(&m);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(m * faer::Scale(Complex64::new(1.0 / norm, 0.0)))
}

#[derive(Debug, Clone)]
pub struct AnsatzFit {
    pub chi: Vec<Complex64>,
    /// `||M - a chi^T - chi a^T||_F / ||M||_F`.
    pub residual: f64,
}

/// Least-squares `chi` in `M ~ a chi^T + chi a^T` for symmetric `M`.
///
/// Stationarity gives `M conj(a) = a (a^H chi) + chi |a|^2`, solved in closed form.
pub fn fit_ansatz(m: &Mat<c64>, a: &[Complex64]) -> Result<AnsatzFit> {
    let n = a.len();
    check_square(m, n)?;
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if na == 0.0 {
        return Err(Error::ZeroVector);
    }
    let b: Vec<Complex64> = (0..n)
        .map(|x| (0..n).map(|y| m[(x, y)] * a[y].conj()).sum())
        .collect();
    let ahb: Complex64 = a.iter().zip(&b).map(|(p, q)| p.conj() * q).sum();
    let chi: Vec<Complex64> = (0..n)
        .map(|x| (b[x] - a[x] * ahb / (2.0 * na)) / na)
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for y in 0..n {
        for x in 0..n {
            let r = m[(x, y)] - a[x] * chi[y] - chi[x] * a[y];
            num += r.norm_sqr();
            den += m[(x, y)].norm_sqr();
        }
    }
    Ok(AnsatzFit {
        chi,
        residual: (num / den).sqrt(),
    })
}

/// Combine two nearly degenerate vectors into `(a + e^{i theta} b)/sqrt 2` and
/// `(a - e^{i theta} b)/sqrt 2`, with `theta` chosen to maximize the weight of
/// the first combination on the left half `x < (N-1)/2`. Both outputs have unit norm.
pub fn recombine_pair(
    a: &[Complex64],
    b: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::Shape {
            expected: n.to_string(),
            got: b.len().to_string(),
        });
    }
    let left: Complex64 = (0..n)
        .filter(|&x| 2 * x + 1 < n)
        .map(|x| a[x].conj() * b[x])
        .sum();
    recombine_with(a, b, left)
}

/// State version of [`recombine_pair`]; the "left" region is `n + m < N - 1`,
/// the half of the pair plane exchanged with the other by the mirror.
pub fn recombine_states(
    s1: &TwoExcitationState,
    s2: &TwoExcitationState,
) -> Result<(TwoExcitationState, TwoExcitationState)> {
    let n = s1.amplitude.nrows();
    check_square(&s2.amplitude, n)?;
    let flat = |m: &Mat<c64>| -> Vec<Complex64> {
        (0..n).flat_map(|c| m.col_as_slice(c).to_vec()).collect()
    };
    let (a, b) = (flat(&s1.amplitude), flat(&s2.amplitude));
    let mut left = Complex64::new(0.0, 0.0);
    for c in 0..n {
        for r in 0..n {
            if r + c + 1 < n {
                left += a[c * n + r].conj() * b[c * n + r];
            }
        }
    }
    let (plus, minus) = recombine_with(&a, &b, left)?;
    let unflat = |v: &[Complex64]| Mat::from_fn(n, n, |r, c| v[c * n + r]);
    let energy = ComplexEnergy((s1.energy.0 + s2.energy.0) * 0.5);
    let make = |v: &[Complex64]| TwoExcitationState {
        energy,
        amplitude: unflat(v),
        basis: s1.basis,
        sector: None,
    };
    Ok((make(&plus), make(&minus)))
}

fn recombine_with(
    a: &[Complex64],
    b: &[Complex64],
    left: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let phase = if left.norm() > 0.0 {
        left.conj() / left.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let unit = |v: Vec<Complex64>| -> Result<Vec<Complex64>> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(v.into_iter().map(|z| z / norm).collect())
    };
    let plus = unit(a.iter().zip(b).map(|(x, y)| x + phase * y).collect())?;
    let minus = unit(a.iter().zip(b).map(|(x, y)| x - phase * y).collect())?;
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_single_hamiltonian;

    fn random_symmetric(n: usize, seed: u64) -> Mat<c64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = Mat::<c64>::zeros(n, n);
        for a in 0..n {
            for b in a + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(a, b)] = z;
                m[(b, a)] = z;
            }
        }
        m
    }

    #[test]
    fn two_atoms_by_hand() {
        let params = ModelParams::new(2, 0.02).unwrap();
        let kernel = ExpKernel::new(&params);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Mat::from_fn(2, 2, |a, b| {
            Complex64::new(if a == b { 0.0 } else { s }, 0.0)
        });
        let out = apply_two_polariton(&kernel, &psi).unwrap();
        assert_eq!(out[(0, 0)], Complex64::new(0.0, 0.0));
        assert!((out[(0, 1)] - Complex64::new(0.0, -2.0 * s)).norm() < 1e-14);
        let h2 = assemble_h2(
            &params,
            &build_single_hamiltonian(&params),
            &MemoryBudget::default(),
        )
        .unwrap();
        assert_eq!(h2.nrows(), 1);
        assert!((h2[(0, 0)] - Complex64::new(0.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn h2_trace_and_symmetry() {
        for n in [3usize, 7] {
            let params = ModelParams::new(n, 0.4).unwrap();
            let h2 = assemble_h2(
                &params,
                &build_single_hamiltonian(&params),
                &MemoryBudget::default(),
            )
            .unwrap();
            let mut tr = Complex64::new(0.0, 0.0);
            for a in 0..h2.nrows() {
                tr += h2[(a, a)];
                for b in 0..h2.nrows() {
                    assert_eq!(h2[(a, b)], h2[(b, a)]);
                }
            }
            let expected = -(((n - 1) * n) as f64);
            assert!((tr - Complex64::new(0.0, expected)).norm() < 1e-12);
        }
    }

    #[test]
    fn matrix_free_matches_dense() {
        for n in 3..=12 {
            let params = ModelParams::new(n, 0.02 + 0.05 * n as f64).unwrap();
            let h = build_single_hamiltonian(&params);
            let h2 = assemble_h2(&params, &h, &MemoryBudget::default()).unwrap();
            let basis = PairBasis::new(n);
            let kernel = ExpKernel::new(&params);
            for t in 0..20 {
                let psi = random_symmetric(n, 100 * n as u64 + t);
                let out = apply_two_polariton(&kernel, &psi).unwrap();
                for a in 0..n {
                    assert_eq!(out[(a, a)], Complex64::new(0.0, 0.0));
                }
                let c = basis.from_matrix(&psi).unwrap();
                let dense: Vec<Complex64> = (0..basis.len())
                    .map(|p| (0..basis.len()).map(|q| h2[(p, q)] * c[q]).sum())
                    .collect();
                let fast = basis.from_matrix(&out).unwrap();
                for (x, y) in dense.iter().zip(&fast) {
                    assert!((x - y).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let params = ModelParams::new(4, 0.02).unwrap();
        let kernel = ExpKernel::new(&params);
        let psi = Mat::<c64>::zeros(3, 3);
        assert!(matches!(
            apply_two_polariton(&kernel, &psi),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn budget_guard() {
        let params = ModelParams::new(60, 0.02).unwrap();
        let h = build_single_hamiltonian(&params);
        let err = assemble_h2(&params, &h, &MemoryBudget::from_mib(1)).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { .. }));
        assert!(err.to_string().contains("iterative"));
    }

    #[test]
    fn transform_round_trip() {
        let n = 14;
        let params = ModelParams::new(n, 0.02).unwrap();
        let t = Transformer::new(&params).unwrap();
        let psi = normalized(random_symmetric(n, 5)).unwrap();
        let state = TwoExcitationState {
            energy: ComplexEnergy::new(-0.3, -0.1),
            amplitude: psi.clone(),
            basis: BasisTag::Atomic,
            sector: None,
        };
        let tr = t.transform(&state, Direction::ToTransformed).unwrap();
        assert!(tr.amplitude[(3, 3)].norm() > 1e-6);
        let back = t.transform(&tr, Direction::ToAtomic).unwrap();
        // equal up to a global phase after renormalization
        let overlap: Complex64 = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| psi[(a, b)].conj() * back.amplitude[(a, b)])
            .sum();
        let phase = overlap / overlap.norm();
        let diff = linalg::max_abs_diff(&(&psi * faer::Scale(phase)), &back.amplitude);
        assert!(diff < 1e-8, "{diff}");
        assert!(t.transform(&tr, Direction::ToTransformed).is_err());
    }

    #[test]
    fn ansatz_fit_is_exact_on_ansatz() {
        let n = 20;
        let a: Vec<_> = (0..n)
            .map(|x| Complex64::new((0.3 * x as f64).cos(), 0.0))
            .collect();
        let chi: Vec<_> = (0..n)
            .map(|x| Complex64::new((x as f64).sin(), 0.1 * x as f64))
            .collect();
        let m = Mat::from_fn(n, n, |x, y| a[x] * chi[y] + chi[x] * a[y]);
        let fit = fit_ansatz(&m, &a).unwrap();
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn recombination_separates_edges() {
        let n = 30;
        let mut left = vec![Complex64::new(0.0, 0.0); n];
        let mut right = left.clone();
        for x in 0..4 {
            left[x] = Complex64::new(0.5f64.powi(x as i32), 0.0);
            right[n - 1 - x] = left[x];
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let even: Vec<_> = (0..n).map(|x| (left[x] + right[x]) * s).collect();
        let phase = Complex64::from_polar(1.0, 1.1);
        let odd: Vec<_> = (0..n).map(|x| (left[x] - right[x]) * s * phase).collect();
        let (p, m) = recombine_pair(&even, &odd).unwrap();
        let weight = |v: &[Complex64], r: std::ops::Range<usize>| -> f64 {
            v[r].iter().map(|z| z.norm_sqr()).sum()
        };
        assert!(weight(&p, 0..15) > 0.999);
        assert!(weight(&m, 15..30) > 0.999);
    }
}
