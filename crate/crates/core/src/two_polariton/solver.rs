//! Eigensolvers for the pair operator, block-diagonalized by the mirror symmetry.

use faer::{c64, Mat};
use num_complex::Complex64;

use super::basis::{PairBasis, ParityBasis, Sector};
use super::{apply_packed, dense_bytes, pair_row, BasisTag, TwoExcitationState};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_single_hamiltonian, ExpKernel};
use crate::params::{ComplexEnergy, MemoryBudget, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMode {
    /// Complete spectrum from dense eigendecompositions of the two parity blocks.
    Dense,
    /// `count` states closest to the per-excitation energy `shift`, by
    /// shift-and-invert subspace iteration.
    Iterative { shift: Complex64, count: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mode: SolverMode,
    /// Keep only states with `lo <= Re eps <= hi`.
    pub window: Option<(f64, f64)>,
    pub budget: MemoryBudget,
    /// Relative residual required by the iterative mode.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mode: SolverMode::Dense,
            window: None,
            budget: MemoryBudget::default(),
            tolerance: 1e-8,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone)]
struct SectorSolution {
    basis: ParityBasis,
    /// Unit-norm eigenvectors in sector coordinates, one per column.
    vectors: Mat<c64>,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    energy: ComplexEnergy,
    sector: usize,
    column: usize,
}

/// Two-excitation eigenstates sorted by per-excitation energy.
///
/// Eigenvectors stay in compact sector coordinates; N x N amplitudes are built
/// on demand by [`state`](Self::state).
#[derive(Debug, Clone)]
pub struct TwoPolaritonSpectrum {
    params: ModelParams,
    basis: PairBasis,
    sectors: Vec<SectorSolution>,
    entries: Vec<Entry>,
}

impl TwoPolaritonSpectrum {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &PairBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn energy(&self, i: usize) -> ComplexEnergy {
        self.entries[i].energy
    }

    pub fn energies(&self) -> Vec<ComplexEnergy> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn sector(&self, i: usize) -> Sector {
        self.sectors[self.entries[i].sector].basis.sector
    }

    /// Packed pair vector of state `i`, unit norm.
    pub fn pair_vector(&self, i: usize) -> Vec<Complex64> {
        let e = self.entries[i];
        let s = &self.sectors[e.sector];
        s.basis
            .expand(s.vectors.col_as_slice(e.column), self.basis.len())
    }

    pub fn state(&self, i: usize) -> TwoExcitationState {
        TwoExcitationState {
            energy: self.entries[i].energy,
            amplitude: self.basis.to_matrix(&self.pair_vector(i)),
            basis: BasisTag::Atomic,
            sector: Some(self.sector(i)),
        }
    }

    /// `||A psi - 2 eps psi|| / (|2 eps| ||psi||)`, evaluated matrix-free.
    pub fn residual(&self, i: usize) -> f64 {
        let kernel = ExpKernel::new(&self.params);
        let c = self.pair_vector(i);
        relative_residual(&kernel, &self.basis, &c, 2.0 * self.entries[i].energy.0)
    }
}

fn relative_residual(
    kernel: &ExpKernel,
    basis: &PairBasis,
    c: &[Complex64],
    theta: Complex64,
) -> f64 {
    let ac = apply_packed(kernel, basis, c);
    let r: f64 = ac
        .iter()
        .zip(c)
        .map(|(a, x)| (a - theta * x).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    r / (theta.norm().max(1e-12) * norm)
}

/// Dense sector block `V^T A V`, assembled from sparse rows of the pair operator.
fn assemble_sector(h: &Mat<c64>, basis: &PairBasis, sector: &ParityBasis) -> Mat<c64> {
    let dim = sector.dim();
    // column and coefficient of each pair inside this sector
    let mut slot = vec![(usize::MAX, 0.0); basis.len()];
    for (b, &(p, q, cp, cq)) in sector.columns.iter().enumerate() {
        slot[p] = (b, cp);
        if q != p {
            slot[q] = (b, cq);
        }
    }
    let mut block = Mat::<c64>::zeros(dim, dim);
    for (a, &(p, q, cp, cq)) in sector.columns.iter().enumerate() {
        let mut add = |coef: f64, pair: usize| {
            pair_row(h, basis, pair, |r, v| {
                let (b, c) = slot[r];
                if b != usize::MAX {
                    block[(a, b)] += v * (coef * c);
                }
            });
        };
        add(cp, p);
        if q != p {
            add(cq, q);
        }
    }
    block
}

pub fn eigensolve_two(
    params: &ModelParams,
    options: &SolveOptions,
) -> Result<TwoPolaritonSpectrum> {
    let n = params.n_atoms();
    if n < 2 {
        return Err(Error::InvalidParams(
            "the two-excitation sector needs at least two atoms".into(),
        ));
    }
    let basis = PairBasis::new(n);
    let parity: Vec<ParityBasis> = [Sector::Even, Sector::Odd]
        .into_iter()
        .map(|s| ParityBasis::new(&basis, s))
        .filter(|p| p.dim() > 0)
        .collect();
    let largest = parity.iter().map(|p| p.dim()).max().unwrap_or(0);
    let h = build_single_hamiltonian(params);

    let (sectors, mut entries) = match options.mode {
        SolverMode::Dense => {
            // block + factorization workspace + stored vectors of both sectors
            let stored: u64 = parity.iter().map(|p| dense_bytes(p.dim())).sum();
            options.budget.check(4 * dense_bytes(largest) + stored)?;
            dense(&h, &basis, parity)?
        }
        SolverMode::Iterative { shift, count } => {
            if count == 0 {
                return Err(Error::InvalidParams(
                    "iterative mode needs count >= 1".into(),
                ));
            }
            options
                .budget
                .check(dense_bytes(largest) + 16 * (basis.len() as u64) * 4 * count as u64)?;
            let kernel = ExpKernel::new(params);
            let mut sectors = Vec::new();
            let mut entries = Vec::new();
            for (si, pb) in parity.into_iter().enumerate() {
                let (values, vectors) =
                    shift_invert(&h, &kernel, &basis, &pb, 2.0 * shift, count, options)?;
                for (c, v) in values.iter().enumerate() {
                    entries.push(Entry {
                        energy: ComplexEnergy(v * 0.5),
                        sector: si,
                        column: c,
                    });
                }
                sectors.push(SectorSolution { basis: pb, vectors });
            }
            entries.sort_by(|a, b| {
                (a.energy.0 - shift)
                    .norm()
                    .total_cmp(&(b.energy.0 - shift).norm())
                    .then(a.energy.total_cmp(&b.energy))
            });
            entries.truncate(count);
            (sectors, entries)
        }
    };
    if let Some((lo, hi)) = options.window {
        entries.retain(|e| e.energy.re() >= lo && e.energy.re() <= hi);
    }
    entries.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.sector.cmp(&b.sector)));
    Ok(TwoPolaritonSpectrum {
        params: *params,
        basis,
        sectors,
        entries,
    })
}

fn dense(
    h: &Mat<c64>,
    basis: &PairBasis,
    parity: Vec<ParityBasis>,
) -> Result<(Vec<SectorSolution>, Vec<Entry>)> {
    let mut sectors = Vec::new();
    let mut entries = Vec::new();
    for (si, pb) in parity.into_iter().enumerate() {
        let block = assemble_sector(h, basis, &pb);
        let (values, mut vectors) = linalg::eig(&block)?;
        drop(block);
        for c in 0..vectors.ncols() {
            let col = vectors.col_as_slice_mut(c);
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in col.iter_mut() {
                *z /= norm;
            }
            entries.push(Entry {
                energy: ComplexEnergy(values[c] * 0.5),
                sector: si,
                column: c,
            });
        }
        sectors.push(SectorSolution { basis: pb, vectors });
    }
    Ok((sectors, entries))
}

/// Deterministic, well-spread start vectors.
fn start_block(dim: usize, m: usize) -> Mat<c64> {
    Mat::from_fn(dim, m, |i, j| {
        let t = (i as f64 + 1.0) * (j as f64 + 1.0);
        Complex64::new(
            (0.754_877_666 * t).sin() + (1.3 * i as f64).cos(),
            (0.569_840_29 * t + j as f64).cos(),
        )
    })
}

/// Shift-and-invert block subspace iteration on one sector, with a Rayleigh-Ritz
/// step every sweep. Residuals are checked with the matrix-free pair operator.
fn shift_invert(
    h: &Mat<c64>,
    kernel: &ExpKernel,
    basis: &PairBasis,
    sector: &ParityBasis,
    theta0: Complex64,
    count: usize,
    options: &SolveOptions,
) -> Result<(Vec<Complex64>, Mat<c64>)> {
    use faer::dyn_stack::{MemBuffer, MemStack};
    use faer::linalg::lu::partial_pivoting::{factor, solve};

    let dim = sector.dim();
    let count = count.min(dim);
    let m = (count + (count / 2).max(8)).min(dim);

    let block = assemble_sector(h, basis, sector);
    let par = faer::get_global_parallelism();
    let mut fwd = vec![0usize; dim];
    let mut bwd = vec![0usize; dim];
    // A shift sitting on an eigenvalue makes the inverse amplify that one vector
    // by ~1e16 and the rest of the block collapses onto it. Factor at a slightly
    // nudged shift instead; Ritz values are still ranked against `theta0`.
    let mut lu = Mat::<c64>::zeros(dim, dim);
    let mut nudge = 0.0;
    for attempt in 0..4 {
        lu.copy_from(&block);
        let sigma = theta0 + Complex64::new(nudge, nudge);
        for i in 0..dim {
            lu[(i, i)] -= sigma;
        }
        factor::lu_in_place(
            lu.as_mut(),
            &mut fwd,
            &mut bwd,
            par,
            MemStack::new(&mut MemBuffer::new(
                factor::lu_in_place_scratch::<usize, c64>(dim, dim, par, Default::default()),
            )),
            Default::default(),
        );
        let pivots = (0..dim).map(|i| lu[(i, i)].norm());
        let (lo, hi) = pivots.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
        if lo > 1e-10 * hi {
            break;
        }
        if attempt == 3 {
            return Err(Error::Singular(format!(
                "shift {theta0} coincides with an eigenvalue"
            )));
        }
        nudge = 1e-6 * theta0.norm().max(1.0) * 10f64.powi(attempt);
    }
    let perm = faer::perm::PermRef::new_checked(&fwd, &bwd, dim);
    let mut solve_buf = MemBuffer::new(solve::solve_in_place_scratch::<usize, c64>(dim, m, par));

    let apply_sector = |x: &[Complex64]| -> Vec<Complex64> {
        let full = sector.expand(x, basis.len());
        let y = apply_packed(kernel, basis, &full);
        sector
            .columns
            .iter()
            .map(|&(p, q, cp, cq)| {
                y[p] * cp
                    + if q != p {
                        y[q] * cq
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
            })
            .collect()
    };

    let mut x = start_block(dim, m);
    let mut last = Vec::new();
    for _ in 0..options.max_iterations {
        solve::solve_in_place(
            lu.as_ref(),
            lu.as_ref(),
            perm,
            x.as_mut(),
            par,
            MemStack::new(&mut solve_buf),
        );
        let q = x.qr().compute_thin_Q();
        let mut aq = Mat::<c64>::zeros(dim, m);
        for j in 0..m {
            let col = apply_sector(q.col_as_slice(j));
            aq.col_as_slice_mut(j).copy_from_slice(&col);
        }
        let g = q.adjoint() * &aq;
        let (theta, w) = linalg::eig(&g)?;
        let ritz = &q * &w;
        let aritz = &aq * &w;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            (theta[a] - theta0)
                .norm()
                .total_cmp(&(theta[b] - theta0).norm())
        });
        let mut residuals = Vec::with_capacity(count);
        for &c in order.iter().take(count) {
            let z = ritz.col_as_slice(c);
            let az = aritz.col_as_slice(c);
            let r: f64 = az
                .iter()
                .zip(z)
                .map(|(a, v)| (a - theta[c] * v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let nz = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            residuals.push(r / (theta[c].norm().max(1e-12) * nz));
        }
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst < options.tolerance {
            let mut vectors = Mat::<c64>::zeros(dim, count);
            let mut values = Vec::with_capacity(count);
            for (k, &c) in order.iter().take(count).enumerate() {
                let z = ritz.col_as_slice(c);
                let nz = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                for (dst, src) in vectors.col_as_slice_mut(k).iter_mut().zip(z) {
                    *dst = src / nz;
                }
                values.push(theta[c]);
            }
            return Ok((values, vectors));
        }
        last = residuals;
        x = ritz;
    }
    let worst_residual = last.iter().cloned().fold(0.0, f64::max);
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        worst_residual,
        tolerance: options.tolerance,
        residuals: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_polariton::assemble_h2;

    #[test]
    fn two_atoms() {
        let params = ModelParams::new(2, 0.02).unwrap();
        let s = eigensolve_two(&params, &SolveOptions::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.energy(0).0 - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn blocks_reproduce_full_spectrum() {
        for n in [5usize, 8] {
            let params = ModelParams::new(n, 0.3).unwrap();
            let spec = eigensolve_two(&params, &SolveOptions::default()).unwrap();
            let h2 = assemble_h2(
                &params,
                &build_single_hamiltonian(&params),
                &MemoryBudget::default(),
            )
            .unwrap();
            let (mut full, _) = linalg::eig(&h2).unwrap();
            full.sort_by(|a, b| ComplexEnergy(*a).total_cmp(&ComplexEnergy(*b)));
            assert_eq!(spec.len(), full.len());
            for (i, z) in full.iter().enumerate() {
                assert!((spec.energy(i).0 * 2.0 - z).norm() < 1e-9);
                assert!(spec.residual(i) < 1e-9);
            }
            let sum_im: f64 = spec.energies().iter().map(|e| 2.0 * e.im()).sum();
            assert!((sum_im + (n * (n - 1)) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn states_are_symmetric_and_normalized() {
        let params = ModelParams::new(9, 0.1).unwrap();
        let spec = eigensolve_two(&params, &SolveOptions::default()).unwrap();
        for i in 0..spec.len() {
            let st = spec.state(i);
            assert!((linalg::frobenius(&st.amplitude) - 1.0).abs() < 1e-12);
            for a in 0..9 {
                assert_eq!(st.amplitude[(a, a)], Complex64::new(0.0, 0.0));
                for b in 0..9 {
                    assert_eq!(st.amplitude[(a, b)], st.amplitude[(b, a)]);
                }
            }
        }
    }

    #[test]
    fn iterative_matches_dense() {
        let params = ModelParams::new(16, 0.1).unwrap();
        let dense = eigensolve_two(&params, &SolveOptions::default()).unwrap();
        let target = dense.energy(40).0 + Complex64::new(1e-4, 1e-4);
        let opts = SolveOptions {
            mode: SolverMode::Iterative {
                shift: target,
                count: 6,
            },
            ..Default::default()
        };
        let it = eigensolve_two(&params, &opts).unwrap();
        assert_eq!(it.len(), 6);
        let mut nearest: Vec<_> = dense.energies();
        nearest.sort_by(|a, b| (a.0 - target).norm().total_cmp(&(b.0 - target).norm()));
        for i in 0..it.len() {
            assert!(it.residual(i) < 1e-8);
            assert!(nearest[..6]
                .iter()
                .any(|e| (e.0 - it.energy(i).0).norm() < 1e-8));
        }
    }

    #[test]
    fn iterative_reports_non_convergence() {
        let params = ModelParams::new(12, 0.1).unwrap();
        let opts = SolveOptions {
            mode: SolverMode::Iterative {
                shift: Complex64::new(-0.3, -0.2),
                count: 50,
            },
            max_iterations: 1,
            tolerance: 1e-15,
            ..Default::default()
        };
        match eigensolve_two(&params, &opts) {
            Err(Error::NonConvergence { residuals, .. }) => assert!(!residuals.is_empty()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn window_filters() {
        let params = ModelParams::new(10, 0.1).unwrap();
        let opts = SolveOptions {
            window: Some((-1.0, 0.0)),
            ..Default::default()
        };
        let s = eigensolve_two(&params, &opts).unwrap();
        assert!(!s.is_empty());
        assert!(s.energies().iter().all(|e| e.re() >= -1.0 && e.re() <= 0.0));
    }
}
