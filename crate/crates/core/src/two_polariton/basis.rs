//! Hard-core pair basis and its split into mirror-parity sectors.

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Packed index over pairs `(n, m)` with `n < m` (0-based).
#[derive(Debug, Clone)]
pub struct PairBasis {
    n_atoms: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairBasis {
    pub fn new(n_atoms: usize) -> Self {
        let mut pairs = Vec::with_capacity(n_atoms * n_atoms.saturating_sub(1) / 2);
        for n in 0..n_atoms {
            for m in n + 1..n_atoms {
                pairs.push((n, m));
            }
        }
        Self { n_atoms, pairs }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Index of the unordered pair `{a, b}`; `a != b`.
    #[inline]
    pub fn pack(&self, a: usize, b: usize) -> usize {
        debug_assert!(a != b && a < self.n_atoms && b < self.n_atoms);
        let (n, m) = if a < b { (a, b) } else { (b, a) };
        n * (2 * self.n_atoms - n - 1) / 2 + (m - n - 1)
    }

    #[inline]
    pub fn unpack(&self, p: usize) -> (usize, usize) {
        self.pairs[p]
    }

    /// Image of a pair under `x -> N - 1 - x` applied to both atoms.
    #[inline]
    pub fn mirror(&self, p: usize) -> usize {
        let (n, m) = self.pairs[p];
        let last = self.n_atoms - 1;
        self.pack(last - m, last - n)
    }

    /// Symmetric zero-diagonal matrix with `psi_nm = psi_mn = c_p / sqrt 2`, so the
    /// Frobenius norm of the matrix equals the Euclidean norm of `c`.
    pub fn to_matrix(&self, c: &[Complex64]) -> Mat<c64> {
        let n = self.n_atoms;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = Mat::<c64>::zeros(n, n);
        for (p, &(a, b)) in self.pairs.iter().enumerate() {
            psi[(a, b)] = c[p] * s;
            psi[(b, a)] = c[p] * s;
        }
        psi
    }

    /// Inverse of [`to_matrix`](Self::to_matrix) on the symmetric subspace.
    /// The upper and lower triangles are averaged.
    pub fn from_matrix(&self, psi: &Mat<c64>) -> Result<Vec<Complex64>> {
        check_square(psi, self.n_atoms)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ok(self
            .pairs
            .iter()
            .map(|&(a, b)| (psi[(a, b)] + psi[(b, a)]) * s)
            .collect())
    }
}

pub(crate) fn check_square(m: &Mat<c64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Shape {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Sector of the exchange-and-mirror symmetry `R (x) R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Even => 1.0,
            Sector::Odd => -1.0,
        }
    }
}

/// Orthonormal real basis of one parity sector of the pair space:
/// `(e_p +/- e_q) / sqrt 2` for mirror partners `p < q`, and `e_p` for
/// mirror-fixed pairs in the even sector.
#[derive(Debug, Clone)]
pub struct ParityBasis {
    pub sector: Sector,
    /// `(p, q, c_p, c_q)`; `q == p` and `c_q == 0` for fixed pairs.
    pub columns: Vec<(usize, usize, f64, f64)>,
}

impl ParityBasis {
    pub fn new(basis: &PairBasis, sector: Sector) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut columns = Vec::new();
        for p in 0..basis.len() {
            let q = basis.mirror(p);
            if p < q {
                columns.push((p, q, s, sector.sign() * s));
            } else if p == q && sector == Sector::Even {
                columns.push((p, p, 1.0, 0.0));
            }
        }
        Self { sector, columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Embed sector coordinates into the full pair space.
    pub fn expand(&self, coords: &[Complex64], full_len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); full_len];
        for (&(p, q, cp, cq), &z) in self.columns.iter().zip(coords) {
            out[p] += z * cp;
            if q != p {
                out[q] += z * cq;
            }
        }
        out
    }
}
