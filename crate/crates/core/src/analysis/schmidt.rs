//! Symmetric (Takagi) Schmidt decomposition `psi = sum_nu sqrt(lambda_nu) u_nu u_nu^T`.

use faer::{c64, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::params::ComplexEnergy;

/// Singular values closer than this (relative to the largest) share a group
/// and get a joint phase fix.
const GROUP_TOL: f64 = 1e-8;

/// Below this (relative) a singular value carries no phase information.
const NULL_TOL: f64 = 1e-13;

/// Irrational mixing weight that separates the commuting real and imaginary
/// parts of a degenerate block.
const MIX: f64 = 0.618_033_988_7;

#[derive(Debug, Clone)]
pub struct SchmidtData {
    /// Descending, summing to one.
    pub lambdas: Vec<f64>,
    /// Unit-norm orbitals, `orbitals[nu]` pairs with `lambdas[nu]`.
    pub orbitals: Vec<Vec<Complex64>>,
    pub source_energy: Option<ComplexEnergy>,
    /// Some non-negligible weight is degenerate, so the orbitals within that
    /// group are not unique.
    pub degenerate: bool,
}

impl SchmidtData {
    pub fn with_energy(mut self, e: ComplexEnergy) -> Self {
        self.source_energy = Some(e);
        self
    }
}

/// Symmetric factorization from the SVD `psi = W S V^H`.
///
/// For symmetric `psi`, `conj(V)` spans the same space as `W` group by group;
/// `Q = W^H conj(V)` is then a symmetric unitary, diagonalized by a real
/// orthogonal `O`, and `u = W O diag(sqrt(diag(O^T Q O)))`.
pub fn schmidt(amplitude: &Mat<c64>) -> Result<SchmidtData> {
    let n = amplitude.nrows();
    if amplitude.ncols() != n {
        return Err(Error::Shape {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", n, amplitude.ncols()),
        });
    }
    let svd = amplitude
        .svd()
        .map_err(|e| Error::Eigensolver(format!("svd: {e:?}")))?;
    let w = svd.U();
    let v = svd.V();
    let sigma: Vec<f64> = (0..n).map(|i| svd.S()[i].re).collect();
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroVector);
    }
    let top = sigma[0];

    let mut orbitals = vec![Vec::new(); n];
    let mut degenerate = false;
    let mut i = 0;
    while i < n {
        let mut g = i + 1;
        while g < n && (sigma[i] - sigma[g]) <= GROUP_TOL * top {
            g += 1;
        }
        let size = g - i;
        if sigma[i] <= NULL_TOL * top {
            for k in i..n {
                orbitals[k] = (0..n).map(|x| w[(x, k)]).collect();
            }
            break;
        }
        let q = Mat::from_fn(size, size, |a, b| {
            (0..n)
                .map(|x| w[(x, i + a)].conj() * v[(x, i + b)].conj())
                .sum::<Complex64>()
        });
        if size == 1 {
            let r = q[(0, 0)].sqrt();
            orbitals[i] = (0..n).map(|x| w[(x, i)] * r).collect();
        } else {
            degenerate = true;
            let mixed = Mat::from_fn(size, size, |a, b| {
                let s = 0.5 * (q[(a, b)] + q[(b, a)]);
                s.re + MIX * s.im
            });
            let evd = mixed
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let o = evd.U();
            for c in 0..size {
                let d: Complex64 = (0..size)
                    .flat_map(|a| (0..size).map(move |b| (a, b)))
                    .map(|(a, b)| q[(a, b)] * (o[(a, c)] * o[(b, c)]))
                    .sum();
                let r = d.sqrt();
                let col: Vec<Complex64> = (0..n)
                    .map(|x| {
                        (0..size)
                            .map(|a| w[(x, i + a)] * o[(a, c)])
                            .sum::<Complex64>()
                            * r
                    })
                    .collect();
                let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                orbitals[i + c] = col.into_iter().map(|z| z / norm).collect();
            }
        }
        i = g;
    }
    Ok(SchmidtData {
        lambdas: sigma.iter().map(|s| s * s / total).collect(),
        orbitals,
        source_energy: None,
        degenerate,
    })
}

/// `sum_nu sqrt(lambda_nu) u_nu u_nu^T`, i.e. the normalized input.
pub fn reconstruct(s: &SchmidtData) -> Mat<c64> {
    let n = s.orbitals.first().map_or(0, |u| u.len());
    let mut out = Mat::<c64>::zeros(n, n);
    for (lam, u) in s.lambdas.iter().zip(&s.orbitals) {
        if *lam == 0.0 {
            continue;
        }
        let w = lam.sqrt();
        for b in 0..n {
            let ub = u[b] * w;
            for a in 0..n {
                out[(a, b)] += u[a] * ub;
            }
        }
    }
    out
}

/// Von Neumann entropy `-sum lambda ln lambda` with `0 ln 0 = 0`.
pub fn entropy(s: &SchmidtData) -> f64 {
    s.lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Frobenius distance between `psi / ||psi||` and its reconstruction.
pub fn reconstruction_error(amplitude: &Mat<c64>, s: &SchmidtData) -> f64 {
    let norm = linalg::frobenius(amplitude);
    let rec = reconstruct(s);
    let scaled = amplitude * faer::Scale(Complex64::new(1.0 / norm, 0.0));
    linalg::frobenius(&(scaled - rec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn outer_sym(a: &[Complex64], b: &[Complex64]) -> Mat<c64> {
        let n = a.len();
        Mat::from_fn(n, n, |x, y| a[x] * b[y] + b[x] * a[y])
    }

    fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn product_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_vec(7, &mut rng);
        let m = Mat::from_fn(7, 7, |x, y| a[x] * a[y]);
        let s = schmidt(&m).unwrap();
        assert!((s.lambdas[0] - 1.0).abs() < 1e-12);
        assert!(entropy(&s) < 1e-10);
        assert!(reconstruction_error(&m, &s) < 1e-10);
    }

    #[test]
    fn symmetrized_product_has_ln2() {
        let n = 12;
        let a: Vec<_> = (0..n)
            .map(|x| Complex64::new(if x == 2 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let b: Vec<_> = (0..n)
            .map(|x| Complex64::new(0.0, if x == 9 { 1.0 } else { 0.0 }))
            .collect();
        let m = outer_sym(&a, &b);
        let s = schmidt(&m).unwrap();
        assert!((s.lambdas[0] - 0.5).abs() < 1e-12 && (s.lambdas[1] - 0.5).abs() < 1e-12);
        assert!((entropy(&s) - 2f64.ln()).abs() < 1e-12);
        assert!(s.degenerate);
        assert!(reconstruction_error(&m, &s) < 1e-10);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for n in [2usize, 6, 13] {
            let mut m = Mat::<c64>::zeros(n, n);
            for a in 0..n {
                for b in a..n {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m[(a, b)] = z;
                    m[(b, a)] = z;
                }
            }
            let s = schmidt(&m).unwrap();
            let sum: f64 = s.lambdas.iter().sum();
            assert!((sum - 1.0).abs() < 1e-10);
            assert!(reconstruction_error(&m, &s) < 1e-10);
            let e = entropy(&s);
            assert!(e >= 0.0 && e <= (n as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn degenerate_blocks_reconstruct() {
        // two-atom singlet-like matrix and a 4-fold degenerate permutation matrix
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let m = Mat::from_fn(2, 2, |a, b| {
            Complex64::new(if a == b { 0.0 } else { s2 }, 0.0)
        });
        let s = schmidt(&m).unwrap();
        assert!(reconstruction_error(&m, &s) < 1e-12);
        let p = Mat::from_fn(4, 4, |a, b| {
            Complex64::from_polar(0.5, 0.3) * if a + b == 3 { 1.0 } else { 0.0 }
        });
        let s = schmidt(&p).unwrap();
        assert!((entropy(&s) - 4f64.ln()).abs() < 1e-12);
        assert!(reconstruction_error(&p, &s) < 1e-12);
    }

    #[test]
    fn uniform_weights_give_ln_n() {
        let s = SchmidtData {
            lambdas: vec![0.2; 5],
            orbitals: vec![vec![Complex64::new(0.0, 0.0); 5]; 5],
            source_energy: None,
            degenerate: true,
        };
        assert!((entropy(&s) - 5f64.ln()).abs() < 1e-14);
        let one = SchmidtData {
            lambdas: vec![1.0, 0.0],
            ..s
        };
        assert_eq!(entropy(&one), 0.0);
    }
}
