//! Model parameters, units and the small value types shared by every module.
//!
//! Energies are measured from the atomic resonance and in units of the
//! single-atom radiative rate: a stored value `e` means `(eps - omega0) / Gamma0`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-atom decay rate; the unit of energy.
pub const GAMMA0: f64 = 1.0;

/// Resonance frequency used as the energy reference.
pub const OMEGA0: f64 = 0.0;

/// Offset added to aligned cluster energies so the top state survives a log axis.
pub const ALIGN_OFFSET: f64 = 1.1e-4;

/// Default memory budget for the two-excitation sector (4 GiB).
pub const DEFAULT_BUDGET_BYTES: u64 = 4 << 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n_atoms: usize,
    phi: f64,
}

impl ModelParams {
    /// `phi = omega0 d / c` must lie in the short-period window `(0, pi)`.
    pub fn new(n_atoms: usize, phi: f64) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
        }
        if !(phi > 0.0 && phi < std::f64::consts::PI) {
            return Err(Error::InvalidParams(format!(
                "phi = {phi} is outside (0, pi)"
            )));
        }
        Ok(Self { n_atoms, phi })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn gamma0(&self) -> f64 {
        GAMMA0
    }

    pub fn omega0(&self) -> f64 {
        OMEGA0
    }

    /// Dimension of the hard-core two-excitation sector, `N(N-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n_atoms * (self.n_atoms - 1) / 2
    }

    /// Quantized standing-wave vector `k_j d = pi j / N`.
    pub fn k_j(&self, j: usize) -> f64 {
        std::f64::consts::PI * j as f64 / self.n_atoms as f64
    }
}

/// Upper bound on the working memory a solver may allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self {
            bytes: DEFAULT_BUDGET_BYTES,
        }
    }
}

impl MemoryBudget {
    pub fn from_mib(mib: u64) -> Self {
        Self { bytes: mib << 20 }
    }

    pub fn check(&self, required: u64) -> Result<()> {
        if required > self.bytes {
            Err(Error::MemoryBudget {
                required_mb: required.div_ceil(1 << 20),
                budget_mb: self.bytes >> 20,
            })
        } else {
            Ok(())
        }
    }
}

/// `eps - omega0` in units of `Gamma0`. The imaginary part is minus half the
/// decay rate and is non-positive for physical modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexEnergy(pub Complex64);

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.0.im <= tol
    }

    /// Ordering used for every sorted spectrum: real part, then imaginary part.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.re()
            .total_cmp(&other.re())
            .then(self.im().total_cmp(&other.im()))
    }
}

impl From<Complex64> for ComplexEnergy {
    fn from(z: Complex64) -> Self {
        Self(z)
    }
}

impl fmt::Display for ComplexEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re(), self.im())
    }
}

/// Behaviour under the mirror `x -> N + 1 - x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Indefinite,
}

impl Parity {
    /// Classify a mirror overlap in `[-1, 1]`.
    pub fn from_overlap(overlap: f64, threshold: f64) -> Self {
        if overlap > threshold {
            Parity::Even
        } else if overlap < -threshold {
            Parity::Odd
        } else {
            Parity::Indefinite
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Indefinite => "indefinite",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0, 0.02).is_err());
        assert!(ModelParams::new(10, 0.0).is_err());
        assert!(ModelParams::new(10, std::f64::consts::PI).is_err());
        assert!(ModelParams::new(10, f64::NAN).is_err());
        let p = ModelParams::new(125, 0.02).unwrap();
        assert_eq!(p.pair_count(), 7750);
        assert_eq!(p.gamma0(), 1.0);
        assert_eq!(p.omega0(), 0.0);
    }

    #[test]
    fn budget_reports_sizes() {
        let b = MemoryBudget::from_mib(1);
        assert!(b.check(1 << 20).is_ok());
        match b.check((3 << 20) + 1) {
            Err(Error::MemoryBudget {
                required_mb,
                budget_mb,
            }) => {
                assert_eq!(required_mb, 4);
                assert_eq!(budget_mb, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parity_thresholds() {
        assert_eq!(Parity::from_overlap(0.95, 0.9), Parity::Even);
        assert_eq!(Parity::from_overlap(-0.95, 0.9), Parity::Odd);
        assert_eq!(Parity::from_overlap(0.5, 0.9), Parity::Indefinite);
    }
}
