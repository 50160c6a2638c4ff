//! Orbital split and cluster index of a two-polariton state.
//!
//! A state of cluster `j` is close to `psi^(j) chi^T + chi psi^(j)T`: one
//! polariton in the standing wave `j`, the other in an orbital `chi` shaped by
//! the standing-wave potential. The two factors are recovered from the
//! two leading Schmidt terms and told apart by their localization.

use faer::{c64, Mat};
use num_complex::Complex64;

use super::schmidt::{entropy, schmidt, SchmidtData};
use crate::error::{Error, Result};
use crate::measures;
use crate::model::{ExpKernel, PARITY_THRESHOLD};
use crate::params::{ComplexEnergy, ModelParams, Parity};
use crate::two_polariton::{normalized, TwoExcitationState};

/// Relative IPR difference under which the free/localized choice is ambiguous.
pub const IPR_TIE: f64 = 0.01;

/// `lambda_1 + lambda_2` below this marks a state the two-factor picture misses.
pub const TWO_TERM_MIN: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct OrbitalSplit {
    pub u_free: Vec<Complex64>,
    pub u_loc: Vec<Complex64>,
    pub ipr_free: f64,
    pub ipr_loc: f64,
    /// IPRs within [`IPR_TIE`]; `u_free` was then picked by the smaller `k_max`.
    pub ambiguous: bool,
}

/// `u+- = lambda_1^{1/4} psi^1 +- i lambda_2^{1/4} psi^2`.
///
/// With these weights `(u+ u-^T + u- u+^T)/2` equals the two-term truncation
/// `sqrt(l1) psi^1 psi^1T + sqrt(l2) psi^2 psi^2T`, so `u+-` are the two
/// factors of the closest symmetrized product. The more extended one is `u_free`.
pub fn split_orbitals(s: &SchmidtData) -> Result<OrbitalSplit> {
    let l2 = s.lambdas.get(1).copied().unwrap_or(0.0);
    if s.lambdas.len() < 2 || l2 <= 1e-14 {
        return Err(Error::RankOne { lambda2: l2 });
    }
    let a = s.lambdas[0].powf(0.25);
    let b = Complex64::new(0.0, l2.powf(0.25));
    let (p1, p2) = (&s.orbitals[0], &s.orbitals[1]);
    let plus: Vec<_> = p1.iter().zip(p2).map(|(x, y)| x * a + y * b).collect();
    let minus: Vec<_> = p1.iter().zip(p2).map(|(x, y)| x * a - y * b).collect();
    let ip = measures::ipr(&plus)?;
    let im = measures::ipr(&minus)?;
    let ambiguous = (ip - im).abs() < IPR_TIE * ip.max(im);
    let plus_is_free = if ambiguous {
        measures::fourier_kmax(&plus)? <= measures::fourier_kmax(&minus)?
    } else {
        ip < im
    };
    Ok(if plus_is_free {
        OrbitalSplit {
            u_free: plus,
            u_loc: minus,
            ipr_free: ip,
            ipr_loc: im,
            ambiguous,
        }
    } else {
        OrbitalSplit {
            u_free: minus,
            u_loc: plus,
            ipr_free: im,
            ipr_loc: ip,
            ambiguous,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalysisBasis {
    /// Atom-pair amplitude `psi_nm`.
    #[default]
    Atomic,
    /// Green-function basis `H psi H`.
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Confidence {
    High,
    /// Orbital roles decided by the `k_max` tie-break.
    Ambiguous,
    /// Two-term weight too small, indefinite parity, or no standing-wave peak.
    Low,
}

impl Confidence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Confidence::High => "high",
            Confidence::Ambiguous => "ambiguous",
            Confidence::Low => "low",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub state_id: usize,
    pub energy: ComplexEnergy,
    pub j: usize,
    pub k_max: f64,
    pub parity: Parity,
    pub u_free: Vec<Complex64>,
    pub u_loc: Vec<Complex64>,
    pub ipr_loc: f64,
    pub ipr_free: f64,
    /// `lambda_1 + lambda_2` in the analysis basis.
    pub two_term_weight: f64,
    /// Entanglement entropy of the atomic amplitude.
    pub entropy: f64,
    pub confidence: Confidence,
}

/// Per-state analysis with a fixed basis choice; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Analyzer {
    n_atoms: usize,
    kernel: ExpKernel,
    basis: AnalysisBasis,
}

impl Analyzer {
    pub fn new(params: &ModelParams, basis: AnalysisBasis) -> Self {
        Self {
            n_atoms: params.n_atoms(),
            kernel: ExpKernel::new(params),
            basis,
        }
    }

    pub fn basis(&self) -> AnalysisBasis {
        self.basis
    }

    fn analysis_amplitude(&self, atomic: &Mat<c64>) -> Result<Mat<c64>> {
        match self.basis {
            AnalysisBasis::Atomic => Ok(atomic.clone()),
            AnalysisBasis::Transformed => {
                let x = self.kernel.apply_columns(atomic);
                normalized(self.kernel.apply_columns(&x.transpose().to_owned()))
            }
        }
    }

    pub fn assign(&self, state_id: usize, state: &TwoExcitationState) -> Result<ClusterAssignment> {
        if state.energy.re() >= 0.0 {
            return Err(Error::UpperPanel(state.energy.re()));
        }
        let n = self.n_atoms;
        let atomic = schmidt(&state.amplitude)?;
        let s = match self.basis {
            AnalysisBasis::Atomic => atomic.clone(),
            AnalysisBasis::Transformed => schmidt(&self.analysis_amplitude(&state.amplitude)?)?,
        };
        let split = split_orbitals(&s)?;
        let k_max = measures::fourier_kmax(&split.u_free)?;
        let parity =
            Parity::from_overlap(measures::mirror_overlap(&split.u_free), PARITY_THRESHOLD);
        let dc = k_max <= measures::fourier_grid_floor(n);
        let j = measures::standing_wave_index(k_max, parity, n);
        let two_term_weight = s.lambdas[0] + s.lambdas[1];
        let confidence = if two_term_weight < TWO_TERM_MIN || parity == Parity::Indefinite || dc {
            Confidence::Low
        } else if split.ambiguous {
            Confidence::Ambiguous
        } else {
            Confidence::High
        };
        Ok(ClusterAssignment {
            state_id,
            energy: state.energy,
            j,
            k_max,
            parity,
            ipr_loc: split.ipr_loc,
            ipr_free: split.ipr_free,
            u_free: split.u_free,
            u_loc: split.u_loc,
            two_term_weight,
            entropy: entropy(&atomic),
            confidence,
        })
    }
}

pub fn assign_cluster(
    analyzer: &Analyzer,
    state_id: usize,
    state: &TwoExcitationState,
) -> Result<ClusterAssignment> {
    analyzer.assign(state_id, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_polariton::BasisTag;
    use std::f64::consts::PI;

    fn wave(n: usize, j: usize) -> Vec<Complex64> {
        let s = (2.0 / n as f64).sqrt();
        (1..=n)
            .map(|x| Complex64::new(s * (PI * j as f64 * (x as f64 - 0.5) / n as f64).cos(), 0.0))
            .collect()
    }

    fn sym_state(a: &[Complex64], b: &[Complex64], e: f64) -> TwoExcitationState {
        let n = a.len();
        let m = Mat::from_fn(n, n, |x, y| {
            if x == y {
                Complex64::new(0.0, 0.0)
            } else {
                a[x] * b[y] + b[x] * a[y]
            }
        });
        TwoExcitationState {
            energy: ComplexEnergy::new(e, -0.01),
            amplitude: normalized(m).unwrap(),
            basis: BasisTag::Atomic,
            sector: None,
        }
    }

    #[test]
    fn split_needs_two_terms() {
        let a = wave(20, 3);
        let m = Mat::from_fn(20, 20, |x, y| a[x] * a[y]);
        let s = schmidt(&m).unwrap();
        assert!(matches!(split_orbitals(&s), Err(Error::RankOne { .. })));
    }

    #[test]
    fn beat_patterns_stay_extended() {
        let n = 200;
        let (a, b) = (wave(n, 11), wave(n, 14));
        let m = Mat::from_fn(n, n, |x, y| a[x] * b[y] + b[x] * a[y]);
        let s = schmidt(&m).unwrap();
        let split = split_orbitals(&s).unwrap();
        let bound = 3.0 * 1.5 / n as f64;
        assert!(split.ipr_free < bound && split.ipr_loc < bound);
        // equal weights: the two combinations carry the same bilinear norm
        let nf = measures::bilinear_dot(&split.u_free, &split.u_free).norm();
        let nl = measures::bilinear_dot(&split.u_loc, &split.u_loc).norm();
        assert!((nf - nl).abs() < 1e-10);
    }

    #[test]
    fn recovers_standing_wave_partner() {
        let n = 125;
        let params = ModelParams::new(n, 0.02).unwrap();
        let analyzer = Analyzer::new(&params, AnalysisBasis::Atomic);
        let mut edge = vec![Complex64::new(0.0, 0.0); n];
        for x in 0..6 {
            edge[x] = Complex64::new(0.6f64.powi(x as i32), 0.1);
        }
        let st = sym_state(&wave(n, 7), &edge, -0.64);
        let a = analyzer.assign(3, &st).unwrap();
        assert_eq!(a.j, 7);
        assert_eq!(a.confidence, Confidence::High);
        assert!(a.ipr_loc > 0.2);
        // the mirrored state lands in the same cluster
        let mirrored = TwoExcitationState {
            amplitude: Mat::from_fn(n, n, |x, y| st.amplitude[(n - 1 - x, n - 1 - y)]),
            ..st.clone()
        };
        assert_eq!(analyzer.assign(3, &mirrored).unwrap().j, 7);
    }

    #[test]
    fn scattering_product_is_assigned_to_lower_index() {
        let n = 125;
        let params = ModelParams::new(n, 0.02).unwrap();
        let modes =
            crate::model::eigensolve_single(&crate::model::build_single_hamiltonian(&params))
                .unwrap();
        let mode = |j: usize| {
            modes
                .iter()
                .find(|m| m.index_j == j)
                .unwrap()
                .vector
                .clone()
        };
        let st = sym_state(&mode(7), &mode(40), -0.5);
        // hard-core products are not clean in the transformed basis: H diag(a b) H
        // picks up the superradiant mode, so only the atomic amplitude is checked
        let a = Analyzer::new(&params, AnalysisBasis::Atomic)
            .assign(0, &st)
            .unwrap();
        assert_eq!(a.j, 7);
        assert_ne!(a.confidence, Confidence::Low);
    }

    #[test]
    fn upper_panel_is_rejected() {
        let params = ModelParams::new(10, 0.02).unwrap();
        let st = sym_state(&wave(10, 1), &wave(10, 2), 3.0);
        assert!(matches!(
            Analyzer::new(&params, AnalysisBasis::Atomic).assign(0, &st),
            Err(Error::UpperPanel(_))
        ));
    }
}
