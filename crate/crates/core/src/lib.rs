//! Single- and two-excitation spectra of a two-level-atom array coupled to a
//! waveguide, the self-induced Aubry-Andre-Harper model, and the analysis that
//! turns two-polariton spectra into Hofstadter-type butterflies.

pub mod aah;
pub mod analysis;
pub mod error;
mod linalg;
pub mod measures;
pub mod model;
pub mod params;
pub mod two_polariton;

pub use error::{Error, Result};
pub use model::{
    build_k_operator, build_single_hamiltonian, dispersion, eigensolve_single, laplacian,
    lattice_dispersion, ExpKernel, KMode, PolaritonMode,
};
pub use params::{ComplexEnergy, MemoryBudget, ModelParams, Parity};

/// Run the dense linear algebra on the calling thread only.
///
/// Results then no longer depend on the size of the thread pool, which keeps
/// output bitwise reproducible when independent solves are spread over workers.
pub fn use_sequential_linalg() {
    faer::set_global_parallelism(faer::Par::Seq);
}
