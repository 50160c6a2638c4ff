//! Schmidt analysis of two-polariton states, cluster assignment and the
//! cluster butterfly.

mod butterfly;
mod cluster;
mod schmidt;

pub use butterfly::{
    assemble_butterfly, cluster_views, edge_pair_check, edge_weights, group_levels, Butterfly,
    ButterflyOptions, ButterflyPoint, ClusterView, EdgePair, EdgePairOptions, LevelGroup,
    SPACING_FLOOR,
};
pub use cluster::{
    assign_cluster, split_orbitals, AnalysisBasis, Analyzer, ClusterAssignment, Confidence,
    OrbitalSplit, IPR_TIE, TWO_TERM_MIN,
};
pub use schmidt::{entropy, reconstruct, reconstruction_error, schmidt, SchmidtData};

use crate::error::Result;
use crate::measures;
use crate::params::ComplexEnergy;
use crate::two_polariton::TwoExcitationState;

/// One row of the entanglement map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementRow {
    pub state_id: usize,
    pub energy: ComplexEnergy,
    pub entropy: f64,
    /// IPR of the flattened pair amplitude.
    pub ipr: f64,
}

pub fn entanglement_row(state_id: usize, state: &TwoExcitationState) -> Result<EntanglementRow> {
    let s = schmidt(&state.amplitude)?;
    let a = &state.amplitude;
    let flat: Vec<_> = (0..a.ncols())
        .flat_map(|c| (0..a.nrows()).map(move |r| a[(r, c)]))
        .collect();
    Ok(EntanglementRow {
        state_id,
        energy: state.energy,
        entropy: entropy(&s),
        ipr: measures::ipr(&flat)?,
    })
}
