//! Harper reference model and the self-induced AAH model.

mod harper;
mod self_aah;

pub use harper::{
    band_edges, count_bands, flux_grid, harper_matrix, harper_spectrum, hofstadter_butterfly,
    Boundary, HarperParams, HarperSpectrum, HofstadterPoint,
};
pub use self_aah::{
    fourth_difference, omega_j, omega_table, potential, self_aah_spectrum, self_aah_spectrum_with,
    semianalytic_butterfly, semianalytic_column, Corner, OmegaMode, SelfAahParams, SelfAahSpectrum,
    SemianalyticPoint, BACKSUB_TOL,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    /// 0 is the top of the cluster.
    pub rank: usize,
    pub energy_exact: f64,
    pub energy_aah: f64,
    /// `|exact - aah| / bandwidth`.
    pub rel_dev: f64,
}

/// Width of cluster `j`: from its top state down to `Re(eps_j + eps_{j+1}) / 2`,
/// where the next cluster's standing wave takes over.
pub fn cluster_bandwidth(top: f64, eps_j: f64, eps_next: f64) -> f64 {
    top - 0.5 * (eps_j + eps_next)
}

/// Rank-by-rank comparison of the top `count` levels of two descending lists.
pub fn compare_levels(
    exact_desc: &[f64],
    aah_desc: &[f64],
    count: usize,
    bandwidth: f64,
) -> Result<Vec<CompareRow>> {
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bandwidth {bandwidth} must be positive"
        )));
    }
    if exact_desc.len() < count || aah_desc.len() < count {
        return Err(Error::InvalidParams(format!(
            "need {count} levels, have {} exact and {} AAH",
            exact_desc.len(),
            aah_desc.len()
        )));
    }
    Ok((0..count)
        .map(|rank| CompareRow {
            rank,
            energy_exact: exact_desc[rank],
            energy_aah: aah_desc[rank],
            rel_dev: (exact_desc[rank] - aah_desc[rank]).abs() / bandwidth,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_checks_lengths() {
        assert!(compare_levels(&[1.0], &[1.0, 2.0], 2, 1.0).is_err());
        let rows = compare_levels(&[0.0, -0.1], &[0.01, -0.1], 2, 0.5).unwrap();
        assert!((rows[0].rel_dev - 0.02).abs() < 1e-12);
        assert_eq!(rows[1].rel_dev, 0.0);
    }
}
