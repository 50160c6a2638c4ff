//! Cluster alignment, Landau-level grouping and edge-state detection.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::cluster::{ClusterAssignment, Confidence};
use crate::error::Result;
use crate::params::ALIGN_OFFSET;
use crate::two_polariton::recombine_pair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyPoint {
    /// Effective flux `j / N`.
    pub flux: f64,
    /// `Re eps_top - Re eps + ALIGN_OFFSET`; the top state of each cluster sits
    /// exactly at the offset and every other state above it on a log axis.
    pub energy_aligned: f64,
    /// IPR of the localized orbital.
    pub localization: f64,
    pub is_edge: bool,
    pub j: usize,
    pub state_id: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ButterflyOptions {
    pub min_cluster: usize,
    /// Edge states need `ipr_loc > edge_ipr_n / N` ...
    pub edge_ipr_n: f64,
    /// ... and `ipr_loc > edge_median_factor * median(ipr_loc)` of the cluster.
    pub edge_median_factor: f64,
    /// A spacing this many times its smaller neighbour separates two level groups.
    pub group_ratio: f64,
    /// A group is quasi-degenerate when its internal spread is below this
    /// fraction of the gaps that bound it.
    pub degeneracy_ratio: f64,
}

impl Default for ButterflyOptions {
    fn default() -> Self {
        Self {
            min_cluster: 3,
            edge_ipr_n: 5.0,
            edge_median_factor: 3.0,
            group_ratio: 10.0,
            degeneracy_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Butterfly {
    /// Sorted by `(flux, energy_aligned, state_id)`.
    pub points: Vec<ButterflyPoint>,
    /// Clusters left out for having fewer than `min_cluster` states: `(j, size)`.
    pub skipped: Vec<(usize, usize)>,
}

/// Relative spacing treated as numerically zero when grouping levels.
pub const SPACING_FLOOR: f64 = 1e-9;

/// Consecutive run of levels in a descending energy list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelGroup {
    pub start: usize,
    pub len: usize,
    /// Largest spacing inside the group.
    pub spread: f64,
    pub quasi_degenerate: bool,
}

impl LevelGroup {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Split descending energies into level groups.
///
/// A boundary falls on every spacing larger than `ratio` times the smaller of
/// its two neighbouring spacings. Spacings are clipped from below at
/// [`SPACING_FLOOR`] (relative) first, so round-off inside an exactly
/// degenerate level cannot split it. Groups whose spread is not small against the
/// gaps around them (`degeneracy_ratio`) are broken into singletons.
pub fn group_levels(energies: &[f64], ratio: f64, degeneracy_ratio: f64) -> Vec<LevelGroup> {
    let n = energies.len();
    if n == 0 {
        return Vec::new();
    }
    let gaps: Vec<f64> = energies.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let scale = energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let clipped: Vec<f64> = gaps.iter().map(|g| g.max(SPACING_FLOOR * scale)).collect();
    let mut cuts = vec![false; gaps.len()];
    for i in 0..gaps.len() {
        let left = if i > 0 { clipped[i - 1] } else { f64::INFINITY };
        let right = clipped.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let nb = left.min(right);
        cuts[i] = nb.is_finite() && clipped[i] > ratio * nb;
    }
    let mut raw = Vec::new();
    let mut start = 0;
    for i in 0..=gaps.len() {
        if i == gaps.len() || cuts[i] {
            raw.push((start, i + 1 - start));
            start = i + 1;
        }
    }
    let mut out = Vec::new();
    for (s, len) in raw {
        let spread = gaps[s..s + len - 1].iter().copied().fold(0.0, f64::max);
        let above = if s > 0 { gaps[s - 1] } else { f64::INFINITY };
        let below = gaps.get(s + len - 1).copied().unwrap_or(f64::INFINITY);
        let bound = above.min(below);
        let degenerate = len >= 2 && bound.is_finite() && spread < degeneracy_ratio * bound;
        if len == 1 || degenerate {
            out.push(LevelGroup {
                start: s,
                len,
                spread,
                quasi_degenerate: degenerate,
            });
        } else {
            for k in s..s + len {
                out.push(LevelGroup {
                    start: k,
                    len: 1,
                    spread: 0.0,
                    quasi_degenerate: false,
                });
            }
        }
    }
    out
}

/// Per-cluster view used for both the butterfly and diagnostics.
#[derive(Debug, Clone)]
pub struct ClusterView {
    pub j: usize,
    /// Indices into the assignment list, sorted by descending real energy.
    pub members: Vec<usize>,
    pub groups: Vec<LevelGroup>,
    /// Quasi-degenerate groups whose mean IPR is not edge-like, top first.
    pub landau_levels: Vec<LevelGroup>,
    /// Parallel to `members`.
    pub is_edge: Vec<bool>,
    pub edge_candidate: Vec<bool>,
    pub median_ipr: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Group confident assignments by cluster index and classify their levels.
pub fn cluster_views(
    assignments: &[ClusterAssignment],
    n_atoms: usize,
    opts: &ButterflyOptions,
) -> Vec<ClusterView> {
    let mut by_j: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, a) in assignments.iter().enumerate() {
        if a.confidence != Confidence::Low {
            by_j.entry(a.j).or_default().push(i);
        }
    }
    let mut views = Vec::new();
    for (j, mut members) in by_j {
        members.sort_by(|&a, &b| {
            let (x, y) = (&assignments[a], &assignments[b]);
            y.energy
                .re()
                .total_cmp(&x.energy.re())
                .then(y.energy.im().total_cmp(&x.energy.im()))
                .then(x.state_id.cmp(&y.state_id))
        });
        let energies: Vec<f64> = members
            .iter()
            .map(|&i| assignments[i].energy.re())
            .collect();
        let iprs: Vec<f64> = members.iter().map(|&i| assignments[i].ipr_loc).collect();
        let med = median(iprs.clone());
        let floor = opts.edge_ipr_n / n_atoms as f64;
        let localized = |p: f64| p > floor && p > opts.edge_median_factor * med;
        let candidate: Vec<bool> = iprs.iter().map(|&p| localized(p)).collect();
        let groups = group_levels(&energies, opts.group_ratio, opts.degeneracy_ratio);
        // Inside a degenerate level the solver mixes states arbitrarily, so single
        // members can look localized; judge the level by its mean IPR.
        let landau: Vec<LevelGroup> = groups
            .iter()
            .copied()
            .filter(|g| {
                let mean = g.range().map(|k| iprs[k]).sum::<f64>() / g.len as f64;
                g.quasi_degenerate && !localized(mean)
            })
            .collect();
        let mut is_edge = vec![false; members.len()];
        for k in 0..members.len() {
            if !candidate[k] || landau.iter().any(|g| g.range().contains(&k)) {
                continue;
            }
            let above = landau.iter().filter(|g| g.start + g.len <= k).last();
            let below = landau.iter().find(|g| g.start > k);
            if let (Some(a), Some(b)) = (above, below) {
                let e = energies[k];
                let gap_a = energies[a.start + a.len - 1] - e;
                let gap_b = e - energies[b.start];
                is_edge[k] = gap_a > 2.0 * a.spread && gap_b > 2.0 * b.spread;
            }
        }
        views.push(ClusterView {
            j,
            members,
            groups,
            landau_levels: landau,
            is_edge,
            edge_candidate: candidate,
            median_ipr: med,
        });
    }
    views
}

/// Align every cluster to its top state and flag in-gap localized states.
pub fn assemble_butterfly(
    assignments: &[ClusterAssignment],
    n_atoms: usize,
    opts: &ButterflyOptions,
) -> Butterfly {
    let mut out = Butterfly::default();
    for view in cluster_views(assignments, n_atoms, opts) {
        if view.members.len() < opts.min_cluster {
            out.skipped.push((view.j, view.members.len()));
            continue;
        }
        let top = assignments[view.members[0]].energy.re();
        for (k, &i) in view.members.iter().enumerate() {
            let a = &assignments[i];
            out.points.push(ButterflyPoint {
                flux: view.j as f64 / n_atoms as f64,
                energy_aligned: top - a.energy.re() + ALIGN_OFFSET,
                localization: a.ipr_loc,
                is_edge: view.is_edge[k],
                j: view.j,
                state_id: a.state_id,
            });
        }
    }
    out.points.sort_by(|a, b| {
        a.flux
            .total_cmp(&b.flux)
            .then(a.energy_aligned.total_cmp(&b.energy_aligned))
            .then(a.state_id.cmp(&b.state_id))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePair {
    pub first: usize,
    pub second: usize,
    pub delta: f64,
    /// Edge weights of the two members, after recombination when needed.
    pub weights: (f64, f64),
    pub recombined: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct EdgePairOptions {
    pub tolerance: f64,
    /// Sites counted as "at the edge" on each side.
    pub edge_sites: usize,
    pub min_weight: f64,
}

impl Default for EdgePairOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-5,
            edge_sites: 15,
            min_weight: 0.8,
        }
    }
}

/// Fraction of `|u|^2` in the first and the last `sites` entries.
pub fn edge_weights(u: &[Complex64], sites: usize) -> (f64, f64) {
    let n = u.len();
    let s = sites.min(n / 2);
    let total: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let left: f64 = u[..s].iter().map(|z| z.norm_sqr()).sum();
    let right: f64 = u[n - s..].iter().map(|z| z.norm_sqr()).sum();
    (left / total, right / total)
}

fn opposite(a: &[Complex64], b: &[Complex64], opts: &EdgePairOptions) -> Option<(f64, f64)> {
    let (al, ar) = edge_weights(a, opts.edge_sites);
    let (bl, br) = edge_weights(b, opts.edge_sites);
    if al > opts.min_weight && br > opts.min_weight {
        Some((al, br))
    } else if ar > opts.min_weight && bl > opts.min_weight {
        Some((ar, bl))
    } else {
        None
    }
}

/// Pairs of near-degenerate candidates whose localized orbitals sit at
/// opposite edges, directly or after symmetric/antisymmetric recombination.
/// Each input is `(id, energy, u_loc)`; a state joins at most one pair.
pub fn edge_pair_check(
    candidates: &[(usize, Complex64, Vec<Complex64>)],
    opts: &EdgePairOptions,
) -> Result<Vec<EdgePair>> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].1.re.total_cmp(&candidates[b].1.re));
    let mut used = vec![false; candidates.len()];
    let mut pairs = Vec::new();
    for x in 0..order.len() {
        let a = order[x];
        if used[a] {
            continue;
        }
        for &b in &order[x + 1..] {
            if used[b] {
                continue;
            }
            let delta = (candidates[a].1 - candidates[b].1).norm();
            if delta >= opts.tolerance {
                if candidates[b].1.re - candidates[a].1.re >= opts.tolerance {
                    break;
                }
                continue;
            }
            let (ua, ub) = (&candidates[a].2, &candidates[b].2);
            let found = match opposite(ua, ub, opts) {
                Some(w) => Some((w, false)),
                None => {
                    let (p, m) = recombine_pair(ua, ub)?;
                    opposite(&p, &m, opts).map(|w| (w, true))
                }
            };
            if let Some((weights, recombined)) = found {
                used[a] = true;
                used[b] = true;
                pairs.push(EdgePair {
                    first: candidates[a].0,
                    second: candidates[b].0,
                    delta,
                    weights,
                    recombined,
                });
                break;
            }
        }
    }
    Ok(pairs)
}
