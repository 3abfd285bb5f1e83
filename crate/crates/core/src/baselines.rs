//! Reference solvers used to normalize benchmark costs: the decoupled
//! Euclidean-sequence solver and the alternating straight/Dubins heuristic.

use crate::dtp::{solve_dtp_refined, SequencedLocations};
use crate::dubins::dubins_length;
use crate::ea::etsp_heuristic_tour;
use crate::error::Result;
use crate::types::{Instance, Tour};

/// Decoupled two-stage solver: fixes the visiting order with the Euclidean
/// TSP heuristic, then optimizes headings on that order at resolution
/// `k_max`. The normalization denominator for every benchmark row.
pub fn solve_baseline_decoupled(instance: &Instance, k_max: usize) -> Result<Tour> {
    let sequence = etsp_heuristic_tour(instance)?;
    let seq = SequencedLocations::from_instance(instance, &sequence)?;
    let solution = solve_dtp_refined(&seq, k_max, true)?;
    Ok(Tour { sequence, headings: solution.headings, cost: solution.cost })
}

/// Alternating heuristic on the Euclidean-TSP order: the first edge and
/// every second edge after it are straight segments whose direction fixes
/// the headings at both endpoints; the edges between them are Dubins
/// maneuvers joining those fixed headings.
///
/// With an odd number of targets the closing edge cannot be straight (its
/// endpoints' headings are already pinned by neighboring straight edges),
/// so the last location's heading is aimed along the closing edge and the
/// closing maneuver is a Dubins path like the other non-straight edges.
pub fn solve_alternating(instance: &Instance) -> Result<Tour> {
    let sequence = etsp_heuristic_tour(instance)?;
    let n = sequence.len();
    let at = |j: usize| instance.targets[sequence[j % n]];
    let edge_direction = |j: usize| {
        let (a, b) = (at(j), at(j + 1));
        (b.y - a.y).atan2(b.x - a.x)
    };

    let mut headings = vec![0.0; n];
    let mut j = 0;
    while j + 1 < n {
        let dir = edge_direction(j);
        headings[j] = dir;
        headings[j + 1] = dir;
        j += 2;
    }
    if n % 2 == 1 {
        headings[n - 1] = edge_direction(n - 1);
    }

    let cost = (0..n)
        .map(|j| {
            let a = instance.pose(sequence[j], headings[j]);
            let b = instance.pose(sequence[(j + 1) % n], headings[(j + 1) % n]);
            dubins_length(a, b, instance.rho)
        })
        .sum();
    Ok(Tour { sequence, headings, cost })
}
