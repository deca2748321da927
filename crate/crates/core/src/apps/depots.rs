use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AppError, Result};
use crate::instance::{DistanceTable, EdgeId, Instance, Robot, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct DepotPlan {
    /// One depot per cluster, in cluster order.
    pub depots: Vec<VertexId>,
    pub medoids: Vec<EdgeId>,
    pub clusters: Vec<Vec<EdgeId>>,
    /// Clustering objective after initialization and after every accepted swap.
    pub objective_trace: Vec<f64>,
}

/// k-medoids over service edges with midpoint distances: seeded random
/// initial medoids, then the best improving medoid swap until none improves.
/// Each cluster's depot is the vertex with the smallest sum of graph
/// distances to its edges' endpoints.
pub fn kmedoids_depots(inst: &Instance, dist: &DistanceTable, k: usize, seed: u64) -> Result<DepotPlan> {
    let items: Vec<EdgeId> = inst.service_edges().map(|e| e.id).collect();
    let n = items.len();
    if k == 0 || k > n {
        return Err(AppError::TooManyClusters { k, items: n });
    }
    let mids: Vec<_> = items.iter().map(|&e| inst.segment(e).midpoint()).collect();
    let d: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| mids[i].distance(mids[j])).collect();
    let at = |i: usize, j: usize| d[i * n + j];

    let objective = |medoids: &[usize]| -> f64 {
        (0..n).map(|i| medoids.iter().map(|&m| at(i, m)).fold(f64::INFINITY, f64::min)).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids: Vec<usize> = sample(&mut rng, n, k).into_vec();
    medoids.sort_unstable();
    let mut current = objective(&medoids);
    let mut trace = vec![current];
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = h;
                let value = objective(&trial);
                if value < current - 1e-12 * current.abs().max(1.0) && best.is_none_or(|(b, _, _)| value < b) {
                    best = Some((value, slot, h));
                }
            }
        }
        let Some((value, slot, h)) = best else { break };
        medoids[slot] = h;
        current = value;
        trace.push(current);
    }

    let mut clusters = vec![Vec::new(); k];
    for i in 0..n {
        let c = (0..k).min_by(|&a, &b| at(i, medoids[a]).total_cmp(&at(i, medoids[b]))).unwrap();
        clusters[c].push(items[i]);
    }

    // rows from every endpoint cover all candidate vertices by symmetry
    let endpoints: Vec<VertexId> = {
        let mut v: Vec<VertexId> = items.iter().flat_map(|&e| [inst.edge(e).tail, inst.edge(e).head]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    dist.precompute(&endpoints);
    let depots = clusters
        .iter()
        .map(|cluster| {
            let cost = |v: VertexId| -> f64 {
                cluster.iter().map(|&e| dist.dist(inst.edge(e).tail, v) + dist.dist(inst.edge(e).head, v)).sum()
            };
            (0..inst.num_vertices()).min_by(|&a, &b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b))).unwrap()
        })
        .collect();

    Ok(DepotPlan { depots, medoids: medoids.iter().map(|&m| items[m]).collect(), clusters, objective_trace: trace })
}

/// Replaces the fleet with one robot of `capacity` per planned depot.
pub fn apply_depots(inst: &mut Instance, plan: &DepotPlan, capacity: f64) -> Result<()> {
    let robots = plan.depots.iter().map(|&depot| Robot { depot, capacity }).collect();
    inst.set_robots(robots)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::from_segments;

    fn two_clusters() -> Instance {
        let mut pts = Vec::new();
        let mut pairs = Vec::new();
        for (ox, base) in [(0.0, 0), (100.0, 4)] {
            for i in 0..4 {
                pts.push((ox + i as f64, 0.0));
            }
            pairs.extend([(base, base + 1), (base + 1, base + 2), (base + 2, base + 3)]);
        }
        pairs.push((3, 4));
        from_segments(&pts, &pairs, 0, 10.0).unwrap()
    }

    #[test]
    fn single_cluster_picks_the_distance_sum_minimizer() {
        let inst = from_segments(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)], &[(0, 1), (1, 2), (2, 3), (3, 4)], 0, 10.0).unwrap();
        let dist = DistanceTable::new(&inst);
        let plan = kmedoids_depots(&inst, &dist, 1, 3).unwrap();
        assert_eq!(plan.depots, vec![2]);
        assert_eq!(plan.clusters[0].len(), 4);
    }

    #[test]
    fn far_groups_get_their_own_depot() {
        let inst = two_clusters();
        let dist = DistanceTable::new(&inst);
        for seed in 0..5 {
            let plan = kmedoids_depots(&inst, &dist, 2, seed).unwrap();
            let mut depots = plan.depots.clone();
            depots.sort_unstable();
            assert!(depots[0] < 4 && depots[1] >= 4, "{depots:?}");
            assert!(plan.clusters.iter().all(|c| c.len() == 3 || c.len() == 4));
            assert!(plan.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn too_many_clusters() {
        let inst = two_clusters();
        let dist = DistanceTable::new(&inst);
        assert!(matches!(kmedoids_depots(&inst, &dist, 8, 0), Err(AppError::TooManyClusters { k: 8, items: 7 })));
        assert!(kmedoids_depots(&inst, &dist, 0, 0).is_err());
    }

    #[test]
    fn applying_a_plan_sets_one_robot_per_depot() {
        let mut inst = two_clusters();
        let dist = DistanceTable::new(&inst);
        let plan = kmedoids_depots(&inst, &dist, 2, 1).unwrap();
        apply_depots(&mut inst, &plan, 5.0).unwrap();
        assert_eq!(inst.robots().len(), 2);
        assert!(inst.robots().iter().all(|r| r.capacity == 5.0));
    }
}
