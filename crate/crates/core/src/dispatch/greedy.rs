use alloc::vec::Vec;

use super::Ride;
use crate::network::TravelOracle;
use crate::{NodeId, RequestId, VehicleId};

/// First-come-first-served nearest-vehicle assignment.
///
/// Requests are taken in queue order (callers pass it sorted by request
/// time). Each takes the idle vehicle with the smallest network distance to
/// its origin, lowest vehicle id on ties; that vehicle leaves the pool.
/// Requests left over stay queued, which is why nothing is returned for them.
pub fn greedy_assign(
    idle: &[(VehicleId, NodeId)],
    queue: &[Ride],
    oracle: &impl TravelOracle,
) -> Vec<(RequestId, VehicleId)> {
    let mut pool: Vec<(VehicleId, NodeId)> = idle.to_vec();
    pool.sort_by_key(|&(id, _)| id);
    let mut out = Vec::new();
    for ride in queue {
        if pool.is_empty() {
            break;
        }
        let best = pool
            .iter()
            .enumerate()
            .filter_map(|(i, &(_, at))| oracle.distance(at, ride.origin).map(|d| (i, d)))
            // strict < keeps the lowest id among equal distances
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = best {
            let (vid, _) = pool.remove(i);
            out.push((ride.id, vid));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::network::PathCache;
    use alloc::vec;

    #[test]
    fn single_pair() {
        let net = grid(3);
        let c = PathCache::new(&net);
        let r = ride(&c, 7, 0.0, 0, 8);
        assert_eq!(greedy_assign(&[(VehicleId(3), NodeId(4))], &[r], &c), vec![(RequestId(7), VehicleId(3))]);
    }

    #[test]
    fn nearest_vehicle_wins() {
        let net = grid(5);
        let c = PathCache::new(&net);
        let r = ride(&c, 1, 0.0, 0, 24);
        // vehicle 1 at 200 m, vehicle 2 at 100 m
        let idle = [(VehicleId(1), NodeId(2)), (VehicleId(2), NodeId(1))];
        assert_eq!(greedy_assign(&idle, &[r], &c), vec![(RequestId(1), VehicleId(2))]);
    }

    #[test]
    fn ties_go_to_lowest_id_and_leftovers_wait() {
        let net = grid(5);
        let c = PathCache::new(&net);
        let a = ride(&c, 1, 0.0, 12, 0);
        let b = ride(&c, 2, 1.0, 12, 0);
        let idle = [(VehicleId(9), NodeId(11)), (VehicleId(4), NodeId(13))];
        let out = greedy_assign(&idle, &[a, b, ride(&c, 3, 2.0, 0, 1)], &c);
        assert_eq!(out, vec![(RequestId(1), VehicleId(4)), (RequestId(2), VehicleId(9))]);
    }

    #[test]
    fn empty_pool() {
        let net = grid(3);
        let c = PathCache::new(&net);
        assert!(greedy_assign(&[], &[ride(&c, 1, 0.0, 0, 1)], &c).is_empty());
    }
}
