use alloc::vec::Vec;

use super::{
    route_is_feasible, time_route, Limits, Ride, StopAction, VehiclePlan, REL_TOL, SHARED_MAX_REQUESTS,
};
use crate::network::TravelOracle;
use crate::{RequestId, VehicleId};

/// A Shared Greedy decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedMatch {
    pub request: RequestId,
    pub vehicle: VehicleId,
    /// Positions of the new pickup and drop-off in the vehicle's updated stop list.
    pub pickup_index: usize,
    pub dropoff_index: usize,
    pub added_distance_m: f64,
    /// `true` when the vehicle already carried or was heading to another request.
    pub pooled: bool,
}

/// Shared Greedy matching over the queue, first come first served.
///
/// `vehicles` are the accepting vehicles of the fleet. Each request may go to
/// an idle vehicle (as in greedy assignment) or be picked up by a vehicle
/// serving exactly one other request, on its way to that passenger's
/// destination, provided both passengers stay within `max_detour` times their
/// direct distance. The host with the least added distance wins, lowest
/// vehicle id on ties. Decisions are applied to local copies of the plans, so
/// a vehicle assigned early in the queue can host a later request.
pub fn shared_greedy_match(
    vehicles: &[VehiclePlan],
    queue: &[Ride],
    max_detour: f64,
    oracle: &impl TravelOracle,
) -> Vec<SharedMatch> {
    let mut plans: Vec<VehiclePlan> = vehicles.to_vec();
    plans.sort_by_key(|p| p.id);
    let limits = Limits { max_detour, max_wait_s: None, capacity: super::VEHICLE_CAPACITY };
    let mut out = Vec::new();
    for ride in queue {
        let mut best: Option<(usize, SharedMatch)> = None;
        for (vi, plan) in plans.iter().enumerate() {
            let requests = plan.request_count();
            if requests >= SHARED_MAX_REQUESTS {
                continue;
            }
            let Some(base) = time_route(plan, &plan.stops, oracle) else { continue };
            let (lo, hi) = if requests == 0 {
                (0, 0)
            } else {
                // after the host's pending pickup (if any), no later than its drop-off
                let first_pick = plan.stops.iter().position(|s| s.action == StopAction::Pickup);
                let drop = plan.stops.iter().position(|s| s.action == StopAction::Dropoff).unwrap_or(plan.stops.len());
                (first_pick.map_or(0, |p| p + 1), drop)
            };
            for pi in lo..=hi {
                for di in pi + 1..=plan.stops.len() + 1 {
                    let stops = plan.with_insertion(*ride, pi, di);
                    let Some(timing) = time_route(plan, &stops, oracle) else { continue };
                    if !route_is_feasible(plan, &stops, &timing, &limits) {
                        continue;
                    }
                    let added = timing.distance_m - base.distance_m;
                    let better = match &best {
                        None => true,
                        Some((_, b)) => added < b.added_distance_m - REL_TOL * b.added_distance_m.abs().max(1.0),
                    };
                    if better {
                        best = Some((
                            vi,
                            SharedMatch {
                                request: ride.id,
                                vehicle: plan.id,
                                pickup_index: pi,
                                dropoff_index: di,
                                added_distance_m: added,
                                pooled: requests > 0,
                            },
                        ));
                    }
                }
            }
        }
        if let Some((vi, m)) = best {
            let plan = &mut plans[vi];
            plan.stops = plan.with_insertion(*ride, m.pickup_index, m.dropoff_index);
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{Onboard, Stop};
    use super::*;
    use crate::network::PathCache;
    use crate::NodeId;
    use alloc::vec;

    #[test]
    fn empty_system_behaves_like_greedy() {
        let net = grid(5);
        let c = PathCache::new(&net);
        let r = ride(&c, 1, 0.0, 0, 4);
        let plans = vec![
            VehiclePlan::idle(VehicleId(1), NodeId(2), 0.0),
            VehiclePlan::idle(VehicleId(2), NodeId(1), 0.0),
        ];
        let m = shared_greedy_match(&plans, &[r], 2.0, &c);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].vehicle, VehicleId(2));
        assert_eq!((m[0].pickup_index, m[0].dropoff_index), (0, 1));
        assert_eq!(m[0].added_distance_m, 100.0 + 400.0);
        assert!(!m[0].pooled);
    }

    fn carrying(c: &PathCache, at: u32, first: Ride) -> VehiclePlan {
        let _ = c;
        VehiclePlan {
            onboard: vec![Onboard { ride: first, pickup_odometer_m: 0.0 }],
            stops: vec![Stop::dropoff(first)],
            ..VehiclePlan::idle(VehicleId(1), NodeId(at), 0.0)
        }
    }

    #[test]
    fn colinear_pickup_is_pooled_for_free() {
        // 5x5 grid; passenger 1 rides 0 -> 4 along the bottom row.
        let net = grid(5);
        let c = PathCache::new(&net);
        let first = ride(&c, 1, 0.0, 0, 4);
        let host = carrying(&c, 0, first);
        let second = ride(&c, 2, 0.0, 1, 3);
        let m = shared_greedy_match(&[host], &[second], 2.0, &c);
        assert_eq!(m.len(), 1);
        assert!(m[0].pooled);
        assert_eq!(m[0].added_distance_m, 0.0);
    }

    #[test]
    fn detour_over_limit_is_rejected() {
        // Passenger 1 rides 0 -> 4 (400 m). Picking up at node 15 first makes
        // either ordering 1000 m for passenger 1, a ratio of 2.5.
        let net = grid(5);
        let c = PathCache::new(&net);
        let first = ride(&c, 1, 0.0, 0, 4);
        let host = carrying(&c, 0, first);
        let second = ride(&c, 2, 0.0, 15, 19);
        assert_eq!(c.distance(NodeId(0), NodeId(15)).unwrap() + c.distance(NodeId(15), NodeId(4)).unwrap(), 1000.0);
        assert!(shared_greedy_match(&[host], &[second], 2.0, &c).is_empty());
    }

    #[test]
    fn full_vehicle_cannot_host() {
        let net = grid(5);
        let c = PathCache::new(&net);
        let a = ride(&c, 1, 0.0, 0, 4);
        let b = ride(&c, 2, 0.0, 1, 4);
        let mut host = carrying(&c, 0, a);
        host.onboard.push(Onboard { ride: b, pickup_odometer_m: 0.0 });
        host.stops.push(Stop::dropoff(b));
        assert!(shared_greedy_match(&[host], &[ride(&c, 3, 0.0, 2, 4)], 2.0, &c).is_empty());
    }
}
