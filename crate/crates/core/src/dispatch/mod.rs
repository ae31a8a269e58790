//! Matching and dispatching policies.
//!
//! All dispatchers are pure functions over planning snapshots
//! ([`VehiclePlan`]) and a [`TravelOracle`]; the engine owns the vehicles and
//! applies the decisions.
//!
//! Distances are in metres and times in seconds throughout. Detour is
//! measured on distance: a passenger's on-board distance divided by the
//! direct shortest-path distance of the ride.

mod darp;
mod frt;
mod greedy;
mod hybrid;
mod shared;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::network::TravelOracle;
use crate::{Error, NodeId, RequestId, Result, VehicleId};

pub use darp::{darp_insert, Insertion, InsertionResult};
pub use frt::{frt_board, BoardingPlan, Direction, FrtLoads, Ineligible, RouteSpec, Timetable, WALK_SPEED_MPS};
pub use greedy::greedy_assign;
pub use hybrid::{hybrid_route, HybridMode, ServiceTag};
pub use shared::{shared_greedy_match, SharedMatch};

/// Seats per vehicle, all services.
pub const VEHICLE_CAPACITY: u32 = 8;
pub const DEFAULT_MAX_DETOUR: f64 = 2.0;
pub const DEFAULT_MAX_WAIT_S: f64 = 1800.0;
/// Concurrent requests a crowdsourced (Shared Greedy) vehicle may carry.
pub const SHARED_MAX_REQUESTS: usize = 2;

/// Slack on detour, wait and tie comparisons.
pub(crate) const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StopAction {
    Pickup,
    Dropoff,
}

/// The part of a request a dispatcher reasons about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ride {
    pub id: RequestId,
    pub request_time_s: f64,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Direct shortest-path distance origin → destination.
    pub direct_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stop {
    pub node: NodeId,
    pub action: StopAction,
    pub ride: Ride,
}

impl Stop {
    pub fn pickup(ride: Ride) -> Self {
        Stop { node: ride.origin, action: StopAction::Pickup, ride }
    }

    pub fn dropoff(ride: Ride) -> Self {
        Stop { node: ride.destination, action: StopAction::Dropoff, ride }
    }
}

/// A passenger already in the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Onboard {
    pub ride: Ride,
    pub pickup_odometer_m: f64,
}

/// Planning snapshot of one vehicle.
///
/// The anchor is the first node at which the vehicle can change its route,
/// with the time it gets there and its odometer reading on arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct VehiclePlan {
    pub id: VehicleId,
    pub capacity: u32,
    pub anchor: NodeId,
    pub anchor_time_s: f64,
    pub anchor_odometer_m: f64,
    pub onboard: Vec<Onboard>,
    pub stops: Vec<Stop>,
}

impl VehiclePlan {
    pub fn idle(id: VehicleId, at: NodeId, time_s: f64) -> Self {
        VehiclePlan {
            id,
            capacity: VEHICLE_CAPACITY,
            anchor: at,
            anchor_time_s: time_s,
            anchor_odometer_m: 0.0,
            onboard: Vec::new(),
            stops: Vec::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.onboard.is_empty() && self.stops.is_empty()
    }

    /// Distinct requests aboard or scheduled.
    pub fn request_count(&self) -> usize {
        self.onboard.len() + self.stops.iter().filter(|s| s.action == StopAction::Pickup).count()
    }

    /// Stop list after inserting `ride`'s pickup at `pickup_index` and its
    /// drop-off at `dropoff_index` (both positions in the resulting list).
    pub fn with_insertion(&self, ride: Ride, pickup_index: usize, dropoff_index: usize) -> Vec<Stop> {
        let mut stops = self.stops.clone();
        stops.insert(pickup_index, Stop::pickup(ride));
        stops.insert(dropoff_index, Stop::dropoff(ride));
        stops
    }
}

/// Constraints a route must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_detour: f64,
    /// Checked on every pickup in the route when set.
    pub max_wait_s: Option<f64>,
    pub capacity: u32,
}

/// Timing of a candidate route.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTiming {
    pub distance_m: f64,
    /// Arrival time and odometer at each stop.
    pub arrivals: Vec<(f64, f64)>,
}

/// Drives `stops` from the plan's anchor. `None` if a leg is unroutable.
pub fn time_route(plan: &VehiclePlan, stops: &[Stop], oracle: &impl TravelOracle) -> Option<RouteTiming> {
    let mut at = plan.anchor;
    let mut t = plan.anchor_time_s;
    let mut odo = plan.anchor_odometer_m;
    let mut arrivals = Vec::with_capacity(stops.len());
    for s in stops {
        if s.node != at {
            t += oracle.travel_time(at, s.node)?;
            odo += oracle.distance(at, s.node)?;
            at = s.node;
        }
        arrivals.push((t, odo));
    }
    Some(RouteTiming { distance_m: odo - plan.anchor_odometer_m, arrivals })
}

/// Whether a timed route respects capacity, wait and detour limits for every
/// passenger it touches.
pub fn route_is_feasible(plan: &VehiclePlan, stops: &[Stop], timing: &RouteTiming, limits: &Limits) -> bool {
    let mut load = plan.onboard.len() as u32;
    if load > limits.capacity {
        return false;
    }
    let mut picked: BTreeMap<RequestId, f64> =
        plan.onboard.iter().map(|o| (o.ride.id, o.pickup_odometer_m)).collect();
    for (s, &(t, odo)) in stops.iter().zip(&timing.arrivals) {
        match s.action {
            StopAction::Pickup => {
                load += 1;
                if load > limits.capacity {
                    return false;
                }
                if let Some(max_wait) = limits.max_wait_s {
                    if t - s.ride.request_time_s > max_wait * (1.0 + REL_TOL) {
                        return false;
                    }
                }
                picked.insert(s.ride.id, odo);
            }
            StopAction::Dropoff => {
                let Some(start) = picked.remove(&s.ride.id) else {
                    return false;
                };
                load -= 1;
                if !within_detour(odo - start, s.ride.direct_m, limits.max_detour) {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn within_detour(onboard_m: f64, direct_m: f64, max_detour: f64) -> bool {
    onboard_m <= max_detour * direct_m * (1.0 + REL_TOL) + 1e-6
}

/// Dispatch policy of a service.
#[derive(Debug, Clone, PartialEq)]
pub enum DispatchPolicy {
    /// Nearest idle vehicle, first come first served, one request per vehicle.
    GreedyExclusive,
    /// Greedy plus pooling of a second request into single-occupancy vehicles.
    SharedGreedy { max_detour: f64 },
    /// Dedicated fleet, cheapest feasible insertion.
    Darp { max_detour: f64, max_wait_s: f64 },
    FixedRoute(RouteSpec),
}

impl DispatchPolicy {
    pub fn shared_default() -> Self {
        DispatchPolicy::SharedGreedy { max_detour: DEFAULT_MAX_DETOUR }
    }

    pub fn darp_default() -> Self {
        DispatchPolicy::Darp { max_detour: DEFAULT_MAX_DETOUR, max_wait_s: DEFAULT_MAX_WAIT_S }
    }

    pub fn validate(&self) -> Result<()> {
        let detour_ok = |d: f64| {
            if d.is_finite() && d >= 1.0 {
                Ok(())
            } else {
                Err(Error::arg(format!("max detour must be >= 1, got {d}")))
            }
        };
        match self {
            DispatchPolicy::GreedyExclusive => Ok(()),
            DispatchPolicy::SharedGreedy { max_detour } => detour_ok(*max_detour),
            DispatchPolicy::Darp { max_detour, max_wait_s } => {
                detour_ok(*max_detour)?;
                if max_wait_s.is_finite() && *max_wait_s > 0.0 {
                    Ok(())
                } else {
                    Err(Error::arg(format!("max wait must be > 0, got {max_wait_s}")))
                }
            }
            DispatchPolicy::FixedRoute(route) => route.validate(),
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::network::{generate_grid, Network};

    pub fn grid(n: usize) -> Network {
        generate_grid(n, n, 100.0, 10.0, 0).unwrap()
    }

    pub fn ride(oracle: &impl TravelOracle, id: u32, t: f64, o: u32, d: u32) -> Ride {
        Ride {
            id: RequestId(id),
            request_time_s: t,
            origin: NodeId(o),
            destination: NodeId(d),
            direct_m: oracle.distance(NodeId(o), NodeId(d)).unwrap(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::network::PathCache;

    #[test]
    fn policy_validation() {
        assert!(DispatchPolicy::darp_default().validate().is_ok());
        assert!(DispatchPolicy::SharedGreedy { max_detour: 0.5 }.validate().is_err());
        assert!(DispatchPolicy::Darp { max_detour: 2.0, max_wait_s: 0.0 }.validate().is_err());
    }

    #[test]
    fn timing_and_feasibility() {
        let net = grid(5);
        let c = PathCache::new(&net);
        let r = ride(&c, 1, 0.0, 1, 3);
        let plan = VehiclePlan::idle(VehicleId(0), NodeId(0), 0.0);
        let stops = plan.with_insertion(r, 0, 1);
        let timing = time_route(&plan, &stops, &c).unwrap();
        assert_eq!(timing.distance_m, 300.0);
        assert_eq!(timing.arrivals, alloc::vec![(10.0, 100.0), (30.0, 300.0)]);
        let limits = Limits { max_detour: 2.0, max_wait_s: Some(5.0), capacity: 8 };
        assert!(!route_is_feasible(&plan, &stops, &timing, &limits));
        let limits = Limits { max_wait_s: Some(10.0), ..limits };
        assert!(route_is_feasible(&plan, &stops, &timing, &limits));
        let limits = Limits { capacity: 0, ..limits };
        assert!(!route_is_feasible(&plan, &stops, &timing, &limits));
    }
}
