use alloc::vec::Vec;

use super::{route_is_feasible, time_route, Limits, Ride, VehiclePlan, REL_TOL};
use crate::network::TravelOracle;
use crate::VehicleId;

/// The cheapest feasible place to slot a request into the fleet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub vehicle: VehicleId,
    /// Positions of the pickup and drop-off in the vehicle's updated stop list.
    pub pickup_index: usize,
    pub dropoff_index: usize,
    /// Growth of the vehicle's planned distance, metres.
    pub added_distance_m: f64,
    /// Pickup time minus request time, seconds.
    pub predicted_wait_s: f64,
    /// Planned on-board distance of the new passenger, metres.
    pub predicted_ride_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InsertionResult {
    Accepted(Insertion),
    Rejected,
}

impl InsertionResult {
    pub fn accepted(&self) -> Option<&Insertion> {
        match self {
            InsertionResult::Accepted(i) => Some(i),
            InsertionResult::Rejected => None,
        }
    }
}

/// Dial-a-ride insertion for a dedicated fleet.
///
/// Every `(pickup, drop-off)` position pair in every vehicle's remaining
/// schedule is tried. An insertion is feasible when every pickup on the new
/// route (the new one and those already promised) happens within `max_wait_s`
/// of its request, every passenger's on-board distance stays within
/// `max_detour` times its direct distance, and the seat count is never
/// exceeded. The feasible insertion adding the least planned distance is
/// chosen; ties go to the lower vehicle id, then the earlier pickup position,
/// then the earlier drop-off position. No feasible insertion means rejection.
pub fn darp_insert(
    fleet: &[VehiclePlan],
    ride: &Ride,
    max_detour: f64,
    max_wait_s: f64,
    oracle: &impl TravelOracle,
) -> InsertionResult {
    let mut order: Vec<&VehiclePlan> = fleet.iter().collect();
    order.sort_by_key(|p| p.id);
    let mut best: Option<Insertion> = None;
    for plan in order {
        let limits = Limits { max_detour, max_wait_s: Some(max_wait_s), capacity: plan.capacity };
        let Some(base) = time_route(plan, &plan.stops, oracle) else { continue };
        let n = plan.stops.len();
        for pi in 0..=n {
            for di in pi + 1..=n + 1 {
                let stops = plan.with_insertion(*ride, pi, di);
                let Some(timing) = time_route(plan, &stops, oracle) else { continue };
                if !route_is_feasible(plan, &stops, &timing, &limits) {
                    continue;
                }
                let added = timing.distance_m - base.distance_m;
                let better = match &best {
                    None => true,
                    Some(b) => added < b.added_distance_m - REL_TOL * b.added_distance_m.abs().max(1.0),
                };
                if better {
                    let (pick_t, pick_odo) = timing.arrivals[pi];
                    let (_, drop_odo) = timing.arrivals[di];
                    best = Some(Insertion {
                        vehicle: plan.id,
                        pickup_index: pi,
                        dropoff_index: di,
                        added_distance_m: added,
                        predicted_wait_s: pick_t - ride.request_time_s,
                        predicted_ride_m: drop_odo - pick_odo,
                    });
                }
            }
        }
    }
    best.map_or(InsertionResult::Rejected, InsertionResult::Accepted)
}
