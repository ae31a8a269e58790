use crate::math::mean;
use alloc::vec::Vec;

use super::{TripOutcome, TripRecord, VehicleLog};

/// Aggregate performance of a run or of one service within it.
///
/// Travel-time and length averages are over served trips only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub requests: usize,
    pub served: usize,
    pub rejected: usize,
    pub waiting_at_horizon: usize,
    pub avg_walk_min: f64,
    pub avg_wait_min: f64,
    pub avg_ivtt_min: f64,
    pub avg_trip_km: f64,
    /// Sum of served on-board trip lengths, km.
    pub passenger_km: f64,
    /// Sum of direct origin–destination distances of served trips, km.
    pub served_direct_km: f64,
    /// Fleet distance, km per day.
    pub total_km: f64,
    pub vehicle_hours: f64,
    pub operating_hours: f64,
    /// Vehicle-hours divided by operating hours.
    pub avg_vehicles: f64,
    /// Time-weighted passengers aboard per in-service vehicle.
    pub avg_occupancy: f64,
}

impl Summary {
    pub fn served_fraction(&self) -> f64 {
        if self.requests == 0 {
            1.0
        } else {
            self.served as f64 / self.requests as f64
        }
    }

    /// Fleet km per served passenger; `None` when nobody was served.
    pub fn vkm_per_passenger(&self) -> Option<f64> {
        (self.served > 0).then(|| self.total_km / self.served as f64)
    }
}

/// Aggregates trip and fleet logs. `operating_hours` is the service's daily
/// span used to turn vehicle-hours into an average fleet.
pub fn summarize(trips: &[TripRecord], fleet: &[VehicleLog], operating_hours: f64) -> Summary {
    let served: Vec<&TripRecord> = trips.iter().filter(|t| t.outcome == TripOutcome::Served).collect();
    let collect = |f: fn(&TripRecord) -> Option<f64>| -> Vec<f64> { served.iter().filter_map(|t| f(t)).collect() };
    let walk = collect(|t| t.walk_min);
    let wait = collect(|t| t.wait_min);
    let ivtt = collect(|t| t.ivtt_min);
    let length = collect(|t| t.length_km);
    let service_s: f64 = fleet.iter().map(|v| v.service_s).sum();
    let pax_s: f64 = fleet.iter().map(|v| v.occupancy_pax_s).sum();
    let vehicle_hours = service_s / 3600.0;
    Summary {
        requests: trips.len(),
        served: served.len(),
        rejected: trips.iter().filter(|t| matches!(t.outcome, TripOutcome::Rejected(_))).count(),
        waiting_at_horizon: trips.iter().filter(|t| t.outcome == TripOutcome::WaitingAtHorizon).count(),
        avg_walk_min: mean(&walk),
        avg_wait_min: mean(&wait),
        avg_ivtt_min: mean(&ivtt),
        avg_trip_km: mean(&length),
        passenger_km: length.iter().sum(),
        served_direct_km: served.iter().map(|t| t.direct_m.unwrap_or(0.0) / 1000.0).sum(),
        total_km: fleet.iter().map(|v| v.km).sum(),
        vehicle_hours,
        operating_hours,
        avg_vehicles: if operating_hours > 0.0 { vehicle_hours / operating_hours } else { 0.0 },
        avg_occupancy: if service_s > 0.0 { pax_s / service_s } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::ServiceTag;
    use crate::{NodeId, RequestId, VehicleId};

    fn served(id: u32, wait: f64) -> TripRecord {
        TripRecord {
            request: RequestId(id),
            mode: ServiceTag::Crowdsourced,
            outcome: TripOutcome::Served,
            request_time_s: 0.0,
            origin: NodeId(0),
            destination: NodeId(1),
            origin_zone: None,
            destination_zone: None,
            direct_m: Some(1000.0),
            vehicle: Some(VehicleId(0)),
            pickup_time_s: Some(wait * 60.0),
            dropoff_time_s: Some(wait * 60.0 + 60.0),
            walk_min: Some(0.0),
            wait_min: Some(wait),
            ivtt_min: Some(1.0),
            length_km: Some(1.0),
        }
    }

    #[test]
    fn mean_wait() {
        let s = summarize(&[served(1, 4.0), served(2, 8.0)], &[], 24.0);
        assert_eq!(s.avg_wait_min, 6.0);
        assert_eq!(s.served, 2);
        assert_eq!(s.served_fraction(), 1.0);
    }

    #[test]
    fn occupancy_is_time_weighted() {
        // one passenger for 1 h of a 2 h service
        let v = VehicleLog {
            id: VehicleId(0),
            mode: ServiceTag::Dedicated,
            service_s: 7200.0,
            km: 10.0,
            occupancy_pax_s: 3600.0,
        };
        let s = summarize(&[], &[v], 2.0);
        assert_eq!(s.avg_occupancy, 0.5);
        assert_eq!(s.avg_vehicles, 1.0);
        assert_eq!(s.vkm_per_passenger(), None);
    }

    #[test]
    fn empty_is_zero() {
        let s = summarize(&[], &[], 0.0);
        assert_eq!(s.avg_wait_min, 0.0);
        assert_eq!(s.total_km, 0.0);
        assert_eq!(s.avg_vehicles, 0.0);
    }
}
