//! Fleet greenhouse-gas footprint.
//!
//! Gasoline vehicles emit a fixed mass per km. Electric vehicles emit
//! indirectly through the grid: consumption (kWh/km) times grid intensity
//! (g/kWh). Electrifying part of a fleet changes neither its size nor the
//! distance it drives, so a partly electric fleet is a linear mix of the two.
//!
//! The transit and private per-km factors are calibration defaults, not
//! measured values: together with 25 g/kWh and 0.18 kWh/km they yield a
//! 98.1% saving for a fully electric fleet.

use alloc::format;
use alloc::vec::Vec;

use crate::demand::DemandSet;
use crate::engine::Summary;
use crate::network::TravelOracle;
use crate::{Error, RequestId, Result};

/// Fractions of the fleet that are electric, as analysed by default.
pub const DEFAULT_ELECTRIFICATION_LEVELS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

const GRAMS_PER_TONNE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionFactors {
    /// Gasoline transit vehicle, tonnes per vehicle-km.
    pub ghg_km_transit: f64,
    /// Private car, tonnes per vehicle-km.
    pub ghg_km_private: f64,
    /// Electric consumption, kWh per km.
    pub ev_kwh_per_km: f64,
    /// Grid intensity, grams per kWh.
    pub grid_g_per_kwh: f64,
}

impl Default for EmissionFactors {
    fn default() -> Self {
        EmissionFactors {
            ghg_km_transit: 0.000237,
            ghg_km_private: 0.000170,
            ev_kwh_per_km: 0.18,
            grid_g_per_kwh: 25.0,
        }
    }
}

impl EmissionFactors {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("ghg_km_transit", self.ghg_km_transit),
            ("ghg_km_private", self.ghg_km_private),
            ("ev_kwh_per_km", self.ev_kwh_per_km),
            ("grid_g_per_kwh", self.grid_g_per_kwh),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Yearly tonnes from a gasoline fleet driving `km_per_day`.
pub fn total_ghg(ghg_km: f64, km_per_day: f64) -> f64 {
    ghg_km * km_per_day * 365.0
}

/// Yearly tonnes from an electric fleet driving `km_per_day`.
pub fn ev_ghg(grid_g_per_kwh: f64, kwh_per_km: f64, km_per_day: f64) -> f64 {
    grid_g_per_kwh * kwh_per_km * km_per_day * 365.0 / GRAMS_PER_TONNE
}

/// Yearly tonnes from a transit fleet with a fraction `level` electric.
pub fn fleet_ghg_at_level(level: f64, factors: &EmissionFactors, km_per_day: f64) -> f64 {
    (1.0 - level) * total_ghg(factors.ghg_km_transit, km_per_day)
        + level * ev_ghg(factors.grid_g_per_kwh, factors.ev_kwh_per_km, km_per_day)
}

/// Fraction of gasoline-fleet emissions saved at electrification `level`.
pub fn reduction_at_level(level: f64, factors: &EmissionFactors) -> f64 {
    let ev_ratio = factors.grid_g_per_kwh * factors.ev_kwh_per_km / GRAMS_PER_TONNE / factors.ghg_km_transit;
    level * (1.0 - ev_ratio)
}

pub fn validate_level(level: f64) -> Result<()> {
    if (0.0..=1.0).contains(&level) {
        Ok(())
    } else {
        Err(Error::arg(format!("electrification level must be in [0, 1], got {level}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionsReport {
    pub electrification_level: f64,
    pub total_km_per_day: f64,
    pub total_yearly_ghg_t: f64,
    /// `None` when nobody was served.
    pub vkm_per_passenger: Option<f64>,
    /// Grams per passenger-km on board; `None` without passenger-km.
    pub ghg_g_per_pax_km: Option<f64>,
}

fn report(level: f64, km_per_day: f64, ghg_t: f64, served: usize, passenger_km: f64) -> EmissionsReport {
    EmissionsReport {
        electrification_level: level,
        total_km_per_day: km_per_day,
        total_yearly_ghg_t: ghg_t,
        vkm_per_passenger: (served > 0).then(|| km_per_day / served as f64),
        ghg_g_per_pax_km: (passenger_km > 0.0).then(|| ghg_t * GRAMS_PER_TONNE / (passenger_km * 365.0)),
    }
}

/// Footprint of a simulated transit service at electrification `level`.
/// Passenger-km are the on-board trip lengths, detours included.
pub fn per_passenger_metrics(summary: &Summary, factors: &EmissionFactors, level: f64) -> Result<EmissionsReport> {
    validate_level(level)?;
    let ghg = fleet_ghg_at_level(level, factors, summary.total_km);
    Ok(report(level, summary.total_km, ghg, summary.served, summary.passenger_km))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub report: EmissionsReport,
    /// Requests whose destination cannot be reached from their origin.
    pub excluded: Vec<RequestId>,
}

/// Every request driven alone in a private car along its shortest path.
pub fn baseline_private(demand: &DemandSet, oracle: &impl TravelOracle, factors: &EmissionFactors) -> BaselineReport {
    let mut km = 0.0;
    let mut drivers = 0;
    let mut excluded = Vec::new();
    for r in demand.requests() {
        match oracle.distance(r.origin, r.destination) {
            Some(m) => {
                km += m / 1000.0;
                drivers += 1;
            }
            None => excluded.push(r.id),
        }
    }
    let ghg = total_ghg(factors.ghg_km_private, km);
    BaselineReport { report: report(0.0, km, ghg, drivers, km), excluded }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::RideRequest;
    use crate::network::{generate_grid, PathCache};
    use alloc::vec;

    #[test]
    fn yearly_totals() {
        assert!((total_ghg(0.000237, 1000.0) - 86.505).abs() < 1e-9);
        assert!((ev_ghg(25.0, 0.18, 1000.0) - 1.6425).abs() < 1e-12);
        assert_eq!(total_ghg(0.000237, 0.0), 0.0);
        assert_eq!(ev_ghg(25.0, 0.0, 1000.0), 0.0);
    }

    #[test]
    fn electrification_savings() {
        let f = EmissionFactors::default();
        let base = fleet_ghg_at_level(0.0, &f, 1000.0);
        let full = fleet_ghg_at_level(1.0, &f, 1000.0);
        let fifth = fleet_ghg_at_level(0.2, &f, 1000.0);
        assert!((1.0 - full / base - 0.981).abs() < 5e-4);
        assert!((1.0 - fifth / base - 0.196).abs() < 5e-4);
        assert!((reduction_at_level(0.2, &f) - (1.0 - fifth / base)).abs() < 1e-12);
    }

    #[test]
    fn per_passenger() {
        let s = Summary { served: 100, total_km: 500.0, passenger_km: 400.0, ..Summary::default() };
        let r = per_passenger_metrics(&s, &EmissionFactors::default(), 0.0).unwrap();
        assert_eq!(r.vkm_per_passenger, Some(5.0));
        assert!((r.ghg_g_per_pax_km.unwrap() - 237.0 * 500.0 / 400.0).abs() < 1e-9);
        let none = per_passenger_metrics(&Summary::default(), &EmissionFactors::default(), 0.0).unwrap();
        assert_eq!(none.vkm_per_passenger, None);
        assert!(per_passenger_metrics(&s, &EmissionFactors::default(), 1.5).is_err());
    }

    #[test]
    fn baseline_is_direct_driving() {
        let net = generate_grid(3, 3, 500.0, 10.0, 0).unwrap();
        let cache = PathCache::new(&net);
        let d = DemandSet::new(vec![RideRequest::new(1, 0.0, 0, 8), RideRequest::new(2, 5.0, 2, 1)]).unwrap();
        let f = EmissionFactors::default();
        let b = baseline_private(&d, &cache, &f);
        assert!(b.excluded.is_empty());
        assert!((b.report.total_km_per_day - 2.5).abs() < 1e-12);
        assert!((b.report.ghg_g_per_pax_km.unwrap() - f.ghg_km_private * 1e6).abs() < 1e-9);
    }
}
