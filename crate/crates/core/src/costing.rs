//! Annual cost model.
//!
//! Money is carried as [`Cad`], an exact count of cents. Formulas are
//! evaluated in `f64` and each result is rounded to the cent once, so sums of
//! components are exact.
//!
//! - crowdsourced services pay a per-trip price to the ride-hailing operator
//!   and collect the fare; they own no vehicles;
//! - dedicated fleets pay per vehicle-hour and own their vehicles;
//! - fixed routes pay per vehicle-km plus driver wages and own their vehicles.
//!
//! Capital cost is the plain purchase price of the fleet, not annualized.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::math::round;
use crate::{Error, Result};

/// Canadian dollars held as integer cents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cad(i64);

impl Cad {
    pub const ZERO: Cad = Cad(0);

    pub fn from_cents(cents: i64) -> Self {
        Cad(cents)
    }

    /// Rounds to the nearest cent, halves away from zero.
    pub fn from_f64(dollars: f64) -> Self {
        Cad(round(dollars * 100.0) as i64)
    }

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Cad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl Add for Cad {
    type Output = Cad;
    fn add(self, rhs: Cad) -> Cad {
        Cad(self.0 + rhs.0)
    }
}

impl Sub for Cad {
    type Output = Cad;
    fn sub(self, rhs: Cad) -> Cad {
        Cad(self.0 - rhs.0)
    }
}

impl Neg for Cad {
    type Output = Cad;
    fn neg(self) -> Cad {
        Cad(-self.0)
    }
}

impl core::iter::Sum for Cad {
    fn sum<I: Iterator<Item = Cad>>(iter: I) -> Cad {
        iter.fold(Cad::ZERO, Add::add)
    }
}

/// Which daily distance the fixed-route per-km term multiplies by the fleet size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VkmBasis {
    /// Average km per vehicle per day.
    #[default]
    PerVehicle,
    /// Whole-fleet km per day.
    FleetTotal,
}

/// Cost inputs in CAD. Defaults are the Innisfil (Ontario) values.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParameters {
    /// Ride-hailing base fee per exclusive trip.
    pub fixed_fee_exclusive: f64,
    /// Ride-hailing base fee per pooled trip.
    pub fixed_fee_shared: f64,
    /// Per in-vehicle minute.
    pub beta_time: f64,
    /// Per trip km.
    pub beta_length: f64,
    /// Flat fare paid by the passenger.
    pub fare: f64,
    pub vehicle_price: f64,
    /// Dedicated fleet, per vehicle-hour.
    pub oc_hour: f64,
    /// Fixed route, per vehicle-km.
    pub oc_km: f64,
    /// Fixed-route driver wage, per hour.
    pub wage: f64,
    /// Yearly overhead of an agency-run service.
    pub other_costs: f64,
    pub frt_vkm: VkmBasis,
}

impl Default for CostParameters {
    fn default() -> Self {
        CostParameters {
            fixed_fee_exclusive: 5.25,
            fixed_fee_shared: 4.25,
            beta_time: 0.18,
            beta_length: 0.81,
            fare: 4.0,
            vehicle_price: 41_050.0,
            oc_hour: 83.95,
            oc_km: 0.73,
            wage: 15.0,
            other_costs: 200_000.0,
            frt_vkm: VkmBasis::PerVehicle,
        }
    }
}

impl CostParameters {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("fixed_fee_exclusive", self.fixed_fee_exclusive),
            ("fixed_fee_shared", self.fixed_fee_shared),
            ("beta_time", self.beta_time),
            ("beta_length", self.beta_length),
            ("fare", self.fare),
            ("vehicle_price", self.vehicle_price),
            ("oc_hour", self.oc_hour),
            ("oc_km", self.oc_km),
            ("wage", self.wage),
            ("other_costs", self.other_costs),
        ];
        for (name, v) in fields {
            non_negative(name, v)?;
        }
        Ok(())
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// Daily averages of a crowdsourced service, over served trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrowdsourcedStats {
    pub ivtt_min: f64,
    pub trip_km: f64,
    pub served_per_day: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedicatedStats {
    pub avg_vehicles: f64,
    pub operating_hours: f64,
    pub served_per_day: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrtStats {
    pub vehicles: u32,
    /// Whole-fleet km per day.
    pub fleet_km_per_day: f64,
    pub operating_hours: f64,
    pub served_per_day: f64,
}

impl FrtStats {
    fn vkm(&self, basis: VkmBasis) -> f64 {
        match basis {
            VkmBasis::FleetTotal => self.fleet_km_per_day,
            VkmBasis::PerVehicle if self.vehicles == 0 => 0.0,
            VkmBasis::PerVehicle => self.fleet_km_per_day / self.vehicles as f64,
        }
    }
}

/// Purchase price of the fleet.
pub fn capital_cost(vehicles: u32, vehicle_price: f64) -> Result<Cad> {
    non_negative("vehicle_price", vehicle_price)?;
    Ok(Cad::from_f64(vehicles as f64 * vehicle_price))
}

/// Agency cost of one crowdsourced trip: operator fee minus fare. Negative
/// means the fare more than covers it.
pub fn crowdsourced_trip_cost(stats: &CrowdsourcedStats, params: &CostParameters, shared: bool) -> f64 {
    let fee = if shared { params.fixed_fee_shared } else { params.fixed_fee_exclusive };
    fee + params.beta_time * stats.ivtt_min + params.beta_length * stats.trip_km - params.fare
}

/// Yearly net operating cost of a crowdsourced service with operating costs
/// raised by `surge_pct` percent.
pub fn noc_crowdsourced(stats: &CrowdsourcedStats, params: &CostParameters, shared: bool, surge_pct: f64) -> Result<Cad> {
    non_negative("served_per_day", stats.served_per_day)?;
    non_negative("surge_pct", surge_pct)?;
    let base = crowdsourced_trip_cost(stats, params, shared) * stats.served_per_day * 365.0;
    Ok(Cad::from_f64(base * (1.0 + surge_pct / 100.0)))
}

/// Yearly net operating cost of a dedicated fleet.
pub fn noc_dedicated(stats: &DedicatedStats, params: &CostParameters) -> Cad {
    let daily = params.oc_hour * stats.avg_vehicles * stats.operating_hours - params.fare * stats.served_per_day;
    Cad::from_f64(daily * 365.0 + params.other_costs)
}

/// Yearly net operating cost of a fixed route.
pub fn noc_frt(stats: &FrtStats, params: &CostParameters) -> Cad {
    let n = stats.vehicles as f64;
    let daily = params.oc_km * n * stats.vkm(params.frt_vkm) + n * stats.operating_hours * params.wage
        - params.fare * stats.served_per_day;
    Cad::from_f64(daily * 365.0 + params.other_costs)
}

pub fn net_annual_cost(cc: Cad, noc: Cad) -> Cad {
    cc + noc
}

/// Cost of one service, or the sum over the services of a hybrid system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub cc: Cad,
    pub noc: Cad,
    pub nac: Cad,
    /// NAC per served trip over a year; `None` with no served trips.
    pub per_trip: Option<f64>,
    pub served_per_day: f64,
    /// Some crowdsourced component has a negative per-trip cost.
    pub negative_trip_cost: bool,
}

/// One service of a system with what its cost formula needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceCost {
    Crowdsourced { stats: CrowdsourcedStats, shared: bool },
    Dedicated { stats: DedicatedStats, fleet_size: u32 },
    FixedRoute(FrtStats),
}

impl ServiceCost {
    fn served_per_day(&self) -> f64 {
        match self {
            ServiceCost::Crowdsourced { stats, .. } => stats.served_per_day,
            ServiceCost::Dedicated { stats, .. } => stats.served_per_day,
            ServiceCost::FixedRoute(stats) => stats.served_per_day,
        }
    }
}

/// Sums each service's cost under its own formula. `surge_pct` applies to
/// crowdsourced components only.
pub fn system_cost(services: &[ServiceCost], params: &CostParameters, surge_pct: f64) -> Result<CostBreakdown> {
    params.validate()?;
    let mut cc = Cad::ZERO;
    let mut noc = Cad::ZERO;
    let mut negative = false;
    for s in services {
        match s {
            ServiceCost::Crowdsourced { stats, shared } => {
                negative |= crowdsourced_trip_cost(stats, params, *shared) < 0.0;
                noc = noc + noc_crowdsourced(stats, params, *shared, surge_pct)?;
            }
            ServiceCost::Dedicated { stats, fleet_size } => {
                cc = cc + capital_cost(*fleet_size, params.vehicle_price)?;
                noc = noc + noc_dedicated(stats, params);
            }
            ServiceCost::FixedRoute(stats) => {
                cc = cc + capital_cost(stats.vehicles, params.vehicle_price)?;
                noc = noc + noc_frt(stats, params);
            }
        }
    }
    let served: f64 = services.iter().map(ServiceCost::served_per_day).sum();
    let nac = net_annual_cost(cc, noc);
    Ok(CostBreakdown {
        cc,
        noc,
        nac,
        per_trip: per_trip_cost(nac, served),
        served_per_day: served,
        negative_trip_cost: negative,
    })
}

/// Yearly cost spread over yearly served trips.
pub fn per_trip_cost(nac: Cad, served_per_day: f64) -> Option<f64> {
    (served_per_day > 0.0).then(|| nac.as_f64() / (served_per_day * 365.0))
}

/// Surge levels applied to crowdsourced operating costs in the sensitivity runs.
pub const DEFAULT_SURGE_PCT: [f64; 4] = [0.0, 20.0, 40.0, 50.0];

/// Convenience for tables: each surge level with its cost.
pub fn surge_table(services: &[ServiceCost], params: &CostParameters, surges: &[f64]) -> Result<Vec<(f64, CostBreakdown)>> {
    surges.iter().map(|&s| Ok((s, system_cost(services, params, s)?))).collect()
}
