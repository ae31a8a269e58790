//! Discrete-event simulation of one service day.
//!
//! [`run_scenario`] plays a demand set against a [`SystemDesign`] on a
//! network and returns per-trip and per-vehicle logs, the processed event
//! log and aggregate summaries. Runs are deterministic for a given seed; the
//! seed only picks where vehicles first appear.
//!
//! Vehicles drive shortest paths between their scheduled stops. A vehicle can
//! change course at the next node it reaches, never mid-edge. Stops are served
//! instantly on arrival. Crowdsourced vehicles are dispatched whenever a
//! request arrives, a shift starts, one of them reaches a node, and on every
//! batch tick; dedicated requests are collected and inserted only on batch
//! ticks, every [`BATCH_INTERVAL_S`]. Fixed-route boardings are decided
//! analytically from the timetable when the request arrives.
//!
//! Shifts follow the hourly supply schedule: vehicle `i` of a fleet is on duty
//! during hour `h` when `i < hourly[h]`. A vehicle whose shift ends keeps
//! serving the stops already assigned to it but takes nothing new. No
//! assignment is made after the end of the day; crowdsourced requests still
//! queued then are reported as waiting at the horizon.

mod events;
mod summary;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::{DemandSet, RideRequest, SupplySchedule};
use crate::dispatch::{
    darp_insert, frt_board, greedy_assign, hybrid_route, shared_greedy_match, BoardingPlan, DispatchPolicy, FrtLoads,
    HybridMode, InsertionResult, Onboard, Ride, RouteSpec, ServiceTag, Stop, StopAction, Timetable, VehiclePlan,
    VEHICLE_CAPACITY,
};
use crate::network::{LegPoint, Network, PathCache, TravelOracle};
use crate::{Error, NodeId, RequestId, Result, VehicleId, ZoneId, HORIZON_S};

pub use events::{EventKind, SimEvent};
pub use summary::{summarize, Summary};

use events::EventQueue;

/// Spacing of batch dispatch ticks.
pub const BATCH_INTERVAL_S: f64 = 30.0;

/// Crowdsourced (ride-hailing) service.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdsourcedSpec {
    /// Shared Greedy when set, Greedy Exclusive otherwise.
    pub shared: bool,
    pub max_detour: f64,
    pub supply: SupplySchedule,
}

/// Dedicated fleet dispatched by insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct DedicatedSpec {
    pub max_detour: f64,
    pub max_wait_s: f64,
    pub supply: SupplySchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedRouteSpec {
    pub route: RouteSpec,
    pub vehicles: u32,
}

/// The transit services operating in a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemDesign {
    Crowdsourced(CrowdsourcedSpec),
    Dedicated(DedicatedSpec),
    FixedRoute(FixedRouteSpec),
    /// Fixed route where it works, crowdsourced for the rest.
    HybridFrt { frt: FixedRouteSpec, crowdsourced: CrowdsourcedSpec },
    /// Dedicated fleet inside the corridor during its hours, crowdsourced otherwise.
    HybridOdt { corridor: RouteSpec, dedicated: DedicatedSpec, crowdsourced: CrowdsourcedSpec },
}

impl SystemDesign {
    pub fn validate(&self) -> Result<()> {
        let crowd = |c: &CrowdsourcedSpec| {
            let policy = if c.shared {
                DispatchPolicy::SharedGreedy { max_detour: c.max_detour }
            } else {
                DispatchPolicy::GreedyExclusive
            };
            policy.validate()
        };
        let dedicated =
            |d: &DedicatedSpec| DispatchPolicy::Darp { max_detour: d.max_detour, max_wait_s: d.max_wait_s }.validate();
        let fixed = |f: &FixedRouteSpec| {
            f.route.validate()?;
            if f.vehicles == 0 {
                return Err(Error::arg("fixed route needs at least one vehicle"));
            }
            Ok(())
        };
        match self {
            SystemDesign::Crowdsourced(c) => crowd(c),
            SystemDesign::Dedicated(d) => dedicated(d),
            SystemDesign::FixedRoute(f) => fixed(f),
            SystemDesign::HybridFrt { frt, crowdsourced } => {
                fixed(frt)?;
                crowd(crowdsourced)
            }
            SystemDesign::HybridOdt { corridor, dedicated: d, crowdsourced } => {
                corridor.validate()?;
                dedicated(d)?;
                crowd(crowdsourced)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep a snapshot of every dedicated-fleet insertion decision.
    pub record_decisions: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripOutcome {
    Served,
    /// Refused, with a short machine-readable reason.
    Rejected(&'static str),
    /// Still queued for a crowdsourced vehicle when the day ended.
    WaitingAtHorizon,
}

impl TripOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            TripOutcome::Served => "served",
            TripOutcome::Rejected(_) => "rejected",
            TripOutcome::WaitingAtHorizon => "waiting_at_horizon",
        }
    }

    pub fn reason(self) -> Option<&'static str> {
        match self {
            TripOutcome::Rejected(r) => Some(r),
            _ => None,
        }
    }
}

/// What happened to one request. Durations are in minutes and lengths in km;
/// they are `None` where they do not apply (a rejected trip has no wait).
#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub request: RequestId,
    pub mode: ServiceTag,
    pub outcome: TripOutcome,
    pub request_time_s: f64,
    pub origin: NodeId,
    pub destination: NodeId,
    pub origin_zone: Option<ZoneId>,
    pub destination_zone: Option<ZoneId>,
    /// Shortest-path distance origin → destination, m.
    pub direct_m: Option<f64>,
    pub vehicle: Option<VehicleId>,
    pub pickup_time_s: Option<f64>,
    pub dropoff_time_s: Option<f64>,
    pub walk_min: Option<f64>,
    /// For waiting-at-horizon trips, the wait accrued so far.
    pub wait_min: Option<f64>,
    pub ivtt_min: Option<f64>,
    pub length_km: Option<f64>,
}

/// Daily totals of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleLog {
    pub id: VehicleId,
    pub mode: ServiceTag,
    /// Time on duty, including overtime spent finishing assigned stops.
    pub service_s: f64,
    pub km: f64,
    /// Integral of passengers aboard over time, passenger-seconds.
    pub occupancy_pax_s: f64,
}

/// Inputs and outcome of one dedicated-fleet insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct DarpDecision {
    pub time_s: f64,
    pub ride: Ride,
    /// Fleet snapshot the decision was taken on.
    pub plans: Vec<VehiclePlan>,
    pub max_detour: f64,
    pub max_wait_s: f64,
    pub result: InsertionResult,
}

/// Summary restricted to one service of the design.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceSummary {
    pub mode: ServiceTag,
    /// Peak vehicles scheduled, or vehicles on the fixed route.
    pub fleet_size: u32,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// One record per request, in request order.
    pub trips: Vec<TripRecord>,
    pub vehicles: Vec<VehicleLog>,
    /// Events in processing order.
    pub events: Vec<SimEvent>,
    pub decisions: Vec<DarpDecision>,
    /// Whole system. Operating hours are the longest of the services'.
    pub summary: Summary,
    pub services: Vec<ServiceSummary>,
}

impl SimulationResult {
    pub fn service(&self, mode: ServiceTag) -> Option<&ServiceSummary> {
        self.services.iter().find(|s| s.mode == mode)
    }
}

/// Simulates one day of `demand` under `design`.
pub fn run_scenario(
    net: &Network,
    demand: &DemandSet,
    design: &SystemDesign,
    seed: u64,
    options: RunOptions,
) -> Result<SimulationResult> {
    design.validate()?;
    demand.check_nodes(net)?;
    if net.nodes().is_empty() {
        return Err(Error::arg("network has no nodes"));
    }
    let mut sim = Sim::new(net, demand, design, seed, options)?;
    sim.run();
    Ok(sim.finish())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Policy {
    Greedy,
    Shared { max_detour: f64 },
    Darp { max_detour: f64, max_wait_s: f64 },
}

#[derive(Debug)]
struct Fleet {
    tag: ServiceTag,
    policy: Policy,
    supply: SupplySchedule,
    vehicles: Range<usize>,
    /// Requests not yet assigned (crowdsourced) or awaiting the next round (dedicated).
    waiting: Vec<Ride>,
}

#[derive(Debug)]
struct FrtState {
    timetable: Timetable,
    loads: FrtLoads,
    first_vehicle: u32,
    occupancy_pax_s: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Leg {
    start_time_s: f64,
    start_odometer_m: f64,
    /// Offsets from the leg start; the last point is the next stop.
    points: Vec<LegPoint>,
}

#[derive(Debug, Clone, Copy)]
struct Aboard {
    ride: Ride,
    pickup_time_s: f64,
    pickup_odometer_m: f64,
}

#[derive(Debug)]
struct Vehicle {
    id: VehicleId,
    fleet: usize,
    spawn: NodeId,
    spawned: bool,
    position: NodeId,
    odometer_m: f64,
    leg: Option<Leg>,
    version: u64,
    stops: Vec<Stop>,
    onboard: Vec<Aboard>,
    on_shift: bool,
    in_service: bool,
    service_since_s: f64,
    service_s: f64,
    occupancy_since_s: f64,
    occupancy_pax_s: f64,
}

impl Vehicle {
    fn is_idle(&self) -> bool {
        self.stops.is_empty() && self.onboard.is_empty() && self.leg.is_none()
    }

    /// First node where the route can change, with arrival time and odometer.
    fn anchor(&self, now: f64) -> (usize, NodeId, f64, f64) {
        match &self.leg {
            None => (0, self.position, now, self.odometer_m),
            Some(leg) => {
                let last = leg.points.len() - 1;
                let i = leg.points.iter().position(|p| leg.start_time_s + p.time_s >= now).unwrap_or(last);
                let p = leg.points[i];
                (i, p.node, leg.start_time_s + p.time_s, leg.start_odometer_m + p.dist_m)
            }
        }
    }

    fn plan(&self, now: f64) -> VehiclePlan {
        let (_, anchor, t, odo) = self.anchor(now);
        VehiclePlan {
            id: self.id,
            capacity: VEHICLE_CAPACITY,
            anchor,
            anchor_time_s: t,
            anchor_odometer_m: odo,
            onboard: self
                .onboard
                .iter()
                .map(|a| Onboard { ride: a.ride, pickup_odometer_m: a.pickup_odometer_m })
                .collect(),
            stops: self.stops.clone(),
        }
    }

    fn accrue_occupancy(&mut self, now: f64) {
        self.occupancy_pax_s += self.onboard.len() as f64 * (now - self.occupancy_since_s);
        self.occupancy_since_s = now;
    }

    fn close_service(&mut self, now: f64) {
        if self.in_service {
            self.service_s += now - self.service_since_s;
            self.in_service = false;
        }
    }
}

struct Sim<'a> {
    net: &'a Network,
    cache: PathCache<'a>,
    requests: &'a [RideRequest],
    options: RunOptions,
    now: f64,
    queue: EventQueue,
    fleets: Vec<Fleet>,
    vehicles: Vec<Vehicle>,
    frt: Option<FrtState>,
    /// Where requests go: index into `fleets`, or the fixed route.
    routing: Routing<'a>,
    request_index: BTreeMap<RequestId, usize>,
    trips: BTreeMap<RequestId, TripRecord>,
    events: Vec<SimEvent>,
    decisions: Vec<DarpDecision>,
}

#[derive(Debug, Clone, Copy)]
enum Routing<'a> {
    Fleet(usize),
    FixedRoute,
    /// Fixed route if eligible, else the fleet.
    FrtOr(usize),
    /// Dedicated fleet inside the corridor, crowdsourced fleet outside.
    Corridor { corridor: &'a RouteSpec, dedicated: usize, crowdsourced: usize },
}

impl<'a> Sim<'a> {
    fn new(
        net: &'a Network,
        demand: &'a DemandSet,
        design: &'a SystemDesign,
        seed: u64,
        options: RunOptions,
    ) -> Result<Self> {
        let cache = PathCache::new(net);
        let mut fleets = Vec::new();
        let mut frt_spec = None;
        let routing = match design {
            SystemDesign::Crowdsourced(c) => {
                fleets.push(crowd_fleet(c));
                Routing::Fleet(0)
            }
            SystemDesign::Dedicated(d) => {
                fleets.push(dedicated_fleet(d));
                Routing::Fleet(0)
            }
            SystemDesign::FixedRoute(f) => {
                frt_spec = Some(f);
                Routing::FixedRoute
            }
            SystemDesign::HybridFrt { frt, crowdsourced } => {
                frt_spec = Some(frt);
                fleets.push(crowd_fleet(crowdsourced));
                Routing::FrtOr(0)
            }
            SystemDesign::HybridOdt { corridor, dedicated, crowdsourced } => {
                fleets.push(dedicated_fleet(dedicated));
                fleets.push(crowd_fleet(crowdsourced));
                Routing::Corridor { corridor, dedicated: 0, crowdsourced: 1 }
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let requests = demand.requests();
        let mut vehicles = Vec::new();
        for (fi, fleet) in fleets.iter_mut().enumerate() {
            let start = vehicles.len();
            for _ in 0..fleet.supply.peak() {
                let spawn = if requests.is_empty() {
                    net.nodes()[rng.gen_range(0..net.nodes().len())].id
                } else {
                    requests[rng.gen_range(0..requests.len())].origin
                };
                vehicles.push(Vehicle {
                    id: VehicleId(vehicles.len() as u32),
                    fleet: fi,
                    spawn,
                    spawned: false,
                    position: spawn,
                    odometer_m: 0.0,
                    leg: None,
                    version: 0,
                    stops: Vec::new(),
                    onboard: Vec::new(),
                    on_shift: false,
                    in_service: false,
                    service_since_s: 0.0,
                    service_s: 0.0,
                    occupancy_since_s: 0.0,
                    occupancy_pax_s: 0.0,
                });
            }
            fleet.vehicles = start..vehicles.len();
        }

        let frt = match frt_spec {
            Some(f) => Some(FrtState {
                timetable: Timetable::build(&f.route, f.vehicles, &cache)?,
                loads: FrtLoads::default(),
                first_vehicle: vehicles.len() as u32,
                occupancy_pax_s: alloc::vec![0.0; f.vehicles as usize],
            }),
            None => None,
        };

        let mut queue = EventQueue::default();
        for fleet in &fleets {
            for (k, vi) in fleet.vehicles.clone().enumerate() {
                let mut on = false;
                for h in 0..24 {
                    let active = (k as u32) < fleet.supply.hourly[h];
                    if active != on {
                        let kind = if active { EventKind::ShiftStart } else { EventKind::ShiftEnd };
                        queue.push(h as f64 * 3600.0, kind, vi as u32, 0);
                        on = active;
                    }
                }
                if on {
                    queue.push(HORIZON_S, EventKind::ShiftEnd, vi as u32, 0);
                }
            }
        }
        if !fleets.is_empty() {
            let ticks = (HORIZON_S / BATCH_INTERVAL_S) as u32;
            for k in 0..=ticks {
                queue.push(k as f64 * BATCH_INTERVAL_S, EventKind::BatchDispatch, 0, 0);
            }
        }
        for r in requests {
            queue.push(r.time_s, EventKind::RequestArrival, r.id.0, 0);
        }
        let request_index = requests.iter().enumerate().map(|(i, r)| (r.id, i)).collect();

        Ok(Sim {
            net,
            cache,
            requests,
            options,
            now: 0.0,
            queue,
            fleets,
            vehicles,
            frt,
            routing,
            request_index,
            trips: BTreeMap::new(),
            events: Vec::new(),
            decisions: Vec::new(),
        })
    }

    fn run(&mut self) {
        while let Some(s) = self.queue.pop() {
            let ev = s.event;
            self.now = ev.time_s;
            match ev.kind {
                EventKind::VehicleArrives => {
                    let v = ev.entity as usize;
                    if self.vehicles[v].version != s.version || self.vehicles[v].leg.is_none() {
                        continue;
                    }
                    self.events.push(ev);
                    self.on_arrival(v);
                }
                EventKind::ShiftStart => {
                    self.events.push(ev);
                    self.on_shift_start(ev.entity as usize);
                }
                EventKind::ShiftEnd => {
                    self.events.push(ev);
                    self.on_shift_end(ev.entity as usize);
                }
                EventKind::RequestArrival => {
                    self.events.push(ev);
                    let idx = self.request_index[&RequestId(ev.entity)];
                    self.on_request(idx);
                }
                EventKind::BatchDispatch => {
                    self.events.push(ev);
                    for f in 0..self.fleets.len() {
                        if matches!(self.fleets[f].policy, Policy::Darp { .. }) {
                            self.dispatch_darp(f);
                        } else {
                            self.dispatch_crowdsourced(f);
                        }
                    }
                }
                EventKind::PickupComplete | EventKind::DropoffComplete => {}
            }
        }
    }

    fn log(&mut self, kind: EventKind, entity: u32) {
        self.events.push(SimEvent { time_s: self.now, kind, entity });
    }

    fn on_shift_start(&mut self, v: usize) {
        let now = self.now;
        let veh = &mut self.vehicles[v];
        veh.on_shift = true;
        if !veh.spawned {
            veh.spawned = true;
            veh.position = veh.spawn;
        }
        if !veh.in_service {
            veh.in_service = true;
            veh.service_since_s = now;
        }
        let f = veh.fleet;
        self.dispatch_crowdsourced(f);
    }

    fn on_shift_end(&mut self, v: usize) {
        let now = self.now;
        let veh = &mut self.vehicles[v];
        veh.on_shift = false;
        if veh.is_idle() {
            veh.close_service(now);
        }
    }

    fn on_request(&mut self, idx: usize) {
        let r = self.requests[idx];
        let direct = self.cache.distance(r.origin, r.destination);
        let Some(direct_m) = direct else {
            let mode = self.default_mode();
            self.record(r, mode, TripOutcome::Rejected("unroutable"), None);
            return;
        };
        let ride = Ride { id: r.id, request_time_s: r.time_s, origin: r.origin, destination: r.destination, direct_m };
        let fleet = match self.routing {
            Routing::Fleet(f) => f,
            Routing::FixedRoute => {
                match self.try_frt(&r) {
                    Ok(()) => {}
                    Err(reason) => self.record(r, ServiceTag::Frt, TripOutcome::Rejected(reason), Some(direct_m)),
                }
                return;
            }
            Routing::FrtOr(f) => {
                if self.try_frt(&r).is_ok() {
                    return;
                }
                f
            }
            Routing::Corridor { corridor, dedicated, crowdsourced } => {
                match hybrid_route(&r, self.net, &HybridMode::OdtBased { corridor }) {
                    ServiceTag::Dedicated => dedicated,
                    _ => crowdsourced,
                }
            }
        };
        self.fleets[fleet].waiting.push(ride);
        self.dispatch_crowdsourced(fleet);
    }

    fn default_mode(&self) -> ServiceTag {
        match self.routing {
            Routing::FixedRoute | Routing::FrtOr(_) => ServiceTag::Frt,
            Routing::Fleet(f) | Routing::Corridor { crowdsourced: f, .. } => self.fleets[f].tag,
        }
    }

    /// Boards `r` on the fixed route if it is eligible.
    fn try_frt(&mut self, r: &RideRequest) -> core::result::Result<(), &'static str> {
        let frt = self.frt.as_mut().expect("fixed route configured");
        let plan = frt_board(r, &frt.timetable, self.net, &frt.loads).map_err(|e| e.as_str())?;
        let segments = frt.timetable.route.stops.len() - 1;
        frt.loads.add(&plan, segments);
        frt.occupancy_pax_s[plan.vehicle as usize] += plan.in_vehicle_s;
        let vehicle = VehicleId(frt.first_vehicle + plan.vehicle);
        self.record_frt(r, &plan, vehicle);
        Ok(())
    }

    fn record_frt(&mut self, r: &RideRequest, plan: &BoardingPlan, vehicle: VehicleId) {
        let direct = self.cache.distance(r.origin, r.destination);
        let mut rec = self.blank(r, ServiceTag::Frt, TripOutcome::Served, direct);
        rec.vehicle = Some(vehicle);
        rec.pickup_time_s = Some(plan.board_time_s);
        rec.dropoff_time_s = Some(plan.alight_time_s);
        rec.walk_min = Some(plan.walk_s() / 60.0);
        rec.wait_min = Some(plan.wait_s / 60.0);
        rec.ivtt_min = Some(plan.in_vehicle_s / 60.0);
        rec.length_km = Some(plan.ride_m / 1000.0);
        self.trips.insert(r.id, rec);
    }

    fn blank(&self, r: &RideRequest, mode: ServiceTag, outcome: TripOutcome, direct_m: Option<f64>) -> TripRecord {
        TripRecord {
            request: r.id,
            mode,
            outcome,
            request_time_s: r.time_s,
            origin: r.origin,
            destination: r.destination,
            origin_zone: self.net.zone_of(r.origin).ok().flatten(),
            destination_zone: self.net.zone_of(r.destination).ok().flatten(),
            direct_m,
            vehicle: None,
            pickup_time_s: None,
            dropoff_time_s: None,
            walk_min: None,
            wait_min: None,
            ivtt_min: None,
            length_km: None,
        }
    }

    fn record(&mut self, r: RideRequest, mode: ServiceTag, outcome: TripOutcome, direct_m: Option<f64>) {
        let rec = self.blank(&r, mode, outcome, direct_m);
        self.trips.insert(r.id, rec);
    }

    fn on_duty(&self, f: usize) -> Vec<usize> {
        self.fleets[f].vehicles.clone().filter(|&v| self.vehicles[v].on_shift).collect()
    }

    fn dispatch_crowdsourced(&mut self, f: usize) {
        if self.now > HORIZON_S || self.fleets[f].waiting.is_empty() {
            return;
        }
        match self.fleets[f].policy {
            Policy::Greedy => {
                let idle: Vec<(VehicleId, NodeId)> = self
                    .on_duty(f)
                    .into_iter()
                    .filter(|&v| self.vehicles[v].is_idle())
                    .map(|v| (self.vehicles[v].id, self.vehicles[v].position))
                    .collect();
                if idle.is_empty() {
                    return;
                }
                let matches = greedy_assign(&idle, &self.fleets[f].waiting, &self.cache);
                for (req, vid) in matches {
                    let ride = self.take_waiting(f, req);
                    self.insert(vid.0 as usize, ride, 0, 1);
                }
            }
            Policy::Shared { max_detour } => {
                let now = self.now;
                let plans: Vec<VehiclePlan> = self.on_duty(f).into_iter().map(|v| self.vehicles[v].plan(now)).collect();
                if plans.is_empty() {
                    return;
                }
                let matches = shared_greedy_match(&plans, &self.fleets[f].waiting, max_detour, &self.cache);
                for m in matches {
                    let ride = self.take_waiting(f, m.request);
                    self.insert(m.vehicle.0 as usize, ride, m.pickup_index, m.dropoff_index);
                }
            }
            Policy::Darp { .. } => {}
        }
    }

    fn take_waiting(&mut self, f: usize, id: RequestId) -> Ride {
        let waiting = &mut self.fleets[f].waiting;
        let i = waiting.iter().position(|r| r.id == id).expect("matched request is queued");
        waiting.remove(i)
    }

    fn dispatch_darp(&mut self, f: usize) {
        let Policy::Darp { max_detour, max_wait_s } = self.fleets[f].policy else { return };
        let pending = core::mem::take(&mut self.fleets[f].waiting);
        let now = self.now;
        for ride in pending {
            let plans: Vec<VehiclePlan> = self.on_duty(f).into_iter().map(|v| self.vehicles[v].plan(now)).collect();
            let result = darp_insert(&plans, &ride, max_detour, max_wait_s, &self.cache);
            if let InsertionResult::Accepted(ins) = &result {
                self.insert(ins.vehicle.0 as usize, ride, ins.pickup_index, ins.dropoff_index);
            } else {
                let r = self.requests[self.request_index[&ride.id]];
                let tag = self.fleets[f].tag;
                self.record(r, tag, TripOutcome::Rejected("no_feasible_insertion"), Some(ride.direct_m));
            }
            if self.options.record_decisions {
                self.decisions.push(DarpDecision { time_s: now, ride, plans, max_detour, max_wait_s, result });
            }
        }
    }

    fn insert(&mut self, v: usize, ride: Ride, pickup_index: usize, dropoff_index: usize) {
        let stops = &mut self.vehicles[v].stops;
        stops.insert(pickup_index, Stop::pickup(ride));
        stops.insert(dropoff_index, Stop::dropoff(ride));
        self.replan(v);
    }

    /// Routes the vehicle from its anchor to its first stop.
    fn replan(&mut self, v: usize) {
        let now = self.now;
        let veh = &self.vehicles[v];
        let target = veh.stops[0].node;
        let (ai, anchor, _, _) = veh.anchor(now);
        let tail = self.cache.leg(anchor, target).expect("dispatch only assigns routable stops");
        let leg = match &veh.leg {
            None => Leg { start_time_s: now, start_odometer_m: veh.odometer_m, points: tail },
            Some(old) => {
                let base = old.points[ai];
                let mut points = old.points[..=ai].to_vec();
                points.extend(tail.iter().skip(1).map(|p| LegPoint {
                    node: p.node,
                    time_s: base.time_s + p.time_s,
                    dist_m: base.dist_m + p.dist_m,
                }));
                Leg { points, ..*old }
            }
        };
        let end = leg.start_time_s + leg.points.last().expect("leg has a start point").time_s;
        let veh = &mut self.vehicles[v];
        veh.leg = Some(leg);
        veh.version += 1;
        self.queue.push(end, EventKind::VehicleArrives, v as u32, veh.version);
    }

    fn on_arrival(&mut self, v: usize) {
        let now = self.now;
        let leg = self.vehicles[v].leg.take().expect("arrival has a leg");
        let last = *leg.points.last().expect("leg has a start point");
        {
            let veh = &mut self.vehicles[v];
            veh.position = last.node;
            veh.odometer_m = leg.start_odometer_m + last.dist_m;
        }
        while self.vehicles[v].stops.first().is_some_and(|s| s.node == last.node) {
            let stop = self.vehicles[v].stops.remove(0);
            self.serve(v, stop);
        }
        let veh = &mut self.vehicles[v];
        if !veh.stops.is_empty() {
            self.replan(v);
        } else if !veh.on_shift {
            veh.close_service(now);
        }
        let f = self.vehicles[v].fleet;
        self.dispatch_crowdsourced(f);
    }

    fn serve(&mut self, v: usize, stop: Stop) {
        let now = self.now;
        let veh = &mut self.vehicles[v];
        veh.accrue_occupancy(now);
        match stop.action {
            StopAction::Pickup => {
                veh.onboard.push(Aboard { ride: stop.ride, pickup_time_s: now, pickup_odometer_m: veh.odometer_m });
                self.log(EventKind::PickupComplete, stop.ride.id.0);
            }
            StopAction::Dropoff => {
                let i = veh.onboard.iter().position(|a| a.ride.id == stop.ride.id).expect("dropoff follows pickup");
                let a = veh.onboard.remove(i);
                let odometer = veh.odometer_m;
                let (id, tag) = (veh.id, self.fleets[veh.fleet].tag);
                let r = self.requests[self.request_index[&a.ride.id]];
                let mut rec = self.blank(&r, tag, TripOutcome::Served, Some(a.ride.direct_m));
                rec.vehicle = Some(id);
                rec.pickup_time_s = Some(a.pickup_time_s);
                rec.dropoff_time_s = Some(now);
                rec.walk_min = Some(0.0);
                rec.wait_min = Some((a.pickup_time_s - r.time_s) / 60.0);
                rec.ivtt_min = Some((now - a.pickup_time_s) / 60.0);
                rec.length_km = Some((odometer - a.pickup_odometer_m) / 1000.0);
                self.trips.insert(r.id, rec);
                self.log(EventKind::DropoffComplete, stop.ride.id.0);
            }
        }
    }

    fn finish(mut self) -> SimulationResult {
        let end = self.now.max(HORIZON_S);
        for f in 0..self.fleets.len() {
            let waiting = core::mem::take(&mut self.fleets[f].waiting);
            let tag = self.fleets[f].tag;
            for ride in waiting {
                let r = self.requests[self.request_index[&ride.id]];
                let mut rec = self.blank(&r, tag, TripOutcome::WaitingAtHorizon, Some(ride.direct_m));
                rec.wait_min = Some((HORIZON_S - r.time_s) / 60.0);
                self.trips.insert(r.id, rec);
            }
        }

        let mut logs = Vec::new();
        for veh in &mut self.vehicles {
            veh.accrue_occupancy(end);
            veh.close_service(end);
            logs.push(VehicleLog {
                id: veh.id,
                mode: self.fleets[veh.fleet].tag,
                service_s: veh.service_s,
                km: veh.odometer_m / 1000.0,
                occupancy_pax_s: veh.occupancy_pax_s,
            });
        }
        if let Some(frt) = &self.frt {
            let km = frt.timetable.vehicle_distances_m();
            let service = frt.timetable.vehicle_service_s();
            for i in 0..frt.timetable.vehicles as usize {
                logs.push(VehicleLog {
                    id: VehicleId(frt.first_vehicle + i as u32),
                    mode: ServiceTag::Frt,
                    service_s: service[i],
                    km: km[i] / 1000.0,
                    occupancy_pax_s: frt.occupancy_pax_s[i],
                });
            }
        }

        let trips: Vec<TripRecord> = self.requests.iter().map(|r| self.trips[&r.id].clone()).collect();

        let mut services = Vec::new();
        if let Some(frt) = &self.frt {
            let route = &frt.timetable.route;
            services.push((ServiceTag::Frt, frt.timetable.vehicles, (route.window_end_s - route.window_start_s) / 3600.0));
        }
        for fleet in &self.fleets {
            services.push((fleet.tag, fleet.supply.peak(), fleet.supply.operating_hours() as f64));
        }
        let services: Vec<ServiceSummary> = services
            .into_iter()
            .map(|(mode, fleet_size, hours)| {
                let t: Vec<TripRecord> = trips.iter().filter(|t| t.mode == mode).cloned().collect();
                let l: Vec<VehicleLog> = logs.iter().filter(|l| l.mode == mode).cloned().collect();
                ServiceSummary { mode, fleet_size, summary: summarize(&t, &l, hours) }
            })
            .collect();
        let hours = services.iter().map(|s| s.summary.operating_hours).fold(0.0, f64::max);
        let summary = summarize(&trips, &logs, hours);

        SimulationResult { trips, vehicles: logs, events: self.events, decisions: self.decisions, summary, services }
    }
}

fn crowd_fleet(c: &CrowdsourcedSpec) -> Fleet {
    Fleet {
        tag: ServiceTag::Crowdsourced,
        policy: if c.shared { Policy::Shared { max_detour: c.max_detour } } else { Policy::Greedy },
        supply: c.supply.clone(),
        vehicles: 0..0,
        waiting: Vec::new(),
    }
}

fn dedicated_fleet(d: &DedicatedSpec) -> Fleet {
    Fleet {
        tag: ServiceTag::Dedicated,
        policy: Policy::Darp { max_detour: d.max_detour, max_wait_s: d.max_wait_s },
        supply: d.supply.clone(),
        vehicles: 0..0,
        waiting: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{DEFAULT_MAX_DETOUR, DEFAULT_MAX_WAIT_S};
    use crate::network::generate_grid;
    use alloc::vec;

    fn demand(reqs: &[(u32, f64, u32, u32)]) -> DemandSet {
        DemandSet::new(reqs.iter().map(|&(i, t, o, d)| RideRequest::new(i, t, o, d)).collect()).unwrap()
    }

    fn exclusive(n: u32) -> SystemDesign {
        SystemDesign::Crowdsourced(CrowdsourcedSpec {
            shared: false,
            max_detour: DEFAULT_MAX_DETOUR,
            supply: SupplySchedule::constant(n),
        })
    }

    #[test]
    fn single_trip_exclusive() {
        // 100 m edges at 10 m/s; one vehicle, spawns at the only origin
        let net = generate_grid(3, 3, 100.0, 10.0, 0).unwrap();
        let d = demand(&[(1, 100.0, 0, 8)]);
        let res = run_scenario(&net, &d, &exclusive(1), 7, RunOptions::default()).unwrap();
        let t = &res.trips[0];
        assert_eq!(t.outcome, TripOutcome::Served);
        assert_eq!(t.wait_min, Some(0.0));
        assert!((t.ivtt_min.unwrap() - 40.0 / 60.0).abs() < 1e-9);
        assert!((t.length_km.unwrap() - 0.4).abs() < 1e-9);
        assert!((res.summary.total_km - 0.4).abs() < 1e-9);
        assert!((res.vehicles[0].service_s - HORIZON_S).abs() < 1e-9);
        assert!((res.vehicles[0].occupancy_pax_s - 40.0).abs() < 1e-9);
    }

    #[test]
    fn queue_waits_for_busy_vehicle() {
        let net = generate_grid(3, 3, 100.0, 10.0, 0).unwrap();
        // both requests start at node 0 where the vehicle spawns
        let d = demand(&[(1, 0.0, 0, 8), (2, 0.0, 0, 2)]);
        let res = run_scenario(&net, &d, &exclusive(1), 1, RunOptions::default()).unwrap();
        assert_eq!(res.trips[0].pickup_time_s, Some(0.0));
        // drop at 8 at t=40, back to 0 (40 s) then 20 s to node 2
        assert_eq!(res.trips[1].pickup_time_s, Some(80.0));
        assert_eq!(res.trips[1].dropoff_time_s, Some(100.0));
    }

    #[test]
    fn no_supply_waits_at_horizon() {
        let net = generate_grid(3, 3, 100.0, 10.0, 0).unwrap();
        let d = demand(&[(1, 86_000.0, 0, 8)]);
        let res = run_scenario(&net, &d, &exclusive(0), 1, RunOptions::default()).unwrap();
        assert_eq!(res.trips[0].outcome, TripOutcome::WaitingAtHorizon);
        assert!((res.trips[0].wait_min.unwrap() - 400.0 / 60.0).abs() < 1e-9);
    }

    #[test]
    fn overtime_after_shift_end() {
        let net = generate_grid(3, 3, 100.0, 10.0, 0).unwrap();
        let mut hourly = [0; 24];
        hourly[0] = 1;
        let design = SystemDesign::Crowdsourced(CrowdsourcedSpec {
            shared: false,
            max_detour: 2.0,
            supply: SupplySchedule::new(hourly),
        });
        let d = demand(&[(1, 3590.0, 0, 8)]);
        let res = run_scenario(&net, &d, &design, 1, RunOptions::default()).unwrap();
        assert_eq!(res.trips[0].dropoff_time_s, Some(3630.0));
        assert!((res.vehicles[0].service_s - 3630.0).abs() < 1e-9);
    }

    #[test]
    fn darp_waits_for_batch() {
        let net = generate_grid(3, 3, 100.0, 10.0, 0).unwrap();
        let design = SystemDesign::Dedicated(DedicatedSpec {
            max_detour: DEFAULT_MAX_DETOUR,
            max_wait_s: DEFAULT_MAX_WAIT_S,
            supply: SupplySchedule::constant(1),
        });
        let d = demand(&[(1, 31.0, 0, 8)]);
        let res = run_scenario(&net, &d, &design, 1, RunOptions { record_decisions: true }).unwrap();
        assert_eq!(res.trips[0].pickup_time_s, Some(60.0));
        assert_eq!(res.decisions.len(), 1);
        assert_eq!(res.service(ServiceTag::Dedicated).unwrap().summary.served, 1);
    }

    #[test]
    fn fixed_route_rejects_outside_window() {
        let net = generate_grid(2, 5, 500.0, 10.0, 0).unwrap();
        let route = RouteSpec::new(vec![NodeId(0), NodeId(2), NodeId(4)], 10.0);
        let design = SystemDesign::FixedRoute(FixedRouteSpec { route, vehicles: 2 });
        let d = demand(&[(1, 3600.0, 0, 4), (2, 8.0 * 3600.0, 0, 4)]);
        let res = run_scenario(&net, &d, &design, 1, RunOptions::default()).unwrap();
        assert_eq!(res.trips[0].outcome, TripOutcome::Rejected("frt_outside_window"));
        assert_eq!(res.trips[1].outcome, TripOutcome::Served);
        assert_eq!(res.trips[1].mode, ServiceTag::Frt);
        assert_eq!(res.vehicles.len(), 2);
    }

    #[test]
    fn deterministic() {
        let net = generate_grid(4, 4, 200.0, 10.0, 3).unwrap();
        let reqs: Vec<_> = (0..30u32).map(|i| (i, i as f64 * 97.0, i % 16, (i * 7 + 3) % 16)).filter(|r| r.2 != r.3).collect();
        let d = demand(&reqs);
        let design = SystemDesign::Crowdsourced(CrowdsourcedSpec {
            shared: true,
            max_detour: 2.0,
            supply: SupplySchedule::constant(2),
        });
        let a = run_scenario(&net, &d, &design, 5, RunOptions::default()).unwrap();
        let b = run_scenario(&net, &d, &design, 5, RunOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
