//! Fixed-route transit: route definition, timetable, and boarding decisions.
//!
//! Vehicles shuttle back and forth along the stop sequence. Departures leave
//! both terminals every `cycle / vehicles` seconds from the start of the
//! service window; the cycle is two one-way runs plus a terminal dwell each.
//! Walking to and from stops is straight-line at 5 km/h.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::VEHICLE_CAPACITY;
use crate::demand::RideRequest;
use crate::network::{Network, TravelOracle};
use crate::{Error, NodeId, Result};

/// 5 km/h in metres per second.
pub const WALK_SPEED_MPS: f64 = 5000.0 / 3600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSpec {
    /// Stop nodes in outbound order.
    pub stops: Vec<NodeId>,
    pub cruise_speed_mps: f64,
    pub window_start_s: f64,
    pub window_end_s: f64,
    /// Maximum walk to or from a stop, minutes.
    pub catchment_min: f64,
    pub walk_speed_mps: f64,
    pub dwell_s: f64,
    pub vehicles_below_threshold: u32,
    pub vehicles_from_threshold: u32,
    /// Demand level (percent of base) from which the larger fleet runs.
    pub threshold_level_pct: u32,
}

impl RouteSpec {
    /// Defaults: 07:00–21:00, 7 min catchment, 20 s dwell, 2 vehicles below
    /// 300 % demand and 3 from there on.
    pub fn new(stops: Vec<NodeId>, cruise_speed_mps: f64) -> Self {
        RouteSpec {
            stops,
            cruise_speed_mps,
            window_start_s: 7.0 * 3600.0,
            window_end_s: 21.0 * 3600.0,
            catchment_min: 7.0,
            walk_speed_mps: WALK_SPEED_MPS,
            dwell_s: 20.0,
            vehicles_below_threshold: 2,
            vehicles_from_threshold: 3,
            threshold_level_pct: 300,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stops.len() < 2 {
            return Err(Error::arg("a fixed route needs at least 2 stops"));
        }
        let positive = [
            ("cruise speed", self.cruise_speed_mps),
            ("catchment", self.catchment_min),
            ("walk speed", self.walk_speed_mps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!("route {name} must be > 0, got {v}")));
            }
        }
        if !(self.dwell_s.is_finite() && self.dwell_s >= 0.0) {
            return Err(Error::arg("route dwell must be >= 0"));
        }
        if !(0.0 <= self.window_start_s && self.window_start_s < self.window_end_s && self.window_end_s <= crate::HORIZON_S) {
            return Err(Error::arg("route service window must satisfy 0 <= start < end <= 24 h"));
        }
        Ok(())
    }

    /// Fleet size for a demand level.
    pub fn vehicle_count(&self, level_pct: u32) -> u32 {
        if level_pct < self.threshold_level_pct {
            self.vehicles_below_threshold
        } else {
            self.vehicles_from_threshold
        }
    }

    /// Catchment radius in metres.
    pub fn catchment_m(&self) -> f64 {
        self.catchment_min * 60.0 * self.walk_speed_mps
    }

    pub fn in_window(&self, time_s: f64) -> bool {
        self.window_start_s <= time_s && time_s < self.window_end_s
    }

    /// Nearest stop by straight line: `(stop index, metres)`, lowest index on ties.
    pub fn nearest_stop(&self, net: &Network, node: NodeId) -> Option<(usize, f64)> {
        let from = net.node(node)?;
        self.stops
            .iter()
            .enumerate()
            .filter_map(|(i, s)| net.node(*s).map(|n| (i, from.euclidean(n))))
            .fold(None, |best, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            })
    }

    /// Whether `node` lies within walking catchment of some stop.
    pub fn covers(&self, net: &Network, node: NodeId) -> bool {
        self.nearest_stop(net, node).is_some_and(|(_, d)| d <= self.catchment_m() * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Outbound,
    Inbound,
}

/// Departure times and stop offsets for one fleet size.
#[derive(Debug, Clone, PartialEq)]
pub struct Timetable {
    pub route: RouteSpec,
    pub vehicles: u32,
    /// Cumulative route distance at each stop, outbound order.
    pub cum_m: Vec<f64>,
    /// Time from terminal departure to each stop, outbound order.
    pub outbound_offsets_s: Vec<f64>,
    /// Same for the inbound direction, indexed by inbound position.
    pub inbound_offsets_s: Vec<f64>,
    pub cycle_s: f64,
    pub headway_s: f64,
    /// Terminal departure times, identical for both directions.
    pub departures_s: Vec<f64>,
}

impl Timetable {
    pub fn build(route: &RouteSpec, vehicles: u32, oracle: &impl TravelOracle) -> Result<Self> {
        route.validate()?;
        let mut cum_m = vec![0.0];
        for w in route.stops.windows(2) {
            let d = oracle.distance(w[0], w[1]).ok_or(Error::NoPath { from: w[0], to: w[1] })?;
            cum_m.push(cum_m.last().unwrap() + d);
        }
        let k = route.stops.len();
        let total = cum_m[k - 1];
        let v = route.cruise_speed_mps;
        let outbound_offsets_s: Vec<f64> =
            cum_m.iter().enumerate().map(|(i, c)| c / v + route.dwell_s * i as f64).collect();
        let inbound_offsets_s: Vec<f64> = (0..k)
            .map(|p| (total - cum_m[k - 1 - p]) / v + route.dwell_s * p as f64)
            .collect();
        let one_way = outbound_offsets_s[k - 1].max(inbound_offsets_s[k - 1]);
        let cycle_s = 2.0 * (one_way + route.dwell_s);
        let (headway_s, departures_s) = if vehicles == 0 {
            (f64::INFINITY, Vec::new())
        } else {
            let h = cycle_s / vehicles as f64;
            let mut deps = Vec::new();
            let mut m = 0u32;
            loop {
                let t = route.window_start_s + m as f64 * h;
                if t >= route.window_end_s {
                    break;
                }
                deps.push(t);
                m += 1;
            }
            (h, deps)
        };
        Ok(Timetable {
            route: route.clone(),
            vehicles,
            cum_m,
            outbound_offsets_s,
            inbound_offsets_s,
            cycle_s,
            headway_s,
            departures_s,
        })
    }

    pub fn route_length_m(&self) -> f64 {
        *self.cum_m.last().unwrap()
    }

    /// One-way runs per day, both directions together.
    pub fn run_count(&self) -> usize {
        2 * self.departures_s.len()
    }

    /// Vehicle operating a given run.
    pub fn vehicle_of(&self, direction: Direction, run: usize) -> u32 {
        let n = self.vehicles.max(1) as usize;
        let shift = match direction {
            Direction::Outbound => 0,
            Direction::Inbound => n / 2,
        };
        ((run + shift) % n) as u32
    }

    /// Daily distance per vehicle index, metres.
    pub fn vehicle_distances_m(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.vehicles as usize];
        for dir in [Direction::Outbound, Direction::Inbound] {
            for run in 0..self.departures_s.len() {
                out[self.vehicle_of(dir, run) as usize] += self.route_length_m();
            }
        }
        out
    }

    /// Time span each vehicle is in service (first departure to last arrival), seconds.
    pub fn vehicle_service_s(&self) -> Vec<f64> {
        let k = self.route.stops.len();
        let mut span: Vec<Option<(f64, f64)>> = vec![None; self.vehicles as usize];
        for dir in [Direction::Outbound, Direction::Inbound] {
            let end_off = match dir {
                Direction::Outbound => self.outbound_offsets_s[k - 1],
                Direction::Inbound => self.inbound_offsets_s[k - 1],
            };
            for (run, &t0) in self.departures_s.iter().enumerate() {
                let v = self.vehicle_of(dir, run) as usize;
                let (s, e) = span[v].unwrap_or((t0, t0 + end_off));
                span[v] = Some((s.min(t0), e.max(t0 + end_off)));
            }
        }
        span.into_iter().map(|s| s.map_or(0.0, |(a, b)| b - a)).collect()
    }

    fn offsets(&self, direction: Direction) -> &[f64] {
        match direction {
            Direction::Outbound => &self.outbound_offsets_s,
            Direction::Inbound => &self.inbound_offsets_s,
        }
    }

    /// Position of route stop `idx` along `direction`.
    fn position(&self, direction: Direction, idx: usize) -> usize {
        match direction {
            Direction::Outbound => idx,
            Direction::Inbound => self.route.stops.len() - 1 - idx,
        }
    }
}

/// Passengers per route segment for each run, for the seat check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrtLoads {
    loads: BTreeMap<(Direction, usize), Vec<u32>>,
}

impl FrtLoads {
    fn fits(&self, direction: Direction, run: usize, from: usize, to: usize) -> bool {
        match self.loads.get(&(direction, run)) {
            None => true,
            Some(segs) => segs[from..to].iter().all(|&l| l < VEHICLE_CAPACITY),
        }
    }

    /// Records a boarding.
    pub fn add(&mut self, plan: &BoardingPlan, segments: usize) {
        let segs = self.loads.entry((plan.direction, plan.run)).or_insert_with(|| vec![0; segments]);
        for l in &mut segs[plan.board_position..plan.alight_position] {
            *l += 1;
        }
    }

    /// Largest load on any segment of any run.
    pub fn peak(&self) -> u32 {
        self.loads.values().flat_map(|s| s.iter().copied()).max().unwrap_or(0)
    }
}

/// Why a request cannot use the fixed route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ineligible {
    OutsideWindow,
    OriginTooFar,
    DestinationTooFar,
    SameStop,
    NoDeparture,
}

impl Ineligible {
    pub fn as_str(self) -> &'static str {
        match self {
            Ineligible::OutsideWindow => "frt_outside_window",
            Ineligible::OriginTooFar => "frt_origin_too_far",
            Ineligible::DestinationTooFar => "frt_destination_too_far",
            Ineligible::SameStop => "frt_same_stop",
            Ineligible::NoDeparture => "frt_no_departure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoardingPlan {
    pub direction: Direction,
    pub run: usize,
    pub vehicle: u32,
    pub board_stop: NodeId,
    pub alight_stop: NodeId,
    /// Positions along `direction`.
    pub board_position: usize,
    pub alight_position: usize,
    pub walk_access_s: f64,
    pub walk_egress_s: f64,
    pub board_time_s: f64,
    pub alight_time_s: f64,
    /// Time at the stop before boarding.
    pub wait_s: f64,
    pub in_vehicle_s: f64,
    pub ride_m: f64,
}

impl BoardingPlan {
    pub fn walk_s(&self) -> f64 {
        self.walk_access_s + self.walk_egress_s
    }
}

/// Boarding decision for one request.
///
/// Eligible when the request falls inside the service window, both ends are
/// within the walking catchment of their nearest stops, those stops differ,
/// and a departure with free seats reaches the boarding stop after the
/// passenger does.
pub fn frt_board(
    request: &RideRequest,
    timetable: &Timetable,
    net: &Network,
    loads: &FrtLoads,
) -> core::result::Result<BoardingPlan, Ineligible> {
    let route = &timetable.route;
    if !route.in_window(request.time_s) {
        return Err(Ineligible::OutsideWindow);
    }
    let catchment = route.catchment_m() * (1.0 + 1e-12);
    let (bi, walk_o) = route.nearest_stop(net, request.origin).ok_or(Ineligible::OriginTooFar)?;
    if walk_o > catchment {
        return Err(Ineligible::OriginTooFar);
    }
    let (ai, walk_d) = route.nearest_stop(net, request.destination).ok_or(Ineligible::DestinationTooFar)?;
    if walk_d > catchment {
        return Err(Ineligible::DestinationTooFar);
    }
    if bi == ai {
        return Err(Ineligible::SameStop);
    }
    let direction = if bi < ai { Direction::Outbound } else { Direction::Inbound };
    let (bp, ap) = (timetable.position(direction, bi), timetable.position(direction, ai));
    let offsets = timetable.offsets(direction);
    let walk_access_s = walk_o / route.walk_speed_mps;
    let at_stop = request.time_s + walk_access_s;
    let run = timetable
        .departures_s
        .iter()
        .enumerate()
        .find(|&(run, &t0)| t0 + offsets[bp] >= at_stop && loads.fits(direction, run, bp, ap))
        .map(|(run, _)| run)
        .ok_or(Ineligible::NoDeparture)?;
    let t0 = timetable.departures_s[run];
    let board_time_s = t0 + offsets[bp];
    let alight_time_s = t0 + offsets[ap];
    Ok(BoardingPlan {
        direction,
        run,
        vehicle: timetable.vehicle_of(direction, run),
        board_stop: route.stops[bi],
        alight_stop: route.stops[ai],
        board_position: bp,
        alight_position: ap,
        walk_access_s,
        walk_egress_s: walk_d / route.walk_speed_mps,
        board_time_s,
        alight_time_s,
        wait_s: board_time_s - at_stop,
        in_vehicle_s: alight_time_s - board_time_s,
        ride_m: (timetable.cum_m[ai] - timetable.cum_m[bi]).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Node, PathCache};

    /// Straight east-west line of nodes every 100 m with a parallel row 300 m
    /// north and a far row 700 m north for off-route trip ends.
    fn corridor() -> Network {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut eid = 0;
        for (row, y) in [(0u32, 0.0), (1, 300.0), (2, 400.0), (3, 700.0)] {
            for c in 0..21u32 {
                nodes.push(Node::new(row * 100 + c, c as f64 * 100.0, y));
                if c > 0 {
                    for (a, b) in [(row * 100 + c - 1, row * 100 + c), (row * 100 + c, row * 100 + c - 1)] {
                        edges.push(Edge::new(eid, a, b, 100.0, 10.0));
                        eid += 1;
                    }
                }
            }
        }
        Network::new(nodes, edges, None, 10.0).unwrap()
    }

    fn table(net: &Network) -> Timetable {
        let route = RouteSpec::new(vec![NodeId(0), NodeId(10), NodeId(20)], 10.0);
        Timetable::build(&route, 2, &PathCache::new(net)).unwrap()
    }

    #[test]
    fn timetable_shape() {
        let net = corridor();
        let t = table(&net);
        assert_eq!(t.cum_m, vec![0.0, 1000.0, 2000.0]);
        assert_eq!(t.outbound_offsets_s, vec![0.0, 120.0, 240.0]);
        assert_eq!(t.inbound_offsets_s, vec![0.0, 120.0, 240.0]);
        assert_eq!(t.cycle_s, 520.0);
        assert_eq!(t.headway_s, 260.0);
        assert_eq!(t.departures_s[0], 7.0 * 3600.0);
        assert!(*t.departures_s.last().unwrap() < 21.0 * 3600.0);
    }

    #[test]
    fn eligible_walk_times() {
        let net = corridor();
        let t = table(&net);
        // origin 300 m north of stop 0, destination 400 m north of stop 20
        let req = RideRequest::new(1, 10.0 * 3600.0, 100, 220);
        let plan = frt_board(&req, &t, &net, &FrtLoads::default()).unwrap();
        let walk_min = plan.walk_s() / 60.0;
        assert!((walk_min - 700.0 / (5000.0 / 60.0)).abs() < 1e-9);
        assert!((walk_min - 8.4).abs() < 1e-9);
        assert_eq!(plan.direction, Direction::Outbound);
        assert_eq!(plan.ride_m, 2000.0);
        assert_eq!(plan.in_vehicle_s, 240.0);
        assert!(plan.wait_s >= 0.0 && plan.wait_s < t.headway_s);
    }

    #[test]
    fn ineligible_cases() {
        let net = corridor();
        let t = table(&net);
        let loads = FrtLoads::default();
        let far = RideRequest::new(1, 10.0 * 3600.0, 300, 220);
        assert_eq!(frt_board(&far, &t, &net, &loads), Err(Ineligible::OriginTooFar));
        let late = RideRequest::new(2, 22.5 * 3600.0, 100, 220);
        assert_eq!(frt_board(&late, &t, &net, &loads), Err(Ineligible::OutsideWindow));
        let same = RideRequest::new(3, 10.0 * 3600.0, 1, 2);
        assert_eq!(frt_board(&same, &t, &net, &loads), Err(Ineligible::SameStop));
        let dest_far = RideRequest::new(4, 10.0 * 3600.0, 100, 320);
        assert_eq!(frt_board(&dest_far, &t, &net, &loads), Err(Ineligible::DestinationTooFar));
    }

    #[test]
    fn inbound_direction_and_full_runs() {
        let net = corridor();
        let t = table(&net);
        let req = RideRequest::new(1, 12.0 * 3600.0, 20, 10);
        let mut loads = FrtLoads::default();
        let first = frt_board(&req, &t, &net, &loads).unwrap();
        assert_eq!(first.direction, Direction::Inbound);
        assert_eq!((first.board_position, first.alight_position), (0, 1));
        for _ in 0..VEHICLE_CAPACITY {
            loads.add(&first, 2);
        }
        let next = frt_board(&req, &t, &net, &loads).unwrap();
        assert_eq!(next.run, first.run + 1);
        assert_eq!(loads.peak(), VEHICLE_CAPACITY);
    }

    #[test]
    fn fleet_rule_and_distances() {
        let net = corridor();
        let route = RouteSpec::new(vec![NodeId(0), NodeId(20)], 10.0);
        assert_eq!(route.vehicle_count(250), 2);
        assert_eq!(route.vehicle_count(300), 3);
        let t = Timetable::build(&route, 3, &PathCache::new(&net)).unwrap();
        let per_vehicle = t.vehicle_distances_m();
        assert_eq!(per_vehicle.len(), 3);
        let total: f64 = per_vehicle.iter().sum();
        assert_eq!(total, t.run_count() as f64 * 2000.0);
        let none = Timetable::build(&route, 0, &PathCache::new(&net)).unwrap();
        assert!(none.departures_s.is_empty());
    }
}
