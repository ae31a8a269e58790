//! Ride requests, demand-level scaling, and hourly supply schedules.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::Network;
use crate::{Error, NodeId, RequestId, Result, HORIZON_S};

/// Half-width of the time jitter applied to bootstrapped requests, seconds.
pub const UPSCALE_JITTER_S: f64 = 600.0;

/// Latest representable request time inside the service day.
const LAST_REQUEST_S: f64 = HORIZON_S - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RideRequest {
    pub id: RequestId,
    /// Seconds from midnight, in `[0, 86400)`.
    pub time_s: f64,
    pub origin: NodeId,
    pub destination: NodeId,
}

impl RideRequest {
    pub fn new(id: u32, time_s: f64, origin: u32, destination: u32) -> Self {
        RideRequest { id: RequestId(id), time_s, origin: NodeId(origin), destination: NodeId(destination) }
    }

    pub fn hour(&self) -> usize {
        ((self.time_s / 3600.0) as usize).min(23)
    }
}

/// A day of ride requests, sorted by `(time, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSet {
    requests: Vec<RideRequest>,
    level_pct: u32,
    base_count: usize,
}

impl DemandSet {
    /// Validates a base-level (100 %) demand set.
    pub fn new(requests: Vec<RideRequest>) -> Result<Self> {
        let n = requests.len();
        Self::with_level(requests, 100, n)
    }

    fn with_level(mut requests: Vec<RideRequest>, level_pct: u32, base_count: usize) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for r in &requests {
            if !ids.insert(r.id) {
                return Err(Error::arg(format!("duplicate request id {}", r.id)));
            }
            if r.origin == r.destination {
                return Err(Error::arg(format!("request {} has origin == destination", r.id)));
            }
            if !(r.time_s >= 0.0 && r.time_s < HORIZON_S) {
                return Err(Error::arg(format!("request {} time {} outside [0, 86400)", r.id, r.time_s)));
            }
        }
        requests.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then(a.id.cmp(&b.id)));
        Ok(DemandSet { requests, level_pct, base_count })
    }

    pub fn requests(&self) -> &[RideRequest] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn level_pct(&self) -> u32 {
        self.level_pct
    }

    pub fn base_count(&self) -> usize {
        self.base_count
    }

    /// Checks that every endpoint exists in `net`.
    pub fn check_nodes(&self, net: &Network) -> Result<()> {
        for r in &self.requests {
            for n in [r.origin, r.destination] {
                if !net.contains(n) {
                    return Err(Error::UnknownNode(n));
                }
            }
        }
        Ok(())
    }

    pub fn hourly_counts(&self) -> [usize; 24] {
        let mut counts = [0; 24];
        for r in &self.requests {
            counts[r.hour()] += 1;
        }
        counts
    }
}

/// Number of requests at `level_pct` percent of `base`, rounded half up.
pub fn scaled_count(base: usize, level_pct: u32) -> usize {
    (base * level_pct as usize + 50) / 100
}

/// Rescales a base demand set to `level_pct` percent of its size.
///
/// Below 100 % the result is a seeded subsample without replacement. Above
/// 100 % the base is kept whole and topped up with bootstrap draws whose
/// request time is jittered by up to ±10 min (clamped to the day) and whose
/// origin–destination pair is redrawn from the base requests of the same hour.
pub fn scale_demand(base: &DemandSet, level_pct: u32, seed: u64) -> Result<DemandSet> {
    if base.is_empty() {
        return Err(Error::arg("cannot scale an empty demand set"));
    }
    if level_pct == 0 || level_pct > 1000 {
        return Err(Error::arg(format!("demand level {level_pct}% out of range")));
    }
    let n = base.len();
    let target = scaled_count(n, level_pct);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests = if target <= n {
        let mut picked = index::sample(&mut rng, n, target).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| base.requests[i]).collect()
    } else {
        let mut by_hour: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); 24];
        for r in &base.requests {
            by_hour[r.hour()].push((r.origin, r.destination));
        }
        let first_id = base.requests.iter().map(|r| r.id.0).max().unwrap_or(0) + 1;
        let mut out = base.requests.clone();
        for next_id in first_id..first_id + (target - n) as u32 {
            let src = base.requests[rng.gen_range(0..n)];
            let jitter = rng.gen_range(-UPSCALE_JITTER_S..=UPSCALE_JITTER_S);
            let time_s = (src.time_s + jitter).clamp(0.0, LAST_REQUEST_S);
            let hour = ((time_s / 3600.0) as usize).min(23);
            let (origin, destination) = match by_hour[hour].as_slice() {
                [] => (src.origin, src.destination),
                pairs => pairs[rng.gen_range(0..pairs.len())],
            };
            out.push(RideRequest { id: RequestId(next_id), time_s, origin, destination });
        }
        out
    };
    DemandSet::with_level(requests, level_pct, base.base_count)
}

/// Draws `count` requests: hour by `hourly_profile` weight, time uniform within
/// the hour, origin–destination uniform over distinct node pairs.
pub fn generate_synthetic_demand(
    net: &Network,
    count: usize,
    hourly_profile: &[f64; 24],
    seed: u64,
) -> Result<DemandSet> {
    let nodes = net.nodes();
    if nodes.len() < 2 {
        return Err(Error::arg("synthetic demand needs a network with at least 2 nodes"));
    }
    if hourly_profile.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::arg("hourly profile weights must be finite and >= 0"));
    }
    let hours = WeightedIndex::new(hourly_profile.iter())
        .map_err(|_| Error::arg("hourly profile must have a positive weight"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let hour = hours.sample(&mut rng);
        let time_s = hour as f64 * 3600.0 + rng.gen_range(0.0..3600.0);
        let o = rng.gen_range(0..nodes.len());
        let mut d = rng.gen_range(0..nodes.len() - 1);
        if d >= o {
            d += 1;
        }
        raw.push((time_s, nodes[o].id, nodes[d].id));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let requests = raw
        .into_iter()
        .enumerate()
        .map(|(i, (time_s, origin, destination))| RideRequest {
            id: RequestId(i as u32),
            time_s,
            origin,
            destination,
        })
        .collect();
    DemandSet::new(requests)
}

/// Slope linking percent change in supply to percent change in demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupplySlope {
    #[default]
    Zero,
    Half,
    One,
}

impl SupplySlope {
    pub fn from_f64(alpha: f64) -> Result<Self> {
        match alpha {
            0.0 => Ok(SupplySlope::Zero),
            0.5 => Ok(SupplySlope::Half),
            1.0 => Ok(SupplySlope::One),
            a => Err(Error::arg(format!("supply slope must be 0, 0.5 or 1, got {a}"))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            SupplySlope::Zero => 0.0,
            SupplySlope::Half => 0.5,
            SupplySlope::One => 1.0,
        }
    }

    fn doubled(self) -> i64 {
        match self {
            SupplySlope::Zero => 0,
            SupplySlope::Half => 1,
            SupplySlope::One => 2,
        }
    }
}

/// Vehicles in service per clock hour.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupplySchedule {
    pub hourly: [u32; 24],
    pub alpha: SupplySlope,
}

impl SupplySchedule {
    pub fn new(hourly: [u32; 24]) -> Self {
        SupplySchedule { hourly, alpha: SupplySlope::Zero }
    }

    pub fn constant(vehicles: u32) -> Self {
        Self::new([vehicles; 24])
    }

    /// Same count between `start_h` (inclusive) and `end_h` (exclusive), zero elsewhere.
    pub fn window(vehicles: u32, start_h: usize, end_h: usize) -> Self {
        let mut hourly = [0; 24];
        for h in hourly.iter_mut().take(end_h.min(24)).skip(start_h) {
            *h = vehicles;
        }
        Self::new(hourly)
    }

    pub fn peak(&self) -> u32 {
        self.hourly.iter().copied().max().unwrap_or(0)
    }

    pub fn vehicle_hours(&self) -> u32 {
        self.hourly.iter().sum()
    }

    /// Hours with at least one vehicle scheduled.
    pub fn operating_hours(&self) -> usize {
        self.hourly.iter().filter(|&&c| c > 0).count()
    }
}

/// Scales every hourly count by `1 + alpha * D / 100`, rounding half up.
///
/// Counts never go negative, and an hour that had service in the base keeps
/// at least one vehicle.
pub fn scale_supply(base: &SupplySchedule, demand_change_pct: i32, alpha: SupplySlope) -> SupplySchedule {
    let mut hourly = [0u32; 24];
    for (out, &c) in hourly.iter_mut().zip(base.hourly.iter()) {
        // c * (200 + 2α·D) / 200, all integer
        let num = c as i64 * (200 + alpha.doubled() * demand_change_pct as i64);
        let scaled = if num <= 0 { 0 } else { (num + 100) / 200 };
        *out = if c >= 1 { scaled.max(1) as u32 } else { scaled as u32 };
    }
    SupplySchedule { hourly, alpha }
}

/// Requests per km² per day.
pub fn demand_density(requests_per_day: f64, area_km2: f64) -> Result<f64> {
    if !(area_km2 > 0.0) {
        return Err(Error::arg(format!("area must be > 0 km2, got {area_km2}")));
    }
    Ok(requests_per_day / area_km2)
}
