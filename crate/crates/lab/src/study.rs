//! Builds simulation inputs from a config and runs systems over demand levels.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use odt_core::costing::{
    surge_table, CostBreakdown, CostParameters, CrowdsourcedStats, DedicatedStats, FrtStats, ServiceCost,
};
use odt_core::demand::{demand_density, generate_synthetic_demand, scale_demand, scale_supply, DemandSet, SupplySchedule};
use odt_core::dispatch::{RouteSpec, ServiceTag};
use odt_core::efficiency::{switching_points, GcCurve, GcPoint, SwitchingPoint};
use odt_core::emissions::{baseline_private, per_passenger_metrics, EmissionFactors, EmissionsReport};
use odt_core::engine::{
    run_scenario, CrowdsourcedSpec, DedicatedSpec, FixedRouteSpec, RunOptions, SimulationResult, SystemDesign,
};
use odt_core::equity::{equity_report, EquityReport};
use odt_core::network::{assign_block_zones, generate_grid, Network, PathCache};

use crate::config::{Config, DemandSource, NetworkSource, SupplySource, SystemConfig, SystemKind};
use crate::io;

/// Network, base demand and base supply of a scenario.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub net: Network,
    pub demand: DemandSet,
    pub crowdsourced: Option<SupplySchedule>,
    pub dedicated: Option<SupplySchedule>,
}

fn supply(src: &Option<SupplySource>) -> Result<Option<SupplySchedule>> {
    Ok(match src {
        None => None,
        Some(SupplySource::Constant(n)) => Some(SupplySchedule::constant(*n)),
        Some(SupplySource::Hourly(h)) => Some(SupplySchedule::new(*h)),
        Some(SupplySource::File(p)) => Some(io::read_supply(p)?),
    })
}

/// Loads or generates everything the config points at and cross-checks it.
pub fn load_inputs(cfg: &Config, seed: u64) -> Result<Inputs> {
    let net = match &cfg.network {
        NetworkSource::Files { nodes, edges, zones, area_km2 } => {
            io::read_network(nodes, edges, zones.as_deref(), *area_km2)?
        }
        NetworkSource::Grid { rows, cols, spacing_m, speed_mps, zone_block } => {
            let grid = generate_grid(*rows, *cols, *spacing_m, *speed_mps, seed)?;
            match zone_block {
                Some(b) => assign_block_zones(&grid, *cols, *b, seed)?,
                None => grid,
            }
        }
    };
    let demand = match &cfg.demand {
        DemandSource::File(p) => io::read_demand(p)?,
        DemandSource::Synthetic { count, profile } => generate_synthetic_demand(&net, *count, profile, seed)?,
    };
    demand.check_nodes(&net).context("demand refers to nodes outside the network")?;
    if demand.is_empty() {
        bail!("demand has no requests");
    }
    for sys in cfg.system.iter().chain(&cfg.sweep) {
        if let Some(route) = &sys.route {
            if let Some(s) = route.stops.iter().find(|s| !net.contains(**s)) {
                bail!("system {}: route stop {s} is not a network node", sys.name);
            }
        }
    }
    Ok(Inputs {
        crowdsourced: supply(&cfg.supply.crowdsourced)?,
        dedicated: supply(&cfg.supply.dedicated)?,
        net,
        demand,
    })
}

/// Keeps the hours whose midpoint falls inside the route's service window.
fn mask_to_window(s: &SupplySchedule, route: &RouteSpec) -> SupplySchedule {
    let mut out = s.clone();
    for (h, c) in out.hourly.iter_mut().enumerate() {
        if !route.in_window(h as f64 * 3600.0 + 1800.0) {
            *c = 0;
        }
    }
    out
}

/// Design of `sys` at `level` percent of base demand. Supply follows demand
/// by the system's slope; the fixed-route fleet follows its vehicle rule.
pub fn design_for(sys: &SystemConfig, inputs: &Inputs, level: u32) -> Result<SystemDesign> {
    let change = level as i32 - 100;
    let crowd = |shared: bool| -> Result<CrowdsourcedSpec> {
        let base = inputs.crowdsourced.as_ref().context("crowdsourced supply missing")?;
        Ok(CrowdsourcedSpec { shared, max_detour: sys.max_detour, supply: scale_supply(base, change, sys.alpha) })
    };
    let dedicated = |route: Option<&RouteSpec>| -> Result<DedicatedSpec> {
        let base = inputs.dedicated.as_ref().context("dedicated supply missing")?;
        let base = match route {
            Some(r) => mask_to_window(base, r),
            None => base.clone(),
        };
        Ok(DedicatedSpec {
            max_detour: sys.max_detour,
            max_wait_s: sys.max_wait_s,
            supply: scale_supply(&base, change, sys.alpha),
        })
    };
    let route = || sys.route.clone().context("route missing");
    let fixed = || -> Result<FixedRouteSpec> {
        let route = route()?;
        Ok(FixedRouteSpec { vehicles: route.vehicle_count(level), route })
    };
    Ok(match sys.kind {
        SystemKind::CrowdsourcedExclusive => SystemDesign::Crowdsourced(crowd(false)?),
        SystemKind::CrowdsourcedShared => SystemDesign::Crowdsourced(crowd(true)?),
        SystemKind::DedicatedDarp => SystemDesign::Dedicated(dedicated(None)?),
        SystemKind::Frt => SystemDesign::FixedRoute(fixed()?),
        SystemKind::HybridFrt => SystemDesign::HybridFrt { frt: fixed()?, crowdsourced: crowd(sys.hybrid_shared)? },
        SystemKind::HybridOdt => {
            let corridor = route()?;
            SystemDesign::HybridOdt {
                dedicated: dedicated(Some(&corridor))?,
                crowdsourced: crowd(sys.hybrid_shared)?,
                corridor,
            }
        }
    })
}

/// Whether the crowdsourced part of `sys` pools rides.
pub fn crowd_shared(sys: &SystemConfig) -> bool {
    match sys.kind {
        SystemKind::CrowdsourcedShared => true,
        SystemKind::HybridFrt | SystemKind::HybridOdt => sys.hybrid_shared,
        _ => false,
    }
}

/// Cost inputs of each service in a run.
pub fn service_costs(sys: &SystemConfig, result: &SimulationResult) -> Vec<ServiceCost> {
    result
        .services
        .iter()
        .map(|s| {
            let m = &s.summary;
            let served = m.served as f64;
            match s.mode {
                ServiceTag::Crowdsourced => ServiceCost::Crowdsourced {
                    stats: CrowdsourcedStats { ivtt_min: m.avg_ivtt_min, trip_km: m.avg_trip_km, served_per_day: served },
                    shared: crowd_shared(sys),
                },
                ServiceTag::Dedicated => ServiceCost::Dedicated {
                    stats: DedicatedStats {
                        avg_vehicles: m.avg_vehicles,
                        operating_hours: m.operating_hours,
                        served_per_day: served,
                    },
                    fleet_size: s.fleet_size,
                },
                ServiceTag::Frt => ServiceCost::FixedRoute(FrtStats {
                    vehicles: s.fleet_size,
                    fleet_km_per_day: m.total_km,
                    operating_hours: m.operating_hours,
                    served_per_day: served,
                }),
            }
        })
        .collect()
}

/// One system simulated at one demand level.
#[derive(Debug, Clone)]
pub struct Run {
    pub system: SystemConfig,
    pub level: u32,
    /// Requests per km² per day.
    pub density: f64,
    pub demand: DemandSet,
    pub result: SimulationResult,
    /// Cost at each surge level; only surge 0 for systems without a
    /// crowdsourced service.
    pub costs: Vec<(f64, CostBreakdown)>,
}

pub fn run_one(
    sys: &SystemConfig,
    inputs: &Inputs,
    level: u32,
    seed: u64,
    params: &CostParameters,
    surges: &[f64],
) -> Result<Run> {
    let demand = scale_demand(&inputs.demand, level, seed)?;
    let design = design_for(sys, inputs, level)?;
    let result = run_scenario(&inputs.net, &demand, &design, seed, RunOptions::default())
        .with_context(|| format!("simulating {} at {level}%", sys.name))?;
    let services = service_costs(sys, &result);
    let surges: Vec<f64> = if sys.kind.uses_crowdsourced() { surges.to_vec() } else { vec![0.0] };
    let costs = surge_table(&services, params, &surges)?;
    let density = demand_density(demand.len() as f64, inputs.net.area_km2())?;
    Ok(Run { system: sys.clone(), level, density, demand, result, costs })
}

/// Runs every (system, level) pair on up to `jobs` threads. Results come back
/// ordered by system, then level, whatever the thread timing.
pub fn run_all(
    systems: &[SystemConfig],
    levels: &[u32],
    inputs: &Inputs,
    seed: u64,
    params: &CostParameters,
    surges: &[f64],
    jobs: usize,
) -> Result<Vec<Run>> {
    let tasks: Vec<(usize, u32)> =
        (0..systems.len()).flat_map(|s| levels.iter().map(move |&l| (s, l))).collect();
    let slots: Mutex<Vec<Option<Result<Run>>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let failed = std::sync::atomic::AtomicBool::new(false);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, tasks.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() || failed.load(Ordering::Relaxed) {
                    break;
                }
                let (s, level) = tasks[i];
                log::info!("running {} at {level}%", systems[s].name);
                let out = run_one(&systems[s], inputs, level, seed, params, surges);
                if out.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                slots.lock().expect("no panics while holding the lock")[i] = Some(out);
            });
        }
    });
    let mut runs = Vec::with_capacity(tasks.len());
    for slot in slots.into_inner().expect("threads joined") {
        match slot {
            Some(r) => runs.push(r?),
            // skipped after another task failed; that error is reported below
            None => continue,
        }
    }
    if runs.len() < tasks.len() {
        bail!("a run failed; no outputs written");
    }
    Ok(runs)
}

/// Name of a GC curve for a surge level.
pub fn variant_name(system: &str, surge: f64) -> String {
    if surge == 0.0 {
        system.to_string()
    } else {
        format!("{system}@surge{surge}")
    }
}

fn base_name(variant: &str) -> &str {
    variant.split('@').next().unwrap_or(variant)
}

/// One GC curve per system and surge level.
pub fn gc_curves(runs: &[Run], systems: &[SystemConfig], vot: f64, threshold: f64) -> Vec<GcCurve> {
    let mut curves = Vec::new();
    for sys in systems {
        let mine: Vec<&Run> = runs.iter().filter(|r| r.system.name == sys.name).collect();
        let Some(first) = mine.first() else { continue };
        for (k, (surge, _)) in first.costs.iter().enumerate() {
            let name = variant_name(&sys.name, *surge);
            let points = mine
                .iter()
                .map(|r| {
                    let nac = r.costs[k].1.nac.as_f64();
                    GcPoint::from_summary(&name, r.level, r.density, &r.result.summary, nac, vot, threshold)
                })
                .collect();
            curves.push(GcCurve::new(&name, points));
        }
    }
    curves
}

fn surge_of(variant: &str) -> f64 {
    variant.split_once("@surge").and_then(|(_, s)| s.parse().ok()).unwrap_or(0.0)
}

/// Crossings between curves of different systems at the same surge level.
/// A system without a crowdsourced service has one curve, compared with
/// every surge variant of the others. Pairs without enough comparable levels
/// produce a warning instead.
pub fn crossings(curves: &[GcCurve], warnings: &mut Vec<String>) -> Vec<SwitchingPoint> {
    let surge_sensitive = |c: &GcCurve| curves.iter().any(|o| o.system.contains('@') && base_name(&o.system) == base_name(&c.system));
    let mut out = Vec::new();
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            if base_name(&a.system) == base_name(&b.system) {
                continue;
            }
            let same_surge = surge_of(&a.system) == surge_of(&b.system);
            if !same_surge && surge_sensitive(a) && surge_sensitive(b) {
                continue;
            }
            match switching_points(a, b) {
                Ok(mut pts) => out.append(&mut pts),
                // surge variants would only repeat the base curves' warning
                Err(e) if !a.system.contains('@') && !b.system.contains('@') => {
                    warnings.push(format!("{} vs {}: {e}", a.system, b.system))
                }
                Err(_) => {}
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct EmissionsRow {
    pub system: String,
    pub level: u32,
    pub report: EmissionsReport,
}

/// Footprint of each run at each electrification level, plus the everyone-
/// drives-alone baseline of each demand level under the name `private_car`.
pub fn emissions_rows(
    runs: &[Run],
    net: &Network,
    factors: &EmissionFactors,
    levels: &[f64],
    warnings: &mut Vec<String>,
) -> Result<Vec<EmissionsRow>> {
    let mut rows = Vec::new();
    for r in runs {
        for &e in levels {
            let report = per_passenger_metrics(&r.result.summary, factors, e)?;
            rows.push(EmissionsRow { system: r.system.name.clone(), level: r.level, report });
        }
    }
    let cache = PathCache::new(net);
    let mut seen: Vec<u32> = Vec::new();
    for r in runs {
        if seen.contains(&r.level) {
            continue;
        }
        seen.push(r.level);
        let base = baseline_private(&r.demand, &cache, factors);
        if !base.excluded.is_empty() {
            warnings.push(format!(
                "private_car at {}%: {} unroutable requests left out",
                r.level,
                base.excluded.len()
            ));
        }
        rows.push(EmissionsRow { system: "private_car".into(), level: r.level, report: base.report });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct EquityRow {
    pub system: String,
    pub level: u32,
    pub report: EquityReport,
}

/// Gini results for runs at the equity levels. Empty without zones.
pub fn equity_rows(runs: &[Run], cfg: &Config, net: &Network, equity_levels: &[u32], warnings: &mut Vec<String>) -> Vec<EquityRow> {
    let Some(zones) = net.zones() else {
        warnings.push("network has no zones; equity skipped".into());
        return Vec::new();
    };
    let mut out = Vec::new();
    for r in runs.iter().filter(|r| equity_levels.contains(&r.level)) {
        let report = equity_report(&r.result.trips, zones, &cfg.analysis.attributes, cfg.analysis.lorenz_ordering);
        for w in &report.warnings {
            warnings.push(format!("{} at {}%: {w}", r.system.name, r.level));
        }
        if report.unzoned_trips > 0 {
            warnings.push(format!("{} at {}%: {} served trips without origin zone", r.system.name, r.level, report.unzoned_trips));
        }
        out.push(EquityRow { system: r.system.name.clone(), level: r.level, report });
    }
    out
}

/// Level closest to the base demand; its first system's logs become the
/// top-level trips.csv and fleet.csv.
pub fn primary_level(levels: &[u32]) -> Option<u32> {
    levels.iter().copied().min_by_key(|l| (l.abs_diff(100), *l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;
    use std::path::Path;

    const CFG: &str = r#"
seed = 5
[network.grid]
rows = 5
cols = 5
spacing_m = 400
speed_mps = 10
zone_block = 2

[demand.synthetic]
count = 40

[supply]
crowdsourced = 2
dedicated = [0,0,0,0,0,0,0,2,2,2,2,2,2,2,2,2,2,2,2,2,2,0,0,0]

[system]
type = "hybrid_odt"
[system.route]
stops = [0, 4, 24]
cruise_speed_mps = 10
"#;

    #[test]
    fn corridor_fleet_is_masked_to_window() {
        let (cfg, _) = parse(CFG, Path::new(".")).unwrap();
        let inputs = load_inputs(&cfg, cfg.seed).unwrap();
        let design = design_for(cfg.system.as_ref().unwrap(), &inputs, 100).unwrap();
        let SystemDesign::HybridOdt { dedicated, .. } = design else { panic!() };
        assert_eq!(dedicated.supply.hourly[7], 2);
        assert_eq!(dedicated.supply.hourly[20], 2);
        assert_eq!(dedicated.supply.hourly[21], 0);
    }

    #[test]
    fn runs_come_back_in_order() {
        let (cfg, _) = parse(CFG, Path::new(".")).unwrap();
        let inputs = load_inputs(&cfg, cfg.seed).unwrap();
        let sys = cfg.system.clone().unwrap();
        let runs = run_all(&[sys], &[50, 100, 200], &inputs, 5, &cfg.costs, &[0.0, 20.0], 3).unwrap();
        let levels: Vec<u32> = runs.iter().map(|r| r.level).collect();
        assert_eq!(levels, vec![50, 100, 200]);
        assert_eq!(runs[1].demand.len(), 40);
        assert_eq!(runs[2].demand.len(), 80);
        assert_eq!(runs[0].costs.len(), 2);
    }

    fn curve(name: &str, gcs: &[f64]) -> GcCurve {
        let points = gcs
            .iter()
            .enumerate()
            .map(|(i, &gc)| GcPoint {
                system: name.into(),
                demand_level: 50 * (i as u32 + 1),
                density: i as f64,
                gc,
                served_fraction: 1.0,
                capacity_exceeded: false,
            })
            .collect();
        GcCurve::new(name, points)
    }

    #[test]
    fn crossings_pair_matching_surges() {
        let curves = [
            curve("a", &[0.0, 10.0]),
            curve("a@surge20", &[1.0, 11.0]),
            curve("b", &[5.0, 5.0]),
            curve("b@surge20", &[6.0, 6.0]),
            curve("c", &[7.0, 7.0]),
        ];
        let mut w = Vec::new();
        let pairs: Vec<(String, String)> =
            crossings(&curves, &mut w).into_iter().map(|p| (p.system_a, p.system_b)).collect();
        let expect = [("a", "b"), ("a", "c"), ("a@surge20", "b@surge20"), ("a@surge20", "c")];
        assert_eq!(pairs, expect.map(|(x, y)| (x.to_string(), y.to_string())));
        assert!(w.is_empty());
    }

    #[test]
    fn primary_level_prefers_base() {
        assert_eq!(primary_level(&[50, 100, 150]), Some(100));
        assert_eq!(primary_level(&[50, 150]), Some(50));
        assert_eq!(primary_level(&[]), None);
    }
}
