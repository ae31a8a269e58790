use odt_core::demand::{generate_synthetic_demand, scale_demand, DemandSet, SupplySchedule};
use odt_core::dispatch::{RouteSpec, DEFAULT_MAX_DETOUR, DEFAULT_MAX_WAIT_S};
use odt_core::engine::{
    run_scenario, CrowdsourcedSpec, DedicatedSpec, FixedRouteSpec, RunOptions, SimulationResult, SystemDesign,
    TripOutcome,
};
use odt_core::network::{assign_block_zones, generate_grid, Network};
use odt_core::NodeId;

const FLAT: [f64; 24] = [1.0; 24];

fn setup() -> (Network, DemandSet) {
    let grid = generate_grid(6, 6, 400.0, 10.0, 5).unwrap();
    let net = assign_block_zones(&grid, 6, 3, 5).unwrap();
    let demand = generate_synthetic_demand(&net, 80, &FLAT, 5).unwrap();
    (net, demand)
}

fn crowd(shared: bool, n: u32) -> CrowdsourcedSpec {
    CrowdsourcedSpec { shared, max_detour: DEFAULT_MAX_DETOUR, supply: SupplySchedule::constant(n) }
}

fn dedicated(n: u32) -> DedicatedSpec {
    DedicatedSpec { max_detour: DEFAULT_MAX_DETOUR, max_wait_s: DEFAULT_MAX_WAIT_S, supply: SupplySchedule::constant(n) }
}

fn route() -> RouteSpec {
    RouteSpec::new((0..6).map(|i| NodeId(i * 7)).collect(), 10.0)
}

fn designs() -> Vec<(&'static str, SystemDesign)> {
    vec![
        ("exclusive", SystemDesign::Crowdsourced(crowd(false, 3))),
        ("shared", SystemDesign::Crowdsourced(crowd(true, 3))),
        ("darp", SystemDesign::Dedicated(dedicated(2))),
        ("frt", SystemDesign::FixedRoute(FixedRouteSpec { route: route(), vehicles: 2 })),
        (
            "hybrid_frt",
            SystemDesign::HybridFrt { frt: FixedRouteSpec { route: route(), vehicles: 2 }, crowdsourced: crowd(true, 2) },
        ),
        (
            "hybrid_odt",
            SystemDesign::HybridOdt { corridor: route(), dedicated: dedicated(1), crowdsourced: crowd(true, 2) },
        ),
    ]
}

fn check_invariants(name: &str, res: &SimulationResult, demand: &DemandSet) {
    let s = &res.summary;
    assert_eq!(res.trips.len(), demand.len(), "{name}");
    assert_eq!(s.served + s.rejected + s.waiting_at_horizon, demand.len(), "{name}");
    for t in &res.trips {
        match t.outcome {
            TripOutcome::Served => {
                let (p, d) = (t.pickup_time_s.unwrap(), t.dropoff_time_s.unwrap());
                assert!(t.request_time_s <= p + 1e-9 && p <= d, "{name}: request {} times out of order", t.request);
                assert!(t.wait_min.unwrap() >= 0.0 && t.ivtt_min.unwrap() >= 0.0 && t.walk_min.unwrap() >= 0.0);
                assert!(t.length_km.unwrap() >= 0.0);
            }
            TripOutcome::Rejected(reason) => {
                assert!(!reason.is_empty());
                assert!(t.pickup_time_s.is_none(), "{name}: rejected trip has a pickup");
            }
            TripOutcome::WaitingAtHorizon => assert!(t.dropoff_time_s.is_none()),
        }
    }
    assert!(res.events.windows(2).all(|w| w[0].time_s <= w[1].time_s), "{name}: events out of order");
    for v in &res.vehicles {
        assert!(v.km >= 0.0 && v.service_s >= 0.0 && v.occupancy_pax_s >= 0.0, "{name}: vehicle {}", v.id);
    }
    let fleet_km: f64 = res.vehicles.iter().map(|v| v.km).sum();
    assert!((s.total_km - fleet_km).abs() <= 1e-6 * fleet_km.max(1.0), "{name}: total km {} vs {fleet_km}", s.total_km);
}

#[test]
fn every_design_conserves_requests() {
    let (net, base) = setup();
    for level in [50, 100, 300] {
        let demand = scale_demand(&base, level, 3).unwrap();
        for (name, design) in designs() {
            let res = run_scenario(&net, &demand, &design, 3, RunOptions::default()).unwrap();
            check_invariants(name, &res, &demand);
        }
    }
}

#[test]
fn same_seed_same_logs() {
    let (net, demand) = setup();
    for (name, design) in designs() {
        let a = run_scenario(&net, &demand, &design, 42, RunOptions::default()).unwrap();
        let b = run_scenario(&net, &demand, &design, 42, RunOptions::default()).unwrap();
        assert_eq!(a.trips, b.trips, "{name}");
        assert_eq!(a.vehicles, b.vehicles, "{name}");
        assert_eq!(a.summary, b.summary, "{name}");
    }
}

#[test]
fn no_vehicles_rejects_everything() {
    let (net, demand) = setup();
    let res = run_scenario(&net, &demand, &SystemDesign::Crowdsourced(crowd(false, 0)), 1, RunOptions::default()).unwrap();
    assert_eq!(res.summary.served, 0);
    assert!(res.vehicles.iter().all(|v| v.km == 0.0));
}

#[test]
fn invalid_designs_are_refused() {
    let (net, demand) = setup();
    let mut bad = crowd(true, 2);
    bad.max_detour = 0.5;
    assert!(run_scenario(&net, &demand, &SystemDesign::Crowdsourced(bad), 1, RunOptions::default()).is_err());
    let mut r = route();
    r.stops = vec![NodeId(0)];
    let frt = SystemDesign::FixedRoute(FixedRouteSpec { route: r, vehicles: 1 });
    assert!(run_scenario(&net, &demand, &frt, 1, RunOptions::default()).is_err());
}
