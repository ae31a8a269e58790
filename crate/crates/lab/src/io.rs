//! CSV readers for network, demand and supply files, and writers for run logs.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use odt_core::demand::{DemandSet, RideRequest, SupplySchedule};
use odt_core::engine::{SimulationResult, TripOutcome};
use odt_core::network::{Attribute, Edge, Network, Node, Zone};
use odt_core::ZoneId;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct NodeRow {
    id: u32,
    x: f64,
    y: f64,
    #[serde(default)]
    zone_id: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    id: u32,
    from: u32,
    to: u32,
    length_m: f64,
    speed_mps: f64,
}

#[derive(Debug, Deserialize)]
struct ZoneRow {
    zone_id: u32,
    population: f64,
    #[serde(default)]
    income: Option<f64>,
    #[serde(default)]
    education: Option<f64>,
    #[serde(default)]
    employment: Option<f64>,
    #[serde(default)]
    young_adults: Option<f64>,
    #[serde(default)]
    seniors: Option<f64>,
    #[serde(default)]
    single_parents: Option<f64>,
    #[serde(default)]
    pop_density: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RequestRow {
    id: u32,
    time_s: f64,
    origin: u32,
    destination: u32,
}

#[derive(Debug, Deserialize)]
struct SupplyRow {
    hour: usize,
    vehicles: u32,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        // header is line 1
        out.push(row.with_context(|| format!("{}: bad row on line {}", path.display(), i + 2))?);
    }
    Ok(out)
}

/// Reads a network. Without an explicit area the nodes' bounding box is used.
pub fn read_network(
    nodes_path: &Path,
    edges_path: &Path,
    zones_path: Option<&Path>,
    area_km2: Option<f64>,
) -> Result<Network> {
    let node_rows: Vec<NodeRow> = read_rows(nodes_path)?;
    let edge_rows: Vec<EdgeRow> = read_rows(edges_path)?;
    let zones = match zones_path {
        Some(p) => Some(read_zones(p)?),
        None => None,
    };
    let nodes: Vec<Node> = node_rows
        .iter()
        .map(|r| Node { zone_id: r.zone_id.map(ZoneId), ..Node::new(r.id, r.x, r.y) })
        .collect();
    let edges = edge_rows.iter().map(|r| Edge::new(r.id, r.from, r.to, r.length_m, r.speed_mps)).collect();
    let area = match area_km2 {
        Some(a) => a,
        None => bounding_box_km2(&nodes),
    };
    Network::new(nodes, edges, zones, area)
        .with_context(|| format!("invalid network in {} / {}", nodes_path.display(), edges_path.display()))
}

fn bounding_box_km2(nodes: &[Node]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for n in nodes {
        x0 = x0.min(n.x);
        x1 = x1.max(n.x);
        y0 = y0.min(n.y);
        y1 = y1.max(n.y);
    }
    (x1 - x0) * (y1 - y0) / 1e6
}

pub fn read_zones(path: &Path) -> Result<Vec<Zone>> {
    let rows: Vec<ZoneRow> = read_rows(path)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let mut z = Zone::new(r.zone_id, r.population);
            let values = [
                r.income,
                r.education,
                r.employment,
                r.young_adults,
                r.seniors,
                r.single_parents,
                r.pop_density,
            ];
            for (attr, v) in Attribute::ALL.into_iter().zip(values) {
                z.set_attribute(attr, v);
            }
            z
        })
        .collect())
}

pub fn read_demand(path: &Path) -> Result<DemandSet> {
    let rows: Vec<RequestRow> = read_rows(path)?;
    let reqs = rows.iter().map(|r| RideRequest::new(r.id, r.time_s, r.origin, r.destination)).collect();
    DemandSet::new(reqs).with_context(|| format!("invalid requests in {}", path.display()))
}

/// Hours not listed have no vehicles.
pub fn read_supply(path: &Path) -> Result<SupplySchedule> {
    let rows: Vec<SupplyRow> = read_rows(path)?;
    let mut hourly = [0u32; 24];
    let mut seen = [false; 24];
    for r in rows {
        if r.hour > 23 {
            bail!("{}: hour {} outside 0..=23", path.display(), r.hour);
        }
        if seen[r.hour] {
            bail!("{}: hour {} listed twice", path.display(), r.hour);
        }
        seen[r.hour] = true;
        hourly[r.hour] = r.vehicles;
    }
    Ok(SupplySchedule::new(hourly))
}

pub fn write_network(net: &Network, dir: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("nodes.csv"))?;
    w.write_record(["id", "x", "y", "zone_id"])?;
    for n in net.nodes() {
        let zone = n.zone_id.map(|z| z.to_string()).unwrap_or_default();
        w.write_record([n.id.to_string(), n.x.to_string(), n.y.to_string(), zone])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("edges.csv"))?;
    w.write_record(["id", "from", "to", "length_m", "speed_mps"])?;
    for e in net.edges() {
        w.write_record([
            e.id.to_string(),
            e.from.to_string(),
            e.to.to_string(),
            e.length_m.to_string(),
            e.speed_mps.to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(zones) = net.zones() {
        let mut w = csv::Writer::from_path(dir.join("zones.csv"))?;
        let mut header = vec!["zone_id", "population"];
        header.extend(Attribute::ALL.iter().map(|a| a.name()));
        w.write_record(&header)?;
        for z in zones {
            let mut row = vec![z.id.to_string(), z.population.to_string()];
            row.extend(Attribute::ALL.iter().map(|&a| opt(z.attribute(a))));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_demand(demand: &DemandSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "time_s", "origin", "destination"])?;
    for r in demand.requests() {
        w.write_record([r.id.to_string(), r.time_s.to_string(), r.origin.to_string(), r.destination.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_supply(supply: &SupplySchedule, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["hour", "vehicles"])?;
    for (h, v) in supply.hourly.iter().enumerate() {
        w.write_record([h.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const TRIPS_HEADER: [&str; 10] = [
    "request_id",
    "mode",
    "served",
    "walk_min",
    "wait_min",
    "ivtt_min",
    "length_km",
    "origin_zone",
    "dest_zone",
    "reject_reason",
];

pub const FLEET_HEADER: [&str; 4] = ["vehicle_id", "service_hours", "km", "avg_occupancy"];

/// One row per request. Requests still queued at the end of the day carry
/// their accrued wait and the reason `waiting_at_horizon`.
pub fn write_trips(result: &SimulationResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRIPS_HEADER)?;
    for t in &result.trips {
        let reason = match t.outcome {
            TripOutcome::Served => "",
            TripOutcome::Rejected(r) => r,
            TripOutcome::WaitingAtHorizon => "waiting_at_horizon",
        };
        let zone = |z: Option<ZoneId>| z.map(|z| z.to_string()).unwrap_or_default();
        w.write_record([
            t.request.to_string(),
            t.mode.as_str().to_string(),
            u8::from(t.outcome == TripOutcome::Served).to_string(),
            opt(t.walk_min),
            opt(t.wait_min),
            opt(t.ivtt_min),
            opt(t.length_km),
            zone(t.origin_zone),
            zone(t.destination_zone),
            reason.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fleet(result: &SimulationResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FLEET_HEADER)?;
    for v in &result.vehicles {
        let occupancy = if v.service_s > 0.0 { v.occupancy_pax_s / v.service_s } else { 0.0 };
        w.write_record([
            v.id.to_string(),
            (v.service_s / 3600.0).to_string(),
            v.km.to_string(),
            occupancy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Parsed trips.csv row, for reports and cross-checks.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct TripRow {
    pub request_id: u32,
    pub mode: String,
    pub served: u8,
    pub walk_min: Option<f64>,
    pub wait_min: Option<f64>,
    pub ivtt_min: Option<f64>,
    pub length_km: Option<f64>,
    pub origin_zone: Option<u32>,
    pub dest_zone: Option<u32>,
    pub reject_reason: Option<String>,
}

pub fn read_trips(path: &Path) -> Result<Vec<TripRow>> {
    read_rows(path)
}
