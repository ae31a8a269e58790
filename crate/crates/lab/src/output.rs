//! Result tables and the manifest. Everything is written into a staging
//! directory that replaces the output directory only once complete.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use odt_core::efficiency::{GcCurve, SwitchingPoint};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::io::{self, opt};
use crate::study::{primary_level, EmissionsRow, EquityRow, Run};

pub const MANIFEST: &str = "manifest.json";

/// Everything a `run` or `sweep` produces.
#[derive(Debug)]
pub struct Outputs<'a> {
    pub command: &'a str,
    pub scenario: &'a str,
    pub seed: u64,
    pub config_sha256: String,
    pub runs: &'a [Run],
    pub curves: &'a [GcCurve],
    pub switching: &'a [SwitchingPoint],
    pub emissions: &'a [EmissionsRow],
    pub equity: &'a [EquityRow],
    pub warnings: &'a [String],
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    scenario: &'a str,
    seed: u64,
    config_sha256: &'a str,
    outputs: BTreeMap<String, String>,
    warnings: &'a [String],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn write_summary(runs: &[Run], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "system",
        "level",
        "density",
        "requests",
        "served",
        "rejected",
        "waiting_at_horizon",
        "served_fraction",
        "avg_walk_min",
        "avg_wait_min",
        "avg_ivtt_min",
        "avg_trip_km",
        "passenger_km",
        "served_direct_km",
        "total_km",
        "vehicle_hours",
        "operating_hours",
        "avg_vehicles",
        "avg_occupancy",
        "vkm_per_passenger",
    ])?;
    for r in runs {
        let s = &r.result.summary;
        w.write_record([
            r.system.name.clone(),
            r.level.to_string(),
            r.density.to_string(),
            s.requests.to_string(),
            s.served.to_string(),
            s.rejected.to_string(),
            s.waiting_at_horizon.to_string(),
            s.served_fraction().to_string(),
            s.avg_walk_min.to_string(),
            s.avg_wait_min.to_string(),
            s.avg_ivtt_min.to_string(),
            s.avg_trip_km.to_string(),
            s.passenger_km.to_string(),
            s.served_direct_km.to_string(),
            s.total_km.to_string(),
            s.vehicle_hours.to_string(),
            s.operating_hours.to_string(),
            s.avg_vehicles.to_string(),
            s.avg_occupancy.to_string(),
            opt(s.vkm_per_passenger()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_costs(runs: &[Run], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["system", "level", "surge_pct", "cc", "noc", "nac", "per_trip", "served_per_day", "negative_trip_cost"])?;
    for r in runs {
        for (surge, c) in &r.costs {
            w.write_record([
                r.system.name.clone(),
                r.level.to_string(),
                surge.to_string(),
                c.cc.to_string(),
                c.noc.to_string(),
                c.nac.to_string(),
                c.per_trip.map(|p| format!("{p:.4}")).unwrap_or_default(),
                c.served_per_day.to_string(),
                flag(c.negative_trip_cost),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_emissions(rows: &[EmissionsRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "system",
        "level",
        "electrification",
        "total_km_per_day",
        "yearly_ghg_t",
        "vkm_per_passenger",
        "ghg_g_per_pax_km",
    ])?;
    for row in rows {
        let e = &row.report;
        w.write_record([
            row.system.clone(),
            row.level.to_string(),
            e.electrification_level.to_string(),
            e.total_km_per_day.to_string(),
            e.total_yearly_ghg_t.to_string(),
            opt(e.vkm_per_passenger),
            opt(e.ghg_g_per_pax_km),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_gc(curves: &[GcCurve], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["system", "level", "density", "gc", "served_fraction", "capacity_exceeded"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                p.system.clone(),
                p.demand_level.to_string(),
                p.density.to_string(),
                format!("{:.2}", p.gc),
                p.served_fraction.to_string(),
                flag(p.capacity_exceeded),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_switching(points: &[SwitchingPoint], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["system_a", "system_b", "density", "bracket_lo", "bracket_hi", "level_lo", "level_hi"])?;
    for s in points {
        w.write_record([
            s.system_a.clone(),
            s.system_b.clone(),
            s.density.to_string(),
            s.bracket_lo.to_string(),
            s.bracket_hi.to_string(),
            s.level_lo.to_string(),
            s.level_hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_equity(rows: &[EquityRow], gini_path: &Path, lorenz_path: &Path) -> Result<()> {
    let mut g = writer(gini_path)?;
    g.write_record(["system", "level", "attribute", "metric", "gini"])?;
    let mut l = writer(lorenz_path)?;
    l.write_record(["system", "level", "attribute", "metric", "point", "cum_weight_share", "cum_outcome_share"])?;
    for row in rows {
        for r in &row.report.results {
            let key = [row.system.clone(), row.level.to_string(), r.attribute.name().into(), r.metric.as_str().into()];
            let mut rec = key.to_vec();
            rec.push(r.gini.to_string());
            g.write_record(&rec)?;
            for (i, (x, y)) in r.curve.points.iter().enumerate() {
                let mut rec = key.to_vec();
                rec.extend([i.to_string(), x.to_string(), y.to_string()]);
                l.write_record(&rec)?;
            }
        }
    }
    g.flush()?;
    l.flush()?;
    Ok(())
}

/// Writes every table into `dir`, then the manifest over their hashes.
pub fn write_all(out: &Outputs<'_>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let levels: Vec<u32> = out.runs.iter().map(|r| r.level).collect();
    if let Some(level) = primary_level(&levels) {
        let primary = out.runs.iter().find(|r| r.level == level).expect("level taken from runs");
        io::write_trips(&primary.result, &dir.join("trips.csv"))?;
        io::write_fleet(&primary.result, &dir.join("fleet.csv"))?;
    }
    for r in out.runs {
        let sub = dir.join("runs").join(&r.system.name).join(format!("L{}", r.level));
        fs::create_dir_all(&sub)?;
        io::write_trips(&r.result, &sub.join("trips.csv"))?;
        io::write_fleet(&r.result, &sub.join("fleet.csv"))?;
    }
    write_summary(out.runs, &dir.join("summary.csv"))?;
    write_costs(out.runs, &dir.join("costs.csv"))?;
    write_emissions(out.emissions, &dir.join("emissions.csv"))?;
    let (base, surged): (Vec<GcCurve>, Vec<GcCurve>) = out.curves.iter().cloned().partition(|c| !c.system.contains('@'));
    write_gc(&base, &dir.join("gc_curve.csv"))?;
    write_gc(&surged, &dir.join("gc_curve_surge.csv"))?;
    write_switching(out.switching, &dir.join("switching_points.csv"))?;
    write_equity(out.equity, &dir.join("gini.csv"), &dir.join("lorenz.csv"))?;

    let mut outputs = BTreeMap::new();
    hash_tree(dir, dir, &mut outputs)?;
    let manifest = Manifest {
        tool: "odt-lab",
        version: env!("CARGO_PKG_VERSION"),
        command: out.command,
        scenario: out.scenario,
        seed: out.seed,
        config_sha256: &out.config_sha256,
        outputs,
        warnings: out.warnings,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    io::write_text(&dir.join(MANIFEST), &text)
}

/// sha256 of every file under `dir`, keyed by '/'-separated relative path.
fn hash_tree(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            hash_tree(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("under root");
            let key: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.insert(key.join("/"), sha256_hex(&fs::read(&path)?));
        }
    }
    Ok(())
}

/// Runs `write` into a staging directory next to `target`, then moves it into
/// place. An existing `target` is replaced only if it is empty or holds a
/// manifest from an earlier run. On failure nothing is left behind.
pub fn write_staged(target: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if target.exists() {
        let empty = target.is_dir() && fs::read_dir(target)?.next().is_none();
        if !empty && !target.join(MANIFEST).is_file() {
            bail!("{} exists and is not an odt-lab output directory; refusing to overwrite", target.display());
        }
    }
    let parent = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let name = target.file_name().context("output path has no directory name")?.to_string_lossy().into_owned();
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    if let Err(e) = write(&staging) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if target.exists() {
        fs::remove_dir_all(target).with_context(|| format!("cannot replace {}", target.display()))?;
    }
    fs::rename(&staging, target).with_context(|| format!("cannot move outputs to {}", target.display()))?;
    Ok(())
}
