//! Plain-text report over an output directory, and the parameter listing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use odt_core::costing::CostParameters;
use odt_core::emissions::EmissionFactors;

use crate::config::AnalysisConfig;

type Rows = Vec<BTreeMap<String, String>>;

fn read_table(path: &Path) -> Result<Option<Rows>> {
    if !path.exists() {
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("bad row in {}", path.display()))?;
        rows.push(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect());
    }
    Ok(Some(rows))
}

fn get<'a>(row: &'a BTreeMap<String, String>, key: &str) -> &'a str {
    row.get(key).map(String::as_str).unwrap_or("")
}

fn level_of(row: &BTreeMap<String, String>) -> u32 {
    get(row, "level").parse().unwrap_or(0)
}

fn num(s: &str, decimals: usize) -> String {
    match s.parse::<f64>() {
        Ok(v) => format!("{v:.decimals$}"),
        Err(_) => "-".into(),
    }
}

/// Renders the GC table, switching points, emissions and Gini matrix found
/// in `dir`. Missing tables are skipped.
pub fn render(dir: &Path) -> Result<String> {
    if !dir.join(crate::output::MANIFEST).is_file() {
        anyhow::bail!("{} has no manifest.json; not an odt-lab output directory", dir.display());
    }
    let mut s = String::new();

    if let Some(gc) = read_table(&dir.join("gc_curve.csv"))? {
        let systems: Vec<String> = gc.iter().map(|r| get(r, "system").to_string()).collect::<BTreeSet<_>>().into_iter().collect();
        let levels: BTreeSet<u32> = gc.iter().map(level_of).collect();
        writeln!(s, "Generalized cost (CAD/yr; * = served fraction below threshold)")?;
        write!(s, "{:>6} {:>10}", "level", "density")?;
        for sys in &systems {
            write!(s, " {:>22}", sys)?;
        }
        writeln!(s)?;
        for l in levels {
            let density = gc.iter().find(|r| level_of(r) == l).map(|r| num(get(r, "density"), 2)).unwrap_or_default();
            write!(s, "{l:>6} {density:>10}")?;
            for sys in &systems {
                let cell = gc
                    .iter()
                    .find(|r| level_of(r) == l && get(r, "system") == sys)
                    .map(|r| {
                        let mark = if get(r, "capacity_exceeded") == "1" { "*" } else { "" };
                        format!("{}{mark}", num(get(r, "gc"), 0))
                    })
                    .unwrap_or_else(|| "-".into());
                write!(s, " {cell:>22}")?;
            }
            writeln!(s)?;
        }
        writeln!(s)?;
    }

    if let Some(sp) = read_table(&dir.join("switching_points.csv"))? {
        writeln!(s, "Switching points")?;
        if sp.is_empty() {
            writeln!(s, "  no switching points in sweep range")?;
        }
        for r in &sp {
            writeln!(
                s,
                "  {} / {}: {} req/km2/day (between levels {} and {})",
                get(r, "system_a"),
                get(r, "system_b"),
                num(get(r, "density"), 2),
                get(r, "level_lo"),
                get(r, "level_hi"),
            )?;
        }
        writeln!(s)?;
    }

    if let Some(em) = read_table(&dir.join("emissions.csv"))? {
        let levels: Vec<u32> = em.iter().map(level_of).collect();
        if let Some(base) = crate::study::primary_level(&levels) {
            writeln!(s, "Emissions at {base}% demand")?;
            writeln!(s, "{:>24} {:>6} {:>12} {:>12} {:>10} {:>12}", "system", "elec", "km/day", "t/yr", "vkm/pax", "g/pax-km")?;
            for r in em.iter().filter(|r| level_of(r) == base) {
                writeln!(
                    s,
                    "{:>24} {:>6} {:>12} {:>12} {:>10} {:>12}",
                    get(r, "system"),
                    num(get(r, "electrification"), 1),
                    num(get(r, "total_km_per_day"), 1),
                    num(get(r, "yearly_ghg_t"), 3),
                    num(get(r, "vkm_per_passenger"), 3),
                    num(get(r, "ghg_g_per_pax_km"), 1),
                )?;
            }
            writeln!(s)?;
        }
    }

    if let Some(gini) = read_table(&dir.join("gini.csv"))? {
        let mut groups: BTreeMap<(String, u32), Vec<&BTreeMap<String, String>>> = BTreeMap::new();
        for r in &gini {
            groups.entry((get(r, "system").to_string(), level_of(r))).or_default().push(r);
        }
        for ((sys, level), rows) in groups {
            writeln!(s, "Gini, {sys} at {level}%")?;
            writeln!(s, "{:>16} {:>7} {:>7} {:>7}", "attribute", "usage", "wait", "ivtt")?;
            let attrs: Vec<&str> = rows.iter().map(|r| get(r, "attribute")).collect::<BTreeSet<_>>().into_iter().collect();
            for a in attrs {
                write!(s, "{a:>16}")?;
                for m in ["usage", "wait", "ivtt"] {
                    let cell = rows
                        .iter()
                        .find(|r| get(r, "attribute") == a && get(r, "metric") == m)
                        .map(|r| num(get(r, "gini"), 3))
                        .unwrap_or_else(|| "-".into());
                    write!(s, " {cell:>7}")?;
                }
                writeln!(s)?;
            }
            writeln!(s)?;
        }
    }
    Ok(s)
}

/// Default parameters with their units.
pub fn render_params() -> String {
    let c = CostParameters::default();
    let e = EmissionFactors::default();
    let a = AnalysisConfig::default();
    let mut s = String::new();
    let rows: [(&str, String, &str); 21] = [
        ("costs.fixed_fee_exclusive", c.fixed_fee_exclusive.to_string(), "CAD/trip"),
        ("costs.fixed_fee_shared", c.fixed_fee_shared.to_string(), "CAD/trip"),
        ("costs.beta_time", c.beta_time.to_string(), "CAD/min"),
        ("costs.beta_length", c.beta_length.to_string(), "CAD/km"),
        ("costs.fare", c.fare.to_string(), "CAD/trip"),
        ("costs.vehicle_price", c.vehicle_price.to_string(), "CAD"),
        ("costs.oc_hour", c.oc_hour.to_string(), "CAD/vehicle-hour"),
        ("costs.oc_km", c.oc_km.to_string(), "CAD/vehicle-km"),
        ("costs.wage", c.wage.to_string(), "CAD/hour"),
        ("costs.other_costs", c.other_costs.to_string(), "CAD/yr"),
        ("costs.frt_vkm", "per_vehicle".into(), "per_vehicle | fleet_total"),
        ("emissions.ghg_km_transit", e.ghg_km_transit.to_string(), "t/km"),
        ("emissions.ghg_km_private", e.ghg_km_private.to_string(), "t/km"),
        ("emissions.ev_kwh_per_km", e.ev_kwh_per_km.to_string(), "kWh/km"),
        ("emissions.grid_g_per_kwh", e.grid_g_per_kwh.to_string(), "g/kWh"),
        ("analysis.demand_levels", format!("{:?}", a.demand_levels), "% of base"),
        ("analysis.surge_pct", format!("{:?}", a.surge_pct), "%"),
        ("analysis.electrification_levels", format!("{:?}", a.electrification_levels), "share"),
        ("analysis.vot", a.vot.to_string(), "CAD/hour"),
        ("analysis.served_threshold", a.served_threshold.to_string(), "share"),
        ("analysis.equity_levels", format!("{:?}", a.equity_levels), "% of base"),
    ];
    for (k, v, unit) in rows {
        let _ = writeln!(s, "{k:<34} {v:<40} {unit}");
    }
    s
}
