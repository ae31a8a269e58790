//! Scenario configuration: a TOML file with the sections `network`, `demand`,
//! `supply`, `system`, `costs`, `emissions`, `analysis` and optionally
//! `sweep`. Key names are listed in the README.
//!
//! [`parse`] collects every problem instead of stopping at the first one.
//! Unknown keys are warnings; missing mandatory keys and out-of-range values
//! are errors. Omitted parameters take their documented defaults.

use std::path::{Path, PathBuf};

use odt_core::costing::{CostParameters, VkmBasis, DEFAULT_SURGE_PCT};
use odt_core::demand::SupplySlope;
use odt_core::dispatch::{RouteSpec, DEFAULT_MAX_DETOUR, DEFAULT_MAX_WAIT_S};
use odt_core::efficiency::{DEFAULT_SERVED_THRESHOLD, DEFAULT_VOT};
use odt_core::emissions::{EmissionFactors, DEFAULT_ELECTRIFICATION_LEVELS};
use odt_core::equity::LorenzOrdering;
use odt_core::network::Attribute;
use odt_core::NodeId;
use toml::{Table, Value};

/// Hourly request weights used by synthetic demand when none is given:
/// quiet nights, morning and afternoon peaks.
pub const DEFAULT_PROFILE: [f64; 24] = [
    0.5, 0.3, 0.2, 0.2, 0.3, 0.8, 2.0, 4.0, 5.0, 4.0, 3.5, 3.5, 4.0, 3.5, 3.5, 4.0, 5.0, 5.5, 4.5, 3.5, 2.5, 2.0, 1.5,
    1.0,
];

pub const DEFAULT_DEMAND_LEVELS: [u32; 10] = [50, 100, 150, 200, 250, 300, 350, 400, 450, 500];

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    Files { nodes: PathBuf, edges: PathBuf, zones: Option<PathBuf>, area_km2: Option<f64> },
    /// Generated grid; `zone_block` groups block × block nodes into a zone.
    Grid { rows: usize, cols: usize, spacing_m: f64, speed_mps: f64, zone_block: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSource {
    File(PathBuf),
    Synthetic { count: usize, profile: [f64; 24] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupplySource {
    Constant(u32),
    Hourly([u32; 24]),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupplyConfig {
    pub crowdsourced: Option<SupplySource>,
    pub dedicated: Option<SupplySource>,
    pub alpha: SupplySlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    CrowdsourcedExclusive,
    CrowdsourcedShared,
    DedicatedDarp,
    Frt,
    HybridFrt,
    HybridOdt,
}

impl SystemKind {
    pub const ALL: [SystemKind; 6] = [
        SystemKind::CrowdsourcedExclusive,
        SystemKind::CrowdsourcedShared,
        SystemKind::DedicatedDarp,
        SystemKind::Frt,
        SystemKind::HybridFrt,
        SystemKind::HybridOdt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::CrowdsourcedExclusive => "crowdsourced_exclusive",
            SystemKind::CrowdsourcedShared => "crowdsourced_shared",
            SystemKind::DedicatedDarp => "dedicated_darp",
            SystemKind::Frt => "frt",
            SystemKind::HybridFrt => "hybrid_frt",
            SystemKind::HybridOdt => "hybrid_odt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        SystemKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn needs_route(self) -> bool {
        matches!(self, SystemKind::Frt | SystemKind::HybridFrt | SystemKind::HybridOdt)
    }

    pub fn uses_crowdsourced(self) -> bool {
        matches!(
            self,
            SystemKind::CrowdsourcedExclusive | SystemKind::CrowdsourcedShared | SystemKind::HybridFrt | SystemKind::HybridOdt
        )
    }

    pub fn uses_dedicated(self) -> bool {
        matches!(self, SystemKind::DedicatedDarp | SystemKind::HybridOdt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub name: String,
    pub kind: SystemKind,
    pub alpha: SupplySlope,
    pub max_detour: f64,
    pub max_wait_s: f64,
    /// Crowdsourced part of a hybrid pools rides.
    pub hybrid_shared: bool,
    pub route: Option<RouteSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub demand_levels: Vec<u32>,
    pub surge_pct: Vec<f64>,
    pub electrification_levels: Vec<f64>,
    pub vot: f64,
    pub served_threshold: f64,
    pub equity_levels: Vec<u32>,
    pub attributes: Vec<Attribute>,
    pub lorenz_ordering: LorenzOrdering,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            demand_levels: DEFAULT_DEMAND_LEVELS.to_vec(),
            surge_pct: DEFAULT_SURGE_PCT.to_vec(),
            electrification_levels: DEFAULT_ELECTRIFICATION_LEVELS.to_vec(),
            vot: DEFAULT_VOT,
            served_threshold: DEFAULT_SERVED_THRESHOLD,
            equity_levels: vec![100, 500],
            attributes: Attribute::ALL.to_vec(),
            lorenz_ordering: LorenzOrdering::PerCapita,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: String,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub network: NetworkSource,
    pub demand: DemandSource,
    pub supply: SupplyConfig,
    /// The `[system]` section, used by `run`.
    pub system: Option<SystemConfig>,
    /// `[[sweep.systems]]`, used by `sweep`.
    pub sweep: Vec<SystemConfig>,
    pub costs: CostParameters,
    pub emissions: EmissionFactors,
    pub analysis: AnalysisConfig,
}

impl Config {
    /// Systems compared by a sweep; falls back to `[system]`.
    pub fn sweep_systems(&self) -> Vec<SystemConfig> {
        if self.sweep.is_empty() {
            self.system.iter().cloned().collect()
        } else {
            self.sweep.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

/// Reads and validates a config file. Relative paths are resolved against
/// the file's directory.
pub fn load(path: &Path) -> Result<(Config, Vec<String>), Diagnostics> {
    let text = std::fs::read_to_string(path).map_err(|e| Diagnostics {
        errors: vec![format!("cannot read config {}: {e}", path.display())],
        warnings: vec![],
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

/// Parses config text; `base` anchors relative file paths.
pub fn parse(text: &str, base: &Path) -> Result<(Config, Vec<String>), Diagnostics> {
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return Err(Diagnostics { errors: vec![format!("config is not valid TOML: {e}")], warnings: vec![] }),
    };
    let mut p = Parser { base, diag: Diagnostics::default() };
    let cfg = p.config(&root);
    if p.diag.errors.is_empty() {
        Ok((cfg.expect("no errors means a config"), p.diag.warnings))
    } else {
        Err(p.diag)
    }
}

struct Parser<'a> {
    base: &'a Path,
    diag: Diagnostics,
}

const TOP_KEYS: &[&str] =
    &["scenario", "seed", "out_dir", "network", "demand", "supply", "system", "costs", "emissions", "analysis", "sweep"];
const SYSTEM_KEYS: &[&str] = &["name", "type", "alpha", "max_detour", "max_wait_min", "hybrid_shared", "route"];
const ROUTE_KEYS: &[&str] = &[
    "stops",
    "cruise_speed_mps",
    "window_start_h",
    "window_end_h",
    "catchment_min",
    "walk_speed_kmh",
    "dwell_s",
    "vehicles_below_threshold",
    "vehicles_from_threshold",
    "threshold_level_pct",
];

impl Parser<'_> {
    fn error(&mut self, msg: String) {
        self.diag.errors.push(msg);
    }

    fn keys(&mut self, t: &Table, path: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                let at = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                self.diag.warnings.push(format!("{at}: unknown key ignored"));
            }
        }
    }

    fn table<'t>(&mut self, t: &'t Table, key: &str, path: &str) -> Option<&'t Table> {
        match t.get(key)? {
            Value::Table(inner) => Some(inner),
            _ => {
                self.error(format!("{}: expected a table", join(path, key)));
                None
            }
        }
    }

    fn float(&mut self, t: &Table, key: &str, path: &str) -> Option<f64> {
        match t.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.error(format!("{}: expected a number", join(path, key)));
                None
            }
        }
    }

    fn float_in(&mut self, t: &Table, key: &str, path: &str, ok: impl Fn(f64) -> bool, what: &str) -> Option<f64> {
        let v = self.float(t, key, path)?;
        if ok(v) {
            Some(v)
        } else {
            self.error(format!("{}: {v} is out of range, must be {what}", join(path, key)));
            None
        }
    }

    fn int(&mut self, t: &Table, key: &str, path: &str, min: i64, max: i64) -> Option<i64> {
        match t.get(key)? {
            Value::Integer(i) if (min..=max).contains(i) => Some(*i),
            Value::Integer(i) => {
                self.error(format!("{}: {i} is out of range {min}..={max}", join(path, key)));
                None
            }
            _ => {
                self.error(format!("{}: expected an integer", join(path, key)));
                None
            }
        }
    }

    fn string(&mut self, t: &Table, key: &str, path: &str) -> Option<String> {
        match t.get(key)? {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.error(format!("{}: expected a string", join(path, key)));
                None
            }
        }
    }

    fn boolean(&mut self, t: &Table, key: &str, path: &str) -> Option<bool> {
        match t.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.error(format!("{}: expected true or false", join(path, key)));
                None
            }
        }
    }

    fn floats(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<f64>> {
        let v = t.get(key)?;
        let items = match v {
            Value::Array(a) => a,
            _ => {
                self.error(format!("{}: expected an array of numbers", join(path, key)));
                return None;
            }
        };
        let mut out = Vec::new();
        for item in items {
            match item {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.error(format!("{}: expected an array of numbers", join(path, key)));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn ints(&mut self, t: &Table, key: &str, path: &str, min: i64, max: i64) -> Option<Vec<u32>> {
        let v = t.get(key)?;
        let Value::Array(items) = v else {
            self.error(format!("{}: expected an array of integers", join(path, key)));
            return None;
        };
        let mut out = Vec::new();
        for item in items {
            match item {
                Value::Integer(i) if (min..=max).contains(i) => out.push(*i as u32),
                Value::Integer(i) => {
                    self.error(format!("{}: {i} is out of range {min}..={max}", join(path, key)));
                    return None;
                }
                _ => {
                    self.error(format!("{}: expected an array of integers", join(path, key)));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn file(&mut self, t: &Table, key: &str, path: &str) -> Option<PathBuf> {
        let rel = self.string(t, key, path)?;
        let full = self.base.join(&rel);
        if full.is_file() {
            Some(full)
        } else {
            self.error(format!("{}: file not found: {}", join(path, key), full.display()));
            None
        }
    }

    fn config(&mut self, root: &Table) -> Option<Config> {
        self.keys(root, "", TOP_KEYS);
        let scenario = self.string(root, "scenario", "").unwrap_or_else(|| "scenario".into());
        let seed = self.int(root, "seed", "", 0, i64::MAX).unwrap_or(1) as u64;
        let out_dir = self.string(root, "out_dir", "").map(|s| self.base.join(s));

        let network = match self.table(root, "network", "") {
            Some(t) => self.network(t),
            None => {
                self.error("network: missing section".into());
                None
            }
        };
        let demand = match self.table(root, "demand", "") {
            Some(t) => self.demand(t),
            None => {
                self.error("demand: missing section".into());
                None
            }
        };
        let supply = match self.table(root, "supply", "") {
            Some(t) => self.supply(t),
            None => Some(SupplyConfig { crowdsourced: None, dedicated: None, alpha: SupplySlope::Zero }),
        };
        let template = self.table(root, "system", "").cloned();
        let system = template.as_ref().and_then(|t| self.system(t, None, "system", supply.as_ref()));
        let mut sweep = Vec::new();
        if let Some(s) = self.table(root, "sweep", "") {
            self.keys(s, "sweep", &["systems"]);
            match s.get("systems") {
                Some(Value::Array(items)) => {
                    for (i, item) in items.iter().enumerate() {
                        let path = format!("sweep.systems[{i}]");
                        match item {
                            Value::Table(t) => {
                                if let Some(sys) = self.system(t, template.as_ref(), &path, supply.as_ref()) {
                                    sweep.push(sys);
                                }
                            }
                            _ => self.error(format!("{path}: expected a table")),
                        }
                    }
                }
                Some(_) => self.error("sweep.systems: expected an array of tables".into()),
                None => {}
            }
        }
        if template.is_none() && sweep.is_empty() {
            self.error("system: missing section (or give [[sweep.systems]])".into());
        }
        let mut names: Vec<&str> = sweep.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        for w in names.windows(2) {
            if w[0] == w[1] {
                self.error(format!("sweep.systems: name '{}' used twice", w[0]));
            }
        }

        let costs = match self.table(root, "costs", "") {
            Some(t) => self.costs(t),
            None => CostParameters::default(),
        };
        let emissions = match self.table(root, "emissions", "") {
            Some(t) => self.emissions(t),
            None => EmissionFactors::default(),
        };
        let analysis = match self.table(root, "analysis", "") {
            Some(t) => self.analysis(t),
            None => AnalysisConfig::default(),
        };

        Some(Config {
            scenario,
            seed,
            out_dir,
            network: network?,
            demand: demand?,
            supply: supply?,
            system,
            sweep,
            costs,
            emissions,
            analysis,
        })
    }

    fn network(&mut self, t: &Table) -> Option<NetworkSource> {
        self.keys(t, "network", &["nodes", "edges", "zones", "area_km2", "grid"]);
        if let Some(g) = self.table(t, "grid", "network") {
            let p = "network.grid";
            self.keys(g, p, &["rows", "cols", "spacing_m", "speed_mps", "zone_block"]);
            for k in ["rows", "cols", "spacing_m", "speed_mps"] {
                if !g.contains_key(k) {
                    self.error(format!("{p}.{k}: missing"));
                }
            }
            let rows = self.int(g, "rows", p, 2, 10_000);
            let cols = self.int(g, "cols", p, 2, 10_000);
            let spacing = self.float_in(g, "spacing_m", p, |v| v > 0.0, "> 0");
            let speed = self.float_in(g, "speed_mps", p, |v| v > 0.0, "> 0");
            let block = self.int(g, "zone_block", p, 1, 10_000).map(|b| b as usize);
            return Some(NetworkSource::Grid {
                rows: rows? as usize,
                cols: cols? as usize,
                spacing_m: spacing?,
                speed_mps: speed?,
                zone_block: block,
            });
        }
        for k in ["nodes", "edges"] {
            if !t.contains_key(k) {
                self.error(format!("network.{k}: missing (or give [network.grid])"));
            }
        }
        let nodes = self.file(t, "nodes", "network");
        let edges = self.file(t, "edges", "network");
        let zones = if t.contains_key("zones") { Some(self.file(t, "zones", "network")?) } else { None };
        let area = self.float_in(t, "area_km2", "network", |v| v > 0.0, "> 0");
        Some(NetworkSource::Files { nodes: nodes?, edges: edges?, zones, area_km2: area })
    }

    fn demand(&mut self, t: &Table) -> Option<DemandSource> {
        self.keys(t, "demand", &["requests", "synthetic"]);
        if let Some(s) = self.table(t, "synthetic", "demand") {
            let p = "demand.synthetic";
            self.keys(s, p, &["count", "profile"]);
            if !s.contains_key("count") {
                self.error(format!("{p}.count: missing"));
            }
            let count = self.int(s, "count", p, 0, 1_000_000);
            let profile = match self.floats(s, "profile", p) {
                None => Some(DEFAULT_PROFILE),
                Some(v) if v.len() == 24 && v.iter().all(|x| *x >= 0.0) && v.iter().sum::<f64>() > 0.0 => {
                    Some(v.try_into().expect("length checked"))
                }
                Some(_) => {
                    self.error(format!("{p}.profile: need 24 non-negative weights, not all zero"));
                    None
                }
            };
            return Some(DemandSource::Synthetic { count: count? as usize, profile: profile? });
        }
        if !t.contains_key("requests") {
            self.error("demand.requests: missing (or give [demand.synthetic])".into());
            return None;
        }
        self.file(t, "requests", "demand").map(DemandSource::File)
    }

    fn supply_source(&mut self, t: &Table, key: &str) -> Option<SupplySource> {
        let path = join("supply", key);
        match t.get(key)? {
            Value::Integer(n) if (0..=100_000).contains(n) => Some(SupplySource::Constant(*n as u32)),
            Value::Array(_) => {
                let v = self.ints(t, key, "supply", 0, 100_000)?;
                if v.len() == 24 {
                    Some(SupplySource::Hourly(v.try_into().expect("length checked")))
                } else {
                    self.error(format!("{path}: hourly supply needs 24 values, got {}", v.len()));
                    None
                }
            }
            Value::String(_) => self.file(t, key, "supply").map(SupplySource::File),
            _ => {
                self.error(format!("{path}: expected a vehicle count, 24 hourly counts, or a supply.csv path"));
                None
            }
        }
    }

    fn alpha(&mut self, t: &Table, path: &str) -> Option<SupplySlope> {
        let a = self.float(t, "alpha", path)?;
        match SupplySlope::from_f64(a) {
            Ok(s) => Some(s),
            Err(_) => {
                self.error(format!("{}: {a} not allowed, use 0, 0.5 or 1", join(path, "alpha")));
                None
            }
        }
    }

    fn supply(&mut self, t: &Table) -> Option<SupplyConfig> {
        self.keys(t, "supply", &["crowdsourced", "dedicated", "alpha"]);
        let crowdsourced = self.supply_source(t, "crowdsourced");
        let dedicated = self.supply_source(t, "dedicated");
        let alpha = self.alpha(t, "supply").unwrap_or(SupplySlope::Zero);
        Some(SupplyConfig { crowdsourced, dedicated, alpha })
    }

    fn route(&mut self, t: &Table, path: &str) -> Option<RouteSpec> {
        self.keys(t, path, ROUTE_KEYS);
        for k in ["stops", "cruise_speed_mps"] {
            if !t.contains_key(k) {
                self.error(format!("{path}.{k}: missing"));
            }
        }
        let stops = self.ints(t, "stops", path, 0, u32::MAX as i64);
        let speed = self.float_in(t, "cruise_speed_mps", path, |v| v > 0.0, "> 0");
        let mut route = RouteSpec::new(stops?.into_iter().map(NodeId).collect(), speed?);
        if let Some(h) = self.float_in(t, "window_start_h", path, |v| (0.0..=24.0).contains(&v), "in 0..=24") {
            route.window_start_s = h * 3600.0;
        }
        if let Some(h) = self.float_in(t, "window_end_h", path, |v| (0.0..=24.0).contains(&v), "in 0..=24") {
            route.window_end_s = h * 3600.0;
        }
        if let Some(m) = self.float_in(t, "catchment_min", path, |v| v > 0.0, "> 0") {
            route.catchment_min = m;
        }
        if let Some(k) = self.float_in(t, "walk_speed_kmh", path, |v| v > 0.0, "> 0") {
            route.walk_speed_mps = k / 3.6;
        }
        if let Some(d) = self.float_in(t, "dwell_s", path, |v| v >= 0.0, ">= 0") {
            route.dwell_s = d;
        }
        if let Some(n) = self.int(t, "vehicles_below_threshold", path, 1, 10_000) {
            route.vehicles_below_threshold = n as u32;
        }
        if let Some(n) = self.int(t, "vehicles_from_threshold", path, 1, 10_000) {
            route.vehicles_from_threshold = n as u32;
        }
        if let Some(n) = self.int(t, "threshold_level_pct", path, 1, 1000) {
            route.threshold_level_pct = n as u32;
        }
        if let Err(e) = route.validate() {
            self.error(format!("{path}: {e}"));
            return None;
        }
        Some(route)
    }

    /// A system section, with missing keys taken from `template`.
    fn system(
        &mut self,
        t: &Table,
        template: Option<&Table>,
        path: &str,
        supply: Option<&SupplyConfig>,
    ) -> Option<SystemConfig> {
        self.keys(t, path, SYSTEM_KEYS);
        let mut merged = template.cloned().unwrap_or_default();
        if template.is_some() {
            merged.remove("name");
        }
        for (k, v) in t {
            merged.insert(k.clone(), v.clone());
        }
        let t = &merged;
        let Some(kind_name) = self.string(t, "type", path) else {
            if !t.contains_key("type") {
                self.error(format!("{path}.type: missing"));
            }
            return None;
        };
        let Some(kind) = SystemKind::parse(&kind_name) else {
            let allowed: Vec<_> = SystemKind::ALL.iter().map(|k| k.as_str()).collect();
            self.error(format!("{path}.type: unknown system '{kind_name}', expected one of {}", allowed.join(", ")));
            return None;
        };
        let name = self.string(t, "name", path).unwrap_or_else(|| kind.as_str().to_string());
        if name.is_empty() || name.contains(['/', '\\', '@', ',']) {
            self.error(format!("{path}.name: '{name}' must be non-empty without / \\ @ ,"));
        }
        let alpha = if t.contains_key("alpha") {
            self.alpha(t, path)?
        } else {
            supply.map(|s| s.alpha).unwrap_or(SupplySlope::Zero)
        };
        let max_detour = self.float_in(t, "max_detour", path, |v| v >= 1.0, ">= 1").unwrap_or(DEFAULT_MAX_DETOUR);
        let max_wait_s = self
            .float_in(t, "max_wait_min", path, |v| v > 0.0, "> 0")
            .map(|m| m * 60.0)
            .unwrap_or(DEFAULT_MAX_WAIT_S);
        let hybrid_shared = self.boolean(t, "hybrid_shared", path).unwrap_or(false);
        let route = match self.table(t, "route", path) {
            Some(r) => Some(self.route(r, &format!("{path}.route"))?),
            None => None,
        };
        if kind.needs_route() && route.is_none() {
            self.error(format!("{path}.route: a {} system needs a route", kind.as_str()));
        }
        if let Some(s) = supply {
            if kind.uses_crowdsourced() && s.crowdsourced.is_none() {
                self.error(format!("supply.crowdsourced: missing, needed by {path} ({})", kind.as_str()));
            }
            if kind.uses_dedicated() && s.dedicated.is_none() {
                self.error(format!("supply.dedicated: missing, needed by {path} ({})", kind.as_str()));
            }
        }
        Some(SystemConfig { name, kind, alpha, max_detour, max_wait_s, hybrid_shared, route })
    }

    fn costs(&mut self, t: &Table) -> CostParameters {
        let mut c = CostParameters::default();
        let p = "costs";
        let fields: [(&str, &mut f64); 10] = [
            ("fixed_fee_exclusive", &mut c.fixed_fee_exclusive),
            ("fixed_fee_shared", &mut c.fixed_fee_shared),
            ("beta_time", &mut c.beta_time),
            ("beta_length", &mut c.beta_length),
            ("fare", &mut c.fare),
            ("vehicle_price", &mut c.vehicle_price),
            ("oc_hour", &mut c.oc_hour),
            ("oc_km", &mut c.oc_km),
            ("wage", &mut c.wage),
            ("other_costs", &mut c.other_costs),
        ];
        let mut allowed: Vec<&str> = fields.iter().map(|f| f.0).collect();
        allowed.push("frt_vkm");
        self.keys(t, p, &allowed);
        for (key, slot) in fields {
            if let Some(v) = self.float_in(t, key, p, |v| v >= 0.0, ">= 0") {
                *slot = v;
            }
        }
        match self.string(t, "frt_vkm", p).as_deref() {
            None => {}
            Some("per_vehicle") => c.frt_vkm = VkmBasis::PerVehicle,
            Some("fleet_total") => c.frt_vkm = VkmBasis::FleetTotal,
            Some(other) => self.error(format!("costs.frt_vkm: '{other}' not allowed, use per_vehicle or fleet_total")),
        }
        c
    }

    fn emissions(&mut self, t: &Table) -> EmissionFactors {
        let mut f = EmissionFactors::default();
        let p = "emissions";
        let fields: [(&str, &mut f64); 4] = [
            ("ghg_km_transit", &mut f.ghg_km_transit),
            ("ghg_km_private", &mut f.ghg_km_private),
            ("ev_kwh_per_km", &mut f.ev_kwh_per_km),
            ("grid_g_per_kwh", &mut f.grid_g_per_kwh),
        ];
        let allowed: Vec<&str> = fields.iter().map(|f| f.0).collect();
        self.keys(t, p, &allowed);
        for (key, slot) in fields {
            if let Some(v) = self.float_in(t, key, p, |v| v > 0.0, "> 0") {
                *slot = v;
            }
        }
        f
    }

    fn analysis(&mut self, t: &Table) -> AnalysisConfig {
        let mut a = AnalysisConfig::default();
        let p = "analysis";
        self.keys(
            t,
            p,
            &[
                "demand_levels",
                "surge_pct",
                "electrification_levels",
                "vot",
                "served_threshold",
                "equity_levels",
                "attributes",
                "lorenz_ordering",
            ],
        );
        if let Some(v) = self.ints(t, "demand_levels", p, 1, 1000) {
            if v.is_empty() {
                self.error("analysis.demand_levels: empty".into());
            }
            a.demand_levels = dedup(v);
        }
        if let Some(v) = self.floats(t, "surge_pct", p) {
            if v.iter().any(|s| s.is_nan() || *s < 0.0) {
                self.error("analysis.surge_pct: values must be >= 0".into());
            }
            let mut v = v;
            if !v.contains(&0.0) {
                v.insert(0, 0.0);
            }
            a.surge_pct = v;
        }
        if let Some(v) = self.floats(t, "electrification_levels", p) {
            if v.iter().any(|l| !(0.0..=1.0).contains(l)) {
                self.error("analysis.electrification_levels: values must be in [0, 1]".into());
            }
            a.electrification_levels = v;
        }
        if let Some(v) = self.float_in(t, "vot", p, |v| v >= 0.0, ">= 0") {
            a.vot = v;
        }
        if let Some(v) = self.float_in(t, "served_threshold", p, |v| (0.0..=1.0).contains(&v), "in [0, 1]") {
            a.served_threshold = v;
        }
        if let Some(v) = self.ints(t, "equity_levels", p, 1, 1000) {
            a.equity_levels = dedup(v);
        }
        for l in &a.equity_levels {
            if !a.demand_levels.contains(l) {
                self.diag.warnings.push(format!("analysis.equity_levels: {l} is not a demand level; no Gini for it"));
            }
        }
        if let Some(Value::Array(items)) = t.get("attributes") {
            let mut attrs = Vec::new();
            for item in items {
                match item.as_str().and_then(Attribute::from_name) {
                    Some(at) => attrs.push(at),
                    None => self.error(format!("analysis.attributes: unknown attribute {item}")),
                }
            }
            a.attributes = attrs;
        } else if t.contains_key("attributes") {
            self.error("analysis.attributes: expected an array of names".into());
        }
        match self.string(t, "lorenz_ordering", p).as_deref() {
            None => {}
            Some("per_capita") => a.lorenz_ordering = LorenzOrdering::PerCapita,
            Some("attribute") => a.lorenz_ordering = LorenzOrdering::Attribute,
            Some(other) => self.error(format!("analysis.lorenz_ordering: '{other}' not allowed, use per_capita or attribute")),
        }
        a
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn dedup(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[network.grid]
rows = 4
cols = 4
spacing_m = 500
speed_mps = 10

[demand.synthetic]
count = 20

[supply]
crowdsourced = 3

[system]
type = "crowdsourced_shared"
"#;

    #[test]
    fn defaults_are_filled() {
        let (cfg, warnings) = parse(MINIMAL, Path::new(".")).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(cfg.analysis.vot, 15.0);
        assert_eq!(cfg.analysis.demand_levels.len(), 10);
        assert_eq!(cfg.costs, CostParameters::default());
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.system.unwrap().max_detour, 2.0);
    }

    #[test]
    fn errors_are_collected() {
        let text = MINIMAL.replace("crowdsourced = 3", "crowdsourced = 3\nalpha = 0.7\nbogus = 1")
            + "\n[analysis]\nvot = -1\n[network]\n";
        let err = parse(&text, Path::new(".")).unwrap_err();
        assert!(err.errors.len() >= 2, "{:?}", err.errors);
        assert!(err.errors.iter().any(|e| e.contains("supply.alpha")));
        assert!(err.errors.iter().any(|e| e.contains("analysis.vot")));
    }

    #[test]
    fn unknown_key_warns() {
        let text = MINIMAL.replace("count = 20", "count = 20\ncolour = \"red\"");
        let (_, warnings) = parse(&text, Path::new(".")).unwrap();
        assert_eq!(warnings, vec!["demand.synthetic.colour: unknown key ignored".to_string()]);
    }

    #[test]
    fn missing_file_is_named() {
        let text = MINIMAL.replace("[demand.synthetic]\ncount = 20", "[demand]\nrequests = \"nope.csv\"");
        let err = parse(&text, Path::new("/tmp/x")).unwrap_err();
        assert!(err.errors[0].contains("/tmp/x/nope.csv"), "{:?}", err.errors);
    }

    #[test]
    fn sweep_inherits_system() {
        let text = MINIMAL.to_string()
            + "max_detour = 1.5\n[[sweep.systems]]\nname = \"a\"\ntype = \"crowdsourced_exclusive\"\n[[sweep.systems]]\nname = \"b\"\nalpha = 1\n";
        let (cfg, _) = parse(&text, Path::new(".")).unwrap();
        assert_eq!(cfg.sweep.len(), 2);
        assert_eq!(cfg.sweep[1].kind, SystemKind::CrowdsourcedShared);
        assert_eq!(cfg.sweep[1].max_detour, 1.5);
        assert_eq!(cfg.sweep[1].alpha, SupplySlope::One);
        assert_eq!(cfg.sweep[0].alpha, SupplySlope::Zero);
    }
}
