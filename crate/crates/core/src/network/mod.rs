//! Road network: nodes, directed edges, zones, and validation.
//!
//! Routing is distance-based (see [`PathCache`]); travel time is derived per
//! edge as `length / speed` along the chosen path.

mod grid;
mod paths;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{EdgeId, Error, NodeId, Result, ZoneId};

pub use grid::{assign_block_zones, generate_grid};
pub use paths::{LegPoint, Path, PathCache, TravelOracle};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    /// Planar coordinates in metres.
    pub x: f64,
    pub y: f64,
    pub zone_id: Option<ZoneId>,
}

impl Node {
    pub fn new(id: u32, x: f64, y: f64) -> Self {
        Node { id: NodeId(id), x, y, zone_id: None }
    }

    pub fn euclidean(&self, other: &Node) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub speed_mps: f64,
}

impl Edge {
    pub fn new(id: u32, from: u32, to: u32, length_m: f64, speed_mps: f64) -> Self {
        Edge { id: EdgeId(id), from: NodeId(from), to: NodeId(to), length_m, speed_mps }
    }

    pub fn travel_time_s(&self) -> f64 {
        self.length_m / self.speed_mps
    }
}

/// Socio-demographic attributes carried per zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attribute {
    Income,
    Education,
    Employment,
    YoungAdults,
    Seniors,
    SingleParents,
    PopDensity,
}

impl Attribute {
    pub const ALL: [Attribute; 7] = [
        Attribute::Income,
        Attribute::Education,
        Attribute::Employment,
        Attribute::YoungAdults,
        Attribute::Seniors,
        Attribute::SingleParents,
        Attribute::PopDensity,
    ];

    /// Column name used in `zones.csv`.
    pub fn name(self) -> &'static str {
        match self {
            Attribute::Income => "income",
            Attribute::Education => "education",
            Attribute::Employment => "employment",
            Attribute::YoungAdults => "young_adults",
            Attribute::Seniors => "seniors",
            Attribute::SingleParents => "single_parents",
            Attribute::PopDensity => "pop_density",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Attribute::ALL.into_iter().find(|a| a.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A zone with its resident population and attribute values.
///
/// Attribute values are read as the share of residents belonging to the
/// corresponding group; `None` marks a missing column.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: ZoneId,
    pub population: f64,
    pub attributes: [Option<f64>; 7],
    /// Filled in by [`Network::new`] from the nodes' `zone_id`.
    pub members: Vec<NodeId>,
}

impl Zone {
    pub fn new(id: u32, population: f64) -> Self {
        Zone { id: ZoneId(id), population, attributes: [None; 7], members: Vec::new() }
    }

    pub fn with_attribute(mut self, attr: Attribute, value: f64) -> Self {
        self.attributes[attr.index()] = Some(value);
        self
    }

    pub fn attribute(&self, attr: Attribute) -> Option<f64> {
        self.attributes[attr.index()]
    }

    pub fn set_attribute(&mut self, attr: Attribute, value: Option<f64>) {
        self.attributes[attr.index()] = value;
    }
}

/// Validated, immutable road network.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: BTreeMap<NodeId, usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    zones: Option<Vec<Zone>>,
    area_km2: f64,
    warnings: Vec<String>,
}

impl Network {
    /// Validates and indexes a network.
    ///
    /// Nodes and edges are stored sorted by id. Edges shorter than the
    /// straight line between their endpoints are accepted with a warning.
    pub fn new(
        mut nodes: Vec<Node>,
        mut edges: Vec<Edge>,
        zones: Option<Vec<Zone>>,
        area_km2: f64,
    ) -> Result<Self> {
        if !(area_km2.is_finite() && area_km2 > 0.0) {
            return Err(Error::arg(format!("network area must be > 0 km2, got {area_km2}")));
        }
        nodes.sort_by_key(|n| n.id);
        edges.sort_by_key(|e| e.id);

        let mut node_index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(Error::arg(format!("node {} has non-finite coordinates", n.id)));
            }
            if node_index.insert(n.id, i).is_some() {
                return Err(Error::DuplicateNode(n.id));
            }
        }

        let mut warnings = Vec::new();
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for (i, e) in edges.iter().enumerate() {
            if !seen.insert(e.id) {
                return Err(Error::DuplicateEdge(e.id));
            }
            let from = *node_index
                .get(&e.from)
                .ok_or(Error::DanglingEdge { edge: e.id, node: e.from })?;
            let to = *node_index
                .get(&e.to)
                .ok_or(Error::DanglingEdge { edge: e.id, node: e.to })?;
            if !(e.length_m.is_finite() && e.length_m > 0.0) {
                return Err(Error::arg(format!("edge {} has non-positive length", e.id)));
            }
            if !(e.speed_mps.is_finite() && e.speed_mps > 0.0) {
                return Err(Error::arg(format!("edge {} has non-positive speed", e.id)));
            }
            let straight = nodes[from].euclidean(&nodes[to]);
            if e.length_m < straight * (1.0 - 1e-9) {
                warnings.push(format!(
                    "edge {} length {} m is below the straight-line distance {:.3} m",
                    e.id, e.length_m, straight
                ));
            }
            out_edges[from].push(i);
            in_edges[to].push(i);
        }

        let zones = match zones {
            None => None,
            Some(mut zones) => {
                zones.sort_by_key(|z| z.id);
                let mut zone_index = BTreeMap::new();
                for (i, z) in zones.iter_mut().enumerate() {
                    if !(z.population.is_finite() && z.population >= 0.0) {
                        return Err(Error::arg(format!("zone {} has negative population", z.id)));
                    }
                    if let Some(v) = z.attributes.iter().flatten().find(|v| !(v.is_finite() && **v >= 0.0)) {
                        return Err(Error::arg(format!("zone {} has invalid attribute value {v}", z.id)));
                    }
                    if zone_index.insert(z.id, i).is_some() {
                        return Err(Error::arg(format!("duplicate zone id {}", z.id)));
                    }
                    z.members.clear();
                }
                for n in &nodes {
                    if let Some(zid) = n.zone_id {
                        let zi = *zone_index.get(&zid).ok_or_else(|| {
                            Error::arg(format!("node {} references unknown zone {zid}", n.id))
                        })?;
                        zones[zi].members.push(n.id);
                    }
                }
                Some(zones)
            }
        };

        Ok(Network { nodes, edges, node_index, out_edges, in_edges, zones, area_km2, warnings })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn zones(&self) -> Option<&[Zone]> {
        self.zones.as_deref()
    }

    pub fn area_km2(&self) -> f64 {
        self.area_km2
    }

    /// Non-fatal validation findings.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.node_index.contains_key(&id)
    }

    pub(crate) fn index_of(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    pub(crate) fn out_edges(&self, idx: usize) -> &[usize] {
        &self.out_edges[idx]
    }

    pub(crate) fn in_edges(&self, idx: usize) -> &[usize] {
        &self.in_edges[idx]
    }

    /// Straight-line distance between two nodes, in metres.
    pub fn euclidean(&self, a: NodeId, b: NodeId) -> Result<f64> {
        let na = self.node(a).ok_or(Error::UnknownNode(a))?;
        let nb = self.node(b).ok_or(Error::UnknownNode(b))?;
        Ok(na.euclidean(nb))
    }

    /// Zone containing `node`, or `None` when the network carries no zoning
    /// or the node is unzoned.
    pub fn zone_of(&self, node: NodeId) -> Result<Option<ZoneId>> {
        let n = self.node(node).ok_or(Error::UnknownNode(node))?;
        Ok(match self.zones {
            Some(_) => n.zone_id,
            None => None,
        })
    }

    pub fn zone(&self, id: ZoneId) -> Option<&Zone> {
        let zones = self.zones.as_ref()?;
        zones.binary_search_by_key(&id, |z| z.id).ok().map(|i| &zones[i])
    }

    /// Ordered node pairs `(a, b)` with no directed path from `a` to `b`.
    pub fn unreachable_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        for s in 0..n {
            seen.iter_mut().for_each(|v| *v = false);
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &e in &self.out_edges[u] {
                    let v = self.node_index[&self.edges[e].to];
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            for (t, ok) in seen.iter().enumerate() {
                if !ok {
                    out.push((self.nodes[s].id, self.nodes[t].id));
                }
            }
        }
        out
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.unreachable_pairs().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_nodes() -> Network {
        Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 500.0, 0.0)],
            vec![Edge::new(1, 1, 2, 500.0, 10.0), Edge::new(2, 2, 1, 500.0, 10.0)],
            None,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn minimal_graph_is_reachable_both_ways() {
        let net = two_nodes();
        assert_eq!(net.nodes().len(), 2);
        assert!(net.is_strongly_connected());
        let cache = PathCache::new(&net);
        assert_eq!(cache.distance(NodeId(1), NodeId(2)), Some(500.0));
        assert_eq!(cache.distance(NodeId(2), NodeId(1)), Some(500.0));
    }

    #[test]
    fn dangling_edge_names_the_node() {
        let err = Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 1.0, 0.0)],
            vec![Edge::new(7, 1, 99, 10.0, 1.0)],
            None,
            1.0,
        )
        .unwrap_err();
        assert_eq!(err, Error::DanglingEdge { edge: EdgeId(7), node: NodeId(99) });
        assert!(alloc::string::ToString::to_string(&err).contains("99"));
    }

    #[test]
    fn short_edges_warn_but_load() {
        let net = Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 100.0, 0.0)],
            vec![Edge::new(1, 1, 2, 50.0, 1.0), Edge::new(2, 2, 1, 100.0, 1.0)],
            None,
            1.0,
        )
        .unwrap();
        assert_eq!(net.warnings().len(), 1);
    }

    #[test]
    fn one_way_edge_reports_unreachable_pair() {
        let net = Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 100.0, 0.0)],
            vec![Edge::new(1, 1, 2, 100.0, 1.0)],
            None,
            1.0,
        )
        .unwrap();
        assert_eq!(net.unreachable_pairs(), vec![(NodeId(2), NodeId(1))]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Network::new(vec![Node::new(1, 0.0, 0.0)], vec![], None, 0.0).is_err());
        assert!(matches!(
            Network::new(vec![Node::new(1, 0.0, 0.0), Node::new(1, 1.0, 1.0)], vec![], None, 1.0),
            Err(Error::DuplicateNode(NodeId(1)))
        ));
        assert!(Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 1.0, 0.0)],
            vec![Edge::new(1, 1, 2, 0.0, 1.0)],
            None,
            1.0
        )
        .is_err());
    }

    #[test]
    fn zone_lookup() {
        let mut a = Node::new(1, 0.0, 0.0);
        a.zone_id = Some(ZoneId(3));
        let b = Node::new(2, 10.0, 0.0);
        let net = Network::new(
            vec![a.clone(), b.clone()],
            vec![Edge::new(1, 1, 2, 10.0, 1.0), Edge::new(2, 2, 1, 10.0, 1.0)],
            Some(vec![Zone::new(3, 100.0)]),
            1.0,
        )
        .unwrap();
        assert_eq!(net.zone_of(NodeId(1)).unwrap(), Some(ZoneId(3)));
        assert_eq!(net.zone_of(NodeId(2)).unwrap(), None);
        assert_eq!(net.zone(ZoneId(3)).unwrap().members, vec![NodeId(1)]);
        assert!(matches!(net.zone_of(NodeId(9)), Err(Error::UnknownNode(_))));

        let unzoned = Network::new(vec![a, b], vec![], None, 1.0).unwrap();
        assert_eq!(unzoned.zone_of(NodeId(1)).unwrap(), None);
    }

    #[test]
    fn unknown_zone_reference_fails() {
        let mut a = Node::new(1, 0.0, 0.0);
        a.zone_id = Some(ZoneId(5));
        assert!(Network::new(vec![a], vec![], Some(vec![]), 1.0).is_err());
    }

    #[test]
    fn attribute_names_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(Attribute::from_name(a.name()), Some(a));
        }
        assert_eq!(Attribute::from_name("nope"), None);
    }
}
