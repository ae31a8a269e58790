//! Distance-based shortest paths with a lazily filled per-destination cache.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;

use super::Network;
use crate::math::approx_eq;
use crate::{EdgeId, Error, NodeId, Result};

/// Relative tolerance under which two path lengths count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Point-to-point network distances and travel times.
///
/// Dispatchers are written against this trait so they can be driven by a
/// [`PathCache`] in simulation or by a fixed matrix in tests.
pub trait TravelOracle {
    /// Shortest-path length in metres, `None` if unreachable.
    fn distance(&self, from: NodeId, to: NodeId) -> Option<f64>;
    /// Travel time in seconds along the path [`distance`](Self::distance) measures.
    fn travel_time(&self, from: NodeId, to: NodeId) -> Option<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    /// Visited nodes, origin first; one longer than `edges`.
    pub nodes: Vec<NodeId>,
    pub total_length_m: f64,
    pub total_time_s: f64,
}

/// A node on a vehicle leg with cumulative time and distance from the leg start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPoint {
    pub node: NodeId,
    pub time_s: f64,
    pub dist_m: f64,
}

/// Shortest-path tree towards one destination.
#[derive(Debug)]
struct Tree {
    dist: Vec<f64>,
    time: Vec<f64>,
    /// Edge index to take from each node; `None` at the destination and for
    /// nodes that cannot reach it.
    next: Vec<Option<usize>>,
}

#[derive(PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path queries over a [`Network`], cached per destination node.
///
/// Among equal-length paths the lexicographically smallest edge-id sequence is
/// taken: walking from the origin, each step uses the lowest-id edge that
/// stays on some shortest path. With strictly positive edge lengths this
/// yields the lexicographic minimum over all shortest paths.
///
/// The cache uses interior mutability and is meant to be owned by a single
/// simulation run.
#[derive(Debug)]
pub struct PathCache<'a> {
    net: &'a Network,
    trees: RefCell<BTreeMap<usize, Rc<Tree>>>,
}

impl<'a> PathCache<'a> {
    pub fn new(net: &'a Network) -> Self {
        PathCache { net, trees: RefCell::new(BTreeMap::new()) }
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    fn tree(&self, dest: usize) -> Rc<Tree> {
        if let Some(t) = self.trees.borrow().get(&dest) {
            return Rc::clone(t);
        }
        let t = Rc::new(self.build_tree(dest));
        self.trees.borrow_mut().insert(dest, Rc::clone(&t));
        t
    }

    fn build_tree(&self, dest: usize) -> Tree {
        let net = self.net;
        let n = net.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[dest] = 0.0;
        heap.push(HeapEntry(0.0, dest));
        while let Some(HeapEntry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &ei in net.in_edges(v) {
                let e = &net.edges[ei];
                let u = net.node_index[&e.from];
                let nd = d + e.length_m;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapEntry(nd, u));
                }
            }
        }

        let mut next = vec![None; n];
        for v in 0..n {
            if v == dest || !dist[v].is_finite() {
                continue;
            }
            // out_edges are in ascending edge-id order
            next[v] = net.out_edges(v).iter().copied().find(|&ei| {
                let e = &net.edges[ei];
                let w = net.node_index[&e.to];
                approx_eq(e.length_m + dist[w], dist[v], TIE_TOLERANCE)
            });
        }

        let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_finite()).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let mut time = vec![f64::INFINITY; n];
        time[dest] = 0.0;
        for v in order {
            if let Some(ei) = next[v] {
                let e = &net.edges[ei];
                let w = net.node_index[&e.to];
                time[v] = e.travel_time_s() + time[w];
            }
        }
        Tree { dist, time, next }
    }

    fn walk(&self, origin: NodeId, destination: NodeId) -> Result<(Vec<usize>, Vec<usize>)> {
        let net = self.net;
        let o = net.index_of(origin).ok_or(Error::UnknownNode(origin))?;
        let d = net.index_of(destination).ok_or(Error::UnknownNode(destination))?;
        let tree = self.tree(d);
        if !tree.dist[o].is_finite() {
            return Err(Error::NoPath { from: origin, to: destination });
        }
        let mut edges = Vec::new();
        let mut nodes = vec![o];
        let mut v = o;
        while v != d {
            let ei = tree.next[v].ok_or(Error::NoPath { from: origin, to: destination })?;
            edges.push(ei);
            v = net.node_index[&net.edges[ei].to];
            nodes.push(v);
        }
        Ok((edges, nodes))
    }

    /// Shortest path by length; travel time follows the same edges.
    pub fn shortest_path(&self, origin: NodeId, destination: NodeId) -> Result<Path> {
        let (edges, nodes) = self.walk(origin, destination)?;
        let net = self.net;
        let mut total_length_m = 0.0;
        let mut total_time_s = 0.0;
        for &ei in &edges {
            total_length_m += net.edges[ei].length_m;
            total_time_s += net.edges[ei].travel_time_s();
        }
        Ok(Path {
            edges: edges.iter().map(|&ei| net.edges[ei].id).collect(),
            nodes: nodes.iter().map(|&v| net.nodes[v].id).collect(),
            total_length_m,
            total_time_s,
        })
    }

    /// Node-by-node cumulative timing of the shortest path; starts with the
    /// origin at `(0, 0)`.
    pub fn leg(&self, origin: NodeId, destination: NodeId) -> Result<Vec<LegPoint>> {
        let (edges, nodes) = self.walk(origin, destination)?;
        let net = self.net;
        let mut out = Vec::with_capacity(nodes.len());
        let (mut t, mut d) = (0.0, 0.0);
        out.push(LegPoint { node: origin, time_s: 0.0, dist_m: 0.0 });
        for (&ei, &v) in edges.iter().zip(nodes.iter().skip(1)) {
            t += net.edges[ei].travel_time_s();
            d += net.edges[ei].length_m;
            out.push(LegPoint { node: net.nodes[v].id, time_s: t, dist_m: d });
        }
        Ok(out)
    }
}

impl TravelOracle for PathCache<'_> {
    fn distance(&self, from: NodeId, to: NodeId) -> Option<f64> {
        let o = self.net.index_of(from)?;
        let d = self.net.index_of(to)?;
        let dist = self.tree(d).dist[o];
        dist.is_finite().then_some(dist)
    }

    fn travel_time(&self, from: NodeId, to: NodeId) -> Option<f64> {
        let o = self.net.index_of(from)?;
        let d = self.net.index_of(to)?;
        let time = self.tree(d).time[o];
        time.is_finite().then_some(time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_grid, Edge, Node};

    #[test]
    fn identity_path_is_empty() {
        let net = generate_grid(3, 3, 500.0, 10.0, 1).unwrap();
        let cache = PathCache::new(&net);
        let p = cache.shortest_path(NodeId(4), NodeId(4)).unwrap();
        assert!(p.edges.is_empty());
        assert_eq!(p.nodes, vec![NodeId(4)]);
        assert_eq!(p.total_length_m, 0.0);
        assert_eq!(p.total_time_s, 0.0);
    }

    #[test]
    fn grid_corner_to_corner_is_manhattan() {
        let net = generate_grid(3, 3, 500.0, 10.0, 1).unwrap();
        let cache = PathCache::new(&net);
        let p = cache.shortest_path(NodeId(0), NodeId(8)).unwrap();
        assert_eq!(p.total_length_m, 2000.0);
        assert_eq!(p.total_time_s, 200.0);
        assert_eq!(p.edges.len(), 4);
        assert_eq!(cache.travel_time(NodeId(0), NodeId(8)), Some(200.0));
    }

    #[test]
    fn tie_break_prefers_smallest_edge_sequence() {
        // Square 1-2-4 / 1-3-4, both 200 m.
        let nodes = vec![
            Node::new(1, 0.0, 0.0),
            Node::new(2, 100.0, 0.0),
            Node::new(3, 0.0, 100.0),
            Node::new(4, 100.0, 100.0),
        ];
        let edges = vec![
            Edge::new(5, 1, 2, 100.0, 10.0),
            Edge::new(3, 2, 4, 100.0, 10.0),
            Edge::new(4, 1, 3, 100.0, 20.0),
            Edge::new(1, 3, 4, 100.0, 20.0),
        ];
        let net = Network::new(nodes, edges, None, 1.0).unwrap();
        let cache = PathCache::new(&net);
        let p = cache.shortest_path(NodeId(1), NodeId(4)).unwrap();
        assert_eq!(p.edges, vec![EdgeId(4), EdgeId(1)]);
        assert_eq!(cache.travel_time(NodeId(1), NodeId(4)), Some(10.0));
    }

    #[test]
    fn unreachable_is_no_path() {
        let net = Network::new(
            vec![Node::new(1, 0.0, 0.0), Node::new(2, 1.0, 0.0)],
            vec![Edge::new(1, 1, 2, 1.0, 1.0)],
            None,
            1.0,
        )
        .unwrap();
        let cache = PathCache::new(&net);
        assert_eq!(
            cache.shortest_path(NodeId(2), NodeId(1)),
            Err(Error::NoPath { from: NodeId(2), to: NodeId(1) })
        );
        assert_eq!(cache.distance(NodeId(2), NodeId(1)), None);
        assert!(matches!(cache.shortest_path(NodeId(9), NodeId(1)), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn leg_accumulates() {
        let net = generate_grid(2, 3, 100.0, 10.0, 0).unwrap();
        let cache = PathCache::new(&net);
        let leg = cache.leg(NodeId(0), NodeId(2)).unwrap();
        assert_eq!(leg.len(), 3);
        assert_eq!(leg[2], LegPoint { node: NodeId(2), time_s: 20.0, dist_m: 200.0 });
    }
}
