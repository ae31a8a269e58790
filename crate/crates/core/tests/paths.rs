use odt_core::network::{Edge, Network, Node, PathCache, TravelOracle};
use odt_core::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A ring (so everything is reachable) plus random chords with random lengths
/// at least the straight-line distance.
fn random_network(rng: &mut ChaCha8Rng, n: u32, chords: usize) -> Network {
    let nodes: Vec<Node> = (0..n).map(|i| Node::new(i, rng.gen_range(0.0..2000.0), rng.gen_range(0.0..2000.0))).collect();
    let mut links = Vec::new();
    for i in 0..n {
        links.push((i, (i + 1) % n));
    }
    for _ in 0..chords {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            links.push((a, b));
        }
    }
    let edges = links
        .iter()
        .enumerate()
        .map(|(id, &(a, b))| {
            let straight = nodes[a as usize].euclidean(&nodes[b as usize]);
            Edge::new(id as u32, a, b, straight * rng.gen_range(1.0..1.6) + 1.0, rng.gen_range(5.0..20.0))
        })
        .collect();
    Network::new(nodes, edges, None, 4.0).unwrap()
}

fn floyd_warshall(net: &Network) -> Vec<Vec<f64>> {
    let n = net.nodes().len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in net.edges() {
        let (a, b) = (e.from.0 as usize, e.to.0 as usize);
        d[a][b] = d[a][b].min(e.length_m);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

#[test]
fn shortest_paths_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..40 {
        let n = rng.gen_range(3..25);
        let chords = rng.gen_range(0..3 * n as usize);
        let net = random_network(&mut rng, n, chords);
        let fw = floyd_warshall(&net);
        let cache = PathCache::new(&net);
        for a in 0..n {
            for b in 0..n {
                let want = fw[a as usize][b as usize];
                let path = cache.shortest_path(NodeId(a), NodeId(b)).unwrap();
                assert!((path.total_length_m - want).abs() <= 1e-9 * want.max(1.0), "{a}->{b}: {} vs {want}", path.total_length_m);
                assert_eq!(path.nodes.first(), Some(&NodeId(a)));
                assert_eq!(path.nodes.last(), Some(&NodeId(b)));
                assert_eq!(path.nodes.len(), path.edges.len() + 1);

                // the edges chain from origin to destination and their times add up
                let mut time = 0.0;
                for (k, eid) in path.edges.iter().enumerate() {
                    let e = net.edges().iter().find(|e| e.id == *eid).unwrap();
                    assert_eq!((e.from, e.to), (path.nodes[k], path.nodes[k + 1]));
                    time += e.length_m / e.speed_mps;
                }
                assert!((path.total_time_s - time).abs() <= 1e-9 * time.max(1.0));
                let d = cache.distance(NodeId(a), NodeId(b)).unwrap();
                assert!((d - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
    }
}

#[test]
fn unreachable_pairs_are_reported() {
    let nodes = vec![Node::new(0, 0.0, 0.0), Node::new(1, 100.0, 0.0), Node::new(2, 200.0, 0.0)];
    let edges = vec![Edge::new(0, 0, 1, 100.0, 10.0), Edge::new(1, 1, 0, 100.0, 10.0), Edge::new(2, 1, 2, 100.0, 10.0)];
    let net = Network::new(nodes, edges, None, 1.0).unwrap();
    let cache = PathCache::new(&net);
    assert!(cache.shortest_path(NodeId(2), NodeId(0)).is_err());
    assert_eq!(cache.distance(NodeId(2), NodeId(0)), None);
    assert_eq!(cache.distance(NodeId(0), NodeId(2)), Some(200.0));
    assert!(!net.is_strongly_connected());
    assert_eq!(net.unreachable_pairs(), vec![(NodeId(2), NodeId(0)), (NodeId(2), NodeId(1))]);
}
