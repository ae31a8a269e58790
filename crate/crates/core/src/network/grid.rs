use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Attribute, Edge, Network, Node, Zone};
use crate::{Error, Result, ZoneId};

/// Bidirectional `rows × cols` grid with uniform spacing and speed.
///
/// Node `r * cols + c` sits at `(c * spacing, r * spacing)`. The seed permutes
/// edge ids, which decides among the many equal-length grid routes.
pub fn generate_grid(rows: usize, cols: usize, spacing_m: f64, speed_mps: f64, seed: u64) -> Result<Network> {
    if rows < 2 || cols < 2 {
        return Err(Error::arg(format!("grid needs at least 2x2 nodes, got {rows}x{cols}")));
    }
    if !(spacing_m.is_finite() && spacing_m > 0.0) || !(speed_mps.is_finite() && speed_mps > 0.0) {
        return Err(Error::arg("grid spacing and speed must be > 0"));
    }
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            nodes.push(Node::new((r * cols + c) as u32, c as f64 * spacing_m, r as f64 * spacing_m));
        }
    }
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let id = (r * cols + c) as u32;
            if c + 1 < cols {
                pairs.push((id, id + 1));
                pairs.push((id + 1, id));
            }
            if r + 1 < rows {
                pairs.push((id, id + cols as u32));
                pairs.push((id + cols as u32, id));
            }
        }
    }
    let mut ids: Vec<u32> = (0..pairs.len() as u32).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let edges = pairs
        .iter()
        .zip(ids)
        .map(|(&(a, b), id)| Edge::new(id, a, b, spacing_m, speed_mps))
        .collect();
    let area = (rows as f64 * spacing_m) * (cols as f64 * spacing_m) / 1e6;
    Network::new(nodes, edges, None, area)
}

/// Partitions a grid network into square blocks of `block × block` nodes and
/// attaches seeded synthetic demographics to each block.
///
/// Populations are drawn from 200..2000 and attribute shares from 0..0.6.
pub fn assign_block_zones(net: &Network, cols: usize, block: usize, seed: u64) -> Result<Network> {
    if block == 0 || cols == 0 {
        return Err(Error::arg("zone block and column count must be > 0"));
    }
    let zone_cols = cols.div_ceil(block);
    let mut nodes: Vec<Node> = net.nodes().to_vec();
    let mut max_zone = 0;
    for n in nodes.iter_mut() {
        let i = n.id.0 as usize;
        let (r, c) = (i / cols, i % cols);
        let z = (r / block) * zone_cols + c / block;
        max_zone = max_zone.max(z);
        n.zone_id = Some(ZoneId(z as u32));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zones = (0..=max_zone)
        .map(|z| {
            let mut zone = Zone::new(z as u32, crate::math::round(rng.gen_range(200.0..2000.0)));
            for a in Attribute::ALL {
                zone.set_attribute(a, Some(crate::math::round_to(rng.gen_range(0.0..0.6), 4)));
            }
            zone
        })
        .collect();
    Network::new(nodes, net.edges().to_vec(), Some(zones), net.area_km2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_area() {
        let net = generate_grid(2, 2, 500.0, 11.1, 0).unwrap();
        assert_eq!(net.nodes().len(), 4);
        assert_eq!(net.edges().len(), 8);
        let net = generate_grid(10, 10, 500.0, 11.1, 0).unwrap();
        assert_eq!(net.area_km2(), 25.0);
        assert!(net.is_strongly_connected());
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(generate_grid(1, 5, 500.0, 10.0, 0).is_err());
        assert!(generate_grid(3, 3, 0.0, 10.0, 0).is_err());
        assert!(generate_grid(3, 3, 10.0, -1.0, 0).is_err());
    }

    #[test]
    fn same_seed_same_network() {
        let a = generate_grid(4, 4, 100.0, 10.0, 9).unwrap();
        let b = generate_grid(4, 4, 100.0, 10.0, 9).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn block_zones_partition_all_nodes() {
        let net = generate_grid(5, 5, 100.0, 10.0, 0).unwrap();
        let zoned = assign_block_zones(&net, 5, 2, 3).unwrap();
        let zones = zoned.zones().unwrap();
        assert_eq!(zones.len(), 9);
        let mut all: Vec<_> = zones.iter().flat_map(|z| z.members.iter().copied()).collect();
        all.sort();
        let ids: Vec<_> = zoned.nodes().iter().map(|n| n.id).collect();
        assert_eq!(all, ids);
    }
}
