//! The RHG cluster-state graph.
//!
//! Qubits live on the edges and faces of a cubic cell complex. With cube
//! vertices at even integer coordinates, an edge qubit has exactly one odd
//! coordinate and a face qubit exactly two. Two qubits are bonded when their
//! coordinates differ by one unit along a single axis, which always joins an
//! edge qubit to a face qubit.
//!
//! A periodic lattice of distance `d` wraps every axis with extent `2d`, so
//! each qubit has exactly four bonds. At `d = 1` the `+1` and `-1` steps land
//! on the same site; the two bonds are still distinct, so the graph is a
//! multigraph and edges are identified by bond rather than by node pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub distance: u32,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn periodic(distance: u32) -> Self {
        LatticeSpec {
            distance,
            boundary: Boundary::Periodic,
        }
    }

    pub fn open(distance: u32) -> Self {
        LatticeSpec {
            distance,
            boundary: Boundary::Open,
        }
    }

    /// Number of integer positions along each axis.
    fn axis_len(&self) -> i32 {
        let span = 2 * self.distance as i32;
        match self.boundary {
            Boundary::Periodic => span,
            Boundary::Open => span + 1,
        }
    }
}

/// Which cell of the cubic complex a qubit sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteKind {
    /// One odd coordinate.
    Edge,
    /// Two odd coordinates.
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coordinate {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Coordinate {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Coordinate { x, y, z }
    }

    pub fn axes(&self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    fn from_axes(a: [i32; 3]) -> Self {
        Coordinate::new(a[0], a[1], a[2])
    }

    pub fn odd_count(&self) -> usize {
        self.axes().iter().filter(|c| c.rem_euclid(2) == 1).count()
    }

    /// `None` for points that are not qubit sites (vertices and cube centres).
    pub fn kind(&self) -> Option<SiteKind> {
        match self.odd_count() {
            1 => Some(SiteKind::Edge),
            2 => Some(SiteKind::Face),
            _ => None,
        }
    }
}

/// The distance-`d` cluster-state graph.
///
/// Immutable once built; share it by reference across trial workers.
#[derive(Debug, Clone, PartialEq)]
pub struct RhgLattice {
    spec: LatticeSpec,
    nodes: Vec<Coordinate>,
    edges: Vec<(usize, usize)>,
    /// Incident edge indices per node, ordered by (neighbor index, edge index).
    adjacency: Vec<Vec<usize>>,
    /// Position of each edge in its endpoints' adjacency lists.
    slots: Vec<(u8, u8)>,
}

pub fn build_lattice(spec: LatticeSpec) -> Result<RhgLattice> {
    if spec.distance == 0 {
        return Err(Error::invalid("distance", "must be at least 1"));
    }
    let len = spec.axis_len();
    let len_u = len as usize;
    let cell = |c: [i32; 3]| (c[0] as usize * len_u + c[1] as usize) * len_u + c[2] as usize;

    let mut index = vec![usize::MAX; len_u * len_u * len_u];
    let mut nodes = Vec::new();
    for x in 0..len {
        for y in 0..len {
            for z in 0..len {
                let c = Coordinate::new(x, y, z);
                if c.kind().is_some() {
                    index[cell(c.axes())] = nodes.len();
                    nodes.push(c);
                }
            }
        }
    }

    // Every bond joins a face qubit to an edge qubit, so enumerating the
    // steps out of face qubits visits each bond exactly once.
    let mut edges = Vec::with_capacity(nodes.len() * 2);
    for (i, node) in nodes.iter().enumerate() {
        if node.kind() != Some(SiteKind::Face) {
            continue;
        }
        let axes = node.axes();
        for axis in 0..3 {
            if axes[axis].rem_euclid(2) == 0 {
                continue;
            }
            for step in [-1, 1] {
                let mut target = axes;
                target[axis] += step;
                match spec.boundary {
                    Boundary::Periodic => target[axis] = target[axis].rem_euclid(len),
                    Boundary::Open => {
                        if target[axis] < 0 || target[axis] >= len {
                            continue;
                        }
                    }
                }
                let j = index[cell(target)];
                debug_assert_ne!(j, usize::MAX, "{:?} is not a qubit site", Coordinate::from_axes(target));
                edges.push((i.min(j), i.max(j)));
            }
        }
    }

    let mut adjacency = vec![Vec::with_capacity(4); nodes.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adjacency[a].push(e);
        adjacency[b].push(e);
    }
    for (n, incident) in adjacency.iter_mut().enumerate() {
        incident.sort_by_key(|&e| (other_end(edges[e], n), e));
    }

    let mut slots = vec![(0u8, 0u8); edges.len()];
    for (n, incident) in adjacency.iter().enumerate() {
        for (slot, &e) in incident.iter().enumerate() {
            let (a, _) = edges[e];
            if a == n {
                slots[e].0 = slot as u8;
            } else {
                slots[e].1 = slot as u8;
            }
        }
    }

    Ok(RhgLattice {
        spec,
        nodes,
        edges,
        adjacency,
        slots,
    })
}

fn other_end((a, b): (usize, usize), n: usize) -> usize {
    if a == n {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDump {
    pub spec: LatticeSpec,
    pub nodes: Vec<[i32; 3]>,
    pub edges: Vec<[usize; 2]>,
}

impl RhgLattice {
    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn nodes(&self) -> &[Coordinate] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn incident_edges(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Slot of `edge` in the adjacency of its first and second endpoint.
    ///
    /// Slots are the fixed direction indices used by partitioned leaf groups.
    pub fn edge_slots(&self, edge: usize) -> (u8, u8) {
        self.slots[edge]
    }

    pub fn index_of(&self, coord: Coordinate) -> Option<usize> {
        self.nodes.binary_search(&coord).ok()
    }

    /// Adjacent node indices in slot order. A node appears twice when two
    /// parallel bonds reach it (periodic `d = 1` only).
    pub fn neighbors(&self, node: usize) -> Result<Vec<usize>> {
        let incident = self.adjacency.get(node).ok_or(Error::NodeOutOfRange {
            index: node,
            len: self.nodes.len(),
        })?;
        Ok(incident.iter().map(|&e| other_end(self.edges[e], node)).collect())
    }

    pub fn stats(&self) -> LatticeStats {
        let mut degree_histogram = BTreeMap::new();
        for incident in &self.adjacency {
            *degree_histogram.entry(incident.len()).or_insert(0) += 1;
        }
        LatticeStats {
            node_count: self.nodes.len(),
            edge_count: self.edges.len(),
            degree_histogram,
        }
    }

    pub fn dump(&self) -> LatticeDump {
        LatticeDump {
            spec: self.spec,
            nodes: self.nodes.iter().map(Coordinate::axes).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

pub fn neighbors(lattice: &RhgLattice, node: usize) -> Result<Vec<usize>> {
    lattice.neighbors(node)
}

pub fn lattice_stats(lattice: &RhgLattice) -> LatticeStats {
    lattice.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts bonds by checking every unit step out of every qubit site,
    /// without reference to the constructed edge list.
    fn brute_force_bond_count(spec: LatticeSpec) -> (usize, Vec<usize>) {
        let len = spec.axis_len();
        let mut sites = Vec::new();
        for x in 0..len {
            for y in 0..len {
                for z in 0..len {
                    let c = Coordinate::new(x, y, z);
                    if c.kind().is_some() {
                        sites.push(c);
                    }
                }
            }
        }
        let mut degrees = Vec::with_capacity(sites.len());
        for s in &sites {
            let mut deg = 0;
            for axis in 0..3 {
                for step in [-1, 1] {
                    let mut t = s.axes();
                    t[axis] += step;
                    if spec.boundary == Boundary::Periodic {
                        t[axis] = t[axis].rem_euclid(len);
                    } else if t[axis] < 0 || t[axis] >= len {
                        continue;
                    }
                    if Coordinate::from_axes(t).kind().is_some() {
                        deg += 1;
                    }
                }
            }
            degrees.push(deg);
        }
        let total: usize = degrees.iter().sum();
        (total / 2, degrees)
    }

    #[test]
    fn rejects_zero_distance() {
        assert!(build_lattice(LatticeSpec::periodic(0)).is_err());
        assert!(build_lattice(LatticeSpec::open(0)).is_err());
    }

    #[test]
    fn periodic_counts_match_brute_force() {
        for d in 1..=4 {
            let spec = LatticeSpec::periodic(d);
            let lat = build_lattice(spec).unwrap();
            let (bonds, degrees) = brute_force_bond_count(spec);
            let d3 = (d * d * d) as usize;
            assert_eq!(lat.node_count(), 6 * d3);
            assert_eq!(lat.edge_count(), 12 * d3);
            assert_eq!(bonds, lat.edge_count());
            assert!(degrees.iter().all(|&k| k == 4));
            assert!((0..lat.node_count()).all(|n| lat.degree(n) == 4));
        }
    }

    #[test]
    fn open_counts_match_brute_force() {
        for d in 1..=3 {
            let spec = LatticeSpec::open(d);
            let lat = build_lattice(spec).unwrap();
            let (bonds, degrees) = brute_force_bond_count(spec);
            assert_eq!(bonds, lat.edge_count());
            let built: Vec<usize> = (0..lat.node_count()).map(|n| lat.degree(n)).collect();
            assert_eq!(built, degrees);
        }
    }

    #[test]
    fn d1_stats() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        let stats = lat.stats();
        assert_eq!(stats.node_count, 6);
        assert_eq!(stats.edge_count, 12);
        assert_eq!(stats.degree_histogram, BTreeMap::from([(4, 6)]));
    }

    #[test]
    fn d10_stats() {
        let lat = build_lattice(LatticeSpec::periodic(10)).unwrap();
        let stats = lattice_stats(&lat);
        assert_eq!(stats.node_count, 6000);
        assert_eq!(stats.edge_count, 12000);
        assert_eq!(stats.degree_histogram, BTreeMap::from([(4, 6000)]));
    }

    #[test]
    fn face_qubit_neighbors() {
        let lat = build_lattice(LatticeSpec::periodic(3)).unwrap();
        let n = lat.index_of(Coordinate::new(1, 1, 0)).unwrap();
        let mut got: Vec<Coordinate> = lat.neighbors(n).unwrap().into_iter().map(|i| lat.nodes()[i]).collect();
        got.sort();
        let mut want = vec![
            Coordinate::new(0, 1, 0),
            Coordinate::new(2, 1, 0),
            Coordinate::new(1, 0, 0),
            Coordinate::new(1, 2, 0),
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn edge_qubit_neighbors_are_faces() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let n = lat.index_of(Coordinate::new(1, 0, 0)).unwrap();
        let nb = lat.neighbors(n).unwrap();
        assert_eq!(nb.len(), 4);
        assert!(nb.iter().all(|&i| lat.nodes()[i].kind() == Some(SiteKind::Face)));
    }

    #[test]
    fn open_corner_has_fewer_neighbors() {
        let lat = build_lattice(LatticeSpec::open(2)).unwrap();
        let n = lat.index_of(Coordinate::new(1, 0, 0)).unwrap();
        assert!(lat.neighbors(n).unwrap().len() < 4);
    }

    #[test]
    fn neighbors_rejects_bad_index() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        assert!(matches!(
            neighbors(&lat, 6),
            Err(Error::NodeOutOfRange { index: 6, len: 6 })
        ));
    }

    #[test]
    fn nodes_are_lexicographic_and_deterministic() {
        let a = build_lattice(LatticeSpec::periodic(3)).unwrap();
        let b = build_lattice(LatticeSpec::periodic(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adjacency_rule_and_parity() {
        for spec in [LatticeSpec::periodic(3), LatticeSpec::open(3)] {
            let lat = build_lattice(spec).unwrap();
            let len = spec.axis_len();
            for &(a, b) in lat.edges() {
                assert_ne!(a, b);
                let (ca, cb) = (lat.nodes()[a], lat.nodes()[b]);
                assert_ne!(ca.kind(), cb.kind());
                let diffs: Vec<i32> = (0..3)
                    .map(|k| {
                        let d = (ca.axes()[k] - cb.axes()[k]).abs();
                        if spec.boundary == Boundary::Periodic {
                            d.min(len - d)
                        } else {
                            d
                        }
                    })
                    .collect();
                assert_eq!(diffs.iter().filter(|&&d| d == 1).count(), 1);
                assert_eq!(diffs.iter().filter(|&&d| d == 0).count(), 2);
            }
        }
    }

    #[test]
    fn no_duplicate_pairs_for_d_at_least_two() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let mut pairs = lat.edges().to_vec();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), lat.edge_count());
    }

    #[test]
    fn slots_index_into_adjacency() {
        let lat = build_lattice(LatticeSpec::open(2)).unwrap();
        for (e, &(a, b)) in lat.edges().iter().enumerate() {
            let (sa, sb) = lat.edge_slots(e);
            assert_eq!(lat.incident_edges(a)[sa as usize], e);
            assert_eq!(lat.incident_edges(b)[sb as usize], e);
        }
    }

    #[test]
    fn dump_round_trips_through_json() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        let text = serde_json::to_string(&lat.dump()).unwrap();
        let back: LatticeDump = serde_json::from_str(&text).unwrap();
        assert_eq!(back, lat.dump());
        assert_eq!(back.nodes.len(), 6);
        assert_eq!(back.edges.len(), 12);
    }
}
