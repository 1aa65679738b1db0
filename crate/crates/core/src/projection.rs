//! Sparse projection by connected components.
//!
//! Projecting `u` onto `{v : (D v)_e = 0 for every edge e outside the
//! support}` forces all pixels joined by unsupported edges to share one value,
//! and the closest such image replaces each connected component of the
//! unsupported subgraph by its mean. Components are found with a disjoint-set
//! forest in one pass over the edges.

use crate::error::{Error, Result};
use crate::lattice::{EdgeVector, LatticeGraph};

/// Edges where `gamma` is nonzero (in any channel, for color).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    flags: Vec<bool>,
    count: usize,
}

impl SupportSet {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        let count = flags.iter().filter(|&&f| f).count();
        SupportSet { flags, count }
    }

    pub fn from_gamma(gamma: &EdgeVector) -> Self {
        Self::from_flags(
            (0..gamma.edge_count())
                .map(|e| gamma.is_active(e))
                .collect(),
        )
    }

    pub fn empty(edge_count: usize) -> Self {
        Self::from_flags(vec![false; edge_count])
    }

    pub fn full(edge_count: usize) -> Self {
        Self::from_flags(vec![true; edge_count])
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.flags[edge]
    }

    pub fn nonzero_count(&self) -> usize {
        self.count
    }

    pub fn edge_count(&self) -> usize {
        self.flags.len()
    }

    /// Fraction of supported edges. An edgeless lattice counts as fully
    /// supported.
    pub fn sparsity_level(&self) -> f64 {
        sparsity_level(self.count, self.flags.len())
    }
}

pub(crate) fn sparsity_level(nonzero: usize, edge_count: usize) -> f64 {
    if edge_count == 0 {
        1.0
    } else {
        nonzero as f64 / edge_count as f64
    }
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Connected components of the lattice restricted to unsupported edges.
///
/// Component ids are assigned in order of each component's smallest pixel
/// index, so the partition is a deterministic function of the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    ids: Vec<usize>,
    sizes: Vec<usize>,
}

impl ComponentPartition {
    pub fn component_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn pixel_count(&self) -> usize {
        self.ids.len()
    }

    /// Pixel indices of every component, each list ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&n| Vec::with_capacity(n)).collect();
        for (pixel, &id) in self.ids.iter().enumerate() {
            out[id].push(pixel);
        }
        out
    }
}

pub fn find_components(lattice: &LatticeGraph, support: &SupportSet) -> Result<ComponentPartition> {
    if support.edge_count() != lattice.edge_count() {
        return Err(Error::mismatch(
            "support flags",
            lattice.edge_count(),
            support.edge_count(),
        ));
    }
    let p = lattice.pixel_count();
    let mut forest = UnionFind::new(p);
    for (&(i, j), &supported) in lattice.edges().iter().zip(support.flags()) {
        if !supported {
            forest.union(i, j);
        }
    }
    let mut root_id = vec![usize::MAX; p];
    let mut ids = Vec::with_capacity(p);
    let mut sizes = Vec::new();
    for pixel in 0..p {
        let root = forest.find(pixel);
        if root_id[root] == usize::MAX {
            root_id[root] = sizes.len();
            sizes.push(0);
        }
        let id = root_id[root];
        sizes[id] += 1;
        ids.push(id);
    }
    Ok(ComponentPartition { ids, sizes })
}

/// Replaces every pixel by the mean of its component. `u` is channel-planar;
/// each channel is averaged over the same partition.
pub fn project(u: &[f64], partition: &ComponentPartition) -> Result<Vec<f64>> {
    let p = partition.pixel_count();
    if p == 0 || u.len() % p != 0 {
        return Err(Error::mismatch("projection input", p, u.len()));
    }
    let k = partition.component_count();
    let mut out = vec![0.0; u.len()];
    let mut sums = vec![0.0; k];
    let mut reference = vec![0.0; k];
    for (uc, oc) in u.chunks_exact(p).zip(out.chunks_exact_mut(p)) {
        // means are taken relative to the first member, so a component that
        // is already constant keeps its value bit for bit
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut seen = 0;
        for (&v, &id) in uc.iter().zip(&partition.ids) {
            if id == seen {
                reference[id] = v;
                seen += 1;
            }
            sums[id] += v - reference[id];
        }
        for ((s, &n), &r) in sums.iter_mut().zip(&partition.sizes).zip(&reference) {
            *s = r + *s / n as f64;
        }
        for (o, &id) in oc.iter_mut().zip(&partition.ids) {
            *o = sums[id];
        }
    }
    Ok(out)
}

/// Convenience: components from `gamma`'s support, then projection of `u`.
pub fn project_onto_support(
    lattice: &LatticeGraph,
    u: &[f64],
    gamma: &EdgeVector,
) -> Result<Vec<f64>> {
    let partition = find_components(lattice, &SupportSet::from_gamma(gamma))?;
    project(u, &partition)
}
