//! Triangular meshes with second-order (six-node) elements.
//!
//! Nodes are stored flat; each element lists `[v0, v1, v2, m01, m12, m20]` —
//! three corner vertices counterclockwise, then the midside nodes opposite
//! that ordering (`m01` between `v0` and `v1`, and so on). Midside nodes on
//! curved boundaries sit on the true curve, which is all the isoparametric
//! mapping needs; there is no separate curvature flag.
//!
//! Boundary edges carry a [`BoundaryTag`] and are addressed as
//! `(element, local edge)`, local edge `k` running from vertex `k` to vertex
//! `(k+1) % 3`.

pub mod gen;
pub mod gmsh;

use std::collections::HashMap;

use thiserror::Error;

use crate::tensor2::Vec2;

/// Physical classification of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Inflow,
    Outflow,
    Wall,
    Cylinder,
    Symmetry,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Inflow,
        BoundaryTag::Outflow,
        BoundaryTag::Wall,
        BoundaryTag::Cylinder,
        BoundaryTag::Symmetry,
    ];

    /// Canonical lowercase name, also used as the Gmsh physical name.
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::Wall => "wall",
            BoundaryTag::Cylinder => "cylinder",
            BoundaryTag::Symmetry => "symmetry",
        }
    }

    pub fn from_name(name: &str) -> Option<BoundaryTag> {
        let lower = name.trim().trim_matches('"').to_ascii_lowercase();
        BoundaryTag::ALL.iter().copied().find(|t| t.name() == lower)
    }
}

/// A boundary edge: element index, local edge within it, and its tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub elem: usize,
    pub local_edge: u8,
    pub tag: BoundaryTag,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported mesh format version {found:?} (expected 2.2 ASCII)")]
    UnsupportedVersion { found: String },
    #[error("unsupported element type {type_id} (only 3-node lines and 6-node triangles)")]
    UnsupportedElementType { type_id: u32 },
    #[error("physical id {id} has no recognized name; boundary lines need one of inflow/outflow/wall/cylinder/symmetry")]
    MissingPhysicalName { id: u32 },
    #[error("element {elem} is inverted (negative vertex-triangle area)")]
    InvertedElement { elem: usize },
    #[error("boundary line ({a}, {b}) does not match an edge of any triangle")]
    DanglingBoundaryLine { a: usize, b: usize },
    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh is not watertight: edge ({a}, {b}) borders one triangle but carries no boundary tag")]
    UntaggedBoundaryEdge { a: usize, b: usize },
    #[error("node index {node} out of range ({n_nodes} nodes)")]
    NodeOutOfRange { node: usize, n_nodes: usize },
}

/// A second-order triangular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub coords: Vec<Vec2>,
    pub elems: Vec<[usize; 6]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elems.len()
    }

    /// Corner vertices of an element.
    pub fn vertices(&self, e: usize) -> [Vec2; 3] {
        let el = &self.elems[e];
        [self.coords[el[0]], self.coords[el[1]], self.coords[el[2]]]
    }

    /// Signed area of the element's vertex triangle (positive when the
    /// corners run counterclockwise).
    pub fn vertex_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.vertices(e);
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    }

    /// Element size `h = sqrt(2·area)` — the legs of an isosceles right
    /// triangle of the same area, which is the natural scale on meshes built
    /// from split quads.
    pub fn element_h(&self, e: usize) -> f64 {
        (2.0 * self.vertex_area(e).abs()).sqrt()
    }

    /// Node triple of a local edge: the two endpoint vertices and the
    /// midside node between them.
    pub fn edge_nodes(&self, e: usize, local_edge: u8) -> (usize, usize, usize) {
        let el = &self.elems[e];
        let k = local_edge as usize;
        (el[k], el[(k + 1) % 3], el[3 + k])
    }

    /// All nodes (corner and midside) lying on edges with the given tag.
    pub fn nodes_on(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut seen = vec![false; self.n_nodes()];
        for be in &self.boundary_edges {
            if be.tag == tag {
                let (a, b, m) = self.edge_nodes(be.elem, be.local_edge);
                seen[a] = true;
                seen[b] = true;
                seen[m] = true;
            }
        }
        (0..self.n_nodes()).filter(|&n| seen[n]).collect()
    }

    /// Structural validation: indices in range, positive orientation,
    /// watertightness (every once-shared edge carries a tag, every tag sits
    /// on a once-shared edge).
    pub fn check(&self) -> Result<(), MeshError> {
        for (e, el) in self.elems.iter().enumerate() {
            for &n in el {
                if n >= self.n_nodes() {
                    return Err(MeshError::NodeOutOfRange { node: n, n_nodes: self.n_nodes() });
                }
            }
            if self.vertex_area(e) <= 0.0 {
                return Err(MeshError::InvertedElement { elem: e });
            }
        }

        // Count how many triangles share each vertex pair.
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for el in &self.elems {
            for k in 0..3 {
                let (a, b) = (el[k], el[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }

        let mut tagged: HashMap<(usize, usize), u32> = HashMap::new();
        for be in &self.boundary_edges {
            let (a, b, _) = self.edge_nodes(be.elem, be.local_edge);
            *tagged.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }

        for (&(a, b), &count) in &edge_count {
            let t = tagged.get(&(a, b)).copied().unwrap_or(0);
            match count {
                1 if t != 1 => return Err(MeshError::UntaggedBoundaryEdge { a, b }),
                2 if t != 0 => return Err(MeshError::DanglingBoundaryLine { a, b }),
                1 | 2 => {}
                _ => return Err(MeshError::DanglingBoundaryLine { a, b }),
            }
        }
        for &(a, b) in tagged.keys() {
            if !edge_count.contains_key(&(a, b)) {
                return Err(MeshError::DanglingBoundaryLine { a, b });
            }
        }
        Ok(())
    }

    /// Bounding box `(min, max)` over all nodes.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.coords {
            lo.x = lo.x.min(c.x);
            lo.y = lo.y.min(c.y);
            hi.x = hi.x.max(c.x);
            hi.y = hi.y.max(c.y);
        }
        (lo, hi)
    }
}
