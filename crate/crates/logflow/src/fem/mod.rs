//! Mixed finite-element layer: equal-order quadratic interpolation of
//! velocity, pressure, and the log-state on six-node triangles, with
//! degree-of-freedom bookkeeping, Dirichlet data, and the residual/Jacobian
//! assembly for the stabilized weak form.

pub mod assemble;
pub mod eval;
pub mod shape;

pub use assemble::{gls_prefactor, tau_consistency, tau_momentum, Assembler, AssemblyOptions, StabFreeze};
pub use eval::FieldSampler;

use crate::mesh::{BoundaryTag, Mesh};
use crate::tensor2::{SymTensor2, Vec2};

/// Unknown slots stored per node, in order.
pub const SLOT_U: usize = 0;
pub const SLOT_V: usize = 1;
pub const SLOT_P: usize = 2;
pub const SLOT_PSI_XX: usize = 3;
pub const SLOT_PSI_XY: usize = 4;
pub const SLOT_PSI_YY: usize = 5;
pub const DOFS_PER_NODE: usize = 6;

/// Global index of `slot` at `node`.
pub fn dof(node: usize, slot: usize) -> usize {
    DOFS_PER_NODE * node + slot
}

/// Nodal coefficient vector for all fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub values: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n_nodes: usize) -> FieldState {
        FieldState { values: vec![0.0; DOFS_PER_NODE * n_nodes] }
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / DOFS_PER_NODE
    }

    pub fn u(&self, node: usize) -> Vec2 {
        Vec2::new(self.values[dof(node, SLOT_U)], self.values[dof(node, SLOT_V)])
    }

    pub fn p(&self, node: usize) -> f64 {
        self.values[dof(node, SLOT_P)]
    }

    pub fn psi(&self, node: usize) -> SymTensor2 {
        SymTensor2::new(
            self.values[dof(node, SLOT_PSI_XX)],
            self.values[dof(node, SLOT_PSI_XY)],
            self.values[dof(node, SLOT_PSI_YY)],
        )
    }

    pub fn set_u(&mut self, node: usize, u: Vec2) {
        self.values[dof(node, SLOT_U)] = u.x;
        self.values[dof(node, SLOT_V)] = u.y;
    }

    pub fn set_p(&mut self, node: usize, p: f64) {
        self.values[dof(node, SLOT_P)] = p;
    }

    pub fn set_psi(&mut self, node: usize, psi: SymTensor2) {
        self.values[dof(node, SLOT_PSI_XX)] = psi.xx;
        self.values[dof(node, SLOT_PSI_XY)] = psi.xy;
        self.values[dof(node, SLOT_PSI_YY)] = psi.yy;
    }
}

/// One Dirichlet rule: fix `slot` on every node of a tagged boundary to a
/// position-dependent value.
pub struct BcEntry {
    pub tag: BoundaryTag,
    pub slot: usize,
    pub value: Box<dyn Fn(Vec2) -> f64>,
}

/// Ordered Dirichlet data. Entries are applied first to last, so a later
/// entry overrides earlier ones on shared nodes (corners); callers list
/// boundaries from weakest to strongest claim.
#[derive(Default)]
pub struct DirichletSpec {
    pub entries: Vec<BcEntry>,
    /// Single-dof pins: `(slot, location, value)` fixes `slot` on the mesh
    /// node nearest to `location`.
    pub pins: Vec<(usize, Vec2, f64)>,
}

impl DirichletSpec {
    pub fn new() -> DirichletSpec {
        DirichletSpec::default()
    }

    pub fn constant(mut self, tag: BoundaryTag, slot: usize, value: f64) -> Self {
        self.entries.push(BcEntry { tag, slot, value: Box::new(move |_| value) });
        self
    }

    pub fn function(
        mut self,
        tag: BoundaryTag,
        slot: usize,
        value: impl Fn(Vec2) -> f64 + 'static,
    ) -> Self {
        self.entries.push(BcEntry { tag, slot, value: Box::new(value) });
        self
    }

    /// All three log-state components from one tensor-valued function.
    pub fn psi(
        self,
        tag: BoundaryTag,
        value: impl Fn(Vec2) -> SymTensor2 + Clone + 'static,
    ) -> Self {
        let (v1, v2) = (value.clone(), value.clone());
        self.function(tag, SLOT_PSI_XX, move |p| v1(p).xx)
            .function(tag, SLOT_PSI_XY, move |p| v2(p).xy)
            .function(tag, SLOT_PSI_YY, move |p| value(p).yy)
    }

    pub fn pin_nearest(mut self, slot: usize, location: Vec2, value: f64) -> Self {
        self.pins.push((slot, location, value));
        self
    }
}

/// Degree-of-freedom map: which global dofs carry Dirichlet data (and what
/// value), plus the compressed numbering of the free ones.
pub struct DofMap {
    pub n_nodes: usize,
    /// `Some(value)` marks a constrained dof.
    pub dirichlet: Vec<Option<f64>>,
    pub free_of_global: Vec<Option<usize>>,
    pub global_of_free: Vec<usize>,
}

impl DofMap {
    pub fn build(mesh: &Mesh, spec: &DirichletSpec) -> DofMap {
        let mut dirichlet: Vec<Option<f64>> = vec![None; DOFS_PER_NODE * mesh.n_nodes()];
        for entry in &spec.entries {
            for node in mesh.nodes_on(entry.tag) {
                dirichlet[dof(node, entry.slot)] = Some((entry.value)(mesh.coords[node]));
            }
        }
        for &(slot, location, value) in &spec.pins {
            let node = nearest_node(mesh, location);
            dirichlet[dof(node, slot)] = Some(value);
        }
        DofMap::from_dirichlet(mesh.n_nodes(), dirichlet)
    }

    /// Same as [`DofMap::build`], but additionally pins every log-state dof
    /// to zero (used for the Newtonian starting solve).
    pub fn build_with_psi_pinned(mesh: &Mesh, spec: &DirichletSpec) -> DofMap {
        let base = DofMap::build(mesh, spec);
        let mut dirichlet = base.dirichlet;
        for node in 0..mesh.n_nodes() {
            for slot in [SLOT_PSI_XX, SLOT_PSI_XY, SLOT_PSI_YY] {
                dirichlet[dof(node, slot)] = Some(0.0);
            }
        }
        DofMap::from_dirichlet(mesh.n_nodes(), dirichlet)
    }

    fn from_dirichlet(n_nodes: usize, dirichlet: Vec<Option<f64>>) -> DofMap {
        let mut free_of_global = vec![None; dirichlet.len()];
        let mut global_of_free = Vec::new();
        for (g, fixed) in dirichlet.iter().enumerate() {
            if fixed.is_none() {
                free_of_global[g] = Some(global_of_free.len());
                global_of_free.push(g);
            }
        }
        DofMap { n_nodes, dirichlet, free_of_global, global_of_free }
    }

    pub fn n_free(&self) -> usize {
        self.global_of_free.len()
    }

    /// Write the Dirichlet values into a state vector.
    pub fn apply_to(&self, state: &mut FieldState) {
        for (g, fixed) in self.dirichlet.iter().enumerate() {
            if let Some(v) = fixed {
                state.values[g] = *v;
            }
        }
    }

    /// Extract the free components of a state.
    pub fn get_free(&self, state: &FieldState) -> Vec<f64> {
        self.global_of_free.iter().map(|&g| state.values[g]).collect()
    }

    /// Overwrite the free components of a state.
    pub fn set_free(&self, state: &mut FieldState, free: &[f64]) {
        assert_eq!(free.len(), self.n_free());
        for (k, &g) in self.global_of_free.iter().enumerate() {
            state.values[g] = free[k];
        }
    }
}

fn nearest_node(mesh: &Mesh, location: Vec2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (n, &p) in mesh.coords.iter().enumerate() {
        let d = (p - location).norm();
        if d < best_d {
            best_d = d;
            best = n;
        }
    }
    best
}
