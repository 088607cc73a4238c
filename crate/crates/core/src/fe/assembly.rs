//! Global assembly of the SIPG forms over the broken P1 space.
//!
//! Every matrix acts on the global broken vector (blocks concatenated in
//! mesh order). Interface terms are assembled segment by segment in the fixed
//! interface order, with both sides of an interior segment handled together.

use crate::coefficient::CoefficientField;
use crate::error::{Error, Result};
use crate::fe::element::{self, Point};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{InterfaceEdge, Neighbor, PartitionedMesh, Segment};

/// Per-segment replacement for the `δ/h_ij` factor of the penalty form.
pub trait EdgeScaling: Sync {
    fn scale(&self, seg: &Segment) -> f64;
}

impl<F: Fn(&Segment) -> f64 + Sync> EdgeScaling for F {
    fn scale(&self, seg: &Segment) -> f64 {
        self(seg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyScaling {
    /// `δ / h_ij`, the fine-grid scaling.
    Fine { delta: f64 },
    /// The same coefficient on every segment (e.g. `δ/H` for a classical
    /// coarse SIPG penalty).
    Uniform(f64),
}

impl EdgeScaling for PenaltyScaling {
    fn scale(&self, seg: &Segment) -> f64 {
        match *self {
            PenaltyScaling::Fine { delta } => delta / seg.h_ij,
            PenaltyScaling::Uniform(c) => c,
        }
    }
}

fn check_field(mesh: &PartitionedMesh, field: &CoefficientField) -> Result<()> {
    let n = mesh.cells_per_side();
    if field.cells_per_side() != n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: field.len(),
        });
    }
    Ok(())
}

fn triangle(mesh: &PartitionedMesh, block: usize, tri: usize) -> ([Point; 3], [usize; 3]) {
    let blk = &mesh.blocks[block];
    let t = blk.triangles[tri];
    (t.map(|k| blk.vertices[k]), t)
}

fn assemble_cells<F>(
    mesh: &PartitionedMesh,
    field: &CoefficientField,
    local: F,
) -> Result<CsrMatrix>
where
    F: Fn(&[Point; 3], f64) -> [[f64; 3]; 3],
{
    check_field(mesh, field)?;
    let n = mesh.total_dofs();
    let per_block = 9 * 2 * mesh.fine() * mesh.fine();
    let mut t = TripletBuilder::with_capacity(n, n, per_block * mesh.n_blocks());
    for (b, blk) in mesh.blocks.iter().enumerate() {
        let off = mesh.block_offset(b);
        for tri in 0..blk.triangles.len() {
            let (v, nodes) = triangle(mesh, b, tri);
            let ke = local(&v, field.element_value(mesh, b, tri));
            for a in 0..3 {
                for c in 0..3 {
                    t.push(off + nodes[a], off + nodes[c], ke[a][c]);
                }
            }
        }
    }
    Ok(t.build())
}

/// Block-diagonal `Σ_i a_i(u, v)` with `a_i(u,v) = ∫_{Ω_i} κ ∇u·∇v`.
pub fn assemble_energy(mesh: &PartitionedMesh, field: &CoefficientField) -> Result<CsrMatrix> {
    assemble_cells(mesh, field, element::stiffness)
}

/// Block-diagonal κ-weighted mass `Σ_i m_i(u, v)`.
pub fn assemble_mass(mesh: &PartitionedMesh, field: &CoefficientField) -> Result<CsrMatrix> {
    assemble_cells(mesh, field, element::mass)
}

/// A linear functional on the broken space, as sparse (dof, weight) pairs.
type Functional = Vec<(usize, f64)>;

/// `v ↦ ∫_seg (v_j − v_i) ds`, exact for P1 traces; `v_j = 0` on `∂Ω`.
fn jump_integral(mesh: &PartitionedMesh, edge: &InterfaceEdge, seg: &Segment) -> Functional {
    let w = 0.5 * seg.length;
    let oi = mesh.block_offset(edge.block);
    let mut f: Functional = seg.nodes_i.iter().map(|&k| (oi + k, -w)).collect();
    if let (Neighbor::Block(j), Some(nj)) = (edge.neighbor, seg.nodes_j) {
        let oj = mesh.block_offset(j);
        f.extend(nj.iter().map(|&k| (oj + k, w)));
    }
    f
}

/// `v ↦ ∂v/∂n` on the segment, from the adjacent triangle of one side.
fn normal_derivative(
    mesh: &PartitionedMesh,
    block: usize,
    tri: usize,
    normal: Point,
) -> Functional {
    let (v, nodes) = triangle(mesh, block, tri);
    let g = element::normal_derivatives(&v, normal);
    let off = mesh.block_offset(block);
    nodes.iter().zip(g).map(|(&k, gk)| (off + k, gk)).collect()
}

fn push_symmetric_outer(t: &mut TripletBuilder, c: f64, x: &Functional, y: &Functional) {
    for &(r, xr) in x {
        for &(s, ys) in y {
            t.push(r, s, c * xr * ys);
            t.push(s, r, c * xr * ys);
        }
    }
}

/// Consistency/symmetry matrix `Σ_i s_i(u, v)`, where on each segment of
/// `∂Ω_i`
///
/// `s_i(u,v) = (1/l_ij) ∫ κ_ij (∂u_i/∂n_i (v_j − v_i) + ∂v_i/∂n_i (u_j − u_i))`.
///
/// The normal derivative is the constant P1 gradient of the triangle on the
/// `i` side of the segment.
pub fn assemble_consistency(mesh: &PartitionedMesh) -> Result<CsrMatrix> {
    mesh.require_weights()?;
    let n = mesh.total_dofs();
    let mut t = TripletBuilder::new(n, n);
    for edge in &mesh.interfaces {
        let c = 1.0 / edge.l();
        let normal = edge.side.outward_normal();
        for seg in &edge.segments {
            let jump = jump_integral(mesh, edge, seg);
            let gi = normal_derivative(mesh, edge.block, seg.tri_i, normal);
            push_symmetric_outer(&mut t, c * seg.kappa, &jump, &gi);
            if let (Neighbor::Block(j), Some(tj)) = (edge.neighbor, seg.tri_j) {
                // seen from block j the jump and the normal both flip sign
                let gj = normal_derivative(mesh, j, tj, [-normal[0], -normal[1]]);
                let jump_j: Functional = jump.iter().map(|&(k, w)| (k, -w)).collect();
                push_symmetric_outer(&mut t, c * seg.kappa, &jump_j, &gj);
            }
        }
    }
    Ok(t.build())
}

/// Penalty matrix `Σ_i p_i(u, v)` with `scaling` standing in for `δ/h_ij`:
///
/// `p_i(u,v) = (1/l_ij) σ ∫ κ_ij (u_j − u_i)(v_j − v_i)`.
///
/// An interior segment is visited from both sides, each carrying `1/l = 1/2`.
pub fn assemble_penalty<S: EdgeScaling + ?Sized>(
    mesh: &PartitionedMesh,
    scaling: &S,
) -> Result<CsrMatrix> {
    mesh.require_weights()?;
    let n = mesh.total_dofs();
    let mut t = TripletBuilder::new(n, n);
    for edge in &mesh.interfaces {
        let sides = if edge.is_boundary() { 1.0 } else { 2.0 };
        for seg in &edge.segments {
            let sigma = scaling.scale(seg);
            if !(sigma > 0.0) {
                return Err(Error::NonPositiveScaling(sigma));
            }
            let c = sides * sigma * seg.kappa / edge.l();
            let em = element::edge_mass(seg.length);
            // jump at endpoint p as a functional: +1 on j's node, −1 on i's node
            let oi = mesh.block_offset(edge.block);
            let mut jumps: Vec<Functional> =
                seg.nodes_i.iter().map(|&k| vec![(oi + k, -1.0)]).collect();
            if let (Neighbor::Block(j), Some(nj)) = (edge.neighbor, seg.nodes_j) {
                let oj = mesh.block_offset(j);
                for p in 0..2 {
                    jumps[p].push((oj + nj[p], 1.0));
                }
            }
            for p in 0..2 {
                for q in 0..2 {
                    for &(r, wr) in &jumps[p] {
                        for &(s, ws) in &jumps[q] {
                            t.push(r, s, c * em[p][q] * wr * ws);
                        }
                    }
                }
            }
        }
    }
    Ok(t.build())
}

/// Block-diagonal boundary mass `Σ_i m_i^δ(u, v)`,
/// `m_i^δ(u,v) = Σ_{E_ij ⊂ ∂Ω_i} (1/l_ij) σ ∫ κ_ij u_i v_i`, supported on the
/// boundary nodes of each block.
pub fn assemble_boundary_mass<S: EdgeScaling + ?Sized>(
    mesh: &PartitionedMesh,
    scaling: &S,
) -> Result<CsrMatrix> {
    mesh.require_weights()?;
    let n = mesh.total_dofs();
    let mut t = TripletBuilder::new(n, n);
    for edge in &mesh.interfaces {
        for seg in &edge.segments {
            let sigma = scaling.scale(seg);
            if !(sigma > 0.0) {
                return Err(Error::NonPositiveScaling(sigma));
            }
            let c = sigma * seg.kappa / edge.l();
            let em = element::edge_mass(seg.length);
            let mut sides = vec![(mesh.block_offset(edge.block), seg.nodes_i)];
            if let (Neighbor::Block(j), Some(nj)) = (edge.neighbor, seg.nodes_j) {
                sides.push((mesh.block_offset(j), nj));
            }
            for (off, nodes) in sides {
                for p in 0..2 {
                    for q in 0..2 {
                        t.push(off + nodes[p], off + nodes[q], c * em[p][q]);
                    }
                }
            }
        }
    }
    Ok(t.build())
}

/// Load vector `b_k = ∫ f φ_k` by the edge-midpoint rule per triangle.
pub fn assemble_load<F: Fn(f64, f64) -> f64 + ?Sized>(mesh: &PartitionedMesh, f: &F) -> Vec<f64> {
    let mut b = vec![0.0; mesh.total_dofs()];
    for (blk_idx, blk) in mesh.blocks.iter().enumerate() {
        let off = mesh.block_offset(blk_idx);
        for tri in 0..blk.triangles.len() {
            let (v, nodes) = triangle(mesh, blk_idx, tri);
            let be = element::load(&v, f);
            for a in 0..3 {
                b[off + nodes[a]] += be[a];
            }
        }
    }
    b
}

/// Load vector for a constant source: each node receives `f·|T|/3` from
/// every adjacent triangle.
pub fn assemble_load_constant(mesh: &PartitionedMesh, value: f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.total_dofs()];
    for (blk_idx, blk) in mesh.blocks.iter().enumerate() {
        let off = mesh.block_offset(blk_idx);
        for (tri, nodes) in blk.triangles.iter().enumerate() {
            let share = value * blk.triangle_area(tri) / 3.0;
            for &k in nodes {
                b[off + k] += share;
            }
        }
    }
    b
}
