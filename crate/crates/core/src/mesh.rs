//! Coarse partition of the unit square into `M×M` blocks, each carrying its
//! own structured P1 triangulation, plus the interface edges that couple the
//! blocks in the DG formulation.
//!
//! Numbering is fixed so that every assembled matrix is bit-reproducible:
//!
//! * blocks are row-major from the bottom-left corner, `i = by·M + bx`;
//! * local nodes are row-major inside a block, `k = a + b·(m+1)`;
//! * cell `(a, b)` is split along its `(a,b)–(a+1,b+1)` diagonal into
//!   triangle `2(a + b·m)` (below the diagonal) and `2(a + b·m) + 1` (above);
//! * interfaces are listed block by block, sides in south/east/north/west
//!   order; an interior edge is recorded once, by the lower-indexed block.

use crate::coefficient::CoefficientField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    South,
    East,
    North,
    West,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::South, Side::East, Side::North, Side::West];

    pub fn opposite(self) -> Side {
        match self {
            Side::South => Side::North,
            Side::North => Side::South,
            Side::East => Side::West,
            Side::West => Side::East,
        }
    }

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::South => [0.0, -1.0],
            Side::East => [1.0, 0.0],
            Side::North => [0.0, 1.0],
            Side::West => [-1.0, 0.0],
        }
    }
}

/// What lies across a coarse edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Block(usize),
    Boundary,
}

#[derive(Debug, Clone)]
pub struct SubdomainMesh {
    pub index: usize,
    /// `(bx, by)` position in the coarse grid.
    pub coords: [usize; 2],
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Local indices of the nodes on `∂Ω_i`, ascending.
    pub boundary_nodes: Vec<usize>,
    /// Local indices of the remaining nodes, ascending.
    pub interior_nodes: Vec<usize>,
    /// Coarse edges of the block, including those on `∂Ω`.
    pub n_edges: usize,
    /// Coarse edges shared with another block.
    pub n_neighbors: usize,
}

impl SubdomainMesh {
    /// `N_i`, the dimension of the local P1 space.
    pub fn n_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangles[t].map(|k| self.vertices[k]);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }
}

/// One fine edge of a coarse interface. Endpoint order is the same on both
/// sides, increasing along the edge.
#[derive(Debug, Clone)]
pub struct Segment {
    pub endpoints: [[f64; 2]; 2],
    pub length: f64,
    pub nodes_i: [usize; 2],
    pub nodes_j: Option<[usize; 2]>,
    /// Local triangle of block `i` containing the segment.
    pub tri_i: usize,
    pub tri_j: Option<usize>,
    /// Global fine cells adjacent on each side.
    pub cell_i: usize,
    pub cell_j: Option<usize>,
    /// Harmonic average of the adjacent permeabilities (`κ_i` on `∂Ω`).
    pub kappa: f64,
    /// Harmonic average of the side mesh sizes (`h_i` on `∂Ω`).
    pub h_ij: f64,
}

#[derive(Debug, Clone)]
pub struct InterfaceEdge {
    pub block: usize,
    pub side: Side,
    pub neighbor: Neighbor,
    pub segments: Vec<Segment>,
}

impl InterfaceEdge {
    /// `l_ij`: 2 on interior edges, 1 on the domain boundary.
    pub fn l(&self) -> f64 {
        match self.neighbor {
            Neighbor::Block(_) => 2.0,
            Neighbor::Boundary => 1.0,
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.neighbor == Neighbor::Boundary
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }
}

#[derive(Debug, Clone)]
pub struct PartitionedMesh {
    coarse: usize,
    fine: usize,
    pub blocks: Vec<SubdomainMesh>,
    pub interfaces: Vec<InterfaceEdge>,
    weighted: bool,
}

impl PartitionedMesh {
    /// Partition `[0,1]²` into `coarse × coarse` blocks with `fine` cells per
    /// block side.
    pub fn build(coarse: usize, fine: usize) -> Result<Self> {
        if coarse == 0 || fine == 0 {
            return Err(Error::InvalidMesh(format!(
                "block count and fine subdivision must be positive (M={coarse}, m={fine})"
            )));
        }
        let n = coarse * fine;
        let np = fine + 1;
        let mut triangles = Vec::with_capacity(2 * fine * fine);
        for b in 0..fine {
            for a in 0..fine {
                let v00 = a + b * np;
                let v10 = v00 + 1;
                let v01 = v00 + np;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let (mut boundary_nodes, mut interior_nodes) = (Vec::new(), Vec::new());
        for b in 0..np {
            for a in 0..np {
                if a == 0 || b == 0 || a == fine || b == fine {
                    boundary_nodes.push(a + b * np);
                } else {
                    interior_nodes.push(a + b * np);
                }
            }
        }

        let mut blocks = Vec::with_capacity(coarse * coarse);
        for by in 0..coarse {
            for bx in 0..coarse {
                let mut vertices = Vec::with_capacity(np * np);
                for b in 0..np {
                    for a in 0..np {
                        vertices.push([
                            (bx * fine + a) as f64 / n as f64,
                            (by * fine + b) as f64 / n as f64,
                        ]);
                    }
                }
                let n_neighbors = [bx > 0, bx + 1 < coarse, by > 0, by + 1 < coarse]
                    .iter()
                    .filter(|&&x| x)
                    .count();
                blocks.push(SubdomainMesh {
                    index: by * coarse + bx,
                    coords: [bx, by],
                    vertices,
                    triangles: triangles.clone(),
                    boundary_nodes: boundary_nodes.clone(),
                    interior_nodes: interior_nodes.clone(),
                    n_edges: 4,
                    n_neighbors,
                });
            }
        }

        let mut mesh = Self {
            coarse,
            fine,
            blocks,
            interfaces: Vec::new(),
            weighted: false,
        };
        let h = mesh.h();
        let mut interfaces = Vec::new();
        for i in 0..coarse * coarse {
            for side in Side::ALL {
                let neighbor = mesh.neighbor(i, side);
                if let Neighbor::Block(j) = neighbor {
                    if j < i {
                        continue;
                    }
                }
                let segments = (0..fine)
                    .map(|k| {
                        let (nodes_i, tri_i) = mesh.side_segment(side, k);
                        let cell_i = mesh.global_cell(i, tri_i);
                        let (nodes_j, tri_j, cell_j) = match neighbor {
                            Neighbor::Block(j) => {
                                let (nj, tj) = mesh.side_segment(side.opposite(), k);
                                (Some(nj), Some(tj), Some(mesh.global_cell(j, tj)))
                            }
                            Neighbor::Boundary => (None, None, None),
                        };
                        let blk = &mesh.blocks[i];
                        let endpoints = [blk.vertices[nodes_i[0]], blk.vertices[nodes_i[1]]];
                        let length = ((endpoints[1][0] - endpoints[0][0]).powi(2)
                            + (endpoints[1][1] - endpoints[0][1]).powi(2))
                        .sqrt();
                        Segment {
                            endpoints,
                            length,
                            nodes_i,
                            nodes_j,
                            tri_i,
                            tri_j,
                            cell_i,
                            cell_j,
                            kappa: 1.0,
                            h_ij: h,
                        }
                    })
                    .collect();
                interfaces.push(InterfaceEdge {
                    block: i,
                    side,
                    neighbor,
                    segments,
                });
            }
        }
        mesh.interfaces = interfaces;
        Ok(mesh)
    }

    /// Copy of the mesh with `κ_ij` and `h_ij` evaluated on every segment.
    pub fn with_weights(&self, field: &CoefficientField) -> Result<Self> {
        let cells = self.cells_per_side();
        if field.cells_per_side() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells * cells,
                got: field.len(),
            });
        }
        for (cell, &v) in field.values().iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NonPositiveCoefficient { cell, value: v });
            }
        }
        let h = self.h();
        let mut out = self.clone();
        for edge in &mut out.interfaces {
            for seg in &mut edge.segments {
                let ki = field.cell_value(seg.cell_i);
                match seg.cell_j {
                    Some(cj) => {
                        seg.kappa = harmonic_mean(ki, field.cell_value(cj));
                        seg.h_ij = harmonic_mean(h, h);
                    }
                    None => {
                        seg.kappa = ki;
                        seg.h_ij = h;
                    }
                }
            }
        }
        out.weighted = true;
        Ok(out)
    }

    pub fn has_weights(&self) -> bool {
        self.weighted
    }

    pub(crate) fn require_weights(&self) -> Result<()> {
        if self.weighted {
            Ok(())
        } else {
            Err(Error::WeightsMissing)
        }
    }

    /// `M`, blocks per side.
    pub fn coarse(&self) -> usize {
        self.coarse
    }

    /// `m`, fine cells per block side.
    pub fn fine(&self) -> usize {
        self.fine
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.coarse * self.fine) as f64
    }

    pub fn coarse_h(&self) -> f64 {
        1.0 / self.coarse as f64
    }

    pub fn n_blocks(&self) -> usize {
        self.coarse * self.coarse
    }

    pub fn cells_per_side(&self) -> usize {
        self.coarse * self.fine
    }

    /// Local dimension `(m+1)²`, the same for every block.
    pub fn block_dofs(&self) -> usize {
        (self.fine + 1) * (self.fine + 1)
    }

    pub fn total_dofs(&self) -> usize {
        self.n_blocks() * self.block_dofs()
    }

    pub fn block_offset(&self, block: usize) -> usize {
        block * self.block_dofs()
    }

    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        let o = self.block_offset(block);
        o..o + self.block_dofs()
    }

    pub fn neighbor(&self, block: usize, side: Side) -> Neighbor {
        let (bx, by) = (block % self.coarse, block / self.coarse);
        let m = self.coarse;
        match side {
            Side::South if by > 0 => Neighbor::Block(block - m),
            Side::North if by + 1 < m => Neighbor::Block(block + m),
            Side::West if bx > 0 => Neighbor::Block(block - 1),
            Side::East if bx + 1 < m => Neighbor::Block(block + 1),
            _ => Neighbor::Boundary,
        }
    }

    /// Global fine cell (row-major over the `Mm × Mm` lattice, from the
    /// bottom-left) containing local triangle `tri` of `block`.
    pub fn global_cell(&self, block: usize, tri: usize) -> usize {
        let [bx, by] = [block % self.coarse, block / self.coarse];
        let cell = tri / 2;
        let (a, b) = (cell % self.fine, cell / self.fine);
        (bx * self.fine + a) + (by * self.fine + b) * self.cells_per_side()
    }

    /// Local nodes and adjacent triangle of the `k`-th fine segment on a side.
    fn side_segment(&self, side: Side, k: usize) -> ([usize; 2], usize) {
        let m = self.fine;
        let np = m + 1;
        match side {
            Side::South => ([k, k + 1], 2 * k),
            Side::North => ([k + m * np, k + 1 + m * np], 2 * (k + (m - 1) * m) + 1),
            Side::West => ([k * np, (k + 1) * np], 2 * (k * m) + 1),
            Side::East => ([m + k * np, m + (k + 1) * np], 2 * (m - 1 + k * m)),
        }
    }

    /// Interfaces that touch `block`, from either side.
    pub fn interfaces_of(&self, block: usize) -> impl Iterator<Item = &InterfaceEdge> {
        self.interfaces
            .iter()
            .filter(move |e| e.block == block || e.neighbor == Neighbor::Block(block))
    }
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh() {
        let mesh = PartitionedMesh::build(1, 1).unwrap();
        assert_eq!(mesh.n_blocks(), 1);
        assert_eq!(mesh.blocks[0].triangles.len(), 2);
        assert_eq!(mesh.blocks[0].n_dofs(), 4);
        assert_eq!(
            mesh.interfaces.iter().filter(|e| e.is_boundary()).count(),
            4
        );
        assert_eq!(
            mesh.interfaces.iter().filter(|e| !e.is_boundary()).count(),
            0
        );
    }

    #[test]
    fn default_scale_counts() {
        let mesh = PartitionedMesh::build(10, 10).unwrap();
        assert_eq!(mesh.n_blocks(), 100);
        assert!((mesh.h() - 0.01).abs() < 1e-15);
        assert!((mesh.coarse_h() - 0.1).abs() < 1e-15);
        for b in &mesh.blocks {
            assert_eq!(b.n_dofs(), 121);
            assert_eq!(b.triangles.len(), 200);
            assert_eq!(b.boundary_nodes.len(), 40);
            assert!((2..=4).contains(&b.n_neighbors));
        }
        // 2·M·(M−1) interior coarse edges, 4M boundary edges
        assert_eq!(
            mesh.interfaces.iter().filter(|e| !e.is_boundary()).count(),
            180
        );
        assert_eq!(
            mesh.interfaces.iter().filter(|e| e.is_boundary()).count(),
            40
        );
    }

    #[test]
    fn two_by_two_interfaces() {
        let mesh = PartitionedMesh::build(2, 2).unwrap();
        let interior: Vec<_> = mesh
            .interfaces
            .iter()
            .filter(|e| !e.is_boundary())
            .collect();
        assert_eq!(interior.len(), 4);
        for e in interior {
            assert_eq!(e.segments.len(), 2);
            assert!((e.length() - 0.5).abs() < 1e-12);
        }
        // ordering: block 0 east then north, block 1 north, block 2 east
        let order: Vec<_> = mesh
            .interfaces
            .iter()
            .filter(|e| !e.is_boundary())
            .map(|e| (e.block, e.side))
            .collect();
        assert_eq!(
            order,
            vec![
                (0, Side::East),
                (0, Side::North),
                (1, Side::North),
                (2, Side::East)
            ]
        );
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(PartitionedMesh::build(0, 3).is_err());
        assert!(PartitionedMesh::build(3, 0).is_err());
    }

    #[test]
    fn segments_match_geometrically_across_blocks() {
        let mesh = PartitionedMesh::build(3, 4).unwrap();
        for e in &mesh.interfaces {
            for s in &e.segments {
                let bi = &mesh.blocks[e.block];
                assert_eq!(bi.vertices[s.nodes_i[0]], s.endpoints[0]);
                assert_eq!(bi.vertices[s.nodes_i[1]], s.endpoints[1]);
                // the adjacent triangle really contains the segment
                assert!(bi.triangles[s.tri_i].contains(&s.nodes_i[0]));
                assert!(bi.triangles[s.tri_i].contains(&s.nodes_i[1]));
                if let Neighbor::Block(j) = e.neighbor {
                    let bj = &mesh.blocks[j];
                    let nj = s.nodes_j.unwrap();
                    assert_eq!(bj.vertices[nj[0]], s.endpoints[0]);
                    assert_eq!(bj.vertices[nj[1]], s.endpoints[1]);
                    let tj = s.tri_j.unwrap();
                    assert!(bj.triangles[tj].contains(&nj[0]) && bj.triangles[tj].contains(&nj[1]));
                }
            }
        }
    }

    #[test]
    fn triangle_areas_uniform() {
        let mesh = PartitionedMesh::build(2, 3).unwrap();
        let h = mesh.h();
        for b in &mesh.blocks {
            for t in 0..b.triangles.len() {
                assert!((b.triangle_area(t) - h * h / 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn harmonic_mean_bounds() {
        assert_eq!(harmonic_mean(1.0, 1.0), 1.0);
        assert!((harmonic_mean(1.0, 1e4) - 2e4 / (1e4 + 1.0)).abs() < 1e-12);
    }
}
