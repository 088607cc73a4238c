use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fe::{assemble_boundary_mass, DGSystem, EdgeScaling};
use crate::linalg::CsrMatrix;

use super::SnapshotMass;

/// Discrete `a_i`-harmonic extensions of the boundary nodal hats of one block.
#[derive(Debug, Clone)]
pub struct BlockSnapshots {
    /// `N_i × M_i`; column `k` is the extension of the hat at the `k`-th
    /// boundary node (ascending local index).
    pub phi: DMatrix<f64>,
    /// `Φᵀ A_i Φ`
    pub a_snap: DMatrix<f64>,
    /// `Φᵀ M_i^δ Φ`
    pub m_boundary: DMatrix<f64>,
    /// `Φᵀ M_i Φ`
    pub m_volume: DMatrix<f64>,
    /// Largest interior row of `A_i Φ`, relative to `max |A_i|`.
    pub interior_residual: f64,
}

impl BlockSnapshots {
    /// `M_i`, the number of snapshots.
    pub fn len(&self) -> usize {
        self.phi.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.ncols() == 0
    }

    pub fn mass(&self, kind: SnapshotMass) -> DMatrix<f64> {
        match kind {
            SnapshotMass::Boundary => self.m_boundary.clone(),
            SnapshotMass::Volume => self.m_volume.clone(),
            SnapshotMass::Full => &self.m_boundary + &self.m_volume,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotSpace {
    pub blocks: Vec<BlockSnapshots>,
    pub(crate) block_dofs: usize,
    pub(crate) contrast: f64,
}

impl SnapshotSpace {
    /// `Σ M_i`
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(BlockSnapshots::len).sum()
    }

    pub fn max_interior_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.interior_residual)
            .fold(0.0, f64::max)
    }
}

/// Snapshot space of every block, with the boundary mass of `system`.
pub fn harmonic_snapshots(system: &DGSystem) -> Result<SnapshotSpace> {
    build(system, &system.boundary_mass)
}

/// Snapshot space whose boundary mass uses `scaling` in place of `δ/h_ij`.
pub fn harmonic_snapshots_with<S: EdgeScaling + ?Sized>(
    system: &DGSystem,
    scaling: &S,
) -> Result<SnapshotSpace> {
    let md = assemble_boundary_mass(system.mesh(), scaling)?;
    build(system, &md)
}

fn build(system: &DGSystem, boundary_mass: &CsrMatrix) -> Result<SnapshotSpace> {
    let mesh = system.mesh();
    let blocks = (0..mesh.n_blocks())
        .into_par_iter()
        .map(|i| {
            let r = mesh.block_range(i);
            let a = system.energy.dense_block(r.clone());
            let m = system.mass.dense_block(r.clone());
            let md = boundary_mass.dense_block(r);
            let blk = &mesh.blocks[i];
            block_snapshots(&a, &m, &md, &blk.interior_nodes, &blk.boundary_nodes)
                .map_err(|e| e.in_block(i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnapshotSpace {
        blocks,
        block_dofs: mesh.block_dofs(),
        contrast: system.contrast(),
    })
}

fn block_snapshots(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    md: &DMatrix<f64>,
    interior: &[usize],
    boundary: &[usize],
) -> Result<BlockSnapshots> {
    let n = a.nrows();
    let (ni, nb) = (interior.len(), boundary.len());
    let a_ii = DMatrix::from_fn(ni, ni, |r, c| a[(interior[r], interior[c])]);
    let a_ib = DMatrix::from_fn(ni, nb, |r, c| a[(interior[r], boundary[c])]);
    let chol = a_ii.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        index: 0,
        pivot: f64::NAN,
    })?;
    let rhs = -a_ib;
    let mut x = chol.solve(&rhs);
    let r = &rhs - &a_ii * &x;
    x += chol.solve(&r);

    let mut phi = DMatrix::zeros(n, nb);
    for (row, &k) in interior.iter().enumerate() {
        phi.row_mut(k).copy_from(&x.row(row));
    }
    for (col, &k) in boundary.iter().enumerate() {
        phi[(k, col)] = 1.0;
    }

    let a_phi = a * &phi;
    let amax = a.amax();
    let interior_residual = interior
        .iter()
        .map(|&k| a_phi.row(k).amax())
        .fold(0.0, f64::max)
        / amax;

    let sym = |g: DMatrix<f64>| (&g + g.transpose()) * 0.5;
    Ok(BlockSnapshots {
        a_snap: sym(phi.transpose() * &a_phi),
        m_boundary: sym(phi.transpose() * md * &phi),
        m_volume: sym(phi.transpose() * m * &phi),
        phi,
        interior_residual,
    })
}
