use std::ops::{Index, Range};

use crate::coefficient::CoefficientField;
use crate::error::{Error, Result};
use crate::fe::assembly::{
    assemble_boundary_mass, assemble_consistency, assemble_energy, assemble_load,
    assemble_load_constant, assemble_mass, assemble_penalty, EdgeScaling, PenaltyScaling,
};
use crate::linalg::cholesky::solve_refined;
use crate::linalg::{CsrMatrix, SparseCholesky};
use crate::mesh::PartitionedMesh;

/// A function of the broken space `X_h(Ω)`: one P1 coefficient array per
/// block, concatenated in block order. No continuity is implied across
/// block interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenVector {
    data: Vec<f64>,
    block_len: usize,
}

impl BrokenVector {
    pub fn zeros(mesh: &PartitionedMesh) -> Self {
        Self {
            data: vec![0.0; mesh.total_dofs()],
            block_len: mesh.block_dofs(),
        }
    }

    pub fn from_vec(mesh: &PartitionedMesh, data: Vec<f64>) -> Result<Self> {
        if data.len() != mesh.total_dofs() {
            return Err(Error::DimensionMismatch {
                expected: mesh.total_dofs(),
                got: data.len(),
            });
        }
        Ok(Self {
            data,
            block_len: mesh.block_dofs(),
        })
    }

    /// Sample a function at every node of every block.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(mesh: &PartitionedMesh, f: F) -> Self {
        let data = mesh
            .blocks
            .iter()
            .flat_map(|b| b.vertices.iter().map(|p| f(p[0], p[1])))
            .collect();
        Self {
            data,
            block_len: mesh.block_dofs(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_blocks(&self) -> usize {
        self.data.len() / self.block_len
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn block_range(&self, i: usize) -> Range<usize> {
        i * self.block_len..(i + 1) * self.block_len
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[self.block_range(i)]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        let r = self.block_range(i);
        &mut self.data[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn sub(&self, other: &BrokenVector) -> BrokenVector {
        assert_eq!(self.data.len(), other.data.len());
        BrokenVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
            block_len: self.block_len,
        }
    }
}

impl Index<usize> for BrokenVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Sum `A + S + P` and Cholesky-factor it. Failure means the penalty is
/// below the stability threshold.
pub fn global_system(
    a: &CsrMatrix,
    s: &CsrMatrix,
    p: &CsrMatrix,
) -> Result<(CsrMatrix, SparseCholesky)> {
    let k = CsrMatrix::sum(&[a, s, p]);
    let chol = SparseCholesky::factor(&k)?;
    Ok((k, chol))
}

/// Assembled SIPG system on the broken space.
#[derive(Debug, Clone)]
pub struct DGSystem {
    mesh: PartitionedMesh,
    field: CoefficientField,
    /// `Σ a_i`
    pub energy: CsrMatrix,
    /// `Σ s_i`
    pub consistency: CsrMatrix,
    /// `Σ p_i` at `δ/h_ij`
    pub penalty: CsrMatrix,
    /// `Σ p_i` at `1/h_ij`, the interface part of `‖·‖_{h,1}`
    pub penalty_unit: CsrMatrix,
    /// `Σ m_i`
    pub mass: CsrMatrix,
    /// `Σ m_i^δ` at `δ/h_ij`
    pub boundary_mass: CsrMatrix,
    pub load: Vec<f64>,
    pub delta: f64,
    /// `K = A + S + P`
    pub stiffness: CsrMatrix,
    factor: SparseCholesky,
}

/// Source term of the elliptic problem.
pub enum Source<'a> {
    Constant(f64),
    Function(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

impl DGSystem {
    /// Assemble every form for penalty `delta` with load `f`. `mesh` is
    /// weighted from `field` here, so a bare mesh can be passed.
    pub fn assemble(
        mesh: &PartitionedMesh,
        field: &CoefficientField,
        delta: f64,
        source: Source<'_>,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::NonPositiveScaling(delta));
        }
        let mesh = mesh.with_weights(field)?;
        let energy = assemble_energy(&mesh, field)?;
        let consistency = assemble_consistency(&mesh)?;
        let penalty = assemble_penalty(&mesh, &PenaltyScaling::Fine { delta })?;
        let penalty_unit = assemble_penalty(&mesh, &PenaltyScaling::Fine { delta: 1.0 })?;
        let mass = assemble_mass(&mesh, field)?;
        let boundary_mass = assemble_boundary_mass(&mesh, &PenaltyScaling::Fine { delta })?;
        let load = match source {
            Source::Constant(c) => assemble_load_constant(&mesh, c),
            Source::Function(f) => assemble_load(&mesh, f),
        };
        let (stiffness, factor) = global_system(&energy, &consistency, &penalty)
            .map_err(|e| e.in_stage("fine system"))?;
        Ok(Self {
            mesh,
            field: field.clone(),
            energy,
            consistency,
            penalty,
            penalty_unit,
            mass,
            boundary_mass,
            load,
            delta,
            stiffness,
            factor,
        })
    }

    /// The weighted mesh the system was assembled on.
    pub fn mesh(&self) -> &PartitionedMesh {
        &self.mesh
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    /// Contrast `η` of the coefficient.
    pub fn contrast(&self) -> f64 {
        self.field.contrast()
    }

    pub fn dim(&self) -> usize {
        self.load.len()
    }

    /// Reference solution `u*_h` of `a^DG_h(u, v) = f(v)`.
    pub fn solve_fine(&self) -> Result<BrokenVector> {
        let x = solve_refined(&self.factor, &self.stiffness, &self.load)
            .map_err(|e| e.in_stage("fine solve"))?;
        BrokenVector::from_vec(&self.mesh, x)
    }

    /// Penalty matrix with a different edge scaling on the same mesh.
    pub fn penalty_with<S: EdgeScaling + ?Sized>(&self, scaling: &S) -> Result<CsrMatrix> {
        assemble_penalty(&self.mesh, scaling)
    }

    /// `A + S + P(scaling)`
    pub fn stiffness_with<S: EdgeScaling + ?Sized>(&self, scaling: &S) -> Result<CsrMatrix> {
        let p = self.penalty_with(scaling)?;
        Ok(CsrMatrix::sum(&[&self.energy, &self.consistency, &p]))
    }

    /// `a^DG_h(u, v)`
    pub fn a_dg(&self, u: &[f64], v: &[f64]) -> f64 {
        self.stiffness.bilinear(u, v)
    }

    /// `d_h(u, u) = Σ a_i(u,u) + Σ p_i(u,u)` at the system's `δ`.
    pub fn broken_norm_sq(&self, u: &[f64]) -> f64 {
        self.energy.quad_form(u) + self.penalty.quad_form(u)
    }

    /// `‖u‖²_{h,1}`
    pub fn unit_norm_sq(&self, u: &[f64]) -> f64 {
        self.energy.quad_form(u) + self.penalty_unit.quad_form(u)
    }
}
