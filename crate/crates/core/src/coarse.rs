//! Galerkin projection of the fine SIPG problem onto a spectral coarse space.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fe::{BrokenVector, DGSystem, PenaltyScaling};
use crate::linalg::cholesky::{norm, solve_refined};
use crate::linalg::{CsrMatrix, SparseCholesky, TripletBuilder};
use crate::mesh::{Neighbor, Side};
use crate::spectral::{
    method_iii_space, CoarseSpace, Method, Selection, SnapshotMass, SnapshotSpace, ZERO_TOLERANCE,
};

#[derive(Debug, Clone)]
pub struct CoarseSolution {
    /// Coefficients with respect to the retained eigenfunctions, block by block.
    pub coefficients: Vec<f64>,
    /// `u_H = R c` on the fine broken space.
    pub fine: BrokenVector,
    pub method: Method,
    /// Penalty used in the coarse operator; `None` means the system's own.
    pub penalty: Option<PenaltyScaling>,
    /// `‖Cc − Rᵀb‖ / ‖Rᵀb‖`
    pub residual: f64,
}

impl CoarseSolution {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }
}

/// `C = RᵀKR`, assembled block pair by block pair. Only a block and its
/// neighbours couple, so `C` is stored sparse.
pub fn coarse_operator(system: &DGSystem, space: &CoarseSpace, k: &CsrMatrix) -> Result<CsrMatrix> {
    let mesh = system.mesh();
    if space.n_blocks() != mesh.n_blocks() || space.block_dofs() != mesh.block_dofs() {
        return Err(Error::DimensionMismatch {
            expected: mesh.total_dofs(),
            got: space.n_blocks() * space.block_dofs(),
        });
    }
    let off = space.offsets();
    let dim = off[space.n_blocks()];
    let columns: Vec<Vec<(usize, usize, f64)>> = (0..mesh.n_blocks())
        .into_par_iter()
        .map(|j| {
            let rj = space.blocks[j].basis();
            let mut rows = vec![j];
            rows.extend(Side::ALL.iter().filter_map(|&s| match mesh.neighbor(j, s) {
                Neighbor::Block(i) => Some(i),
                Neighbor::Boundary => None,
            }));
            rows.sort_unstable();
            let mut out = Vec::new();
            for i in rows {
                let kij = k.dense_submatrix(mesh.block_range(i), mesh.block_range(j));
                let cij = space.blocks[i].basis().transpose() * (kij * rj);
                for c in 0..cij.ncols() {
                    for r in 0..cij.nrows() {
                        out.push((off[i] + r, off[j] + c, cij[(r, c)]));
                    }
                }
            }
            out
        })
        .collect();
    let mut t = TripletBuilder::with_capacity(dim, dim, columns.iter().map(Vec::len).sum());
    for (r, c, v) in columns.into_iter().flatten() {
        t.push(r, c, v);
    }
    Ok(t.build())
}

/// Solve `a^DG_h(u_H, v_H) = f(v_H)` for all `v_H` in the coarse space.
///
/// With `penalty` set, the coarse operator uses that penalty scaling in
/// place of the system's `δ/h_ij`; the fine reference is unaffected.
pub fn coarse_solve(
    system: &DGSystem,
    space: &CoarseSpace,
    penalty: Option<PenaltyScaling>,
) -> Result<CoarseSolution> {
    let k: Cow<'_, CsrMatrix> = match &penalty {
        None => Cow::Borrowed(&system.stiffness),
        Some(p) => Cow::Owned(system.stiffness_with(p)?),
    };
    let c = coarse_operator(system, space, &k)?;
    let g = space.restrict(&system.load)?;
    let chol = SparseCholesky::factor(&c).map_err(|e| e.in_stage("coarse system"))?;
    let coefficients = solve_refined(&chol, &c, &g).map_err(|e| e.in_stage("coarse solve"))?;
    let gnorm = norm(&g);
    let residual = if gnorm == 0.0 {
        0.0
    } else {
        let r: Vec<f64> = c
            .mul_vec(&coefficients)
            .iter()
            .zip(&g)
            .map(|(a, b)| a - b)
            .collect();
        norm(&r) / gnorm
    };
    let fine = BrokenVector::from_vec(system.mesh(), space.prolong(&coefficients)?)?;
    Ok(CoarseSolution {
        coefficients,
        fine,
        method: space.method,
        penalty,
        residual,
    })
}

/// Galerkin projection onto the whole snapshot space, the natural reference
/// for snapshot-based coarse spaces.
pub fn snapshot_reference(system: &DGSystem, snapshots: &SnapshotSpace) -> Result<BrokenVector> {
    let space = method_iii_space(snapshots, SnapshotMass::Boundary, &Selection::full())?;
    Ok(coarse_solve(system, &space, None)?.fine)
}

fn block_rhs_form(system: &DGSystem, block: usize) -> DMatrix<f64> {
    let r = system.mesh().block_range(block);
    system.mass.dense_block(r.clone()) + system.boundary_mass.dense_block(r)
}

/// `I^H u`: per block, `Σ_{ℓ ≤ L_i} c_ℓ ψ_ℓ` with
/// `c_ℓ = m_i(u, ψ_ℓ) + m_i^δ(u, ψ_ℓ)`. Requires a Method II space.
pub fn spectral_interpolant(
    system: &DGSystem,
    space: &CoarseSpace,
    u: &BrokenVector,
) -> Result<BrokenVector> {
    space.require(Method::II)?;
    let mesh = system.mesh();
    let parts: Vec<Vec<f64>> = (0..mesh.n_blocks())
        .into_par_iter()
        .map(|i| {
            let b = block_rhs_form(system, i);
            let psi = space.blocks[i].basis();
            let ui = DVector::from_column_slice(u.block(i));
            let c = psi.transpose() * (b * ui);
            (psi * c).as_slice().to_vec()
        })
        .collect();
    BrokenVector::from_vec(mesh, parts.concat())
}

/// Expansion of `u_i` in all eigenfunctions of one block.
#[derive(Debug, Clone)]
pub struct BlockExpansion {
    /// `c_ℓ = (M_i + M_i^δ)(u_i, ψ_ℓ)` for every mode.
    pub coefficients: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `L_i`
    pub retained: usize,
    /// `a_i(u_i, u_i)`
    pub energy: f64,
}

impl BlockExpansion {
    /// `Σ_ℓ λ_ℓ c_ℓ²`
    pub fn series(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(l, c)| l * c * c)
            .sum()
    }

    /// `Σ_{ℓ > L_i} λ_ℓ c_ℓ²`
    pub fn tail(&self) -> f64 {
        self.eigenvalues[self.retained..]
            .iter()
            .zip(&self.coefficients[self.retained..])
            .map(|(l, c)| l * c * c)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct EnergyExpansion {
    pub blocks: Vec<BlockExpansion>,
}

impl EnergyExpansion {
    /// `Σ_i Σ_{ℓ > L_i} λ c²`
    pub fn tail(&self) -> f64 {
        self.blocks.iter().map(BlockExpansion::tail).sum()
    }

    /// Largest `|a_i(u,u) − Σ λ c²|`, relative to the total energy.
    pub fn identity_error(&self) -> f64 {
        let total: f64 = self.blocks.iter().map(|b| b.energy).sum();
        let worst = self
            .blocks
            .iter()
            .map(|b| (b.energy - b.series()).abs())
            .fold(0.0, f64::max);
        if total == 0.0 {
            worst
        } else {
            worst / total
        }
    }
}

/// Expand `u` in the Method II eigenbasis of every block.
pub fn energy_expansion(
    system: &DGSystem,
    space: &CoarseSpace,
    u: &BrokenVector,
) -> Result<EnergyExpansion> {
    space.require(Method::II)?;
    let mesh = system.mesh();
    let blocks = (0..mesh.n_blocks())
        .into_par_iter()
        .map(|i| {
            let r = mesh.block_range(i);
            let a = system.energy.dense_block(r);
            let b = block_rhs_form(system, i);
            let blk = &space.blocks[i];
            // Constants are in the kernel of a_i and B-orthogonal to every
            // other mode. Expanding the B-centered vector keeps roundoff in
            // ψ_ℓᵀB1 from being amplified by large λ_ℓ; only c_1 sees the mean.
            let ui = DVector::from_column_slice(u.block(i));
            let ones = DVector::from_element(ui.len(), 1.0);
            let b1 = &b * &ones;
            let mean = b1.dot(&ui) / b1.dot(&ones);
            let centered = ui.add_scalar(-mean);
            let mut c = blk.eigen.vectors.transpose() * (&b * &centered);
            if !blk.eigen.is_empty() {
                c[0] += mean * blk.eigen.vectors.column(0).dot(&b1);
            }
            let lmax = blk.eigen.values.last().copied().unwrap_or(0.0);
            let eigenvalues = blk
                .eigen
                .values
                .iter()
                .map(|&l| {
                    if l.abs() <= ZERO_TOLERANCE * lmax {
                        0.0
                    } else {
                        l
                    }
                })
                .collect();
            BlockExpansion {
                coefficients: c.as_slice().to_vec(),
                eigenvalues,
                retained: blk.retained(),
                energy: centered.dot(&(a * &centered)),
            }
        })
        .collect();
    Ok(EnergyExpansion { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CoefficientField;
    use crate::fe::Source;
    use crate::linalg::dense_spd_solve;
    use crate::mesh::PartitionedMesh;
    use crate::spectral::{method_i_space, method_ii_space};

    fn system(coarse: usize, fine: usize, eta: Option<f64>) -> DGSystem {
        let mesh = PartitionedMesh::build(coarse, fine).unwrap();
        let field = match eta {
            Some(eta) => CoefficientField::synth_channels_inclusions(&mesh, eta, 5).unwrap(),
            None => CoefficientField::uniform(&mesh, 1.0).unwrap(),
        };
        DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0)).unwrap()
    }

    #[test]
    fn full_space_recovers_fine_solution() {
        let sys = system(3, 3, Some(1e4));
        let reference = sys.solve_fine().unwrap();
        for space in [
            method_i_space(&sys, &Selection::full()).unwrap(),
            method_ii_space(&sys, &Selection::full()).unwrap(),
        ] {
            let sol = coarse_solve(&sys, &space, None).unwrap();
            let e = reference.sub(&sol.fine);
            assert!(
                sys.unit_norm_sq(e.as_slice()).sqrt()
                    <= 1e-9 * sys.unit_norm_sq(reference.as_slice()).sqrt()
            );
        }
    }

    #[test]
    fn constants_only_match_piecewise_constant_dg() {
        let (nb, delta) = (3usize, 4.0);
        let sys = system(nb, 4, None);
        let space = method_i_space(&sys, &Selection::uniform(0)).unwrap();
        assert_eq!(space.dim(), nb * nb);
        let sol = coarse_solve(&sys, &space, None).unwrap();

        // constants have no gradient, so only the penalty survives:
        // (δ/h)·H per interior edge on the jump, per boundary edge on the value
        let (h, hc) = (sys.mesh().h(), sys.mesh().coarse_h());
        let w = delta / h * hc;
        let n = nb * nb;
        let mut k = DMatrix::<f64>::zeros(n, n);
        for by in 0..nb {
            for bx in 0..nb {
                let i = bx + by * nb;
                let nbrs = [
                    (bx > 0, i.wrapping_sub(1)),
                    (bx + 1 < nb, i + 1),
                    (by > 0, i.wrapping_sub(nb)),
                    (by + 1 < nb, i + nb),
                ];
                for (inside, j) in nbrs {
                    if inside {
                        k[(i, i)] += w;
                        k[(i, j)] -= w;
                    } else {
                        k[(i, i)] += w;
                    }
                }
            }
        }
        let b = DVector::from_element(n, hc * hc);
        let u = dense_spd_solve(&k, &b).unwrap();
        for i in 0..n {
            let blk = sol.fine.block(i);
            for v in blk {
                assert!((v - u[i]).abs() <= 1e-10 * u.amax());
            }
        }
    }

    #[test]
    fn galerkin_orthogonality_and_residual() {
        let sys = system(3, 4, Some(1e4));
        let reference = sys.solve_fine().unwrap();
        let space = method_ii_space(&sys, &Selection::uniform(2)).unwrap();
        let sol = coarse_solve(&sys, &space, None).unwrap();
        assert!(sol.residual <= 1e-10);
        let e = reference.sub(&sol.fine);
        for (i, blk) in space.blocks.iter().enumerate() {
            for l in 0..blk.retained() {
                let v = space.basis_function(i, l);
                let lhs = sys.a_dg(e.as_slice(), &v).abs();
                let scale = sys.a_dg(reference.as_slice(), reference.as_slice()).sqrt()
                    * sys.a_dg(&v, &v).sqrt();
                assert!(lhs <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn penalty_override_equal_to_fine_scaling_is_identical() {
        let sys = system(3, 4, Some(1e4));
        let space = method_i_space(&sys, &Selection::uniform(2)).unwrap();
        let a = coarse_solve(&sys, &space, None).unwrap();
        let fine_factor = sys.delta / sys.mesh().h();
        let b = coarse_solve(&sys, &space, Some(PenaltyScaling::Uniform(fine_factor))).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
        }
        assert!(coarse_solve(&sys, &space, Some(PenaltyScaling::Uniform(0.0))).is_err());
    }

    #[test]
    fn interpolant_is_a_projection() {
        let sys = system(3, 4, Some(1e4));
        let space = method_ii_space(&sys, &Selection::uniform(3)).unwrap();
        let c: Vec<f64> = (0..space.dim())
            .map(|k| ((k * 7 % 11) as f64) - 5.0)
            .collect();
        let u = BrokenVector::from_vec(sys.mesh(), space.prolong(&c).unwrap()).unwrap();
        let iu = spectral_interpolant(&sys, &space, &u).unwrap();
        let scale = u.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in u.as_slice().iter().zip(iu.as_slice()) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
        // the first left-out mode is interpolated to zero on its block
        let l = space.blocks[4].retained();
        let psi = BrokenVector::from_vec(sys.mesh(), space.basis_function(4, l)).unwrap();
        let ip = spectral_interpolant(&sys, &space, &psi).unwrap();
        assert!(ip.as_slice().iter().all(|v| v.abs() < 1e-10));

        let m1 = method_i_space(&sys, &Selection::uniform(3)).unwrap();
        assert!(matches!(
            spectral_interpolant(&sys, &m1, &u),
            Err(Error::MethodMismatch { .. })
        ));
    }

    #[test]
    fn energy_expansion_identity_and_zero_tail() {
        let sys = system(3, 4, Some(1e6));
        let space = method_ii_space(&sys, &Selection::uniform(2)).unwrap();
        let u = sys.solve_fine().unwrap();
        let exp = energy_expansion(&sys, &space, &u).unwrap();
        assert!(exp.identity_error() <= 1e-8);
        assert!(exp.tail() > 0.0);

        let iu = spectral_interpolant(&sys, &space, &u).unwrap();
        let exp_iu = energy_expansion(&sys, &space, &iu).unwrap();
        assert!(exp_iu.tail() <= 1e-10 * exp.tail());
    }
}
