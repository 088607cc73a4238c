//! Local spectral problems and the coarse spaces built from them.
//!
//! Every block solves its own generalized eigenproblem. The full set of
//! eigenpairs is kept so that the number of retained modes can be changed
//! without re-solving (see [`CoarseSpace::reselect`]).

mod snapshots;
#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DMatrixView, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::DGSystem;
use crate::linalg::{generalized_eig, EigenPairs};

pub use snapshots::{harmonic_snapshots, harmonic_snapshots_with, BlockSnapshots, SnapshotSpace};

/// Eigenvalues at or below this fraction of the block's largest eigenvalue
/// are exact zeros.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Floor for the denominator of the gap ratio.
pub const GAP_FLOOR: f64 = 1e-14;
/// Number of leading modes searched for the spectral gap.
pub const GAP_WINDOW: usize = 10;
/// Smallest gap ratio accepted as separating contrast-induced modes.
pub const MIN_GAP_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// `A_i ψ = λ M_i ψ`
    #[serde(rename = "I")]
    I,
    /// `A_i ψ = λ (M_i + M_i^δ) ψ`
    #[serde(rename = "II")]
    II,
    /// Snapshot eigenproblem with the boundary mass (or its variants).
    #[serde(rename = "III")]
    III,
    /// Snapshot eigenproblem with the κ-weighted volume mass.
    #[serde(rename = "III-m")]
    IIIm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::I, Method::II, Method::III, Method::IIIm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::I => "I",
            Method::II => "II",
            Method::III => "III",
            Method::IIIm => "III-m",
        }
    }

    pub fn is_snapshot(self) -> bool {
        matches!(self, Method::III | Method::IIIm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Method::I),
            "II" | "ii" | "2" => Ok(Method::II),
            "III" | "iii" | "3" => Ok(Method::III),
            "III-m" | "iii-m" | "IIIm" | "3m" => Ok(Method::IIIm),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected I, II, III or III-m)"
            ))),
        }
    }
}

/// Right-hand form of the snapshot eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotMass {
    /// `Φᵀ M^δ Φ`
    Boundary,
    /// `Φᵀ (M + M^δ) Φ`
    Full,
    /// `Φᵀ M Φ`
    Volume,
}

impl SnapshotMass {
    pub fn method(self) -> Method {
        match self {
            SnapshotMass::Volume => Method::IIIm,
            _ => Method::III,
        }
    }
}

/// A count given once for all blocks or separately per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerBlock {
    Uniform(usize),
    Each(Vec<usize>),
}

impl PerBlock {
    pub fn get(&self, block: usize) -> usize {
        match self {
            PerBlock::Uniform(n) => *n,
            PerBlock::Each(v) => v[block],
        }
    }

    fn check(&self, n_blocks: usize) -> Result<()> {
        match self {
            PerBlock::Each(v) if v.len() != n_blocks => Err(Error::DimensionMismatch {
                expected: n_blocks,
                got: v.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// How many modes each block keeps: `L_i = L_i^small + L_i^add`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub l_add: PerBlock,
    /// `None` detects `L_i^small` from the spectral gap.
    pub l_small: Option<PerBlock>,
}

impl Selection {
    pub fn uniform(l_add: usize) -> Self {
        Self {
            l_add: PerBlock::Uniform(l_add),
            l_small: None,
        }
    }

    /// Keep every mode of every block.
    pub fn full() -> Self {
        Self {
            l_add: PerBlock::Uniform(usize::MAX),
            l_small: Some(PerBlock::Uniform(0)),
        }
    }
}

/// Count the leading eigenvalues that vanish as the contrast grows.
///
/// Exact zeros (at most `ZERO_TOLERANCE·λ_max`) always count. Beyond them the
/// largest ratio `λ_{ℓ+1}/max(λ_ℓ, GAP_FLOOR)` among the first `GAP_WINDOW`
/// modes is located; it marks the end of the small cluster only if it
/// exceeds `max(MIN_GAP_RATIO, √η)`. The result is at least 1.
pub fn count_small_eigenvalues(values: &[f64], eta: f64) -> usize {
    let lmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zeros = values
        .iter()
        .take_while(|&&l| l <= ZERO_TOLERANCE * lmax)
        .count();
    let window = &values[..values.len().min(GAP_WINDOW)];
    let threshold = MIN_GAP_RATIO.max(eta.max(1.0).sqrt());
    let mut best = (0.0f64, 0usize);
    for l in zeros..window.len().saturating_sub(1) {
        let ratio = window[l + 1] / window[l].max(GAP_FLOOR);
        if ratio > best.0 {
            best = (ratio, l + 1);
        }
    }
    if best.0 >= threshold {
        best.1
    } else {
        zeros.max(1)
    }
}

/// Spectral data of one block.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    /// Eigenpairs in the coordinates of the local problem (fine nodal for
    /// Methods I/II, snapshot coefficients for Method III).
    pub eigen: EigenPairs,
    /// Fine-grid coefficient vectors of the eigenfunctions when they differ
    /// from `eigen.vectors` (Method III: `Φ α`).
    pub fine_vectors: Option<DMatrix<f64>>,
    pub l_small: usize,
    pub l_add: usize,
}

impl BlockSpectrum {
    /// `L_i`
    pub fn retained(&self) -> usize {
        (self.l_small + self.l_add).min(self.available())
    }

    /// Number of eigenfunctions stored (all of them unless the space was
    /// read back from a truncated dump).
    pub fn available(&self) -> usize {
        self.all_vectors().ncols()
    }

    /// All eigenfunctions as fine coefficient columns.
    pub fn all_vectors(&self) -> &DMatrix<f64> {
        self.fine_vectors.as_ref().unwrap_or(&self.eigen.vectors)
    }

    /// `R_i`: the retained eigenfunctions as fine coefficient columns.
    pub fn basis(&self) -> DMatrixView<'_, f64> {
        self.all_vectors().columns(0, self.retained())
    }

    pub fn retained_values(&self) -> &[f64] {
        &self.eigen.values[..self.retained()]
    }

    /// `λ_{i,L_i+1}`, absent when every mode is retained.
    pub fn first_left_out(&self) -> Option<f64> {
        self.eigen.values.get(self.retained()).copied()
    }
}

/// `X_H = X_H(Ω_1) × ⋯ × X_H(Ω_N)` with its per-block spectral data.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    pub method: Method,
    pub snapshot_mass: Option<SnapshotMass>,
    pub blocks: Vec<BlockSpectrum>,
    block_dofs: usize,
    contrast: f64,
}

impl CoarseSpace {
    fn assemble(
        method: Method,
        snapshot_mass: Option<SnapshotMass>,
        spectra: Vec<(EigenPairs, Option<DMatrix<f64>>)>,
        block_dofs: usize,
        contrast: f64,
        selection: &Selection,
    ) -> Result<Self> {
        let blocks = spectra
            .into_iter()
            .map(|(eigen, fine_vectors)| BlockSpectrum {
                eigen,
                fine_vectors,
                l_small: 0,
                l_add: 0,
            })
            .collect();
        let mut space = Self {
            method,
            snapshot_mass,
            blocks,
            block_dofs,
            contrast,
        };
        space.select(selection)?;
        Ok(space)
    }

    pub(crate) fn from_parts(
        method: Method,
        snapshot_mass: Option<SnapshotMass>,
        blocks: Vec<BlockSpectrum>,
        block_dofs: usize,
        contrast: f64,
    ) -> Self {
        Self {
            method,
            snapshot_mass,
            blocks,
            block_dofs,
            contrast,
        }
    }

    fn select(&mut self, selection: &Selection) -> Result<()> {
        let n = self.blocks.len();
        selection.l_add.check(n)?;
        if let Some(s) = &selection.l_small {
            s.check(n)?;
        }
        let full = selection.l_add == PerBlock::Uniform(usize::MAX);
        for (i, blk) in self.blocks.iter_mut().enumerate() {
            let small = match &selection.l_small {
                Some(s) => s.get(i),
                None => count_small_eigenvalues(&blk.eigen.values, self.contrast),
            };
            let add = if full {
                blk.available()
            } else {
                selection.l_add.get(i)
            };
            let requested = small.saturating_add(add);
            if requested > blk.available() && !full {
                return Err(Error::TooManyModes {
                    block: i,
                    requested,
                    available: blk.available(),
                });
            }
            blk.l_small = small.min(blk.available());
            blk.l_add = add.min(blk.available() - blk.l_small);
        }
        Ok(())
    }

    /// The same eigenpairs with a different number of retained modes.
    pub fn reselect(&self, selection: &Selection) -> Result<Self> {
        let mut out = self.clone();
        out.select(selection)?;
        Ok(out)
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `N_i`, the fine dimension of each block.
    pub fn block_dofs(&self) -> usize {
        self.block_dofs
    }

    /// Contrast used for the small-eigenvalue detection.
    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    /// `Σ L_i`
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(BlockSpectrum::retained).sum()
    }

    /// Start of each block's coefficients in the coarse vector, plus the total.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len() + 1);
        let mut acc = 0;
        off.push(0);
        for b in &self.blocks {
            acc += b.retained();
            off.push(acc);
        }
        off
    }

    pub fn l_small(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.l_small).collect()
    }

    /// `λ_min = min_i λ_{i,L_i+1}`; `None` if some block keeps all its modes
    /// and no other block leaves one out.
    pub fn lambda_min(&self) -> Option<f64> {
        self.blocks
            .iter()
            .filter_map(BlockSpectrum::first_left_out)
            .min_by(f64::total_cmp)
    }

    /// `R c`: the fine representation of a coarse coefficient vector.
    pub fn prolong(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let off = self.offsets();
        if coeffs.len() != off[self.blocks.len()] {
            return Err(Error::DimensionMismatch {
                expected: off[self.blocks.len()],
                got: coeffs.len(),
            });
        }
        let mut out = vec![0.0; self.blocks.len() * self.block_dofs];
        out.par_chunks_mut(self.block_dofs)
            .zip(self.blocks.par_iter().enumerate())
            .for_each(|(chunk, (i, blk))| {
                let c = DVector::from_column_slice(&coeffs[off[i]..off[i + 1]]);
                let v = blk.basis() * c;
                chunk.copy_from_slice(v.as_slice());
            });
        Ok(out)
    }

    /// `Rᵀ v`
    pub fn restrict(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.blocks.len() * self.block_dofs;
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let parts: Vec<Vec<f64>> = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(i, blk)| {
                let vi =
                    DVector::from_column_slice(&v[i * self.block_dofs..(i + 1) * self.block_dofs]);
                (blk.basis().transpose() * vi).as_slice().to_vec()
            })
            .collect();
        Ok(parts.concat())
    }

    /// Eigenfunction `l` of `block` (retained or not) as a global broken vector.
    pub fn basis_function(&self, block: usize, l: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.blocks.len() * self.block_dofs];
        let col = self.blocks[block].all_vectors().column(l);
        v[block * self.block_dofs..(block + 1) * self.block_dofs].copy_from_slice(col.as_slice());
        v
    }

    pub(crate) fn require(&self, method: Method) -> Result<()> {
        if self.method == method {
            Ok(())
        } else {
            Err(Error::MethodMismatch {
                expected: method.to_string(),
                got: self.method.to_string(),
            })
        }
    }
}

fn solve_blocks<F>(n_blocks: usize, f: F) -> Result<Vec<(EigenPairs, Option<DMatrix<f64>>)>>
where
    F: Fn(usize) -> Result<(EigenPairs, Option<DMatrix<f64>>)> + Sync,
{
    (0..n_blocks)
        .into_par_iter()
        .map(|i| f(i).map_err(|e| e.in_block(i)))
        .collect()
}

/// Local matrices `(A_i, M_i, M_i^δ)` of block `i`, dense.
pub fn local_forms(system: &DGSystem, block: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let r = system.mesh().block_range(block);
    (
        system.energy.dense_block(r.clone()),
        system.mass.dense_block(r.clone()),
        system.boundary_mass.dense_block(r),
    )
}

/// Method I: `A_i ψ = λ M_i ψ` on every block.
pub fn method_i_space(system: &DGSystem, selection: &Selection) -> Result<CoarseSpace> {
    let mesh = system.mesh();
    let spectra = solve_blocks(mesh.n_blocks(), |i| {
        let (a, m, _) = local_forms(system, i);
        Ok((generalized_eig(&a, &m)?, None))
    })?;
    CoarseSpace::assemble(
        Method::I,
        None,
        spectra,
        mesh.block_dofs(),
        system.contrast(),
        selection,
    )
}

/// Method II: `A_i ψ = λ (M_i + M_i^δ) ψ` on every block.
pub fn method_ii_space(system: &DGSystem, selection: &Selection) -> Result<CoarseSpace> {
    let mesh = system.mesh();
    let spectra = solve_blocks(mesh.n_blocks(), |i| {
        let (a, m, md) = local_forms(system, i);
        Ok((generalized_eig(&a, &(m + md))?, None))
    })?;
    CoarseSpace::assemble(
        Method::II,
        None,
        spectra,
        mesh.block_dofs(),
        system.contrast(),
        selection,
    )
}

/// Method III: `A^snap α = λ M^snap α` on the harmonic snapshot space, with
/// `ψ = Φ α`.
pub fn method_iii_space(
    snapshots: &SnapshotSpace,
    mass: SnapshotMass,
    selection: &Selection,
) -> Result<CoarseSpace> {
    let spectra = solve_blocks(snapshots.blocks.len(), |i| {
        let blk = &snapshots.blocks[i];
        let eig = generalized_eig(&blk.a_snap, &blk.mass(mass))?;
        let fine = &blk.phi * &eig.vectors;
        Ok((eig, Some(fine)))
    })?;
    CoarseSpace::assemble(
        mass.method(),
        Some(mass),
        spectra,
        snapshots.block_dofs,
        snapshots.contrast,
        selection,
    )
}

/// Build the space for `method` with its default right-hand form.
pub fn build_space(
    system: &DGSystem,
    method: Method,
    selection: &Selection,
) -> Result<CoarseSpace> {
    match method {
        Method::I => method_i_space(system, selection),
        Method::II => method_ii_space(system, selection),
        Method::III => method_iii_space(
            &harmonic_snapshots(system)?,
            SnapshotMass::Boundary,
            selection,
        ),
        Method::IIIm => method_iii_space(
            &harmonic_snapshots(system)?,
            SnapshotMass::Volume,
            selection,
        ),
    }
}
