//! SIPG bilinear forms over the broken P1 space: energy `a_i`,
//! consistency `s_i`, penalty `p_i`, the weighted masses `m_i` and
//! `m_i^δ`, and the load functional.

pub mod assembly;
pub mod element;
pub mod system;

pub use assembly::{
    assemble_boundary_mass, assemble_consistency, assemble_energy, assemble_load,
    assemble_load_constant, assemble_mass, assemble_penalty, EdgeScaling, PenaltyScaling,
};
pub use system::{global_system, BrokenVector, DGSystem, Source};
