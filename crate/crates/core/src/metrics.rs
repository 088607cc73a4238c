//! Error decomposition between a fine reference and a coarse solution.
//!
//! All quantities are squared norms. The interface part always uses the
//! unit penalty weight `1/h_ij`, whatever `δ` the system was assembled with.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fe::{BrokenVector, DGSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `Σ_i a_i(e, e)`
    pub interior: f64,
    /// `Σ_i Σ_j (1/l_ij)(1/h_ij) ∫ κ_ij (e_i − e_j)²`
    pub interface: f64,
    /// `‖e‖²_{h,1} = interior + interface`
    pub total: f64,
    /// `a^DG_h(e, e)`
    pub energy: f64,
    /// `total / ‖u_ref‖²_{h,1}`
    pub relative: f64,
    /// `‖u_ref‖²_{h,1}`
    pub reference: f64,
    /// Smallest eigenvalue left out of the coarse space, if known.
    pub lambda_min: Option<f64>,
}

impl ErrorReport {
    pub fn with_lambda_min(mut self, lambda_min: Option<f64>) -> Self {
        self.lambda_min = lambda_min;
        self
    }

    /// `‖e‖_{h,1}`
    pub fn total_norm(&self) -> f64 {
        self.total.sqrt()
    }

    pub fn relative_norm(&self) -> f64 {
        self.relative.sqrt()
    }
}

pub fn error_report(
    system: &DGSystem,
    u_ref: &BrokenVector,
    u_h: &BrokenVector,
) -> Result<ErrorReport> {
    if u_ref.len() != system.dim() || u_h.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: if u_ref.len() != system.dim() {
                u_ref.len()
            } else {
                u_h.len()
            },
        });
    }
    let reference = system.unit_norm_sq(u_ref.as_slice());
    if !(reference > 0.0) {
        return Err(Error::ZeroReferenceNorm);
    }
    let e = u_ref.sub(u_h);
    let interior = system.energy.quad_form(e.as_slice());
    let interface = system.penalty_unit.quad_form(e.as_slice());
    let total = interior + interface;
    Ok(ErrorReport {
        interior,
        interface,
        total,
        energy: system.stiffness.quad_form(e.as_slice()),
        relative: total / reference,
        reference,
        lambda_min: None,
    })
}
