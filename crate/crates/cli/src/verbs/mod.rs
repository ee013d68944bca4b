//! The registered verbs.

mod basic;
mod positivity;
mod sets;
pub mod verify;

pub use basic::{Bounded, Eval, Member};
pub use positivity::{Psatz, Univar};
pub use sets::{DropPolar, Equal, Include, Minimal, Polar};
pub use verify::Verify;

use serde_json::Value;

use crate::{CliError, Report};

/// Attaches the offline check of an emitted certificate or witness.
pub(crate) fn attach(report: Report, body: Value, is_witness: bool, tol: f64) -> Result<Report, CliError> {
    let (_, c) = verify::check(&body, tol)?;
    let r = report.residuals_from(c.residuals).residual("certificate_valid", c.valid).residual("residual", c.residual);
    Ok(if is_witness { r.witness(body) } else { r.certificate(body) })
}
