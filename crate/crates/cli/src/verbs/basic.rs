use serde_json::json;

use freespec::linalg::{max_abs, min_eig};
use freespec::{Boundedness, Membership};
use freespec_sdp::SolverOptions;

use super::attach;
use super::verify::DEFAULT_TOL;
use crate::io::{self, to_value};
use crate::registry::Command;
use crate::{Args, CliError, Report};

/// Default boundary band for `member`.
pub const MEMBER_TOL: f64 = 1e-9;

pub struct Eval;

impl Command for Eval {
    fn name(&self) -> &'static str {
        "eval"
    }

    fn about(&self) -> &'static str {
        "evaluate a pencil or a matrix polynomial at a tuple"
    }

    fn required(&self) -> &'static [&'static str] {
        &["point"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let spec = args.point.as_deref().expect("checked by required()");
        let m = match (&args.pencil, &args.poly) {
            (Some(_), None) => {
                let l = io::pencil(&args.pencil, "pencil")?;
                l.evaluate(&io::point(spec, l.g())?)?
            }
            (None, Some(_)) => {
                let f = io::poly(&args.poly)?;
                f.evaluate(&io::point(spec, f.g())?)?
            }
            _ => return Err(CliError::Usage("`eval` takes exactly one of --pencil and --poly".into())),
        };
        let symmetry = max_abs(&(&m - m.transpose()));
        let mut r = Report::new("evaluated").with("value", io::rows(&m)).residual("symmetry", symmetry);
        if m.is_square() && m.nrows() > 0 && symmetry <= 1e-12 * (1.0 + max_abs(&m)) {
            r = r.with("min_eig", min_eig(&m));
        }
        Ok(r)
    }
}

pub struct Member;

impl Command for Member {
    fn name(&self) -> &'static str {
        "member"
    }

    fn about(&self) -> &'static str {
        "classify a tuple as inside, on the boundary of, or outside D_L"
    }

    fn required(&self) -> &'static [&'static str] {
        &["pencil", "point"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l = io::pencil(&args.pencil, "pencil")?;
        let x = io::point(args.point.as_deref().expect("checked by required()"), l.g())?;
        let m = l.is_member(&x, args.tol.unwrap_or(MEMBER_TOL))?;
        let verdict = match m {
            Membership::Inside(_) => "inside",
            Membership::Boundary(_) => "boundary",
            Membership::Outside(_) => "outside",
        };
        Ok(Report::new(verdict).residual("min_eig", l.min_eig_at(&x)?))
    }
}

pub struct Bounded;

impl Command for Bounded {
    fn name(&self) -> &'static str {
        "bounded"
    }

    fn about(&self) -> &'static str {
        "decide boundedness of D_L(1), with a recession direction if unbounded"
    }

    fn required(&self) -> &'static [&'static str] {
        &["pencil"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l = io::pencil(&args.pencil, "pencil")?;
        match l.is_bounded(&SolverOptions::default())? {
            Boundedness::Bounded => Ok(Report::new("bounded")),
            Boundedness::Unbounded(mu) => {
                let body = json!({ "kind": "recession", "pencil": to_value(&l), "mu": mu.as_slice() });
                attach(Report::new("unbounded"), body, true, args.tol.unwrap_or(DEFAULT_TOL))
            }
        }
    }
}
