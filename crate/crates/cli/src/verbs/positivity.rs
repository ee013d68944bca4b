use serde_json::json;

use freespec::psatz::{build_psatz_sdp, certify, default_degree, PsatzOptions, PsatzVerdict};
use freespec::univar::{interval_of, univar_certify};
use freespec::{MatPoly, Pencil};

use super::attach;
use super::verify::DEFAULT_TOL;
use crate::io::{self, to_value};
use crate::registry::Command;
use crate::{Args, CliError, Report};

fn options(args: &Args) -> PsatzOptions {
    PsatzOptions { degree: args.degree, seed: args.seed, ..Default::default() }
}

fn render(args: &Args, l: &Pencil, f: &MatPoly, v: PsatzVerdict, report: Report) -> Result<Report, CliError> {
    let tol = args.tol.unwrap_or(DEFAULT_TOL);
    match v {
        PsatzVerdict::Certified { certificate, .. } => {
            let body = json!({ "kind": "psatz", "pencil": to_value(l), "poly": to_value(f), "psatz": to_value(&certificate) });
            let r = Report { verdict: "certified".into(), ..report }.with("degree", certificate.d);
            attach(r, body, false, tol)
        }
        PsatzVerdict::Refuted(r) => {
            let body = json!({
                "kind": "psatz_witness",
                "pencil": to_value(l),
                "poly": to_value(f),
                "X": to_value(&r.model.x),
                "gamma": r.model.gamma.clone(),
            });
            attach(Report { verdict: "refuted".into(), ..report }, body, true, tol)
        }
        PsatzVerdict::Unresolved(reason) => Ok(Report { verdict: "unresolved".into(), code: 2, ..report }.with("reason", reason)),
    }
}

pub struct Psatz;

impl Command for Psatz {
    fn name(&self) -> &'static str {
        "psatz"
    }

    fn about(&self) -> &'static str {
        "certify F >= 0 on D_L with sums of squares plus L-weighted squares, or refute it"
    }

    fn required(&self) -> &'static [&'static str] {
        &["pencil", "poly"]
    }

    fn dumps_sdp(&self) -> bool {
        true
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l = io::pencil(&args.pencil, "pencil")?;
        let f = io::poly(&args.poly)?;
        let v = certify(&l, &f, &options(args))?;
        if args.dump_sdp.is_some() {
            let d = args.degree.unwrap_or_else(|| default_degree(&f));
            io::dump_sdp(&args.dump_sdp, &build_psatz_sdp(&l, &f, d)?.problem)?;
        }
        render(args, &l, &f, v, Report::default())
    }
}

pub struct Univar;

impl Command for Univar {
    fn name(&self) -> &'static str {
        "univar"
    }

    fn about(&self) -> &'static str {
        "univariate positivity certificate through interval weights"
    }

    fn required(&self) -> &'static [&'static str] {
        &["pencil", "poly"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l = io::pencil(&args.pencil, "pencil")?;
        let f = io::poly(&args.poly)?;
        let v = univar_certify(&l, &f, &options(args))?;
        let base = Report::default().with("interval", to_value(&interval_of(&l)?));
        render(args, &l, &f, v, base)
    }
}
