use serde_json::{json, Value};

use freespec::gleich::{check_equality, minimal_whole_subpencil, EqualityVerdict, MinimalPencil};
use freespec::inclusion::{build_inclusion_sdp, drop_polar_membership, polar_membership, target_pencil, SearchRegistry};
use freespec::{check_inclusion, InclusionOptions, InclusionVerdict, Mode, ModeChoice, Pencil, SymTuple};

use super::attach;
use super::verify::DEFAULT_TOL;
use crate::io::{self, rows, to_value};
use crate::registry::Command;
use crate::{Args, CliError, Report};

pub(crate) fn inclusion_options(args: &Args) -> InclusionOptions {
    InclusionOptions {
        mode: args.mode.into(),
        seed: args.seed,
        search: if args.search.is_empty() { SearchRegistry::default_order() } else { args.search.clone() },
        cert_tol: args.tol.unwrap_or(DEFAULT_TOL),
        ..Default::default()
    }
}

fn tol(args: &Args) -> f64 {
    args.tol.unwrap_or(DEFAULT_TOL)
}

/// Renders an inclusion verdict for `D_{l1} ⊆ D_{l2}` under the given
/// verdict names.
fn inclusion_report(
    args: &Args,
    l1: &Pencil,
    l2: &Pencil,
    v: InclusionVerdict,
    names: (&str, &str),
) -> Result<Report, CliError> {
    let mode = match &v {
        InclusionVerdict::Included(c) => c.mode,
        InclusionVerdict::NotIncluded(_) if args.mode == crate::ModeArg::Isometry => Mode::Isometry,
        InclusionVerdict::NotIncluded(_) => Mode::Contraction,
    };
    if args.dump_sdp.is_some() {
        io::dump_sdp(&args.dump_sdp, &build_inclusion_sdp(l1, l2, mode)?.problem)?;
    }
    match v {
        InclusionVerdict::Included(c) => {
            let body = json!({ "kind": "inclusion", "lhs": to_value(l1), "rhs": to_value(l2), "kraus": to_value(&c) });
            attach(Report::new(names.0).with("mode", to_value(&c.mode)), body, false, tol(args))
        }
        InclusionVerdict::NotIncluded(c) => {
            let body = json!({ "kind": "inclusion_witness", "lhs": to_value(l1), "rhs": to_value(l2), "X": to_value(&c.x) });
            let r = Report::new(names.1).with("strategy", c.strategy.clone()).with("eigenvector", c.eigenvector.clone());
            attach(r, body, true, tol(args))
        }
    }
}

pub struct Include;

impl Command for Include {
    fn name(&self) -> &'static str {
        "include"
    }

    fn about(&self) -> &'static str {
        "decide D_lhs ⊆ D_rhs with a Kraus certificate or a counterexample"
    }

    fn required(&self) -> &'static [&'static str] {
        &["lhs", "rhs"]
    }

    fn dumps_sdp(&self) -> bool {
        true
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l1 = io::pencil(&args.lhs, "lhs pencil")?;
        let l2 = io::pencil(&args.rhs, "rhs pencil")?;
        let v = check_inclusion(&l1, &l2, &inclusion_options(args))?;
        inclusion_report(args, &l1, &l2, v, ("included", "not_included"))
    }
}

fn minimal_json(l: &Pencil, m: &MinimalPencil, opts: &InclusionOptions) -> Result<Value, CliError> {
    let mut o = opts.clone();
    o.mode = ModeChoice::Contraction;
    let wholeness = match check_inclusion(&m.pencil, l, &o)? {
        InclusionVerdict::Included(c) => c,
        InclusionVerdict::NotIncluded(_) => {
            return Err(CliError::Numerical("minimal pencil failed its wholeness recheck".into()));
        }
    };
    Ok(json!({
        "pencil": to_value(&m.pencil),
        "embedding": rows(&m.embedding),
        "blocks": m.blocks.iter().map(rows).collect::<Vec<_>>(),
        "wholeness": to_value(&wholeness),
    }))
}

pub struct Equal;

impl Command for Equal {
    fn name(&self) -> &'static str {
        "equal"
    }

    fn about(&self) -> &'static str {
        "decide D_lhs = D_rhs via minimal pencils and a unitary, or a separating point"
    }

    fn required(&self) -> &'static [&'static str] {
        &["lhs", "rhs"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l1 = io::pencil(&args.lhs, "lhs pencil")?;
        let l2 = io::pencil(&args.rhs, "rhs pencil")?;
        let opts = inclusion_options(args);
        match check_equality(&l1, &l2, &opts)? {
            EqualityVerdict::Equal { u, minimal, .. } => {
                let body = json!({
                    "kind": "equality",
                    "lhs": to_value(&l1),
                    "rhs": to_value(&l2),
                    "minimal_lhs": minimal_json(&l1, &minimal.0, &opts)?,
                    "minimal_rhs": minimal_json(&l2, &minimal.1, &opts)?,
                    "U": rows(&u),
                });
                let r = Report::new("equal").with("minimal_sizes", json!([minimal.0.pencil.d(), minimal.1.pencil.d()]));
                attach(r, body, false, tol(args))
            }
            EqualityVerdict::NotEqual { witness, in_first, .. } => {
                let body = json!({
                    "kind": "equality_witness",
                    "lhs": to_value(&l1),
                    "rhs": to_value(&l2),
                    "X": to_value(&witness),
                    "in_first": in_first,
                });
                attach(Report::new("not_equal"), body, true, tol(args))
            }
        }
    }
}

pub struct Minimal;

impl Command for Minimal {
    fn name(&self) -> &'static str {
        "minimal"
    }

    fn about(&self) -> &'static str {
        "compute a minimal whole subpencil with removal witnesses"
    }

    fn required(&self) -> &'static [&'static str] {
        &["pencil"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let l = io::pencil(&args.pencil, "pencil")?;
        let opts = inclusion_options(args);
        let m = minimal_whole_subpencil(&l, &opts)?;
        let witnesses: Vec<&SymTuple> = m.removal_witnesses.iter().map(|c| &c.x).collect();
        let body = json!({
            "kind": "minimal",
            "pencil": to_value(&l),
            "minimal": minimal_json(&l, &m, &opts)?,
            "removal_witnesses": to_value(&witnesses),
        });
        let r = Report::new("minimal").with("size", m.pencil.d()).with("original_size", l.d()).with("blocks", m.blocks.len());
        attach(r, body, false, tol(args))
    }
}

pub struct Polar;

impl Command for Polar {
    fn name(&self) -> &'static str {
        "polar"
    }

    fn about(&self) -> &'static str {
        "decide whether --target lies in the polar dual of D_L for L built from --generators"
    }

    fn required(&self) -> &'static [&'static str] {
        &["target", "generators"]
    }

    fn dumps_sdp(&self) -> bool {
        true
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let a = io::tuple(&args.target, "target tuple")?;
        let gens = io::tuple(&args.generators, "generator tuple")?;
        let v = polar_membership(&a, &gens, &inclusion_options(args))?;
        let (l1, l2) = (target_pencil(&gens)?, target_pencil(&a)?);
        inclusion_report(args, &l1, &l2, v, ("in_polar", "not_in_polar"))
    }
}

pub struct DropPolar;

impl Command for DropPolar {
    fn name(&self) -> &'static str {
        "dpolar"
    }

    fn about(&self) -> &'static str {
        "decide polar membership for the projection of D_L onto the --omega variables"
    }

    fn required(&self) -> &'static [&'static str] {
        &["target", "omega", "gamma"]
    }

    fn dumps_sdp(&self) -> bool {
        true
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let a = io::tuple(&args.target, "target tuple")?;
        let omega = io::tuple(&args.omega, "omega tuple")?;
        let gamma = io::tuple(&args.gamma, "gamma tuple")?;
        let v = drop_polar_membership(&a, &omega, &gamma, &inclusion_options(args))?;
        let mut coeffs = omega.x.clone();
        coeffs.extend(gamma.x.iter().cloned());
        let l1 = Pencil::monic_sized(omega.n(), coeffs)?;
        let mut target = a.x.clone();
        target.extend(std::iter::repeat(nalgebra::DMatrix::zeros(a.n(), a.n())).take(gamma.g()));
        let l2 = Pencil::monic_sized(a.n(), target)?;
        inclusion_report(args, &l1, &l2, v, ("in_polar", "not_in_polar"))
    }
}
