use crate::{Args, CliError, Report};

/// A verb of the command line.
pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// Flags that must be present.
    fn required(&self) -> &'static [&'static str];
    fn run(&self, args: &Args) -> Result<Report, CliError>;

    /// Whether `--dump-sdp` is meaningful for this verb.
    fn dumps_sdp(&self) -> bool {
        false
    }

    /// Rejects missing inputs before any computation.
    fn check(&self, args: &Args) -> Result<(), CliError> {
        for flag in self.required() {
            if !flag_present(args, flag) {
                return Err(CliError::Usage(format!("`{}` requires --{flag}", self.name())));
            }
        }
        if args.dump_sdp.is_some() && !self.dumps_sdp() {
            return Err(CliError::Usage(format!("`{}` does not solve an SDP of its own; drop --dump-sdp", self.name())));
        }
        Ok(())
    }
}

fn flag_present(args: &Args, flag: &str) -> bool {
    match flag {
        "pencil" => args.pencil.is_some(),
        "point" => args.point.is_some(),
        "lhs" => args.lhs.is_some(),
        "rhs" => args.rhs.is_some(),
        "poly" => args.poly.is_some(),
        "target" => args.target.is_some(),
        "generators" => args.generators.is_some(),
        "omega" => args.omega.is_some(),
        "gamma" => args.gamma.is_some(),
        "certificate" => args.certificate.is_some(),
        _ => false,
    }
}

#[derive(Default)]
pub struct CommandRegistry {
    commands: Vec<Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        use crate::verbs::*;
        let mut r = Self::empty();
        r.register(Box::new(Eval));
        r.register(Box::new(Member));
        r.register(Box::new(Bounded));
        r.register(Box::new(Include));
        r.register(Box::new(Equal));
        r.register(Box::new(Minimal));
        r.register(Box::new(Polar));
        r.register(Box::new(DropPolar));
        r.register(Box::new(Psatz));
        r.register(Box::new(Univar));
        r.register(Box::new(Verify));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, c: Box<dyn Command>) {
        self.commands.retain(|o| o.name() != c.name());
        self.commands.push(c);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.iter().map(|c| c.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.commands.iter().map(|c| c.as_ref())
    }
}
