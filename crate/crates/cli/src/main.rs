use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FREESPEC_LOG")).init();
    let exit = freespec_cli::run(std::env::args_os());
    let _ = writeln!(std::io::stdout().lock(), "{}", exit.stdout);
    std::process::exit(exit.code);
}
