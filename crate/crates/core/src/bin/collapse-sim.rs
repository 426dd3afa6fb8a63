fn main() {
    let env_seed = std::env::var(collapse_sim::cli::SEED_ENV).ok();
    let code = collapse_sim::cli::cli_run(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
