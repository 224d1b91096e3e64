fn main() {
    let code = reinsurance_game::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
