fn main() {
    let code = poisson_coalgebra::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
