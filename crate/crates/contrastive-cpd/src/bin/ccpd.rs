fn main() {
    let code = contrastive_cpd::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
