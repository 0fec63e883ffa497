fn main() {
    std::process::exit(ancient_ricci_cli::run(std::env::args_os()));
}
