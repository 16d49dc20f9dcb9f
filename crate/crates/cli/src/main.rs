fn main() {
    std::process::exit(specmerge_cli::run(std::env::args_os()));
}
