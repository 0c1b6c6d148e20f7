fn main() {
    std::process::exit(graphlet_lens_cli::run(std::env::args_os()));
}
