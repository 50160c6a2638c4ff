fn main() {
    std::process::exit(polariton_pipeline::cli::main_with(std::env::args_os()));
}
