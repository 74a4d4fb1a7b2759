fn main() {
    std::process::exit(rdd_bounds::cli::run(std::env::args_os()));
}
