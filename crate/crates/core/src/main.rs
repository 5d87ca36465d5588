fn main() {
    std::process::exit(aircomp::cli::run(std::env::args_os()));
}
