fn main() {
    std::process::exit(ssbmeasure_cli::run(std::env::args_os()));
}
