fn main() {
    std::process::exit(fracvol::cli::run(std::env::args_os()));
}
