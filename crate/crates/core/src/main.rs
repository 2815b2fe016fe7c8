fn main() {
    std::process::exit(ch_gpav::cli::main_with_args(std::env::args_os()));
}
