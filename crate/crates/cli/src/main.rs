fn main() {
    std::process::exit(dqsd_cli::main_with_args(std::env::args_os()));
}
