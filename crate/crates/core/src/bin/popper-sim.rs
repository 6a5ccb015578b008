fn main() {
    std::process::exit(popper_sim::cli::main_with_args(std::env::args_os()));
}
