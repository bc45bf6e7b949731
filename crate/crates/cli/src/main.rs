fn main() {
    std::process::exit(jjsim_cli::main_with_args(std::env::args_os()));
}
