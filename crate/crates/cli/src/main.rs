fn main() {
    std::process::exit(extdom_cli::main_with(std::env::args_os()));
}
