fn main() {
    std::process::exit(ubpnet::harness::run_cli(std::env::args_os()));
}
