fn main() {
    std::process::exit(gridbench_service::cli::main());
}
