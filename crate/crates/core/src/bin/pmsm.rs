fn main() {
    std::process::exit(pmsm_core::cli::main_entry());
}
