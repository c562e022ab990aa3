fn main() {
    std::process::exit(hdnr::cli::main_from_env());
}
