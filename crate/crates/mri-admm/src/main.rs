fn main() {
    std::process::exit(mri_admm::cli::run(std::env::args_os()));
}
