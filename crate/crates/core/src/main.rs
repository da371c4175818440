fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(v2v_blockage::cli::exit_status(std::env::args_os()))
}
