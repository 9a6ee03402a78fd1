fn main() {
    std::process::exit(wevbg::cli::dispatch(std::env::args()));
}
