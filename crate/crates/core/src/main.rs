fn main() {
    std::process::exit(minimax_bvp::cli::main());
}
