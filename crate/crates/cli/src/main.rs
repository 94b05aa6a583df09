fn main() {
    std::process::exit(streamvote::main_with_args(std::env::args_os().collect()));
}
