fn main() {
    std::process::exit(topic_resonance::cli::run(std::env::args_os()));
}
