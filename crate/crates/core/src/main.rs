fn main() {
    std::process::exit(aspect_embed::cli::main());
}
