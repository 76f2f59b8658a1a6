fn main() {
    std::process::exit(h6map::run());
}
