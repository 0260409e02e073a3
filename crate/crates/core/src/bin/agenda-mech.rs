fn main() {
    std::process::exit(agenda_mech::cli::run(std::env::args_os()));
}
