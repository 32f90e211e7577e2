use clap::Parser;

fn main() {
    let flags = anfact::cli::Flags::parse();
    std::process::exit(anfact::cli::main_with(flags));
}
