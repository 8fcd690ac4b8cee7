use clap::Parser;

fn main() {
    let cli = regfade::cli::Cli::parse();
    if let Err(e) = regfade::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
