use clap::Parser;

fn main() -> anyhow::Result<()> {
    evmatrix::cli::run(evmatrix::cli::Cli::parse())
}
