use clap::Parser;
use qextremal::cli::{main_with, Args};

fn main() {
    std::process::exit(main_with(Args::parse()));
}
