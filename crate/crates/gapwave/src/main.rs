//! Binary entry point; all behaviour lives in [`gapwave::cli`].

use std::process::exit;

fn main() {
    exit(gapwave::cli::run(std::env::args_os()));
}
