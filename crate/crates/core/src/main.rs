use std::io::{stderr, stdout};

fn main() {
    let code = normsel::cli::run_cli(std::env::args_os().skip(1), &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
