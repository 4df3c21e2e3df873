use std::io::{BufWriter, Write};

fn main() {
    let mut out = BufWriter::new(std::io::stdout());
    let code = lvflux::cli::main_with_args(std::env::args_os(), &mut out, &mut std::io::stderr());
    if out.flush().is_err() && code == 0 {
        std::process::exit(1);
    }
    std::process::exit(code);
}
