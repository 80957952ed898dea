//! Outage versus network size: writes the figure-2 table to stdout as CSV.
//!
//!     cargo run --release --example figure2 > fig2.csv

fn main() {
    let args = ["coop-outage", "figure2", "--g", "0.5", "--beta", "0.5", "--trials", "100000"];
    let mut out = std::io::stdout().lock();
    if let Err(e) = coop_outage::cli::run_from(args, &mut out) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
