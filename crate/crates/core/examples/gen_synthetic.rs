//! Regenerate the bundled six-feature dataset:
//! `cargo run -p shapcredit --example gen_synthetic [rows] [seed] [path]`.

use shapcredit::harness::synthetic::six_feature;

fn main() -> shapcredit::Result<()> {
    let mut args = std::env::args().skip(1);
    let rows = args.next().map_or(1000, |a| a.parse().expect("rows must be a count"));
    let seed = args.next().map_or(0, |a| a.parse().expect("seed must be an integer"));
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synthetic6.csv").to_string());
    six_feature(rows, seed)?.write(&path)?;
    println!("wrote {rows} rows to {path}");
    Ok(())
}
