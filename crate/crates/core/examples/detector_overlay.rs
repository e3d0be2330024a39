//! Reading a detector sensitivity curve to attach to a sweep table.

use phonon_gw::overlay::parse_overlay;

const CURVE: &str = "frequency_hz,characteristic_strain
10,1.2e-21
100,4.0e-23
1000,1.5e-22
";

fn main() -> phonon_gw::Result<()> {
    let ingest = parse_overlay("interferometer", CURVE)?;
    for (f, h) in &ingest.curve.points {
        println!("{f:>8} Hz  h_c = {h:.2e}");
    }
    match parse_overlay("broken", "frequency_hz,characteristic_strain\n100,1e-22\n10,1e-21\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    let empty = parse_overlay("empty", "")?;
    println!("empty file: {} points, warnings {:?}", empty.curve.points.len(), empty.warnings);
    Ok(())
}
