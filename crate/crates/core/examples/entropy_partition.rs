//! Chalky, typical and rare bitstrings as the length grows.

use multibracket::aep;

fn main() -> multibracket::Result<()> {
    let (p, eps) = (0.75, 0.1);
    println!("H = {:.4} bits per symbol", aep::binary_entropy(p)?);
    println!("{:>3} {:>9} {:>9} {:>9} {:>7} {:>7} {:>10}", "m", "|C|", "|T|", "|R|", "P(C)", "P(T)", "|T|/2^m");
    for m in [4, 8, 12, 16, 20, 24] {
        let part = aep::partition_bitstrings(p, m, eps)?;
        println!(
            "{m:>3} {:>9} {:>9} {:>9} {:>7.4} {:>7.4} {:>10.6}",
            part.chalky_count,
            part.typical_count,
            part.rare_count,
            part.chalky_mass,
            part.typical_mass,
            part.typical_share()
        );
    }
    let report = aep::verify_theorem1(p, &[4, 8, 12, 16, 20], eps)?;
    println!("\ncounting bounds hold: {}", report.all_hold());
    Ok(())
}
