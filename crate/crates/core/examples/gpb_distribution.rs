//! Exact law of a weighted sum of independent coin flips.

use multibracket::gpb::{self, BernoulliTerm};

fn main() -> multibracket::Result<()> {
    // Two early-round picks worth 10 points and one late pick worth 40.
    let terms = [BernoulliTerm::new(10, 0.8)?, BernoulliTerm::new(10, 0.7)?, BernoulliTerm::new(40, 0.55)?];
    let dist = gpb::build(&terms)?;
    println!("lattice offset {} spacing {}", dist.offset(), dist.scale());
    println!("{:>6} {:>8} {:>8}", "score", "pmf", "cdf");
    for (score, mass) in dist.iter() {
        println!("{score:>6} {mass:>8.4} {:>8.4}", dist.cdf(score));
    }
    println!("mean {:.3}", dist.mean());

    // Same-probability terms collapse into one binomial.
    let b = gpb::binomial(32, 10, 0.75)?;
    println!("\n32 first-round picks at q = 0.75: mean {:.1}, P(score >= 280) = {:.4}", b.mean(), 1.0 - b.cdf(270));
    Ok(())
}
