//! Tuning pick-six tickets against the public on the bundled card.

use multibracket::picksix::{self, PoolEconomics, RaceCard, TiltParams};

fn main() -> multibracket::Result<()> {
    let card = RaceCard::belmont();
    println!("{} races, {} possible outcomes", card.len(), card.outcomes());
    let lambdas = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let phis = [0.0, 0.25, 0.5, 0.75, 1.0];
    for n in [100u64, 1000, 10_000] {
        let econ = PoolEconomics::new(500_000.0, 0.05, n, 25_000)?;
        let best = picksix::optimize_tilt(&card, &econ, 1.0, &lambdas, &phis)?;
        let ours = picksix::tilt(&card, best.best)?;
        let public = picksix::opponent_strategy(&card, 1.0)?;
        let mc = picksix::expected_profit_monte_carlo(&card, &ours, &public, &econ, 20_000, n)?;
        println!(
            "n = {n:>5}: lambda = {}, phi = {}, bound {:.0}, simulated {:.0} +/- {:.0}",
            best.best.lambda, best.best.phi, best.value, mc.mean, mc.stderr
        );
    }
    let flat = picksix::tilt(&card, TiltParams::new(0.25, 0.5)?)?;
    println!("\nrace 6 at lambda = 0.25: {:?}", flat.races()[5].iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
    Ok(())
}
