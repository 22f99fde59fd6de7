//! Win probability against k opponents, exact and simulated.

use multibracket::bitstring::{Contest, StrategyProfile, TieRule};

fn main() -> multibracket::Result<()> {
    let game = Contest::hamming_default();
    let c = |x: f64| StrategyProfile::constant(x, 6);
    let p = c(0.75)?;
    println!("p = 0.75, n = 10, k = 100: best q for each opponent entropy r");
    for r in [0.6, 0.75, 0.9] {
        let mut best = (0.0, f64::MIN);
        for i in 0..=10 {
            let q = 0.5 + 0.05 * i as f64;
            let wp = game.win_probability(&p, &c(q)?, &c(r)?, 10, 100, TieRule::TiesWin)?;
            if wp > best.1 {
                best = (q, wp);
            }
        }
        println!("  r = {r:.2}: q = {:.2} wins with probability {:.4}", best.0, best.1);
    }

    let exact = game.win_probability(&p, &c(0.75)?, &c(0.7)?, 10, 100, TieRule::TiesWin)?;
    let sim = game.simulate(&p, &c(0.75)?, &c(0.7)?, 10, 100, 20_000, 1)?;
    let est = sim.win_probability.expect("k > 0");
    println!("\nq = 0.75, r = 0.7: exact {exact:.4}, simulated {:.4} +/- {:.4}", est.mean, est.stderr);
    Ok(())
}
