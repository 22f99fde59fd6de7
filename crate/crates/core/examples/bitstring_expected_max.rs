//! Best guessing entropy for the expected maximum score as n grows.

use multibracket::bitstring::{Contest, StrategyProfile};

fn main() -> multibracket::Result<()> {
    let game = Contest::hamming_default();
    let ns = [1u64, 10, 100, 10_000];
    let qs: Vec<f64> = (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect();
    for p in [0.6, 0.75, 0.9] {
        let truth = StrategyProfile::constant(p, 6)?;
        let curves: Vec<Vec<f64>> = qs
            .iter()
            .map(|&q| game.expected_max_score_curve(&truth, &StrategyProfile::constant(q, 6)?, &ns))
            .collect::<multibracket::Result<_>>()?;
        println!("p = {p}");
        for (i, n) in ns.iter().enumerate() {
            let (best, value) = qs
                .iter()
                .zip(&curves)
                .map(|(&q, c)| (q, c[i]))
                .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
            println!("  n = {n:>5}: best q = {best:.2}, E[max] = {value:.3} of 63");
        }
    }
    Ok(())
}
