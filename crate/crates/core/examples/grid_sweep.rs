//! A generic grid search with a CSV surface.

use multibracket::bitstring::{profile_from_partition, Contest, RoundPartition, StrategyProfile};
use multibracket::optimizer::{self, Evaluation, GridSpec};

fn main() -> multibracket::Result<()> {
    let game = Contest::espn_default();
    let p = StrategyProfile::constant(0.75, 6)?;
    let grid = GridSpec::new()
        .axis("q_early", vec![0.6, 0.7, 0.8, 0.9, 1.0])?
        .axis("q_late", vec![0.6, 0.7, 0.8, 0.9, 1.0])?;
    let split = RoundPartition::new(3, 6)?;
    let points = optimizer::sweep(&grid, 0, |at, _seed| {
        let q = profile_from_partition(at.get("q_early").unwrap_or(1.0), at.get("q_late").unwrap_or(1.0), split, 6)?;
        Ok(Evaluation::exact(game.expected_max_score(&p, &q, 10)?))
    })?;
    let best = optimizer::argmax(&points)?;
    println!("best of {} points: {} -> {:.2}", points.len(), best.params, best.objective);
    optimizer::write_surface_csv(std::io::stdout().lock(), &grid, &points)?;
    Ok(())
}
