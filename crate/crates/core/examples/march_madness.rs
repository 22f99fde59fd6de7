//! Bracket challenge against colloquially chalky opponents.

use multibracket::rng;
use multibracket::tournament::{self, Field, McSettings};

fn main() -> multibracket::Result<()> {
    let field = Field::ncaa_2021();
    let p = tournament::elo_to_winmatrix(&field);
    let public = tournament::chalky_opponents(&field);
    let tau = tournament::sample_bracket(&p, &field, &mut rng::stream(7, &[]))?;
    println!("one simulated champion: {}", field.teams()[tau.champion()].name);

    let lambdas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let qs = lambdas.iter().map(|&l| tournament::interpolated_strategy(&p, l)).collect::<multibracket::Result<Vec<_>>>()?;
    let ns = [10u64, 100];
    let settings = McSettings { b1: 40, b2: 10, seed: 2021 };
    let surface = tournament::mc_surface(&field, &p, &qs, Some((&public, 1000)), &ns, settings)?;
    let wp = surface.win_probability.expect("opponents given");
    println!("{:>6} {:>16} {:>16}", "lambda", "E[max], n=10", "P(win), n=100");
    for (i, lambda) in lambdas.iter().enumerate() {
        println!("{lambda:>6.1} {:>16.1} {:>16.3}", surface.expected_max[i][0].mean, wp[i][1].mean);
    }
    Ok(())
}
