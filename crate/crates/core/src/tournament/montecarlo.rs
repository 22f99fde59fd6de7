//! Double Monte-Carlo estimators of the bracket-challenge objectives.
//!
//! The outer loop draws `B1` true brackets `tau ~ P`; for each, the inner
//! loop draws `B2` fresh sets of our `n` brackets (and the public's `k`).
//! Streams, with `seed` the root:
//!
//! * `tau` for outer draw `b1`: `(seed, 0, b1)`
//! * our brackets in cell `(b1, b2)`: `(seed, 1, b1, b2)`, restarted for each
//!   strategy so different strategies see common random numbers
//! * opponents in cell `(b1, b2)`: `(seed, 2, b1, b2)`
//!
//! Our `n` brackets for the largest requested `n` are drawn once per cell and
//! smaller `n` use a prefix, so a batched [`mc_surface`] call returns exactly
//! what separate single-point calls would.

use rayon::prelude::*;

use super::{game_points, score_with, Field, Sampler, StrategyMatrix, WinMatrix};
use crate::bitstring::Estimate;
use crate::error::{domain, Result};
use crate::rng::stream;

const TAU: u64 = 0;
const OURS: u64 = 1;
const OPPONENTS: u64 = 2;

/// Loop sizes and root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub b1: u64,
    pub b2: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings { b1: 250, b2: 100, seed: 0 }
    }
}

/// Estimates for every (strategy, n) pair of a batched run.
#[derive(Debug, Clone, PartialEq)]
pub struct McSurface {
    pub ns: Vec<u64>,
    /// `expected_max[s][i]` for strategy `s` and `ns[i]`.
    pub expected_max: Vec<Vec<Estimate>>,
    /// Present when opponents were supplied.
    pub win_probability: Option<Vec<Vec<Estimate>>>,
}

/// Runs the estimators for several strategies and entry counts at once.
/// `opponents` is the public strategy together with `k`.
pub fn mc_surface(
    field: &Field,
    p: &WinMatrix,
    strategies: &[StrategyMatrix],
    opponents: Option<(&StrategyMatrix, u64)>,
    ns: &[u64],
    settings: McSettings,
) -> Result<McSurface> {
    p.check_field(field, "win matrix")?;
    for q in strategies {
        q.check_field(field, "strategy")?;
    }
    if let Some((r, k)) = opponents {
        r.check_field(field, "opponent strategy")?;
        if k == 0 {
            return Err(domain("k must be at least 1"));
        }
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(domain("every n must be at least 1"));
    }
    if settings.b1 == 0 || settings.b2 == 0 {
        return Err(domain("B1 and B2 must be at least 1"));
    }
    let n_max = *ns.iter().max().expect("non-empty") as usize;
    let points = game_points(field.len());
    let games = field.games();
    let truth = Sampler::new(field, p);
    let ours: Vec<Sampler> = strategies.iter().map(|q| Sampler::new(field, q)).collect();
    let theirs = opponents.map(|(r, k)| (Sampler::new(field, r), k));
    // For each n, the prefix length at which its max is read off.
    let mut checkpoints: Vec<(usize, usize)> = ns.iter().enumerate().map(|(i, &n)| (n as usize, i)).collect();
    checkpoints.sort();
    let cells = strategies.len() * ns.len();

    // Per outer draw: inner means of max score and of wins, per (strategy, n).
    let outer: Vec<(Vec<f64>, Vec<f64>)> = (0..settings.b1)
        .into_par_iter()
        .map(|b1| {
            let mut tau = vec![0; games];
            truth.draw(&mut stream(settings.seed, &[TAU, b1]), &mut tau);
            let mut bracket = vec![0; games];
            let mut max_sum = vec![0.0; cells];
            let mut wins = vec![0.0; cells];
            for b2 in 0..settings.b2 {
                let best_opp = theirs.as_ref().map(|(sampler, k)| {
                    let mut rng = stream(settings.seed, &[OPPONENTS, b1, b2]);
                    let mut best = 0;
                    for _ in 0..*k {
                        sampler.draw(&mut rng, &mut bracket);
                        best = best.max(score_with(&points, &bracket, &tau));
                    }
                    best
                });
                for (s, sampler) in ours.iter().enumerate() {
                    let mut rng = stream(settings.seed, &[OURS, b1, b2]);
                    let mut best = 0;
                    let mut next = checkpoints.iter().peekable();
                    for drawn in 1..=n_max {
                        sampler.draw(&mut rng, &mut bracket);
                        best = best.max(score_with(&points, &bracket, &tau));
                        while let Some(&&(_, i)) = next.peek().filter(|c| c.0 == drawn) {
                            let cell = s * ns.len() + i;
                            max_sum[cell] += best as f64;
                            if best_opp.is_some_and(|opp| best >= opp) {
                                wins[cell] += 1.0;
                            }
                            next.next();
                        }
                    }
                }
            }
            let b2 = settings.b2 as f64;
            (max_sum.into_iter().map(|x| x / b2).collect(), wins.into_iter().map(|x| x / b2).collect())
        })
        .collect();

    let summarize = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<Vec<Estimate>> {
        let mut sum = vec![0.0; cells];
        let mut sum_sq = vec![0.0; cells];
        for row in &outer {
            for (c, &x) in pick(row).iter().enumerate() {
                sum[c] += x;
                sum_sq[c] += x * x;
            }
        }
        let est: Vec<Estimate> =
            (0..cells).map(|c| Estimate::from_moments(sum[c], sum_sq[c], settings.b1 as f64)).collect();
        est.chunks(ns.len()).map(<[Estimate]>::to_vec).collect()
    };
    Ok(McSurface {
        ns: ns.to_vec(),
        expected_max: summarize(&|row| &row.0),
        win_probability: opponents.map(|_| summarize(&|row| &row.1)),
    })
}

/// Expected best ESPN score among `n` brackets drawn from `q`.
pub fn mc_expected_max_score(
    field: &Field,
    p: &WinMatrix,
    q: &StrategyMatrix,
    n: u64,
    settings: McSettings,
) -> Result<Estimate> {
    let surface = mc_surface(field, p, std::slice::from_ref(q), None, &[n], settings)?;
    Ok(surface.expected_max[0][0])
}

/// Probability that our best of `n` ties or beats the best of `k` public
/// brackets drawn from `r`.
pub fn mc_win_probability(
    field: &Field,
    p: &WinMatrix,
    q: &StrategyMatrix,
    r: &StrategyMatrix,
    n: u64,
    k: u64,
    settings: McSettings,
) -> Result<Estimate> {
    let surface = mc_surface(field, p, std::slice::from_ref(q), Some((r, k)), &[n], settings)?;
    Ok(surface.win_probability.expect("opponents were given")[0][0])
}

#[cfg(test)]
mod tests {
    use super::super::tests::small_field;
    use super::super::*;
    use super::*;

    fn exact_small(field: &Field, p: &WinMatrix, q: &StrategyMatrix, r: &StrategyMatrix, n: u64, k: u64) -> (f64, f64) {
        let truths = enumerate_brackets(field, p).unwrap();
        let ours = enumerate_brackets(field, q).unwrap();
        let theirs = enumerate_brackets(field, r).unwrap();
        let max_score = 10 * (field.len() as u32 / 2) * field.rounds() as u32;
        let cdf = |set: &[(TournamentBracket, f64)], tau: &TournamentBracket, a: i64| -> f64 {
            set.iter().filter(|(x, _)| (espn_score(x, tau).unwrap() as i64) <= a).map(|b| b.1).sum()
        };
        let (mut emax, mut wp) = (0.0, 0.0);
        for (tau, pt) in &truths {
            for a in (0..=max_score as i64).step_by(10) {
                let fq = cdf(&ours, tau, a).powi(n as i32);
                let fq_below = cdf(&ours, tau, a - 10).powi(n as i32);
                emax += pt * a as f64 * (fq - fq_below);
                wp += pt * (fq - fq_below) * cdf(&theirs, tau, a).powi(k as i32);
            }
        }
        (emax, wp)
    }

    #[test]
    fn certain_outcomes() {
        let field = Field::ncaa_2021();
        let q1 = interpolated_strategy(&elo_to_winmatrix(&field), 1.0).unwrap();
        let settings = McSettings { b1: 4, b2: 3, seed: 1 };
        let e = mc_expected_max_score(&field, &q1, &q1, 5, settings).unwrap();
        assert_eq!((e.mean, e.stderr), (1920.0, 0.0));
        let r = chalky_opponents(&field);
        let w = mc_win_probability(&field, &q1, &q1, &r, 1, 50, settings).unwrap();
        assert_eq!((w.mean, w.stderr), (1.0, 0.0));
    }

    #[test]
    fn four_team_estimates_match_enumeration() {
        let field = small_field(&[88.0, 70.0, 80.0, 84.0]);
        let p = elo_to_winmatrix(&field);
        let q = interpolated_strategy(&p, 0.7).unwrap();
        let r = interpolated_strategy(&p, 0.3).unwrap();
        let settings = McSettings { b1: 4000, b2: 20, seed: 5 };
        for (n, k) in [(1, 1), (2, 3)] {
            let (emax, wp) = exact_small(&field, &p, &q, &r, n, k);
            let e = mc_expected_max_score(&field, &p, &q, n, settings).unwrap();
            let w = mc_win_probability(&field, &p, &q, &r, n, k, settings).unwrap();
            assert!(e.covers(emax, 4.0), "n={n}: {e:?} vs {emax}");
            assert!(w.covers(wp, 4.0), "n={n} k={k}: {w:?} vs {wp}");
        }
    }

    #[test]
    fn single_bracket_matches_marginal_form() {
        // With n = 1 the expectation is a sum of per-game match probabilities.
        let field = small_field(&[90.0, 72.0, 81.0, 86.0]);
        let p = elo_to_winmatrix(&field);
        let q = interpolated_strategy(&p, 0.8).unwrap();
        let truths = enumerate_brackets(&field, &p).unwrap();
        let ours = enumerate_brackets(&field, &q).unwrap();
        let points = game_points(4);
        let mut by_game = 0.0;
        for g in 0..3 {
            for team in 0..4 {
                let pt: f64 = truths.iter().filter(|b| b.0.winners()[g] == team).map(|b| b.1).sum();
                let qt: f64 = ours.iter().filter(|b| b.0.winners()[g] == team).map(|b| b.1).sum();
                by_game += points[g] as f64 * pt * qt;
            }
        }
        let (emax, _) = exact_small(&field, &p, &q, &q, 1, 1);
        assert!((by_game - emax).abs() < 1e-12);
    }

    #[test]
    fn batched_equals_single() {
        let field = Field::ncaa_2021();
        let p = elo_to_winmatrix(&field);
        let r = chalky_opponents(&field);
        let qs: Vec<_> = [0.3, 0.8].iter().map(|&l| interpolated_strategy(&p, l).unwrap()).collect();
        let settings = McSettings { b1: 3, b2: 2, seed: 42 };
        let surface = mc_surface(&field, &p, &qs, Some((&r, 20)), &[7, 2], settings).unwrap();
        let single = mc_win_probability(&field, &p, &qs[1], &r, 2, 20, settings).unwrap();
        assert_eq!(surface.win_probability.unwrap()[1][1], single);
        let single = mc_expected_max_score(&field, &p, &qs[0], 7, settings).unwrap();
        assert_eq!(surface.expected_max[0][0], single);
    }

    #[test]
    fn more_brackets_never_hurt() {
        let field = Field::ncaa_2021();
        let p = elo_to_winmatrix(&field);
        let q = interpolated_strategy(&p, 0.6).unwrap();
        let surface = mc_surface(&field, &p, &[q], None, &[1, 10, 100], McSettings { b1: 8, b2: 4, seed: 2 }).unwrap();
        let row = &surface.expected_max[0];
        assert!(row[0].mean <= row[1].mean && row[1].mean <= row[2].mean);
    }

    #[test]
    fn exchangeable_sides_win_at_least_half() {
        let field = Field::ncaa_2021();
        let p = elo_to_winmatrix(&field);
        let q = interpolated_strategy(&p, 0.5).unwrap();
        let w = mc_win_probability(&field, &p, &q, &q, 3, 3, McSettings { b1: 200, b2: 10, seed: 3 }).unwrap();
        assert!(w.mean >= 0.5 - 4.0 * w.stderr, "{w:?}");
    }

    #[test]
    fn stderr_shrinks_with_outer_draws() {
        let field = small_field(&[88.0, 70.0, 80.0, 84.0, 90.0, 60.0, 75.0, 77.0]);
        let p = elo_to_winmatrix(&field);
        let q = interpolated_strategy(&p, 0.4).unwrap();
        let a = mc_expected_max_score(&field, &p, &q, 2, McSettings { b1: 4000, b2: 5, seed: 1 }).unwrap();
        let b = mc_expected_max_score(&field, &p, &q, 2, McSettings { b1: 16000, b2: 5, seed: 1 }).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio - 2.0).abs() < 0.6, "{ratio}");
    }

    #[test]
    fn input_checks() {
        let field = small_field(&[1.0, 2.0]);
        let p = elo_to_winmatrix(&field);
        let s = McSettings::default();
        assert!(mc_expected_max_score(&field, &p, &p, 0, s).is_err());
        assert!(mc_win_probability(&field, &p, &p, &p, 1, 0, s).is_err());
        assert!(mc_expected_max_score(&field, &p, &p, 1, McSettings { b1: 0, ..s }).is_err());
        let big = elo_to_winmatrix(&Field::ncaa_2021());
        assert!(mc_expected_max_score(&field, &p, &big, 1, s).is_err());
    }
}
