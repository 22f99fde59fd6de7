//! Bit-level Monte-Carlo simulation of the contest.
//!
//! Draws every reference, guess and opponent bit individually; it shares no
//! code with the exact class walk and serves as its cross-check.
//!
//! Draw order: trials are grouped in blocks of [`BLOCK`]; block `b` uses the
//! stream `(seed, b)`. Within a trial the reference bits are drawn first
//! (round by round, bit by bit), then the `n` guesses, then the `k` opponent
//! bitstrings, each bitstring in the same bit order.

use rayon::prelude::*;

use super::{Contest, StrategyProfile};
use crate::error::{domain, Result};
use crate::rng::{self, Coin};

const BLOCK: u64 = 1 << 13;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub(crate) fn from_moments(sum: f64, sum_sq: f64, count: f64) -> Self {
        if count <= 0.0 {
            return Estimate { mean: 0.0, stderr: 0.0 };
        }
        let mean = sum / count;
        let var = if count > 1.0 { ((sum_sq - sum * mean) / (count - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, stderr: (var / count).sqrt() }
    }

    /// Whether `value` lies within `sigmas` standard errors of the mean.
    pub fn covers(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.stderr
    }
}

/// Results of [`Contest::simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    /// Best score among our `n` bitstrings.
    pub expected_max: Estimate,
    /// Indicator that our best ties or beats the opponents' best; `None`
    /// when `k = 0`.
    pub win_probability: Option<Estimate>,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    max_sum: f64,
    max_sq: f64,
    wins: f64,
}

impl Contest {
    /// Simulates `trials` independent contests.
    #[allow(clippy::too_many_arguments)]
    pub fn simulate(
        &self,
        p: &StrategyProfile,
        q: &StrategyProfile,
        r: &StrategyProfile,
        n: u64,
        k: u64,
        trials: u64,
        seed: u64,
    ) -> Result<SimulationSummary> {
        for prof in [p, q, r] {
            self.check_profile(prof)?;
        }
        if n == 0 || trials == 0 {
            return Err(domain("n and trials must be at least 1"));
        }
        let mut bit_weight = Vec::new();
        let mut coins = [Vec::new(), Vec::new(), Vec::new()];
        for (rd, (&m, &w)) in self.structure().bits().iter().zip(self.weights().per_round()).enumerate() {
            for _ in 0..m {
                bit_weight.push(w);
                for (c, prof) in coins.iter_mut().zip([p, q, r]) {
                    c.push(Coin::new(prof.probs()[rd]));
                }
            }
        }
        let [ref_coins, our_coins, opp_coins] = coins;
        let blocks = trials.div_ceil(BLOCK);
        let parts: Vec<Moments> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng::stream(seed, &[b]);
                let count = BLOCK.min(trials - b * BLOCK);
                let mut reference = vec![false; bit_weight.len()];
                let mut acc = Moments::default();
                let best_of = |coins: &[Coin], reference: &[bool], count: u64, rng: &mut rng::StreamRng| {
                    let mut best = i64::MIN;
                    for _ in 0..count {
                        let mut score = 0;
                        for ((coin, &bit), &w) in coins.iter().zip(reference).zip(&bit_weight) {
                            if coin.flip(rng) == bit {
                                score += w;
                            }
                        }
                        best = best.max(score);
                    }
                    best
                };
                for _ in 0..count {
                    for (bit, coin) in reference.iter_mut().zip(&ref_coins) {
                        *bit = coin.flip(&mut rng);
                    }
                    let ours = best_of(&our_coins, &reference, n, &mut rng);
                    let theirs = best_of(&opp_coins, &reference, k, &mut rng);
                    acc.max_sum += ours as f64;
                    acc.max_sq += (ours as f64).powi(2);
                    if ours >= theirs {
                        acc.wins += 1.0;
                    }
                }
                acc
            })
            .collect();
        let total = parts.iter().fold(Moments::default(), |a, b| Moments {
            max_sum: a.max_sum + b.max_sum,
            max_sq: a.max_sq + b.max_sq,
            wins: a.wins + b.wins,
        });
        let count = trials as f64;
        Ok(SimulationSummary {
            expected_max: Estimate::from_moments(total.max_sum, total.max_sq, count),
            win_probability: (k > 0).then(|| Estimate::from_moments(total.wins, total.wins, count)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::{RoundStructure, ScoringWeights, TieRule};

    #[test]
    fn simulation_agrees_with_exact_on_small_contest() {
        let game = Contest::new(RoundStructure::new(vec![4, 2, 1]).unwrap(), ScoringWeights::espn(3)).unwrap();
        let p = StrategyProfile::constant(0.75, 3).unwrap();
        let q = StrategyProfile::constant(0.7, 3).unwrap();
        let r = StrategyProfile::constant(0.9, 3).unwrap();
        let sim = game.simulate(&p, &q, &r, 3, 2, 200_000, 9).unwrap();
        let emax = game.expected_max_score(&p, &q, 3).unwrap();
        let wp = game.win_probability(&p, &q, &r, 3, 2, TieRule::TiesWin).unwrap();
        assert!(sim.expected_max.covers(emax, 4.0), "{:?} vs {emax}", sim.expected_max);
        assert!(sim.win_probability.unwrap().covers(wp, 4.0));
    }

    #[test]
    fn simulation_is_reproducible() {
        let game = Contest::hamming_default();
        let p = StrategyProfile::constant(0.75, 6).unwrap();
        let a = game.simulate(&p, &p, &p, 2, 2, 1000, 5).unwrap();
        let b = game.simulate(&p, &p, &p, 2, 2, 1000, 5).unwrap();
        assert_eq!(a, b);
    }
}
