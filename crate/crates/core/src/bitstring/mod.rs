//! The "guess a randomly drawn bitstring" contest.
//!
//! A bracket is a bitstring split into rounds. The reference bitstring has
//! independent `Bernoulli(p_rd)` bits; we submit `n` bitstrings with
//! `Bernoulli(q_rd)` bits and opponents submit `k` with `Bernoulli(r_rd)` bits.
//! Scores are round-weighted match counts. Conditioning on the number of
//! zeros the reference has in each round makes every submitted score
//! conditionally i.i.d., which gives closed forms for the expected maximum
//! score and the win probability (see [`Contest`]).

mod exact;
mod simulate;

pub use exact::TieRule;
pub use simulate::{SimulationSummary, Estimate};

use crate::error::{check_prob, domain, Result};
use crate::gpb::{self, ScoreDistribution};

/// Number of bits in each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundStructure {
    bits: Vec<usize>,
}

impl RoundStructure {
    pub fn new(bits: Vec<usize>) -> Result<Self> {
        if bits.is_empty() {
            return Err(domain("at least one round is required"));
        }
        if bits.contains(&0) {
            return Err(domain("every round needs at least one bit"));
        }
        Ok(RoundStructure { bits })
    }

    /// `2^(R - rd)` bits in round `rd`, e.g. 32, 16, 8, 4, 2, 1 for six rounds.
    pub fn halving(rounds: usize) -> Result<Self> {
        if rounds == 0 || rounds > 30 {
            return Err(domain(format!("unsupported round count {rounds}")));
        }
        Self::new((1..=rounds).map(|rd| 1usize << (rounds - rd)).collect())
    }

    pub fn rounds(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[usize] {
        &self.bits
    }

    pub fn total_bits(&self) -> usize {
        self.bits.iter().sum()
    }
}

impl Default for RoundStructure {
    fn default() -> Self {
        Self::halving(6).expect("six rounds")
    }
}

/// Points per correct bit, constant within a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringWeights {
    per_round: Vec<i64>,
}

impl ScoringWeights {
    pub fn new(per_round: Vec<i64>) -> Result<Self> {
        if per_round.is_empty() || per_round.iter().any(|&w| w < 1) {
            return Err(domain("round weights must be positive integers"));
        }
        Ok(ScoringWeights { per_round })
    }

    /// Every bit is worth one point.
    pub fn hamming(rounds: usize) -> Self {
        ScoringWeights { per_round: vec![1; rounds] }
    }

    /// `10 * 2^(rd - 1)` points per bit in round `rd`.
    pub fn espn(rounds: usize) -> Self {
        ScoringWeights { per_round: (0..rounds).map(|r| 10i64 << r).collect() }
    }

    pub fn per_round(&self) -> &[i64] {
        &self.per_round
    }

    pub fn scaled(&self, factor: i64) -> Result<Self> {
        Self::new(self.per_round.iter().map(|w| w * factor).collect())
    }
}

/// Per-round probability that a bit is one.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    probs: Vec<f64>,
}

impl StrategyProfile {
    /// A submission profile. Entries must lie in `[0, 1]`; entries below 0.5
    /// are allowed for exploration but logged.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("empty strategy profile"));
        }
        for &p in &probs {
            check_prob("profile entry", p)?;
        }
        if probs.iter().any(|&p| p < 0.5) {
            log::warn!("strategy profile {probs:?} has entries below 0.5");
        }
        Ok(StrategyProfile { probs })
    }

    /// The same probability in every round.
    pub fn constant(p: f64, rounds: usize) -> Result<Self> {
        Self::new(vec![p; rounds])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rounds(&self) -> usize {
        self.probs.len()
    }

    fn check_reference(&self) -> Result<()> {
        match self.probs.iter().find(|&&p| !(0.5..=1.0).contains(&p)) {
            Some(p) => Err(domain(format!("reference probability {p} outside [0.5, 1]"))),
            None => Ok(()),
        }
    }
}

/// Split point `E`: rounds `1..=E` are early, `E+1..=R` are late.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundPartition {
    split: usize,
}

impl RoundPartition {
    pub fn new(split: usize, rounds: usize) -> Result<Self> {
        if split < 1 || split >= rounds {
            return Err(domain(format!("split {split} must lie in 1..={}", rounds.saturating_sub(1))));
        }
        Ok(RoundPartition { split })
    }

    pub fn split(&self) -> usize {
        self.split
    }
}

/// Number of zeros the reference bitstring has in each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCountVector {
    zeros: Vec<usize>,
}

impl ZeroCountVector {
    pub fn new(zeros: Vec<usize>, structure: &RoundStructure) -> Result<Self> {
        if zeros.len() != structure.rounds() {
            return Err(domain("zero-count vector length differs from round count"));
        }
        if zeros.iter().zip(structure.bits()).any(|(u, m)| u > m) {
            return Err(domain("zero count exceeds bits in round"));
        }
        Ok(ZeroCountVector { zeros })
    }

    pub fn zeros(&self) -> &[usize] {
        &self.zeros
    }
}

/// Rounds `1..=E` get `early`, the rest get `late`.
pub fn profile_from_partition(early: f64, late: f64, part: RoundPartition, rounds: usize) -> Result<StrategyProfile> {
    RoundPartition::new(part.split, rounds)?;
    StrategyProfile::new((0..rounds).map(|r| if r < part.split { early } else { late }).collect())
}

/// A round structure together with its scoring rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contest {
    structure: RoundStructure,
    weights: ScoringWeights,
}

impl Contest {
    pub fn new(structure: RoundStructure, weights: ScoringWeights) -> Result<Self> {
        if structure.rounds() != weights.per_round().len() {
            return Err(domain("weights and round structure have different lengths"));
        }
        Ok(Contest { structure, weights })
    }

    /// 63 bits in six halving rounds, Hamming score.
    pub fn hamming_default() -> Self {
        Contest { structure: RoundStructure::default(), weights: ScoringWeights::hamming(6) }
    }

    /// 63 bits in six halving rounds, ESPN score.
    pub fn espn_default() -> Self {
        Contest { structure: RoundStructure::default(), weights: ScoringWeights::espn(6) }
    }

    pub fn structure(&self) -> &RoundStructure {
        &self.structure
    }

    pub fn weights(&self) -> &ScoringWeights {
        &self.weights
    }

    /// Highest attainable score.
    pub fn max_score(&self) -> i64 {
        self.structure.bits().iter().zip(self.weights.per_round()).map(|(&m, &w)| m as i64 * w).sum()
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.rounds() != self.structure.rounds() {
            return Err(domain(format!(
                "profile has {} rounds, contest has {}",
                profile.rounds(),
                self.structure.rounds()
            )));
        }
        Ok(())
    }

    /// Law of one submitted bitstring's score given the reference zero counts:
    /// `sum_rd w_rd * (Binom(u_rd, 1 - q_rd) + Binom(m_rd - u_rd, q_rd))`.
    pub fn conditional_score_dist(&self, q: &StrategyProfile, u: &ZeroCountVector) -> Result<ScoreDistribution> {
        self.check_profile(q)?;
        if u.zeros().len() != self.structure.rounds() {
            return Err(domain("zero-count vector length differs from round count"));
        }
        let mut dist = ScoreDistribution::point(0);
        for ((&m, &w), (&zeros, &qr)) in self
            .structure
            .bits()
            .iter()
            .zip(self.weights.per_round())
            .zip(u.zeros().iter().zip(q.probs()))
        {
            let on_zeros = gpb::binomial(zeros as u64, w, 1.0 - qr)?;
            let on_ones = gpb::binomial((m - zeros) as u64, w, qr)?;
            dist = gpb::convolve(&dist, &gpb::convolve(&on_zeros, &on_ones));
        }
        Ok(dist)
    }

    /// `P(u) = prod_rd C(m_rd, u_rd) (1 - p_rd)^u_rd p_rd^(m_rd - u_rd)`.
    pub fn zero_count_prob(&self, p: &StrategyProfile, u: &ZeroCountVector) -> Result<f64> {
        self.check_profile(p)?;
        Ok(self
            .structure
            .bits()
            .iter()
            .zip(u.zeros())
            .zip(p.probs())
            .map(|((&m, &zeros), &pr)| gpb::binomial_pmf(m as u64, 1.0 - pr)[zeros])
            .product())
    }
}

/// Free-function form of [`Contest::conditional_score_dist`].
pub fn conditional_score_dist(
    q: &StrategyProfile,
    u: &ZeroCountVector,
    s: &RoundStructure,
    w: &ScoringWeights,
) -> Result<ScoreDistribution> {
    Contest::new(s.clone(), w.clone())?.conditional_score_dist(q, u)
}

/// Free-function form of [`Contest::zero_count_prob`].
pub fn zero_count_prob(p: &StrategyProfile, u: &ZeroCountVector, s: &RoundStructure) -> Result<f64> {
    Contest::new(s.clone(), ScoringWeights::hamming(s.rounds()))?.zero_count_prob(p, u)
}

/// Exact expected maximum score of `n` i.i.d. `q`-bitstrings.
pub fn expected_max_score(
    p: &StrategyProfile,
    q: &StrategyProfile,
    n: u64,
    s: &RoundStructure,
    w: &ScoringWeights,
) -> Result<f64> {
    Contest::new(s.clone(), w.clone())?.expected_max_score(p, q, n)
}

/// Exact probability that the best of `n` `q`-bitstrings ties or beats the best
/// of `k` `r`-bitstrings.
pub fn win_probability(
    p: &StrategyProfile,
    q: &StrategyProfile,
    r: &StrategyProfile,
    n: u64,
    k: u64,
    s: &RoundStructure,
    w: &ScoringWeights,
) -> Result<f64> {
    Contest::new(s.clone(), w.clone())?.win_probability(p, q, r, n, k, TieRule::TiesWin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> StrategyProfile {
        StrategyProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn default_structure_halves() {
        let s = RoundStructure::default();
        assert_eq!(s.bits(), &[32, 16, 8, 4, 2, 1]);
        assert_eq!(s.total_bits(), 63);
        assert_eq!(ScoringWeights::espn(6).per_round(), &[10, 20, 40, 80, 160, 320]);
        assert_eq!(Contest::espn_default().max_score(), 1920);
        assert!(RoundStructure::new(vec![3, 0]).is_err());
        assert!(ScoringWeights::new(vec![1, 0]).is_err());
    }

    #[test]
    fn partition_profiles() {
        let six = |e, l, split| profile_from_partition(e, l, RoundPartition::new(split, 6).unwrap(), 6).unwrap();
        assert_eq!(six(0.9, 0.6, 3).probs(), &[0.9, 0.9, 0.9, 0.6, 0.6, 0.6]);
        assert_eq!(six(0.7, 0.7, 1).probs(), &[0.7; 6]);
        assert_eq!(six(1.0, 0.5, 5).probs(), &[1.0, 1.0, 1.0, 1.0, 1.0, 0.5]);
        assert!(RoundPartition::new(0, 6).is_err());
        assert!(RoundPartition::new(6, 6).is_err());
        let bad = RoundPartition { split: 7 };
        assert!(profile_from_partition(0.9, 0.6, bad, 6).is_err());
    }

    #[test]
    fn profile_bounds() {
        assert!(StrategyProfile::new(vec![1.1]).is_err());
        assert!(StrategyProfile::new(vec![]).is_err());
        assert!(StrategyProfile::new(vec![0.2]).is_ok());
    }

    #[test]
    fn conditional_score_trivial_cases() {
        let s = RoundStructure::new(vec![1]).unwrap();
        let w = ScoringWeights::hamming(1);
        let q = profile(&[1.0]);
        let all_ones = ZeroCountVector::new(vec![0], &s).unwrap();
        let one_zero = ZeroCountVector::new(vec![1], &s).unwrap();
        let d = conditional_score_dist(&q, &all_ones, &s, &w).unwrap();
        assert_eq!(d.mass(1), 1.0);
        let d = conditional_score_dist(&q, &one_zero, &s, &w).unwrap();
        assert_eq!(d.mass(0), 1.0);
    }

    #[test]
    fn conditional_score_matches_guess_enumeration() {
        // Rounds of 2 and 1 bits; the reference has one zero in round 1.
        let s = RoundStructure::new(vec![2, 1]).unwrap();
        let w = ScoringWeights::new(vec![10, 20]).unwrap();
        let q = profile(&[0.75, 0.6]);
        let u = ZeroCountVector::new(vec![1, 0], &s).unwrap();
        let reference = [0u8, 1, 1];
        let bit_q = [0.75, 0.75, 0.6];
        let bit_w = [10, 10, 20];
        let mut brute = std::collections::BTreeMap::new();
        for mask in 0u32..8 {
            let mut prob = 1.0;
            let mut score = 0;
            for b in 0..3 {
                let guess = (mask >> b & 1) as u8;
                prob *= if guess == 1 { bit_q[b] } else { 1.0 - bit_q[b] };
                if guess == reference[b] {
                    score += bit_w[b];
                }
            }
            *brute.entry(score).or_insert(0.0) += prob;
        }
        let d = conditional_score_dist(&q, &u, &s, &w).unwrap();
        for (score, mass) in brute {
            assert!((d.mass(score) - mass).abs() < 1e-15, "score {score}");
        }
    }

    #[test]
    fn zero_count_examples() {
        let s5 = RoundStructure::new(vec![5]).unwrap();
        let u = ZeroCountVector::new(vec![0], &s5).unwrap();
        assert_eq!(zero_count_prob(&profile(&[1.0]), &u, &s5).unwrap(), 1.0);

        let s2 = RoundStructure::new(vec![2]).unwrap();
        let u = ZeroCountVector::new(vec![2], &s2).unwrap();
        assert!((zero_count_prob(&profile(&[0.5]), &u, &s2).unwrap() - 0.25).abs() < 1e-15);

        let s21 = RoundStructure::new(vec![2, 1]).unwrap();
        let u = ZeroCountVector::new(vec![1, 0], &s21).unwrap();
        let got = zero_count_prob(&profile(&[0.75, 0.75]), &u, &s21).unwrap();
        assert!((got - 0.28125).abs() < 1e-15);
        assert!(ZeroCountVector::new(vec![3, 0], &s21).is_err());
    }
}
