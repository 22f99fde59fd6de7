//! Exact objectives by summing over reference zero-count classes.
//!
//! The class space is the product `prod_rd (m_rd + 1)` (151,470 classes for
//! the 63-bit contest). Per-round conditional score laws depend only on
//! `(u_rd, m_rd)`, so they are tabulated once and the walk convolves them
//! along a depth-first traversal, sharing each prefix convolution between all
//! of its descendants.

use super::{Contest, StrategyProfile};
use crate::error::{domain, Result};
use crate::gpb::{self, gcd, powu};

/// How a tie between our best score and the opponents' best is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Ties count for us: `P(max ours >= max theirs)`.
    #[default]
    TiesWin,
    /// Strict: `P(max ours > max theirs)`.
    TiesLose,
}

/// Precomputed per-round tables for a set of submission profiles.
struct ClassWalker {
    /// Round indices in traversal order (largest rounds first).
    order: Vec<usize>,
    bits: Vec<usize>,
    /// Lattice stride of each round (weight / common divisor).
    strides: Vec<usize>,
    /// Common divisor of the weights; one lattice unit in score points.
    unit: i64,
    /// Highest score in lattice units.
    span: usize,
    /// `[profile][round][u]` → law of the match count in that round.
    matches: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[reference][round][u]` → `P(u_rd = u)`.
    class_probs: Vec<Vec<Vec<f64>>>,
}

impl ClassWalker {
    fn new(contest: &Contest, references: &[&StrategyProfile], profiles: &[&StrategyProfile]) -> Result<Self> {
        for p in references {
            contest.check_profile(p)?;
            p.check_reference()?;
        }
        for q in profiles {
            contest.check_profile(q)?;
        }
        let bits = contest.structure().bits().to_vec();
        let weights = contest.weights().per_round();
        let unit = weights.iter().fold(0, |g, &w| gcd(g, w));
        let strides: Vec<usize> = weights.iter().map(|&w| (w / unit) as usize).collect();
        let span = bits.iter().zip(&strides).map(|(m, s)| m * s).sum();

        let mut order: Vec<usize> = (0..bits.len()).collect();
        order.sort_by_key(|&r| std::cmp::Reverse(bits[r] * strides[r]));

        let mut matches = Vec::with_capacity(profiles.len());
        for q in profiles {
            let mut per_round = Vec::with_capacity(bits.len());
            for (&m, &qr) in bits.iter().zip(q.probs()) {
                let mut per_u = Vec::with_capacity(m + 1);
                for zeros in 0..=m {
                    let on_zeros = gpb::binomial(zeros as u64, 1, 1.0 - qr)?;
                    let on_ones = gpb::binomial((m - zeros) as u64, 1, qr)?;
                    let d = gpb::convolve(&on_zeros, &on_ones);
                    let mut dense = vec![0.0; m + 1];
                    for (v, mass) in d.iter() {
                        dense[v as usize] += mass;
                    }
                    per_u.push(dense);
                }
                per_round.push(per_u);
            }
            matches.push(per_round);
        }
        let class_probs = references
            .iter()
            .map(|p| bits.iter().zip(p.probs()).map(|(&m, &pr)| gpb::binomial_pmf(m as u64, 1.0 - pr)).collect())
            .collect();
        Ok(ClassWalker { order, bits, strides, unit, span, matches, class_probs })
    }

    /// Calls `visit(weights, cdfs)` once per zero-count class that has
    /// non-zero probability under at least one reference profile. `weights[i]`
    /// is `P(u)` under reference `i`; `cdfs[j]` is profile `j`'s conditional
    /// score CDF on lattice units `0..=span`.
    fn walk(&self, mut visit: impl FnMut(&[f64], &[Vec<f64>])) {
        let levels = self.order.len();
        let n_prof = self.matches.len();
        let mut prefix: Vec<Vec<Vec<f64>>> = (0..=levels).map(|_| vec![Vec::new(); n_prof]).collect();
        for buf in prefix[0].iter_mut() {
            *buf = vec![1.0];
        }
        let mut weights = vec![vec![1.0; self.class_probs.len()]; levels + 1];
        let mut cdfs = vec![vec![0.0; self.span + 1]; n_prof];
        self.descend(0, &mut prefix, &mut weights, &mut cdfs, &mut visit);
    }

    fn descend(
        &self,
        level: usize,
        prefix: &mut [Vec<Vec<f64>>],
        weights: &mut [Vec<f64>],
        cdfs: &mut [Vec<f64>],
        visit: &mut impl FnMut(&[f64], &[Vec<f64>]),
    ) {
        if level == self.order.len() {
            for (cdf, pmf) in cdfs.iter_mut().zip(&prefix[level]) {
                let mut acc = 0.0;
                for (c, &m) in cdf.iter_mut().zip(pmf) {
                    acc += m;
                    *c = acc;
                }
            }
            visit(&weights[level], cdfs);
            return;
        }
        let round = self.order[level];
        let m = self.bits[round];
        let stride = self.strides[round];
        for zeros in 0..=m {
            let live = {
                let (head, tail) = weights.split_at_mut(level + 1);
                let mut live = false;
                for ((next, &prev), table) in tail[0].iter_mut().zip(&head[level]).zip(&self.class_probs) {
                    *next = prev * table[round][zeros];
                    live |= *next != 0.0;
                }
                live
            };
            if !live {
                continue;
            }
            {
                let (head, tail) = prefix.split_at_mut(level + 1);
                for (p, out) in tail[0].iter_mut().enumerate() {
                    let src = &head[level][p];
                    out.clear();
                    out.resize(src.len() + m * stride, 0.0);
                    for (k, &lm) in self.matches[p][round][zeros].iter().enumerate() {
                        if lm == 0.0 {
                            continue;
                        }
                        let shift = k * stride;
                        for (o, &s) in out[shift..shift + src.len()].iter_mut().zip(src) {
                            *o += s * lm;
                        }
                    }
                }
            }
            self.descend(level + 1, prefix, weights, cdfs, visit);
        }
    }
}

fn check_counts(name: &str, counts: &[u64]) -> Result<()> {
    if counts.is_empty() {
        return Err(domain(format!("no values of {name} requested")));
    }
    if counts.contains(&0) {
        return Err(domain(format!("{name} must be at least 1")));
    }
    Ok(())
}

impl Contest {
    /// Exact `E[max_j f(x_j, tau)]` for `n` i.i.d. `q`-bitstrings.
    pub fn expected_max_score(&self, p: &StrategyProfile, q: &StrategyProfile, n: u64) -> Result<f64> {
        Ok(self.expected_max_score_grid(std::slice::from_ref(p), q, &[n])?[0][0])
    }

    /// Expected maximum score for several `n` at once.
    pub fn expected_max_score_curve(&self, p: &StrategyProfile, q: &StrategyProfile, ns: &[u64]) -> Result<Vec<f64>> {
        Ok(self.expected_max_score_grid(std::slice::from_ref(p), q, ns)?.swap_remove(0))
    }

    /// Expected maximum score for every reference profile in `ps` and every
    /// `n` in `ns`, in a single class walk. Indexed `[p][n]`.
    ///
    /// Uses the tail sum `E[max] = sum_a P(max > a)` over the score lattice,
    /// with `P(max <= a) = sum_u P(u) F(a | u)^n`.
    pub fn expected_max_score_grid(
        &self,
        ps: &[StrategyProfile],
        q: &StrategyProfile,
        ns: &[u64],
    ) -> Result<Vec<Vec<f64>>> {
        check_counts("n", ns)?;
        let refs: Vec<&StrategyProfile> = ps.iter().collect();
        let walker = ClassWalker::new(self, &refs, &[q])?;
        let span = walker.span;
        // below[p][n][a] accumulates P(max <= a).
        let mut below = vec![vec![vec![0.0; span]; ns.len()]; ps.len()];
        let mut powered = vec![vec![0.0; span]; ns.len()];
        walker.walk(|weights, cdfs| {
            let cdf = &cdfs[0][..span];
            for (row, &n) in powered.iter_mut().zip(ns) {
                for (out, &f) in row.iter_mut().zip(cdf) {
                    *out = powu(f, n);
                }
            }
            for (per_p, &w) in below.iter_mut().zip(weights) {
                if w == 0.0 {
                    continue;
                }
                for (acc, row) in per_p.iter_mut().zip(&powered) {
                    for (a, &f) in acc.iter_mut().zip(row) {
                        *a += w * f;
                    }
                }
            }
        });
        let unit = walker.unit as f64;
        Ok(below
            .into_iter()
            .map(|per_p| per_p.into_iter().map(|acc| unit * acc.iter().map(|&b| 1.0 - b).sum::<f64>()).collect())
            .collect())
    }

    /// Exact probability that the best of `n` `q`-bitstrings beats (or, under
    /// [`TieRule::TiesWin`], ties) the best of `k` `r`-bitstrings.
    pub fn win_probability(
        &self,
        p: &StrategyProfile,
        q: &StrategyProfile,
        r: &StrategyProfile,
        n: u64,
        k: u64,
        ties: TieRule,
    ) -> Result<f64> {
        Ok(self.win_probability_table(p, q, r, &[n], &[k], ties)?[0][0])
    }

    /// Win probability for every `(n, k)` pair, indexed `[n][k]`.
    ///
    /// `1 - sum_u P(u) sum_a F_q(a - 1 | u)^n {F_r(a | u)^k - F_r(a - 1 | u)^k}`,
    /// with `F_q(a | u)` in place of `F_q(a - 1 | u)` for strict wins.
    pub fn win_probability_table(
        &self,
        p: &StrategyProfile,
        q: &StrategyProfile,
        r: &StrategyProfile,
        ns: &[u64],
        ks: &[u64],
        ties: TieRule,
    ) -> Result<Vec<Vec<f64>>> {
        check_counts("n", ns)?;
        check_counts("k", ks)?;
        let walker = ClassWalker::new(self, &[p], &[q, r])?;
        let len = walker.span + 1;
        let mut lose = vec![vec![0.0; ks.len()]; ns.len()];
        let mut ours = vec![vec![0.0; len]; ns.len()];
        let mut theirs = vec![vec![0.0; len]; ks.len()];
        walker.walk(|weights, cdfs| {
            let w = weights[0];
            let (fq, fr) = (&cdfs[0], &cdfs[1]);
            for (row, &n) in ours.iter_mut().zip(ns) {
                for a in 0..len {
                    let f = match ties {
                        TieRule::TiesWin if a == 0 => 0.0,
                        TieRule::TiesWin => fq[a - 1],
                        TieRule::TiesLose => fq[a],
                    };
                    row[a] = powu(f, n);
                }
            }
            for (row, &k) in theirs.iter_mut().zip(ks) {
                let mut prev = 0.0;
                for a in 0..len {
                    let cur = powu(fr[a], k);
                    row[a] = cur - prev;
                    prev = cur;
                }
            }
            for (lose_n, our_row) in lose.iter_mut().zip(&ours) {
                for (acc, their_row) in lose_n.iter_mut().zip(&theirs) {
                    let s: f64 = our_row.iter().zip(their_row).map(|(x, y)| x * y).sum();
                    *acc += w * s;
                }
            }
        });
        Ok(lose.into_iter().map(|row| row.into_iter().map(|l| 1.0 - l).collect()).collect())
    }
}
