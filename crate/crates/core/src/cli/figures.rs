//! Canned sweeps that regenerate the data behind each figure.
//!
//! Every preset returns `(file name, CSV bytes)` pairs, one per panel. The
//! `fast` variants use coarser grids (and fewer Monte-Carlo draws) whose
//! points are a subset of the full grids where the objective is exact.

use rayon::prelude::*;

use super::{csv_writer, finish_csv};
use crate::bitstring::{profile_from_partition, Contest, RoundPartition, StrategyProfile, TieRule};
use crate::error::Result;
use crate::picksix::{self, PoolEconomics, RaceCard, TiltParams};
use crate::tournament::{self, Field, McSettings};

/// Figure identifiers accepted by `figures`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    /// Expected max Hamming score over (p, q), one panel per n.
    Fig1,
    /// Win probability over (q, r) at p = 0.75, k = 100.
    Fig2,
    /// Expected max ESPN score over early/late q for each round split.
    Fig3,
    /// Win probability over early/late q and r, n = k = 100.
    Fig4,
    /// Tilted pick-six distributions for the last race.
    Fig7,
    /// Best pick-six profit bound over lambda_opp and n.
    Fig8,
    /// Tournament expected max score and win probability over lambda and n.
    Fig9,
    /// Win probability over (q, r) for several k.
    Figk,
}

pub type Panel = (String, Vec<u8>);

pub fn generate(id: FigureId, fast: bool, seed: u64) -> Result<Vec<Panel>> {
    match id {
        FigureId::Fig1 => fig1(fast),
        FigureId::Fig2 => fig2(fast),
        FigureId::Fig3 => fig3(fast),
        FigureId::Fig4 => fig4(fast),
        FigureId::Fig7 => fig7(),
        FigureId::Fig8 => fig8(fast),
        FigureId::Fig9 => fig9(fast, seed),
        FigureId::Figk => figk(fast),
    }
}

/// `start, start + step, ..., end`, computed in integer steps.
pub(crate) fn steps(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn constant(x: f64) -> Result<StrategyProfile> {
    StrategyProfile::constant(x, 6)
}

fn split_profile(early: f64, late: f64, split: usize) -> Result<StrategyProfile> {
    profile_from_partition(early, late, RoundPartition::new(split, 6)?, 6)
}

pub const FIG1_NS: [u64; 4] = [1, 10, 100, 10_000];

/// Rows `(p, q, emax)` per n.
pub fn fig1_data(fast: bool) -> Result<Vec<(u64, Vec<(f64, f64, f64)>)>> {
    let game = Contest::hamming_default();
    let ps = steps(0.5, 1.0, if fast { 0.1 } else { 0.05 });
    let qs = steps(0.5, 1.0, 0.1);
    let profiles = ps.iter().map(|&p| constant(p)).collect::<Result<Vec<_>>>()?;
    let by_q: Vec<Vec<Vec<f64>>> = qs
        .par_iter()
        .map(|&q| game.expected_max_score_grid(&profiles, &constant(q)?, &FIG1_NS))
        .collect::<Result<_>>()?;
    Ok(FIG1_NS
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let mut rows = Vec::new();
            for (pi, &p) in ps.iter().enumerate() {
                for (qi, &q) in qs.iter().enumerate() {
                    rows.push((p, q, by_q[qi][pi][ni]));
                }
            }
            (n, rows)
        })
        .collect())
}

fn fig1(fast: bool) -> Result<Vec<Panel>> {
    fig1_data(fast)?
        .into_iter()
        .map(|(n, rows)| {
            let mut w = csv_writer(Vec::new());
            w.write_record(["p", "q", "emax"])?;
            for (p, q, e) in rows {
                w.write_record([p.to_string(), q.to_string(), e.to_string()])?;
            }
            Ok((format!("fig1_n{n}.csv"), finish_csv(w)?))
        })
        .collect()
}

/// Exact win probabilities `[q][r][n][k]` for constant profiles.
fn winprob_square(game: &Contest, p: f64, qs: &[f64], rs: &[f64], ns: &[u64], ks: &[u64]) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    let pp = constant(p)?;
    qs.par_iter()
        .map(|&q| {
            rs.iter()
                .map(|&r| game.win_probability_table(&pp, &constant(q)?, &constant(r)?, ns, ks, TieRule::TiesWin))
                .collect()
        })
        .collect()
}

pub const FIG2_NS: [u64; 3] = [1, 10, 100];

/// Rows `(q, r, winprob)` per n, at p = 0.75 and k = 100.
pub fn fig2_data(fast: bool) -> Result<Vec<(u64, Vec<(f64, f64, f64)>)>> {
    let grid = steps(0.5, 1.0, if fast { 0.1 } else { 0.05 });
    let table = winprob_square(&Contest::hamming_default(), 0.75, &grid, &grid, &FIG2_NS, &[100])?;
    Ok(FIG2_NS
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let mut rows = Vec::new();
            for (qi, &q) in grid.iter().enumerate() {
                for (ri, &r) in grid.iter().enumerate() {
                    rows.push((q, r, table[qi][ri][ni][0]));
                }
            }
            (n, rows)
        })
        .collect())
}

fn fig2(fast: bool) -> Result<Vec<Panel>> {
    fig2_data(fast)?
        .into_iter()
        .map(|(n, rows)| {
            let mut w = csv_writer(Vec::new());
            w.write_record(["q", "r", "winprob"])?;
            for (q, r, v) in rows {
                w.write_record([q.to_string(), r.to_string(), v.to_string()])?;
            }
            Ok((format!("fig2_n{n}.csv"), finish_csv(w)?))
        })
        .collect()
}

fn fig3(fast: bool) -> Result<Vec<Panel>> {
    let game = Contest::espn_default();
    let ns = [1u64, 10, 100];
    let grid = steps(0.5, 1.0, if fast { 0.25 } else { 0.05 });
    let p = constant(0.75)?;
    let mut cells = Vec::new();
    for split in 1..=5 {
        for &qe in &grid {
            for &ql in &grid {
                cells.push((split, qe, ql));
            }
        }
    }
    let values: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(split, qe, ql)| game.expected_max_score_curve(&p, &split_profile(qe, ql, split)?, &ns))
        .collect::<Result<_>>()?;
    ns.iter()
        .enumerate()
        .map(|(ni, n)| {
            let mut w = csv_writer(Vec::new());
            w.write_record(["split", "q_early", "q_late", "emax"])?;
            for (&(split, qe, ql), v) in cells.iter().zip(&values) {
                w.write_record([split.to_string(), qe.to_string(), ql.to_string(), v[ni].to_string()])?;
            }
            Ok((format!("fig3_n{n}.csv"), finish_csv(w)?))
        })
        .collect()
}

fn fig4(fast: bool) -> Result<Vec<Panel>> {
    let game = Contest::espn_default();
    let p = constant(0.75)?;
    let early = if fast { vec![0.5, 0.75, 1.0] } else { steps(0.5, 1.0, 0.1) };
    let late = if fast { vec![0.75] } else { vec![0.6, 0.75, 0.9] };
    let mut panels = Vec::new();
    for (name, split) in [("fig4a.csv", 3), ("fig4b.csv", 1)] {
        let mut cells = Vec::new();
        for &ql in &late {
            for &rl in &late {
                for &qe in &early {
                    for &re in &early {
                        cells.push((qe, re, ql, rl));
                    }
                }
            }
        }
        let values: Vec<f64> = cells
            .par_iter()
            .map(|&(qe, re, ql, rl)| {
                let q = split_profile(qe, ql, split)?;
                let r = split_profile(re, rl, split)?;
                game.win_probability(&p, &q, &r, 100, 100, TieRule::TiesWin)
            })
            .collect::<Result<_>>()?;
        let mut w = csv_writer(Vec::new());
        w.write_record(["q_early", "r_early", "q_late", "r_late", "winprob"])?;
        for (&(qe, re, ql, rl), v) in cells.iter().zip(&values) {
            w.write_record([qe, re, ql, rl, *v].map(|x| x.to_string()))?;
        }
        panels.push((name.to_string(), finish_csv(w)?));
    }
    Ok(panels)
}

fn fig7() -> Result<Vec<Panel>> {
    let card = RaceCard::belmont();
    let race = card.len() - 1;
    let mut w = csv_writer(Vec::new());
    w.write_record(["lambda", "phi", "horse", "prob"])?;
    for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for phi in [0.125, 0.375, 0.625, 0.875] {
            let q = picksix::tilt(&card, TiltParams::new(lambda, phi)?)?;
            for (i, prob) in q.races()[race].iter().enumerate() {
                w.write_record([lambda.to_string(), phi.to_string(), (i + 1).to_string(), prob.to_string()])?;
            }
        }
    }
    Ok(vec![("fig7.csv".to_string(), finish_csv(w)?)])
}

/// The coarse pick-six search grid: log-symmetric in lambda.
pub const PICKSIX_LAMBDAS: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const PICKSIX_PHIS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Carryover, take and public entries of the pick-six example.
pub const PICKSIX_POOL: (f64, f64, u64) = (500_000.0, 0.05, 25_000);

fn fig8(fast: bool) -> Result<Vec<Panel>> {
    let card = RaceCard::belmont();
    let (lambdas, phis) = if fast {
        (PICKSIX_LAMBDAS.to_vec(), PICKSIX_PHIS.to_vec())
    } else {
        ((0..=12).map(|i| 2f64.powf(i as f64 / 2.0) / 8.0).collect(), steps(0.0, 1.0, 0.125))
    };
    let opps = if fast { vec![0.5, 1.0, 2.0] } else { vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0] };
    let ns: Vec<u64> = if fast { vec![100, 1000, 10_000] } else { vec![10, 100, 1000, 10_000, 100_000] };
    let (carryover, take, k) = PICKSIX_POOL;
    let mut w = csv_writer(Vec::new());
    w.write_record(["lambda_opp", "n", "lambda", "phi", "profit_bound"])?;
    for &opp in &opps {
        for &n in &ns {
            let econ = PoolEconomics::new(carryover, take, n, k)?;
            let best = picksix::optimize_tilt(&card, &econ, opp, &lambdas, &phis)?;
            w.write_record([opp.to_string(), n.to_string(), best.best.lambda.to_string(), best.best.phi.to_string(), best.value.to_string()])?;
        }
    }
    Ok(vec![("fig8.csv".to_string(), finish_csv(w)?)])
}

/// Tournament surfaces: returns `(lambdas, ns, surface)`.
pub fn fig9_data(fast: bool, seed: u64) -> Result<(Vec<f64>, Vec<u64>, tournament::McSurface)> {
    let field = Field::ncaa_2021();
    let p = tournament::elo_to_winmatrix(&field);
    let r = tournament::chalky_opponents(&field);
    let lambdas = steps(0.0, 1.0, 0.1);
    let ns: Vec<u64> = vec![1, 10, 100, 1000];
    let qs = lambdas.iter().map(|&l| tournament::interpolated_strategy(&p, l)).collect::<Result<Vec<_>>>()?;
    let settings = if fast { McSettings { b1: 10, b2: 10, seed } } else { McSettings { b1: 250, b2: 100, seed } };
    let surface = tournament::mc_surface(&field, &p, &qs, Some((&r, 10_000)), &ns, settings)?;
    Ok((lambdas, ns, surface))
}

fn fig9(fast: bool, seed: u64) -> Result<Vec<Panel>> {
    let (lambdas, ns, surface) = fig9_data(fast, seed)?;
    let wp = surface.win_probability.as_ref().expect("opponents given");
    let mut panels = Vec::new();
    for (name, column, table) in [("fig9a.csv", "emax", &surface.expected_max), ("fig9b.csv", "winprob", wp)] {
        let mut w = csv_writer(Vec::new());
        w.write_record(["lambda", "n", column, "stderr"])?;
        for (li, &lambda) in lambdas.iter().enumerate() {
            for (ni, &n) in ns.iter().enumerate() {
                let e = table[li][ni];
                w.write_record([lambda.to_string(), n.to_string(), e.mean.to_string(), e.stderr.to_string()])?;
            }
        }
        panels.push((name.to_string(), finish_csv(w)?));
    }
    Ok(panels)
}

fn figk(fast: bool) -> Result<Vec<Panel>> {
    let grid = steps(0.5, 1.0, if fast { 0.1 } else { 0.05 });
    let ns = [1u64, 10, 100];
    let ks = [1u64, 10, 100, 1000, 10_000, 100_000];
    let table = winprob_square(&Contest::hamming_default(), 0.75, &grid, &grid, &ns, &ks)?;
    ks.iter()
        .enumerate()
        .map(|(ki, k)| {
            let mut w = csv_writer(Vec::new());
            w.write_record(["q", "r", "n", "winprob"])?;
            for (qi, &q) in grid.iter().enumerate() {
                for (ri, &r) in grid.iter().enumerate() {
                    for (ni, n) in ns.iter().enumerate() {
                        w.write_record([q.to_string(), r.to_string(), n.to_string(), table[qi][ri][ni][ki].to_string()])?;
                    }
                }
            }
            Ok((format!("figk_k{k}.csv"), finish_csv(w)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_grids_are_clean() {
        assert_eq!(steps(0.5, 1.0, 0.1), vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert_eq!(steps(0.0, 1.0, 0.1).len(), 11);
        assert_eq!(steps(0.5, 1.0, 0.05)[3], 0.65);
    }

    #[test]
    fn fast_fig1_grid_is_a_subset_with_the_same_argmax() {
        let fast = fig1_data(true).unwrap();
        let full = fig1_data(false).unwrap();
        for ((n, a), (_, b)) in fast.iter().zip(&full) {
            for &(p, _, _) in a.iter().step_by(6) {
                let best = |rows: &[(f64, f64, f64)]| {
                    rows.iter().filter(|r| r.0 == p).fold((0.0, f64::MIN), |acc, r| if r.2 > acc.1 { (r.1, r.2) } else { acc }).0
                };
                assert_eq!(best(a), best(b), "n={n} p={p}");
                assert!(b.iter().any(|r| r.0 == p));
            }
        }
    }

    #[test]
    fn fig7_rows_are_distributions() {
        let panels = fig7().unwrap();
        let text = String::from_utf8(panels[0].1.clone()).unwrap();
        assert_eq!(text.lines().count(), 1 + 5 * 4 * 8);
    }
}
