//! Executes a [`RunConfig`]: one sweep, one surface CSV, one manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ContestKind, ObjectiveKind, RunConfig};
use super::{write_atomic, CliError};
use crate::aep;
use crate::bitstring::{profile_from_partition, Contest, RoundPartition, RoundStructure, ScoringWeights, StrategyProfile, TieRule};
use crate::error::{domain, Result};
use crate::optimizer::{self, Evaluation, Params, SurfacePoint};
use crate::picksix::{self, PoolEconomics, RaceCard, TiltParams};
use crate::tournament::{self, Field, McSettings};

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub manifest: PathBuf,
    pub points: Vec<SurfacePoint>,
}

/// Loads, validates and executes the config at `path`. Relative paths inside
/// the config resolve against its directory.
pub fn run_config_file(path: &Path, seed_override: Option<u64>) -> std::result::Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    run_config(&cfg, &base)
}

pub fn run_config(cfg: &RunConfig, base: &Path) -> std::result::Result<RunOutcome, CliError> {
    let started = Instant::now();
    let output = base.join(&cfg.output);
    let (csv, points, report) = match cfg.contest {
        ContestKind::Aep => {
            let (csv, report) = run_aep(cfg)?;
            (csv, Vec::new(), Some(report))
        }
        _ => {
            let points = match cfg.contest {
                ContestKind::Bitstring => run_bitstring(cfg)?,
                ContestKind::Picksix => run_picksix(cfg, base)?,
                ContestKind::Tournament => run_tournament(cfg, base)?,
                ContestKind::Aep => unreachable!(),
            };
            let mut csv = Vec::new();
            optimizer::write_surface_csv(&mut csv, &cfg.grid, &points)?;
            (csv, points, None)
        }
    };
    write_atomic(&output, &csv)?;
    let manifest = PathBuf::from(format!("{}.manifest", output.display()));
    let mut m = format!("multibracket {}\nseed = {}\n", env!("CARGO_PKG_VERSION"), cfg.seed);
    if !points.is_empty() {
        let best = optimizer::argmax(&points)?;
        m.push_str(&format!("points = {}\nbest = {} -> {}", points.len(), best.params, best.objective));
        if let Some(se) = best.uncertainty {
            m.push_str(&format!(" (stderr {se})"));
        }
        m.push('\n');
    }
    if let Some(report) = report {
        m.push_str(&report);
    }
    m.push_str(&format!("wall_time_s = {:.3}\n--- config ---\n{}", started.elapsed().as_secs_f64(), cfg.source));
    if !m.ends_with('\n') {
        m.push('\n');
    }
    write_atomic(&manifest, m.as_bytes())?;
    Ok(RunOutcome { output, manifest, points })
}

/// Fixed value or grid coordinate for one point.
struct Lookup<'a> {
    cfg: &'a RunConfig,
    params: &'a Params,
}

impl Lookup<'_> {
    fn num(&self, key: &str) -> Result<f64> {
        if let Some(v) = self.params.get(key) {
            return Ok(v);
        }
        self.cfg
            .number(key)
            .map_err(|e| domain(e.to_string()))?
            .ok_or_else(|| domain(format!("missing parameter `{key}`")))
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.cfg.has(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    fn count(&self, key: &str) -> Result<u64> {
        whole(key, self.num(key)?)
    }

    fn count_or(&self, key: &str, default: u64) -> Result<u64> {
        if self.cfg.has(key) {
            self.count(key)
        } else {
            Ok(default)
        }
    }
}

fn whole(key: &str, v: f64) -> Result<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
        Ok(v as u64)
    } else {
        Err(domain(format!("`{key}` = {v} must be a non-negative integer")))
    }
}

fn require(cfg: &RunConfig, keys: &[&str]) -> std::result::Result<(), CliError> {
    for key in keys {
        if !cfg.has(key) {
            return Err(cfg.error(key, "missing required field").into());
        }
    }
    Ok(())
}

/// Checks every fixed numeric key up front so bad values report their line.
fn check_numbers(cfg: &RunConfig, keys: &[&str]) -> std::result::Result<(), CliError> {
    for key in keys {
        cfg.number(key)?;
    }
    Ok(())
}

const BITSTRING_NUMBERS: &[&str] = &[
    "p", "q", "r", "n", "k", "split", "trials", "p_early", "p_late", "q_early", "q_late", "r_early", "r_late",
];

fn run_bitstring(cfg: &RunConfig) -> std::result::Result<Vec<SurfacePoint>, CliError> {
    let mut known = BITSTRING_NUMBERS.to_vec();
    known.extend(["rounds", "scoring", "ties", "method"]);
    cfg.check_keys(&known)?;
    check_numbers(cfg, BITSTRING_NUMBERS)?;
    let structure = match cfg.text("rounds") {
        None => RoundStructure::default(),
        Some(list) => {
            let bits = list
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| cfg.error("rounds", "expected a comma-separated list of bit counts"))?;
            RoundStructure::new(bits).map_err(|e| cfg.error("rounds", e.to_string()))?
        }
    };
    let rounds = structure.rounds();
    let weights = match cfg.text("scoring").unwrap_or("hamming") {
        "hamming" => ScoringWeights::hamming(rounds),
        "espn" => ScoringWeights::espn(rounds),
        other => return Err(cfg.error("scoring", format!("unknown scoring `{other}` (hamming, espn)")).into()),
    };
    let ties = match cfg.text("ties").unwrap_or("win") {
        "win" => TieRule::TiesWin,
        "lose" => TieRule::TiesLose,
        other => return Err(cfg.error("ties", format!("unknown tie rule `{other}` (win, lose)")).into()),
    };
    let mc = match cfg.text("method").unwrap_or("exact") {
        "exact" => false,
        "mc" => true,
        other => return Err(cfg.error("method", format!("unknown method `{other}` (exact, mc)")).into()),
    };
    let game = Contest::new(structure, weights)?;
    let winprob = cfg.objective == ObjectiveKind::Winprob;
    let mut sides = vec!["p", "q"];
    if winprob {
        sides.push("r");
        require(cfg, &["k"])?;
    }
    require(cfg, &["n"])?;
    if mc {
        require(cfg, &["trials"])?;
    }
    for side in &sides {
        if !cfg.has(side) {
            let (early, late) = (format!("{side}_early"), format!("{side}_late"));
            if !(cfg.has(&early) && cfg.has(&late) && cfg.has("split")) {
                return Err(cfg.error(side, format!("missing required field (or `{early}`, `{late}` and `split`)")).into());
            }
        }
    }
    let profile = |at: &Lookup, side: &str| -> Result<StrategyProfile> {
        if cfg.has(side) {
            StrategyProfile::constant(at.num(side)?, rounds)
        } else {
            let split = at.count("split")? as usize;
            let part = RoundPartition::new(split, rounds)?;
            profile_from_partition(at.num(&format!("{side}_early"))?, at.num(&format!("{side}_late"))?, part, rounds)
        }
    };
    let points = optimizer::sweep(&cfg.grid, cfg.seed, |params, seed| {
        let at = Lookup { cfg, params };
        let p = profile(&at, "p")?;
        let q = profile(&at, "q")?;
        let n = at.count("n")?;
        if winprob {
            let r = profile(&at, "r")?;
            let k = at.count("k")?;
            if mc {
                let sim = game.simulate(&p, &q, &r, n, k, at.count("trials")?, seed)?;
                let est = sim.win_probability.ok_or_else(|| domain("win probability needs k >= 1"))?;
                Ok(Evaluation::estimate(est.mean, est.stderr))
            } else {
                Ok(Evaluation::exact(game.win_probability(&p, &q, &r, n, k, ties)?))
            }
        } else if mc {
            let sim = game.simulate(&p, &q, &q, n, 0, at.count("trials")?, seed)?;
            Ok(Evaluation::estimate(sim.expected_max.mean, sim.expected_max.stderr))
        } else {
            Ok(Evaluation::exact(game.expected_max_score(&p, &q, n)?))
        }
    })?;
    Ok(points)
}

const PICKSIX_NUMBERS: &[&str] = &["carryover", "take", "price", "n", "k", "lambda", "phi", "lambda_opp", "trials", "cap"];

fn run_picksix(cfg: &RunConfig, base: &Path) -> std::result::Result<Vec<SurfacePoint>, CliError> {
    let mut known = PICKSIX_NUMBERS.to_vec();
    known.extend(["card", "method"]);
    cfg.check_keys(&known)?;
    check_numbers(cfg, PICKSIX_NUMBERS)?;
    require(cfg, &["carryover", "take", "n", "k", "lambda", "phi", "lambda_opp"])?;
    let card = match cfg.text("card").unwrap_or("bundled") {
        "bundled" => RaceCard::belmont(),
        path => RaceCard::from_csv_path(&base.join(path))?,
    };
    let mc = match cfg.text("method").unwrap_or("bound") {
        "bound" => false,
        "mc" => true,
        other => return Err(cfg.error("method", format!("unknown method `{other}` (bound, mc)")).into()),
    };
    if mc {
        require(cfg, &["trials"])?;
    }
    let points = optimizer::sweep(&cfg.grid, cfg.seed, |params, seed| {
        let at = Lookup { cfg, params };
        let econ = PoolEconomics::with_price(
            at.num("carryover")?,
            at.num("take")?,
            at.num_or("price", 1.0)?,
            at.count("n")?,
            at.count("k")?,
        )?;
        let ours = picksix::tilt(&card, TiltParams::new(at.num("lambda")?, at.num("phi")?)?)?;
        let public = picksix::opponent_strategy(&card, at.num("lambda_opp")?)?;
        if mc {
            let est = picksix::expected_profit_monte_carlo(&card, &ours, &public, &econ, at.count("trials")?, seed)?;
            Ok(Evaluation::estimate(est.mean, est.stderr))
        } else {
            let cap = at.count_or("cap", picksix::DEFAULT_OUTCOME_CAP)?;
            Ok(Evaluation::exact(picksix::expected_profit_lower_bound_capped(&card, &ours, &public, &econ, cap)?))
        }
    })?;
    Ok(points)
}

const TOURNAMENT_NUMBERS: &[&str] = &["lambda", "n", "k", "b1", "b2", "lambda_opp"];

fn run_tournament(cfg: &RunConfig, base: &Path) -> std::result::Result<Vec<SurfacePoint>, CliError> {
    let mut known = TOURNAMENT_NUMBERS.to_vec();
    known.extend(["field", "opponents"]);
    cfg.check_keys(&known)?;
    check_numbers(cfg, TOURNAMENT_NUMBERS)?;
    require(cfg, &["lambda", "n"])?;
    let field = match cfg.text("field").unwrap_or("bundled") {
        "bundled" => Field::ncaa_2021(),
        path => Field::from_csv_path(&base.join(path))?,
    };
    let p = tournament::elo_to_winmatrix(&field);
    let winprob = cfg.objective == ObjectiveKind::Winprob;
    let chalky = match cfg.text("opponents").unwrap_or("chalky") {
        "chalky" => true,
        "interpolated" => false,
        other => return Err(cfg.error("opponents", format!("unknown opponents `{other}` (chalky, interpolated)")).into()),
    };
    if winprob {
        require(cfg, &["k"])?;
        if !chalky {
            require(cfg, &["lambda_opp"])?;
        }
    }
    let chalky_r = tournament::chalky_opponents(&field);
    let points = optimizer::sweep(&cfg.grid, cfg.seed, |params, seed| {
        let at = Lookup { cfg, params };
        let settings = McSettings { b1: at.count_or("b1", 250)?, b2: at.count_or("b2", 100)?, seed };
        let q = tournament::interpolated_strategy(&p, at.num("lambda")?)?;
        let n = at.count("n")?;
        let est = if winprob {
            let interpolated;
            let r = if chalky {
                &chalky_r
            } else {
                interpolated = tournament::interpolated_strategy(&p, at.num("lambda_opp")?)?;
                &interpolated
            };
            tournament::mc_win_probability(&field, &p, &q, r, n, at.count("k")?, settings)?
        } else {
            tournament::mc_expected_max_score(&field, &p, &q, n, settings)?
        };
        Ok(Evaluation::estimate(est.mean, est.stderr))
    })?;
    Ok(points)
}

fn run_aep(cfg: &RunConfig) -> std::result::Result<(Vec<u8>, String), CliError> {
    cfg.check_keys(&["p", "epsilon", "lengths"])?;
    check_numbers(cfg, &["p", "epsilon"])?;
    require(cfg, &["p", "epsilon", "lengths"])?;
    let p = cfg.number("p")?.expect("required");
    let eps = cfg.number("epsilon")?.expect("required");
    let lengths = cfg
        .text("lengths")
        .expect("required")
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| cfg.error("lengths", "expected a comma-separated list of string lengths"))?;
    let report = aep::verify_theorem1(p, &lengths, eps)?;
    Ok((aep_report_csv(&report)?, report.render()))
}

/// One row per checked bound.
pub(crate) fn aep_report_csv(report: &aep::Theorem1Report) -> Result<Vec<u8>> {
    let mut w = super::csv_writer(Vec::new());
    w.write_record(["m", "entropy", "chalky_count", "typical_count", "rare_count", "typical_mass", "check", "lhs", "rhs", "status"])?;
    for l in &report.lengths {
        let p = &l.partition;
        for c in &l.checks {
            w.write_record([
                p.m.to_string(),
                p.entropy.to_string(),
                p.chalky_count.to_string(),
                p.typical_count.to_string(),
                p.rare_count.to_string(),
                p.typical_mass.to_string(),
                c.name.to_string(),
                c.lhs.to_string(),
                c.rhs.to_string(),
                if c.holds { "pass" } else { "fail" }.to_string(),
            ])?;
        }
    }
    super::finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(text: &str) -> std::result::Result<(tempfile::TempDir, RunOutcome), CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, text).unwrap();
        let out = run_config_file(&path, None)?;
        Ok((dir, out))
    }

    #[test]
    fn chalk_wins_a_single_guess() {
        let (_dir, out) = run_text(
            "contest = bitstring\nobjective = emax\noutput = s.csv\nn = 1\np = 0.75\naxis = q: 0.5..1 step 0.1\n",
        )
        .unwrap();
        let best = optimizer::argmax(&out.points).unwrap();
        assert_eq!(best.params.get("q"), Some(1.0));
        let text = std::fs::read_to_string(&out.output).unwrap();
        assert!(text.starts_with("q,objective,stderr\n"));
        let (_, again) = optimizer::read_surface_csv(text.as_bytes()).unwrap();
        assert_eq!(again, out.points);
        let manifest = std::fs::read_to_string(&out.manifest).unwrap();
        assert!(manifest.contains("best = q=1 ->"));
    }

    #[test]
    fn aep_report_passes() {
        let (_dir, out) = run_text("contest = aep\nobjective = verify\noutput = aep.csv\np = 0.75\nepsilon = 0.1\nlengths = 4, 8, 12, 16, 20\n").unwrap();
        let text = std::fs::read_to_string(&out.output).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",pass")));
        assert_eq!(text.lines().count(), 1 + 15 + text.matches("(1-eps)").count());
    }

    #[test]
    fn config_problems_exit_two() {
        let e = run_text("objective = emax\noutput = s.csv\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("contest"));
        let e = run_text("contest = bitstring\nobjective = emax\noutput = s.csv\np = 0.75\naxis = q: 1\n").unwrap_err();
        assert!(e.to_string().contains("`n`"));
        let e = run_text("contest = bitstring\nobjective = emax\noutput = s.csv\nn = 1\np = 0.75\nbogus = 1\naxis = q: 1\n").unwrap_err();
        assert!(e.to_string().contains("line 6"));
        let e = run_text("contest = bitstring\nobjective = emax\noutput = s.csv\nn = 1\np = 1.5\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("q=1"));
    }

    #[test]
    fn resource_caps_exit_three() {
        let e = run_text(
            "contest = picksix\nobjective = profit\noutput = s.csv\ncarryover = 0\ntake = 0.1\nn = 1\nk = 1\nphi = 0.5\nlambda_opp = 1\ncap = 10\naxis = lambda: 1\n",
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
