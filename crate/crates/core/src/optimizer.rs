//! Grid search over named strategy parameters.
//!
//! Points are enumerated lexicographically over the axes in declaration order
//! (the last axis varies fastest). Each point gets a seed derived from the
//! root seed and its position, so Monte-Carlo objectives reproduce exactly on
//! rerun no matter how the points are scheduled across threads.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::rng::derive_seed;

/// One named parameter axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// An ordered set of axes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an axis. Names must be unique and values non-empty.
    pub fn axis(mut self, name: impl Into<String>, values: impl Into<Vec<f64>>) -> Result<Self> {
        self.push(name, values)?;
        Ok(self)
    }

    pub fn push(&mut self, name: impl Into<String>, values: impl Into<Vec<f64>>) -> Result<()> {
        let name = name.into();
        let values = values.into();
        if values.is_empty() {
            return Err(domain(format!("axis `{name}` has no values")));
        }
        if self.axes.iter().any(|a| a.name == name) {
            return Err(domain(format!("duplicate axis `{name}`")));
        }
        self.axes.push(Axis { name, values });
        Ok(())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the point at lexicographic position `index`.
    pub fn point(&self, mut index: usize) -> Params {
        let mut values = vec![0.0; self.axes.len()];
        for (slot, axis) in values.iter_mut().zip(&self.axes).rev() {
            *slot = axis.values[index % axis.values.len()];
            index /= axis.values.len();
        }
        Params { entries: self.axes.iter().map(|a| a.name.clone()).zip(values).collect() }
    }
}

/// Axis values for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    entries: Vec<(String, f64)>,
}

impl Params {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, v)| v).collect()
    }
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(n, v)| format!("{n}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// An objective value, with a standard error for Monte-Carlo objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub uncertainty: Option<f64>,
}

impl Evaluation {
    pub fn exact(objective: f64) -> Self {
        Evaluation { objective, uncertainty: None }
    }

    pub fn estimate(objective: f64, stderr: f64) -> Self {
        Evaluation { objective, uncertainty: Some(stderr) }
    }
}

/// An evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub params: Params,
    pub objective: f64,
    pub uncertainty: Option<f64>,
}

/// Evaluates `objective(params, seed)` at every grid point.
///
/// Returns the points in lexicographic order. The first failing point (in
/// that order) aborts the sweep and is named in the error.
pub fn sweep<F>(grid: &GridSpec, root_seed: u64, objective: F) -> Result<Vec<SurfacePoint>>
where
    F: Fn(&Params, u64) -> Result<Evaluation> + Sync,
{
    if grid.axes.is_empty() {
        return Err(domain("grid has no axes"));
    }
    let results: Vec<Result<SurfacePoint>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let params = grid.point(i);
            let seed = derive_seed(root_seed, &[i as u64]);
            let eval = objective(&params, seed).map_err(|e| Error::AtPoint { at: params.to_string(), source: Box::new(e) })?;
            if !eval.objective.is_finite() {
                return Err(domain(format!("non-finite objective {} at {params}", eval.objective)));
            }
            Ok(SurfacePoint { params, objective: eval.objective, uncertainty: eval.uncertainty })
        })
        .collect();
    results.into_iter().collect()
}

/// The point with the largest objective; ties go to the earliest point.
pub fn argmax(points: &[SurfacePoint]) -> Result<&SurfacePoint> {
    let mut best: Option<&SurfacePoint> = None;
    for p in points {
        if best.is_none_or(|b| p.objective > b.objective) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| domain("argmax of an empty surface"))
}

/// Like [`argmax`], but also reports (and logs) when the winner does not beat
/// the runner-up by `sigmas` combined standard errors.
pub fn argmax_with_margin(points: &[SurfacePoint], sigmas: f64) -> Result<(&SurfacePoint, Option<String>)> {
    let best = argmax(points)?;
    let runner_up = points
        .iter()
        .filter(|p| !std::ptr::eq(*p, best))
        .max_by(|a, b| a.objective.total_cmp(&b.objective));
    let warning = runner_up.and_then(|r| {
        let se = best.uncertainty.unwrap_or(0.0).hypot(r.uncertainty.unwrap_or(0.0));
        (best.objective - r.objective < sigmas * se).then(|| {
            format!(
                "best point ({}) beats runner-up ({}) by {:.3e}, less than {sigmas} standard errors ({:.3e})",
                best.params,
                r.params,
                best.objective - r.objective,
                sigmas * se
            )
        })
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok((best, warning))
}

/// Writes the surface as CSV: one column per axis, then `objective`, `stderr`.
/// Floats use the shortest representation that round-trips.
pub fn write_surface_csv<W: Write>(out: W, grid: &GridSpec, points: &[SurfacePoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<&str> = grid.names();
    header.extend(["objective", "stderr"]);
    w.write_record(&header)?;
    for p in points {
        let mut row: Vec<String> = p.params.values().iter().map(|v| v.to_string()).collect();
        row.push(p.objective.to_string());
        row.push(p.uncertainty.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<surface>".into(), source: e })?;
    Ok(())
}

/// Reads a surface written by [`write_surface_csv`].
pub fn read_surface_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<SurfacePoint>)> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 || header[header.len() - 2] != "objective" || header[header.len() - 1] != "stderr" {
        return Err(domain("surface csv must end with `objective,stderr` columns"));
    }
    let axes = header[..header.len() - 2].to_vec();
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| domain(format!("bad number `{}` in column {}", &rec[i], header[i])))
        };
        let values = (0..axes.len()).map(num).collect::<Result<Vec<f64>>>()?;
        let objective = num(axes.len())?;
        let uncertainty = if rec[axes.len() + 1].is_empty() { None } else { Some(num(axes.len() + 1)?) };
        points.push(SurfacePoint {
            params: Params { entries: axes.iter().cloned().zip(values).collect() },
            objective,
            uncertainty,
        });
    }
    Ok((axes, points))
}
