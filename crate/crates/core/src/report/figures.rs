//! Figures rendered from a result bundle.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::bundle::{ResultBundle, Source};
use super::svg::{Axis, Plot};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// `E_j` against `L`.
    Fig1a,
    /// `E_j L^2` against `L` with the empty-box asymptotes.
    Fig1b,
    /// Mapped eigenvalues in the complex plane.
    Fig1c,
    /// Anti-Stokes graphs.
    Fig2a,
    /// Complex scaling branches and their conjugates.
    Fig3a,
    /// Shooting eigenvalues over the scaling branches.
    SupplComparison,
}

impl Figure {
    pub const ALL: [Figure; 6] =
        [Figure::Fig1a, Figure::Fig1b, Figure::Fig1c, Figure::Fig2a, Figure::Fig3a, Figure::SupplComparison];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig1c => "fig1c",
            Figure::Fig2a => "fig2a",
            Figure::Fig3a => "fig3a",
            Figure::SupplComparison => "suppl-comparison",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown figure `{s}`")))
    }
}

/// Comma-separated figure names; `all` selects every figure.
pub fn parse_figure_list(s: &str) -> Result<Vec<Figure>> {
    if s.trim() == "all" {
        return Ok(Figure::ALL.to_vec());
    }
    s.split(',').map(str::parse).collect()
}

fn energy_vs_l(bundle: &ResultBundle, times_l2: bool) -> Result<Plot> {
    if bundle.branch_tables.is_empty() {
        return Err(Error::MissingTaskOutput("branches".into()));
    }
    let (title, ylabel) = if times_l2 { ("E_j L^2 against L", "Re E L^2") } else { ("E_j against L", "Re E") };
    let mut plot = Plot::new(title, Axis::log("L"), if times_l2 { Axis::linear(ylabel) } else { Axis::log(ylabel) });
    let mut max_modes = 0;
    for (t, entry) in bundle.branch_tables.iter().enumerate() {
        let table = &entry.table;
        max_modes = max_modes.max(table.branches.len());
        for (b, branch) in table.branches.iter().enumerate() {
            let pts = table
                .l_grid
                .iter()
                .zip(branch)
                .map(|(&l, e)| (l, if times_l2 { e.re * l * l } else { e.re }))
                .collect();
            plot.curve(&format!("n={} branch {}", entry.params.n, b + 1), pts, t);
        }
    }
    if times_l2 {
        let hbar = bundle.branch_tables[0].params.hbar;
        for j in 1..=max_modes {
            let v = PI * PI * hbar * hbar * (j * j) as f64 / 4.0;
            plot.hlines.push((v, format!("pi^2 j^2/4, j={j}")));
        }
    }
    Ok(plot)
}

fn mapped_plane(bundle: &ResultBundle) -> Result<Plot> {
    let mut plot = Plot::new("E_j / (g L^(2n+1))", Axis::linear("Re E_mapped"), Axis::linear("Im E_mapped"));
    let mut any = false;
    let mut ls: Vec<f64> = bundle.spectrum_records(Source::Shooting).map(|r| r.params.l).collect();
    ls.dedup();
    for (k, &l) in ls.iter().enumerate() {
        let pts: Vec<(f64, f64)> = bundle
            .spectrum_records(Source::Shooting)
            .filter(|r| r.params.l == l)
            .map(|r| (r.record.e_mapped.re, r.record.e_mapped.im))
            .collect();
        any |= !pts.is_empty();
        plot.dots(&format!("L={l}"), pts, k);
    }
    for entry in &bundle.branch_tables {
        for (b, branch) in entry.table.mapped(&entry.params).iter().enumerate() {
            plot.dots(&format!("n={} branch {}", entry.params.n, b + 1), branch.iter().map(|e| (e.re, e.im)).collect(), b);
            any = true;
        }
    }
    if !any {
        return Err(Error::MissingTaskOutput("spectrum".into()));
    }
    Ok(plot)
}

fn stokes_family(bundle: &ResultBundle) -> Result<Plot> {
    if bundle.graphs.is_empty() {
        return Err(Error::MissingTaskOutput("stokes_graph".into()));
    }
    let mut plot = Plot::new("anti-Stokes graphs", Axis::linear("Re y"), Axis::linear("Im y"));
    plot.curve("box", vec![(-1.0, 0.0), (1.0, 0.0)], 7);
    for (k, g) in bundle.graphs.iter().enumerate() {
        for line in &g.lines {
            let label = format!("n={} E={} tp{} dir{}", g.n, g.e_mapped, line.origin, line.direction);
            plot.curve(&label, line.polyline.iter().map(|y| (y.re, y.im)).collect(), k);
        }
    }
    Ok(plot)
}

fn scaling_curves(bundle: &ResultBundle, title: &str) -> Result<Plot> {
    if bundle.branches.is_empty() {
        return Err(Error::MissingTaskOutput("scaling_graph".into()));
    }
    let mut plot = Plot::new(title, Axis::linear("Re E_mapped"), Axis::linear("Im E_mapped"));
    for b in &bundle.branches {
        let c = b.n as usize;
        plot.curve(&format!("n={}", b.n), b.samples.iter().map(|s| (s.1.re, s.1.im)).collect(), c);
        plot.curve(&format!("n={} conjugate", b.n), b.conjugate_samples().iter().map(|s| (s.1.re, s.1.im)).collect(), c);
    }
    Ok(plot)
}

fn comparison(bundle: &ResultBundle) -> Result<Plot> {
    let mut plot = scaling_curves(bundle, "shooting eigenvalues on the scaling graph")?;
    let mut any = false;
    for b in &bundle.branches {
        let pts: Vec<(f64, f64)> = bundle
            .spectrum_records(Source::Shooting)
            .filter(|r| r.params.n == b.n)
            .map(|r| (r.record.e_mapped.re, r.record.e_mapped.im))
            .chain(
                bundle
                    .branch_tables
                    .iter()
                    .filter(|t| t.params.n == b.n)
                    .flat_map(|t| t.table.mapped(&t.params).into_iter().flatten())
                    .map(|e| (e.re, e.im)),
            )
            .collect();
        any |= !pts.is_empty();
        plot.dots(&format!("n={} shooting", b.n), pts, b.n as usize);
    }
    if !any {
        return Err(Error::MissingTaskOutput("spectrum".into()));
    }
    Ok(plot)
}

pub fn render_figure(bundle: &ResultBundle, which: Figure) -> Result<String> {
    let plot = match which {
        Figure::Fig1a => energy_vs_l(bundle, false)?,
        Figure::Fig1b => energy_vs_l(bundle, true)?,
        Figure::Fig1c => mapped_plane(bundle)?,
        Figure::Fig2a => stokes_family(bundle)?,
        Figure::Fig3a => scaling_curves(bundle, "complex scaling branches")?,
        Figure::SupplComparison => comparison(bundle)?,
    };
    Ok(plot.render())
}

/// Writes `<name>.svg` into `dir` for each figure.
pub fn emit_figures(bundle: &ResultBundle, which: &[Figure], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(which.len());
    for &f in which {
        let svg = render_figure(bundle, f)?;
        let path = dir.join(format!("{}.svg", f.name()));
        std::fs::write(&path, svg)?;
        out.push(path);
    }
    Ok(out)
}
