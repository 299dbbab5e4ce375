//! Stokes graphs of `Q(y) = E + (-1)^n i y^(2n+1)`: the anti-Stokes lines
//! (where `sqrt(Q) dy` is real) leaving each turning point, and the
//! break-up test that asks whether the box end `y = -1` lies on one of them.
//!
//! Lines are traced in arc length with the state `(y, w)`, `w = sqrt(Q(y))`,
//! moving along `dy/ds = conj(w) / |w|`. Carrying `w` keeps its sheet
//! continuous without any branch bookkeeping.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    action_integral, brent, Integrator, RkOptions, StepAction, ComplexFunctionQ, ComplexPath, TOL_TP,
};

type C = Complex64;

/// Escape radius in the `y` plane.
pub const R_MAX: f64 = 8.0;
/// Arc-length budget per line.
pub const ARC_BUDGET: f64 = 50.0;
/// Distance at which a line counts as passing through `y = +-1`.
pub const BOUNDARY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub index: usize,
    pub alpha: C,
}

/// Turning points `y^(2n+1) = i (-1)^n E`, sorted by argument.
pub fn turning_points(e_mapped: C, n: u32) -> Result<Vec<TurningPoint>> {
    if e_mapped.norm() < 1e-12 {
        return Err(Error::DegenerateEnergy(e_mapped.norm()));
    }
    Ok(ComplexFunctionQ::new(e_mapped, n)
        .roots()
        .into_iter()
        .enumerate()
        .map(|(index, alpha)| TurningPoint { index, alpha })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminus {
    TurningPoint(usize),
    Escaped,
    ArcBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiStokesLine {
    pub origin: usize,
    pub direction: usize,
    /// Starts at the turning point itself.
    pub polyline: Vec<C>,
    pub terminus: Terminus,
    /// Box ends `-1.0` / `1.0` the line passes through, in order of passage.
    pub boundary_hits: Vec<f64>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesGraph {
    pub e_mapped: C,
    pub n: u32,
    pub turning_points: Vec<TurningPoint>,
    pub lines: Vec<AntiStokesLine>,
}

/// Canonical description of a graph: where each turning point's three lines
/// end (`topology`) and which box ends lie on lines (`boundary`). The
/// topology depends on `arg E` only; the boundary part also on `|E|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSignature {
    pub topology: String,
    pub boundary: String,
}

impl fmt::Display for GraphSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.topology, self.boundary)
    }
}

/// Seed radius `1e-4 |E|^(1/(2n+1))`.
pub fn seed_radius(e_mapped: C, n: u32) -> f64 {
    1e-4 * e_mapped.norm().powf(1.0 / (2 * n + 1) as f64)
}

/// Local directions `theta_k = (2 pi k - arg Q'(alpha)) / 3` of the three lines.
pub fn seed_directions(alpha: C, q: &ComplexFunctionQ) -> [f64; 3] {
    let a = q.derivative(alpha).arg();
    [0, 1, 2].map(|k| (2.0 * PI * k as f64 - a) / 3.0)
}

fn closest_on_segment(p: C, a: C, b: C) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
    (a + d * t - p).norm()
}

/// Minimum of `dist` over `[a, b]`: dense scan, then golden-section refinement.
fn closest_approach<F: Fn(f64) -> f64>(dist: F, a: f64, b: f64) -> f64 {
    let m = 64;
    let mut best = (a, dist(a));
    for k in 1..=m {
        let s = a + (b - a) * k as f64 / m as f64;
        let d = dist(s);
        if d < best.1 {
            best = (s, d);
        }
    }
    let h = (b - a) / m as f64;
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if dist(x1) < dist(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.1.min(dist(0.5 * (lo + hi)))
}

/// Trace one anti-Stokes line from `tp` along local direction `direction`.
pub fn trace_anti_stokes(
    tp: &TurningPoint,
    direction: usize,
    q: &ComplexFunctionQ,
    others: &[TurningPoint],
) -> Result<AntiStokesLine> {
    let rho = seed_radius(q.energy, q.n);
    let capture = 2.0 * rho;
    let theta = seed_directions(tp.alpha, q)[direction % 3];
    let dir = C::from_polar(1.0, theta);
    let y0 = tp.alpha + dir * rho;
    // pick the root so that conj(w)/|w| points outward
    let mut w0 = q.eval(y0).sqrt();
    if (w0.conj() * dir.conj()).re < 0.0 {
        w0 = -w0;
    }
    let mut polyline = vec![tp.alpha, y0];
    let mut hits: Vec<f64> = Vec::new();
    for b in [-1.0, 1.0] {
        if (tp.alpha - b).norm() <= BOUNDARY_TOL.max(rho) {
            hits.push(b);
        }
    }
    let mut terminus = Terminus::ArcBudget;
    let qd = *q;
    let rhs = move |_s: f64, y: &[C; 2]| {
        let v = y[1].conj() / y[1].norm();
        [v, qd.derivative(y[0]) / (2.0 * y[1]) * v]
    };
    let opts = RkOptions { rtol: 1e-10, atol: 1e-12, h_max: 0.02, record: false, ..Default::default() };
    let mut last = y0;
    let res = Integrator::new(opts).integrate_with(rhs, 0.0, ARC_BUDGET, [y0, w0], |view| {
        let y = view.y[0];
        for b in [-1.0, 1.0] {
            let p = C::new(b, 0.0);
            if closest_on_segment(p, last, y) <= 0.05 && hits.last() != Some(&b) {
                let seg = view.segment;
                let dist = |s: f64| (seg.eval(s)[0] - p).norm();
                if closest_approach(dist, seg.t0, seg.t1()) <= BOUNDARY_TOL {
                    hits.push(b);
                }
            }
        }
        polyline.push(y);
        last = y;
        if let Some(o) = others.iter().find(|o| o.index != tp.index && (o.alpha - y).norm() <= capture) {
            terminus = Terminus::TurningPoint(o.index);
            return StepAction::Stop;
        }
        if y.norm() > R_MAX {
            terminus = Terminus::Escaped;
            return StepAction::Stop;
        }
        StepAction::Continue
    });
    match res {
        Ok(_) => {}
        Err(Error::StepUnderflow { .. }) | Err(Error::RhsSingular { .. }) => return Err(Error::TracingStalled(last)),
        Err(e) => return Err(e),
    }
    if let Terminus::TurningPoint(k) = terminus {
        polyline.push(others.iter().find(|o| o.index == k).expect("captured point").alpha);
    }
    let length = polyline.windows(2).map(|p| (p[1] - p[0]).norm()).sum();
    Ok(AntiStokesLine { origin: tp.index, direction: direction % 3, polyline, terminus, boundary_hits: hits, length })
}

/// All `3(2n+1)` anti-Stokes lines.
pub fn build_graph(e_mapped: C, n: u32) -> Result<StokesGraph> {
    let tps = turning_points(e_mapped, n)?;
    let q = ComplexFunctionQ::new(e_mapped, n);
    let lines: Vec<AntiStokesLine> = tps
        .par_iter()
        .flat_map_iter(|tp| (0..3).map(move |d| (tp, d)))
        .map(|(tp, d)| trace_anti_stokes(tp, d, &q, &tps))
        .collect::<Result<_>>()?;
    Ok(StokesGraph { e_mapped, n, turning_points: tps, lines })
}

impl StokesGraph {
    pub fn signature(&self) -> GraphSignature {
        let mut per_tp: Vec<String> = Vec::new();
        for tp in &self.turning_points {
            let mut ends: Vec<String> = self
                .lines
                .iter()
                .filter(|l| l.origin == tp.index)
                .map(|l| match l.terminus {
                    Terminus::TurningPoint(k) => format!("t{k}"),
                    Terminus::Escaped => "inf".into(),
                    Terminus::ArcBudget => "arc".into(),
                })
                .collect();
            ends.sort();
            per_tp.push(format!("{}:{}", tp.index, ends.join(",")));
        }
        let mut hits: Vec<String> = self
            .lines
            .iter()
            .flat_map(|l| l.boundary_hits.iter().map(move |b| format!("{}@{}", if *b < 0.0 { "-1" } else { "+1" }, l.origin)))
            .collect();
        hits.sort();
        hits.dedup();
        GraphSignature { topology: per_tp.join(";"), boundary: hits.join(",") }
    }

    /// Every line point mirrored by `y -> -conj(y)`.
    pub fn mirrored_points(&self) -> Vec<Vec<C>> {
        self.lines.iter().map(|l| l.polyline.iter().map(|y| -y.conj()).collect()).collect()
    }

    pub fn polylines(&self) -> Vec<Vec<C>> {
        self.lines.iter().map(|l| l.polyline.clone()).collect()
    }

    /// Largest `|Im int sqrt(Q)| / length` over all lines.
    pub fn horizontality(&self) -> Result<f64> {
        let q = ComplexFunctionQ::new(self.e_mapped, self.n);
        let mut worst = 0.0f64;
        for l in &self.lines {
            let v = line_action(l, &q)?;
            worst = worst.max(v.im.abs() / l.length.max(1e-300));
        }
        Ok(worst)
    }
}

/// `int sqrt(Q) dy` along a traced line, thinned to keep quadrature cheap.
pub fn line_action(line: &AntiStokesLine, q: &ComplexFunctionQ) -> Result<C> {
    let pts = thin(&line.polyline, 0.05);
    let path = ComplexPath::new(pts)?;
    action_integral(&path, q)
}

fn thin(pts: &[C], min_step: f64) -> Vec<C> {
    let mut out = vec![pts[0]];
    for (k, &p) in pts.iter().enumerate().skip(1) {
        let lastp = *out.last().expect("non-empty");
        if (p - lastp).norm() >= min_step || k == pts.len() - 1 {
            if (p - lastp).norm() > 0.0 {
                out.push(p);
            }
        }
    }
    out
}

/// Symmetric Hausdorff distance between two sets of polylines.
pub fn hausdorff(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    let one_way = |from: &[Vec<C>], to: &[Vec<C>]| {
        let mut worst = 0.0f64;
        for p in from.iter().flatten() {
            let mut best = f64::INFINITY;
            for l in to {
                if l.len() == 1 {
                    best = best.min((l[0] - p).norm());
                }
                for s in l.windows(2) {
                    best = best.min(closest_on_segment(*p, s[0], s[1]));
                }
            }
            worst = worst.max(best);
        }
        worst
    };
    one_way(a, b).max(one_way(b, a))
}

/// The turning point whose anti-Stokes line reaches `y = -1` at the break-up:
/// of the mirror pair `{alpha, -conj(alpha)}` closest to the real axis in the
/// half-plane of `(-1)^n`, the member with `Re alpha <= 0`. For `n = 0` this
/// is the single turning point `iE`.
pub fn relevant_turning_point(e_real: f64, n: u32) -> Result<C> {
    let tps = turning_points(C::new(e_real, 0.0), n)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    tps.iter()
        .map(|t| t.alpha)
        .filter(|a| a.im * sign > 0.0 && a.re <= 1e-12 * a.norm())
        .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
        .ok_or(Error::TurningPairUnavailable(C::new(e_real, 0.0)))
}

/// `Im int_{alpha}^{-1} sqrt(Q) dy` along the straight segment, with the
/// principal root at `y = -1`. Its zero in `E` is the break-up energy `E_c`.
pub fn boundary_on_graph_residual(e_real: f64, n: u32) -> Result<f64> {
    if !(e_real > 0.0) {
        return Err(Error::DegenerateEnergy(e_real));
    }
    let alpha = relevant_turning_point(e_real, n)?;
    let q = ComplexFunctionQ::new(C::new(e_real, 0.0), n);
    let v = action_integral(&ComplexPath::segment(C::new(-1.0, 0.0), alpha)?, &q)?;
    Ok(-v.im)
}

/// Root of [`boundary_on_graph_residual`] bracketed on `[lo, hi]`.
pub fn break_up_energy(n: u32, lo: f64, hi: f64) -> Result<f64> {
    brent(|e| boundary_on_graph_residual(e, n).unwrap_or(f64::NAN), lo, hi, 1e-13)
}

/// Scan `[lo, hi]` on a grid of `points` for the first sign change and refine.
pub fn find_break_up(n: u32, lo: f64, hi: f64, points: usize) -> Result<f64> {
    let xs: Vec<f64> = (0..points).map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| boundary_on_graph_residual(x, n)).collect::<Result<_>>()?;
    for k in 1..points {
        if vals[k - 1].signum() != vals[k].signum() {
            return break_up_energy(n, xs[k - 1], xs[k]);
        }
    }
    Err(Error::NotMonotone(format!("no break-up in [{lo}, {hi}] for n = {n}")))
}

/// Turning points must be simple for tracing.
pub fn is_simple(tp: &TurningPoint, q: &ComplexFunctionQ) -> bool {
    q.derivative(tp.alpha).norm() > TOL_TP
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::I;

    #[test]
    fn turning_point_examples() {
        let t = turning_points(C::new(1.0, 0.0), 0).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].alpha - I).norm() < 1e-14);
        let e = C::new(1.0, 0.0);
        let t = turning_points(e, 1).unwrap();
        let q = ComplexFunctionQ::new(e, 1);
        for tp in &t {
            assert!(q.eval(tp.alpha).norm() < 1e-10);
            assert!((C::new(0.0, -1.0) * -1.0 * tp.alpha.powu(3) - e).norm() < 1e-10);
            assert!((tp.alpha.norm() - 1.0).abs() < 1e-14);
        }
        assert!(t.iter().any(|tp| (tp.alpha - C::from_polar(1.0, -PI / 6.0)).norm() < 1e-12));
        assert!(matches!(turning_points(C::new(0.0, 0.0), 1), Err(Error::DegenerateEnergy(_))));
    }

    #[test]
    fn three_lines_per_point_and_horizontal() {
        for (e, n) in [(C::new(1.0, 0.0), 0), (C::new(0.7, 0.4), 1), (C::new(2.0, -0.3), 2)] {
            let g = build_graph(e, n).unwrap();
            assert_eq!(g.lines.len(), 3 * (2 * n as usize + 1));
            for tp in &g.turning_points {
                assert_eq!(g.lines.iter().filter(|l| l.origin == tp.index).count(), 3);
            }
            let h = g.horizontality().unwrap();
            assert!(h < 1e-6, "{h}");
        }
    }

    #[test]
    fn n0_break_up_point() {
        let ec = break_up_energy(0, 0.3, 1.0).unwrap();
        assert!((ec - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        // lines from i/sqrt(3) reach both box ends
        let g = build_graph(C::new(1.0 / 3f64.sqrt(), 0.0), 0).unwrap();
        let hits: Vec<f64> = g.lines.iter().flat_map(|l| l.boundary_hits.clone()).collect();
        assert!(hits.contains(&-1.0) && hits.contains(&1.0), "{hits:?}");
        // turning point sitting on the box end
        let g = build_graph(I, 0).unwrap();
        assert!(g.lines.iter().any(|l| l.boundary_hits.first() == Some(&-1.0)));
    }

    #[test]
    fn residual_brackets_on_grid() {
        let xs: Vec<f64> = (0..50).map(|k| 0.05 + 2.0 * k as f64 / 49.0).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| boundary_on_graph_residual(x, 0).unwrap()).collect();
        let changes = vals.windows(2).filter(|v| v[0].signum() != v[1].signum()).count();
        assert_eq!(changes, 1);
        let ec = 1.0 / 3f64.sqrt();
        for w in xs.windows(2).zip(vals.windows(2)) {
            if w.1[0].signum() != w.1[1].signum() {
                assert!(w.0[0] <= ec && ec <= w.0[1]);
            }
        }
    }

    #[test]
    fn straight_residual_matches_traced_line() {
        // at the break-up the traced line from the relevant point passes y = -1
        let ec = break_up_energy(0, 0.3, 1.0).unwrap();
        let g = build_graph(C::new(ec, 0.0), 0).unwrap();
        let line = g.lines.iter().find(|l| l.boundary_hits.contains(&-1.0)).unwrap();
        let d = line
            .polyline
            .windows(2)
            .map(|w| closest_on_segment(C::new(-1.0, 0.0), w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn mirror_symmetry() {
        for (e, n) in [(C::new(0.8, 0.3), 0), (C::new(0.5, -0.6), 1), (C::new(1.3, 0.2), 2)] {
            let a = build_graph(e, n).unwrap();
            let b = build_graph(e.conj(), n).unwrap();
            let d = hausdorff(&a.mirrored_points(), &b.polylines());
            assert!(d < 1e-4, "{e} n={n}: {d}");
        }
    }
}
