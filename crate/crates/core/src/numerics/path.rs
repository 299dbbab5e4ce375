use num_complex::Complex64;

use super::{gauss_kronrod, ComplexFunctionQ, TOL_QUAD, TOL_TP};
use crate::error::{Error, Result};

/// Oriented polyline in the `y` plane. `branch_seed` picks the sheet of
/// `sqrt(Q)` at the start: the branch value `w` with `Re(w * conj(seed)) >= 0`
/// is used (when the path starts on a turning point, at the first point off it).
/// Without a seed the principal root is taken.
///
/// Only the first and last vertex may sit on a turning point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPath {
    vertices: Vec<Complex64>,
    branch_seed: Option<Complex64>,
}

impl ComplexPath {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidParams("path needs at least two vertices".into()));
        }
        for w in vertices.windows(2) {
            if (w[1] - w[0]).norm() == 0.0 {
                return Err(Error::InvalidParams(format!("repeated vertex {}", w[0])));
            }
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite vertex".into()));
        }
        Ok(ComplexPath { vertices, branch_seed: None })
    }

    pub fn segment(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn with_seed(mut self, seed: Complex64) -> Self {
        self.branch_seed = Some(seed);
        self
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn branch_seed(&self) -> Option<Complex64> {
        self.branch_seed
    }

    /// Same polyline traversed backwards, without a seed.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        ComplexPath { vertices: v, branch_seed: None }
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Branch values along one straight segment, dense enough that the phase of
/// `sqrt(Q)` moves by at most `MAX_JUMP` between neighbouring anchors.
#[derive(Debug, Clone)]
struct SegmentTransport {
    a: Complex64,
    b: Complex64,
    anchors: Vec<(f64, Complex64)>,
    singular_end: bool,
}

const MAX_JUMP: f64 = std::f64::consts::FRAC_PI_4;

impl SegmentTransport {
    fn point(&self, t: f64) -> Complex64 {
        self.a + (self.b - self.a) * t
    }

    /// Branch value at parameter `t` matched to the nearest anchor.
    fn value(&self, q: &ComplexFunctionQ, t: f64) -> Complex64 {
        let w = q.eval(self.point(t)).sqrt();
        let idx = self.anchors.partition_point(|(ta, _)| *ta < t);
        let mut best = None;
        let mut best_dt = f64::INFINITY;
        for k in [idx.wrapping_sub(1), idx] {
            if let Some((ta, wa)) = self.anchors.get(k) {
                // zero anchors (turning points) carry no phase information
                if wa.norm() == 0.0 {
                    continue;
                }
                let dt = (ta - t).abs();
                if dt < best_dt {
                    best_dt = dt;
                    best = Some(*wa);
                }
            }
        }
        match best {
            Some(wa) if (w * wa.conj()).re < 0.0 => -w,
            _ => w,
        }
    }
}

fn seg_point_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

fn transport(path: &ComplexPath, q: &ComplexFunctionQ) -> Result<Vec<SegmentTransport>> {
    let roots = q.roots();
    let verts = path.vertices();
    let nseg = verts.len() - 1;
    let deg = q.degree() as f64;

    let start_root = roots.iter().any(|r| (verts[0] - r).norm() < TOL_TP);
    let end_root = roots.iter().any(|r| (verts[nseg] - r).norm() < TOL_TP);

    // Validate clearance: interior of the path must avoid every turning point.
    for (i, w) in verts.windows(2).enumerate() {
        for r in &roots {
            let d = seg_point_distance(*r, w[0], w[1]);
            if d < TOL_TP {
                let at_start = i == 0 && (w[0] - r).norm() < TOL_TP;
                let at_end = i == nseg - 1 && (w[1] - r).norm() < TOL_TP;
                if !(at_start || at_end) {
                    return Err(Error::TurningPointOnPath { root: *r, distance: d });
                }
            }
        }
    }

    let mut out = Vec::with_capacity(nseg);
    let mut carried: Option<Complex64> = if start_root {
        None
    } else {
        let w = q.eval(verts[0]).sqrt();
        Some(match path.branch_seed() {
            Some(s) if (w * s.conj()).re < 0.0 => -w,
            _ => w,
        })
    };

    for i in 0..nseg {
        let (a, b) = (verts[i], verts[i + 1]);
        let d = b - a;
        let len = d.norm();
        let excluded: Vec<Complex64> = roots
            .iter()
            .copied()
            .filter(|r| (a - r).norm() >= TOL_TP && (b - r).norm() >= TOL_TP)
            .collect();
        let seg_end_root = i == nseg - 1 && end_root;

        let mut anchors = Vec::new();
        let mut prev = carried;
        anchors.push((0.0, prev.unwrap_or(Complex64::new(0.0, 0.0))));
        let mut t = 0.0;
        while t < 1.0 {
            let p = a + d * t;
            let dist = excluded.iter().map(|r| (p - r).norm()).fold(f64::INFINITY, f64::min);
            let mut h = if dist.is_finite() { 0.3 * dist / (len * deg) } else { 1.0 };
            h = h.min(1.0 - t);
            if 1.0 - t - h < 1e-13 {
                h = 1.0 - t;
            }
            loop {
                let tn = if h == 1.0 - t { 1.0 } else { t + h };
                let pn = a + d * tn;
                let mut w = q.eval(pn).sqrt();
                match prev {
                    Some(wp) => {
                        if (w * wp.conj()).re < 0.0 {
                            w = -w;
                        }
                        let landing_on_root = tn == 1.0 && seg_end_root;
                        let tiny = w.norm() < 1e-300 || wp.norm() < 1e-300;
                        let jump = if tiny { 0.0 } else { (w / wp).arg().abs() };
                        if jump > MAX_JUMP && !landing_on_root {
                            h *= 0.5;
                            if h * len < 1e-15 * (1.0 + a.norm()) {
                                return Err(Error::BranchAmbiguity { at: pn, jump });
                            }
                            continue;
                        }
                    }
                    None => {
                        if let Some(s) = path.branch_seed() {
                            if (w * s.conj()).re < 0.0 {
                                w = -w;
                            }
                        }
                    }
                }
                if tn == 1.0 && seg_end_root {
                    // the phase at a numerically located root is noise
                    anchors.push((tn, Complex64::new(0.0, 0.0)));
                } else {
                    anchors.push((tn, w));
                    prev = Some(w);
                }
                t = tn;
                break;
            }
        }
        carried = prev;
        out.push(SegmentTransport { a, b, anchors, singular_end: (i == 0 && start_root) || seg_end_root });
    }
    Ok(out)
}

/// `sqrt(Q)` at every vertex of `path`, continued along the path from the
/// seeded sheet. Vertices on a turning point report `0`.
pub fn sqrt_q_continued(path: &ComplexPath, q: &ComplexFunctionQ) -> Result<Vec<Complex64>> {
    let segs = transport(path, q)?;
    let mut out = Vec::with_capacity(segs.len() + 1);
    for s in &segs {
        out.push(s.anchors[0].1);
    }
    let last = segs.last().expect("at least one segment");
    out.push(last.anchors.last().expect("anchor").1);
    Ok(out)
}

/// `integral sqrt(Q) dy` along `path` to absolute tolerance [`TOL_QUAD`].
pub fn action_integral(path: &ComplexPath, q: &ComplexFunctionQ) -> Result<Complex64> {
    action_integral_tol(path, q, TOL_QUAD)
}

pub fn action_integral_tol(path: &ComplexPath, q: &ComplexFunctionQ, tol: f64) -> Result<Complex64> {
    let segs = transport(path, q)?;
    let total_len = path.length();
    let mut acc = Complex64::new(0.0, 0.0);
    for s in &segs {
        let d = s.b - s.a;
        let share = tol * d.norm() / total_len;
        let v = if s.singular_end {
            // smoothstep t = s^2 (3 - 2s) flattens sqrt endpoint singularities
            gauss_kronrod(
                |u| {
                    let t = u * u * (3.0 - 2.0 * u);
                    s.value(q, t) * d * (6.0 * u * (1.0 - u))
                },
                0.0,
                1.0,
                share,
                4000,
            )?
        } else {
            gauss_kronrod(|t| s.value(q, t) * d, 0.0, 1.0, share, 4000)?
        };
        acc += v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: march with a fixed tiny step, always keeping the
    /// sign closest to the previous value.
    fn dense_march(q: &ComplexFunctionQ, verts: &[Complex64], steps_per_seg: usize) -> Complex64 {
        let mut w = q.eval(verts[0]).sqrt();
        for seg in verts.windows(2) {
            for k in 1..=steps_per_seg {
                let p = seg[0] + (seg[1] - seg[0]) * (k as f64 / steps_per_seg as f64);
                let mut wn = q.eval(p).sqrt();
                if (wn - w).norm() > (wn + w).norm() {
                    wn = -wn;
                }
                w = wn;
            }
        }
        w
    }

    /// Oracle for integrals: trapezoid on a dense march (from a turning point
    /// the first panel uses the exact local sqrt law).
    fn dense_integral(q: &ComplexFunctionQ, a: Complex64, b: Complex64, n: usize, seed: Complex64) -> Complex64 {
        let d = (b - a) / n as f64;
        let mut prev_w: Option<Complex64> = None;
        let mut acc = c(0.0, 0.0);
        let mut last = c(0.0, 0.0);
        for k in 0..=n {
            let p = a + d * k as f64;
            let mut w = q.eval(p).sqrt();
            match prev_w {
                Some(pw) if pw.norm() > 0.0 => {
                    if (w - pw).norm() > (w + pw).norm() {
                        w = -w;
                    }
                }
                _ => {
                    if (w * seed.conj()).re < 0.0 {
                        w = -w;
                    }
                }
            }
            if k > 0 {
                acc += (w + last) * d * 0.5;
            }
            last = w;
            prev_w = Some(w);
        }
        acc
    }

    #[test]
    fn straight_path_matches_principal_root() {
        let q = ComplexFunctionQ::new(c(1.0, 0.0), 0);
        let path = ComplexPath::segment(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        let s = sqrt_q_continued(&path, &q).unwrap();
        assert!((s[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((s[1] - c(1.0, 0.5).sqrt()).norm() < 1e-14);
    }

    #[test]
    fn monodromy_flips_sign() {
        // n = 0, E = 1: turning point at y = i
        let q = ComplexFunctionQ::new(c(1.0, 0.0), 0);
        let center = c(0.0, 1.0);
        let verts: Vec<Complex64> =
            (0..=32).map(|k| center + Complex64::from_polar(0.5, -PI / 2.0 + 2.0 * PI * k as f64 / 32.0)).collect();
        let mut verts = verts;
        *verts.last_mut().unwrap() = verts[0] + c(1e-15, 0.0);
        let path = ComplexPath::new(verts).unwrap();
        let s = sqrt_q_continued(&path, &q).unwrap();
        let first = s[0];
        let last = *s.last().unwrap();
        assert!((last + first).norm() < 1e-12, "{first} {last}");
    }

    #[test]
    fn continuation_matches_dense_marching() {
        let q = ComplexFunctionQ::new(c(0.0, 1.0), 1);
        let verts = vec![c(-1.0, 0.0), c(-1.0, 1.0)];
        let path = ComplexPath::new(verts.clone()).unwrap();
        let s = sqrt_q_continued(&path, &q).unwrap();
        let oracle = dense_march(&q, &verts, 100_000);
        assert!((s[1] - oracle).norm() < 1e-10, "{} vs {}", s[1], oracle);
    }

    #[test]
    fn constant_integrand_gives_displacement() {
        let q = ComplexFunctionQ::constant(c(1.0, 0.0));
        let verts = vec![c(0.0, 0.0), c(1.0, 2.0), c(-0.5, 0.3)];
        let v = action_integral(&ComplexPath::new(verts).unwrap(), &q).unwrap();
        assert!((v - c(-0.5, 0.3)).norm() < 1e-12);
    }

    #[test]
    fn integral_from_turning_point_matches_oracle() {
        let q = ComplexFunctionQ::new(c(1.0, 0.0), 0);
        let a = c(0.0, 1.0);
        let b = c(-1.0, 0.0);
        let seed = c(1.0, 0.0);
        let v = action_integral(&ComplexPath::segment(a, b).unwrap().with_seed(seed), &q).unwrap();
        // closed form: (2/(3i)) (E + i y)^(3/2) |_{i}^{-1}, branch aligned with the seed direction
        let oracle = dense_integral(&q, a, b, 400_000, seed);
        assert!((v.im - oracle.im).abs() < 1e-9, "{v} vs {oracle}");
        let flipped = if v.re < 0.0 { -v } else { v };
        assert!(flipped.re > 0.0);
    }

    #[test]
    fn critical_real_energy_is_horizontal() {
        let e = 1.0 / 3f64.sqrt();
        let q = ComplexFunctionQ::new(c(e, 0.0), 0);
        let v = action_integral(&ComplexPath::segment(c(0.0, e), c(-1.0, 0.0)).unwrap(), &q).unwrap();
        assert!(v.im.abs() < 1e-6, "{v}");
    }

    #[test]
    fn turning_point_inside_path_is_rejected() {
        let q = ComplexFunctionQ::new(c(1.0, 0.0), 0);
        let path = ComplexPath::new(vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]).unwrap();
        assert!(matches!(sqrt_q_continued(&path, &q), Err(Error::TurningPointOnPath { .. })));
    }

    #[test]
    fn homotopic_paths_agree() {
        let q = ComplexFunctionQ::new(c(0.4, 0.0), 1);
        let a = c(-1.0, 0.0);
        let b = c(1.0, 0.0);
        let p1 = ComplexPath::new(vec![a, b]).unwrap();
        let p2 = ComplexPath::new(vec![a, c(-0.5, 0.2), c(0.3, 0.25), b]).unwrap();
        // no root in the thin region between them
        for r in q.roots() {
            assert!(r.im.abs() > 0.3);
        }
        let v1 = action_integral(&p1, &q).unwrap();
        let v2 = action_integral(&p2, &q).unwrap();
        assert!((v1 - v2).norm() < 1e-8, "{v1} {v2}");
    }
}
