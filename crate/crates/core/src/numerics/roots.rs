use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Bisection on a sign change of `f` in `[a, b]`, to absolute width `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NotMonotone(format!("no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Brent's method on a bracketing interval.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NotMonotone(format!("no sign change on [{a}, {b}]: f = {fa:e}, {fb:e}")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Secant iteration from two starting points; stops once `|f| <= tol` or the
/// step stagnates at round-off. At most 100 iterations.
pub fn find_root_complex_pair<F: FnMut(C) -> C>(mut f: F, z0: C, z1: C, tol: f64) -> Result<C> {
    let (mut za, mut zb) = (z0, z1);
    let (mut fa, mut fb) = (f(za), f(zb));
    let mut best = if fa.norm() < fb.norm() { (za, fa.norm()) } else { (zb, fb.norm()) };
    for _ in 0..100 {
        if best.1 <= tol {
            return Ok(best.0);
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 || !denom.norm().is_finite() {
            break;
        }
        let step = fb * (zb - za) / denom;
        let zn = zb - step;
        if !(zn.re.is_finite() && zn.im.is_finite()) {
            break;
        }
        let fnew = f(zn);
        za = zb;
        fa = fb;
        zb = zn;
        fb = fnew;
        if fb.norm() < best.1 {
            best = (zb, fb.norm());
        }
        if step.norm() <= 4.0 * f64::EPSILON * zb.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if best.1 <= tol {
        Ok(best.0)
    } else {
        Err(Error::NoConvergence { best: best.0, residual: best.1 })
    }
}

/// Secant iteration seeded at `seed` (second point a small relative offset away).
pub fn find_root_complex<F: FnMut(C) -> C>(f: F, seed: C, tol: f64) -> Result<C> {
    let off = 1e-4 * seed.norm().max(1.0);
    find_root_complex_pair(f, seed, seed + C::new(off, 0.3 * off), tol)
}

/// A box `[lo, hi]` of the complex plane holding `count` zeros; `root` is the
/// polished location when `count == 1` and the polish converged inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCluster {
    pub lo: C,
    pub hi: C,
    pub count: u32,
    pub root: Option<C>,
}

impl ZeroCluster {
    pub fn center(&self) -> C {
        (self.lo + self.hi) * 0.5
    }

    pub fn size(&self) -> f64 {
        (self.hi - self.lo).norm()
    }
}

/// Argument-principle quadtree: counts zeros of a continuous function with
/// analytic phase (an analytic function times a positive weight) inside
/// rectangles, splitting cells until every zero is isolated and polished.
#[derive(Debug, Clone)]
pub struct RectZeroFinder {
    /// Cells smaller than this (diagonal) are reported without further splitting.
    pub min_size: f64,
    /// Residual tolerance for the polished roots.
    pub root_tol: f64,
    /// Evaluation budget across the whole search.
    pub max_evals: usize,
    cache: HashMap<(u64, u64), C>,
    evals: usize,
}

const SPLITS: [f64; 4] = [0.537, 0.463, 0.611, 0.389];

impl RectZeroFinder {
    pub fn new(min_size: f64, root_tol: f64) -> Self {
        RectZeroFinder { min_size, root_tol, max_evals: 2_000_000, cache: HashMap::new(), evals: 0 }
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    fn eval<F: FnMut(C) -> C>(&mut self, f: &mut F, z: C) -> Result<C> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        if self.evals >= self.max_evals {
            return Err(Error::IntegrationFailure(format!("zero search exhausted {} evaluations", self.max_evals)));
        }
        self.evals += 1;
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::IntegrationFailure(format!("function not finite at {z}")));
        }
        self.cache.insert(key, v);
        Ok(v)
    }

    fn edge_phase<F: FnMut(C) -> C>(&mut self, f: &mut F, a: C, b: C, fa: C, fb: C, depth: u32) -> Result<f64> {
        if fa.norm() == 0.0 || fb.norm() == 0.0 {
            return Err(Error::IntegrationFailure(format!("zero on contour near {a}")));
        }
        let m = (a + b) * 0.5;
        let fm = self.eval(f, m)?;
        if fm.norm() == 0.0 {
            return Err(Error::IntegrationFailure(format!("zero on contour at {m}")));
        }
        let d1 = (fm / fa).arg();
        let d2 = (fb / fm).arg();
        let whole = (fb / fa).arg();
        let consistent = (d1 + d2 - whole).abs() < 1e-9;
        // near-linear behaviour rules out phase aliasing between samples
        let linear = (fm - (fa + fb) * 0.5).norm() < 0.25 * fa.norm().min(fb.norm()).min(fm.norm());
        if depth >= 3 && d1.abs() < FRAC_PI_4 && d2.abs() < FRAC_PI_4 && consistent && linear {
            return Ok(d1 + d2);
        }
        if depth > 44 {
            return Err(Error::IntegrationFailure(format!("contour passes too close to a zero near {m}")));
        }
        Ok(self.edge_phase(f, a, m, fa, fm, depth + 1)? + self.edge_phase(f, m, b, fm, fb, depth + 1)?)
    }

    /// Number of zeros enclosed by the rectangle `[lo, hi]`.
    pub fn count<F: FnMut(C) -> C>(&mut self, f: &mut F, lo: C, hi: C) -> Result<u32> {
        let corners = [lo, C::new(hi.re, lo.im), hi, C::new(lo.re, hi.im)];
        let vals = [
            self.eval(f, corners[0])?,
            self.eval(f, corners[1])?,
            self.eval(f, corners[2])?,
            self.eval(f, corners[3])?,
        ];
        let mut total = 0.0;
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            total += self.edge_phase(f, a, b, vals[k], vals[(k + 1) % 4], 0)?;
        }
        let w = total / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 1e-3 || n < 0.0 {
            return Err(Error::IntegrationFailure(format!("non-integral winding {w} on [{lo}, {hi}]")));
        }
        Ok(n as u32)
    }

    /// `|f|` attainable at `z` given only `|z| eps` resolution: a steep zero
    /// may never meet an absolute tolerance.
    fn rounding_floor<F: FnMut(C) -> C>(&mut self, f: &mut F, z: C) -> f64 {
        let dz = 1e-9 * z.norm().max(1e-300);
        self.evals += 2;
        let slope = (f(z + dz) - f(z - dz)).norm() / (2.0 * dz);
        64.0 * f64::EPSILON * z.norm() * slope
    }

    fn polish<F: FnMut(C) -> C>(&mut self, f: &mut F, lo: C, hi: C) -> Option<C> {
        let c = (lo + hi) * 0.5;
        let d = hi - lo;
        let z1 = c + C::new(0.1 * d.re, 0.07 * d.im);
        let evals = &mut self.evals;
        // run to stagnation: a small residual alone does not pin down clustered roots
        let (z, res) = match find_root_complex_pair(
            |z| {
                *evals += 1;
                f(z)
            },
            c,
            z1,
            0.0,
        ) {
            Ok(z) => (z, 0.0),
            Err(Error::NoConvergence { best, residual }) => (best, residual),
            Err(_) => return None,
        };
        if res > self.root_tol && res > self.rounding_floor(f, z) {
            return None;
        }
        let mx = 1e-9 * (1.0 + z.norm());
        let inside = z.re >= lo.re - mx && z.re <= hi.re + mx && z.im >= lo.im - mx && z.im <= hi.im + mx;
        inside.then_some(z)
    }

    fn split<F: FnMut(C) -> C>(&mut self, f: &mut F, lo: C, hi: C, count: u32, out: &mut Vec<ZeroCluster>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let size = (hi - lo).norm();
        if count == 1 {
            if let Some(z) = self.polish(f, lo, hi) {
                out.push(ZeroCluster { lo, hi, count, root: Some(z) });
                return Ok(());
            }
        }
        if size <= self.min_size {
            // a simple zero is pinned to the box by its winding number even
            // when the residual cannot resolve it
            let root = (count == 1).then_some((lo + hi) * 0.5);
            out.push(ZeroCluster { lo, hi, count, root });
            return Ok(());
        }
        let (w, h) = (hi.re - lo.re, hi.im - lo.im);
        let mut last_err = None;
        for frac in SPLITS {
            let attempt = if w >= h {
                let xm = lo.re + frac * w;
                let a = (lo, C::new(xm, hi.im));
                let b = (C::new(xm, lo.im), hi);
                self.count(f, a.0, a.1).and_then(|na| Ok((na, self.count(f, b.0, b.1)?, a, b)))
            } else {
                let ym = lo.im + frac * h;
                let a = (lo, C::new(hi.re, ym));
                let b = (C::new(lo.re, ym), hi);
                self.count(f, a.0, a.1).and_then(|na| Ok((na, self.count(f, b.0, b.1)?, a, b)))
            };
            match attempt {
                Ok((na, nb, a, b)) => {
                    if na + nb != count {
                        last_err = Some(Error::IntegrationFailure(format!(
                            "inconsistent zero counts {na} + {nb} != {count} on [{lo}, {hi}]"
                        )));
                        continue;
                    }
                    self.split(f, a.0, a.1, na, out)?;
                    self.split(f, b.0, b.1, nb, out)?;
                    return Ok(());
                }
                Err(e) => last_err = Some(e),
            }
        }
        // every split line runs into a noise-dominated zero: hand the cell
        // back unresolved rather than abort the whole search
        match last_err.expect("at least one split attempted") {
            Error::IntegrationFailure(_) => {
                out.push(ZeroCluster { lo, hi, count, root: None });
                Ok(())
            }
            e => Err(e),
        }
    }

    /// All zeros in the rectangle `[lo, hi]`, isolated into clusters.
    pub fn find<F: FnMut(C) -> C>(&mut self, mut f: F, lo: C, hi: C) -> Result<Vec<ZeroCluster>> {
        let n = self.count(&mut f, lo, hi)?;
        let mut out = Vec::new();
        self.split(&mut f, lo, hi, n, &mut out)?;
        Ok(out)
    }
}
