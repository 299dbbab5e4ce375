//! Exhaustive search for the zeros of a spectral function `f(E)` of smallest
//! modulus, for operators whose spectrum lies in a known half-strip
//! `Re E >= re_min`, `|Im E| <= im_max` and is symmetric under conjugation
//! (`f(conj E) = conj f(E)`, `f` real on the real axis).

use num_complex::Complex64;

use super::{brent, find_root_complex_pair, RectZeroFinder};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub re_min: f64,
    pub im_max: f64,
    /// First radius tried; grown by `growth` until enough zeros are enclosed.
    pub r0: f64,
    pub growth: f64,
    pub r_max: f64,
    /// Residual tolerance for polished zeros.
    pub root_tol: f64,
    /// Relative `|Im E| / |E|` below which a zero is tested for being real.
    pub snap_rel: f64,
}

impl SearchOptions {
    pub fn new(re_min: f64, im_max: f64, r0: f64) -> Self {
        SearchOptions {
            re_min,
            im_max,
            r0: r0.max(2.0 * re_min),
            growth: 1.5,
            r_max: 1e9,
            root_tol: 1e-11,
            snap_rel: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Zeros sorted by modulus; conjugate partners included.
    pub roots: Vec<C>,
    /// Radius of the searched region: every zero with `|E| <= radius` is listed.
    pub radius: f64,
    pub evals: usize,
    /// Zeros that could only be located to cluster accuracy.
    pub unresolved: usize,
}

fn rect_search<F: FnMut(C) -> C>(
    finder: &mut RectZeroFinder,
    f: &mut F,
    lo: C,
    hi: C,
    opts: &SearchOptions,
    out: &mut Vec<(C, bool)>,
) -> Result<()> {
    let clusters = finder.find(&mut *f, lo, hi)?;
    for cl in clusters {
        if let Some(z) = cl.root {
            out.push((z, true));
            continue;
        }
        // Cluster near the real axis: look for real sign changes first.
        let mut resolved: Vec<C> = Vec::new();
        if cl.lo.im <= 0.0 && cl.hi.im >= 0.0 || cl.center().im.abs() <= 1e-6 * cl.center().norm() {
            let n = 400;
            let (a, b) = (cl.lo.re, cl.hi.re);
            let mut prev = (a, f(C::new(a, 0.0)).re);
            for k in 1..=n {
                let x = a + (b - a) * k as f64 / n as f64;
                let v = f(C::new(x, 0.0)).re;
                if v.signum() != prev.1.signum() {
                    if let Ok(r) = brent(|t| f(C::new(t, 0.0)).re, prev.0, x, 1e-15 * x.abs()) {
                        // sign flicker inside a noise disk yields neighbouring roots
                        match resolved.last_mut() {
                            Some(last) if r - last.re <= 1e-6 * r.abs().max(1.0) => *last = C::new(0.5 * (last.re + r), 0.0),
                            _ => resolved.push(C::new(r, 0.0)),
                        }
                    }
                }
                prev = (x, v);
            }
        }
        if resolved.len() as u32 >= cl.count {
            out.extend(resolved.into_iter().map(|z| (z, true)));
            continue;
        }
        // Otherwise secant from staggered seeds inside the cell.
        let d = cl.hi - cl.lo;
        let mut found: Vec<C> = resolved.clone();
        for k in 0..(4 * cl.count) {
            let t = (k as f64 + 0.5) / (4 * cl.count) as f64;
            let z0 = cl.lo + C::new(d.re * t, d.im * (1.0 - t));
            if let Ok(z) = find_root_complex_pair(&mut *f, z0, z0 + d * 0.01, opts.root_tol) {
                let slack = 1e-9 * z.norm();
                let inside = z.re >= cl.lo.re - slack
                    && z.re <= cl.hi.re + slack
                    && z.im >= cl.lo.im - slack
                    && z.im <= cl.hi.im + slack;
                if inside && !found.iter().any(|w| (w - z).norm() <= 1e-9 * z.norm().max(1.0)) {
                    found.push(z);
                }
            }
            if found.len() as u32 >= cl.count {
                break;
            }
        }
        let missing = cl.count as usize - found.len().min(cl.count as usize);
        out.extend(found.into_iter().map(|z| (z, true)));
        for _ in 0..missing {
            out.push((cl.center(), false));
        }
    }
    Ok(())
}

/// Snap near-real zeros onto the axis and complete conjugate pairs.
fn finalize<F: FnMut(C) -> C>(f: &mut F, raw: &[(C, bool)], opts: &SearchOptions) -> (Vec<C>, usize) {
    let mut roots: Vec<C> = Vec::new();
    let mut unresolved = 0;
    let push = |roots: &mut Vec<C>, z: C| {
        let tol = 1e-8 * z.norm().max(1e-300);
        if !roots.iter().any(|w| (w - z).norm() <= tol) {
            roots.push(z);
        }
    };
    for &(z, ok) in raw {
        if !ok {
            unresolved += 1;
        }
        if z.im.abs() <= opts.snap_rel * z.norm() {
            let x = z.re;
            let delta = (4.0 * z.im.abs()).max(1e-9 * x.abs());
            let lo = x - delta;
            let hi = x + delta;
            if let Ok(r) = brent(|t| f(C::new(t, 0.0)).re, lo, hi, 4.0 * f64::EPSILON * x.abs()) {
                push(&mut roots, C::new(r, 0.0));
                continue;
            }
        }
        push(&mut roots, z);
        push(&mut roots, z.conj());
    }
    // Average conjugate partners so pairs are exactly symmetric.
    let snapshot = roots.clone();
    for z in roots.iter_mut() {
        if z.im > 0.0 {
            if let Some(p) = snapshot
                .iter()
                .filter(|w| w.im < 0.0)
                .min_by(|a, b| (a.conj() - *z).norm().total_cmp(&(b.conj() - *z).norm()))
            {
                if (p.conj() - *z).norm() <= 1e-6 * z.norm() {
                    *z = (*z + p.conj()) * 0.5;
                }
            }
        }
    }
    let uppers: Vec<C> = roots.iter().filter(|z| z.im > 0.0).copied().collect();
    roots.retain(|z| z.im >= 0.0);
    roots.extend(uppers.iter().map(|z| z.conj()));
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(b.im.total_cmp(&a.im)));
    (roots, unresolved)
}

/// The `count` zeros of smallest modulus.
pub fn smallest_zeros<F: FnMut(C) -> C>(mut f: F, count: usize, opts: &SearchOptions) -> Result<SearchResult> {
    let mut last_err = None;
    for attempt in 0..ATTEMPTS {
        match search_once(&mut f, count, opts, attempt) {
            Ok(r) => return Ok(r),
            Err(e @ Error::IncompleteSpectrum { .. }) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("attempted"))
}

/// All zeros with `|E| <= radius`.
pub fn zeros_within<F: FnMut(C) -> C>(mut f: F, radius: f64, opts: &SearchOptions) -> Result<SearchResult> {
    // grow from the small start: one wide thin first strip can miscount
    let mut o = *opts;
    o.r0 = opts.r0.min(radius);
    o.r_max = radius;
    let mut last_err = None;
    for attempt in 0..ATTEMPTS {
        match search_once(&mut f, usize::MAX, &o, attempt) {
            Ok(r) => return Ok(r),
            Err(Error::IncompleteSpectrum { .. }) => unreachable!("radius-bounded search"),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("attempted"))
}

const ATTEMPTS: u32 = 4;

fn search_once<F: FnMut(C) -> C>(f: &mut F, count: usize, opts: &SearchOptions, attempt: u32) -> Result<SearchResult> {
    // later attempts move the radii and the below-axis edge further, away
    // from zeros whose residual sits at the noise floor
    let jitter = [1.0, 1.0371, 0.9613, 1.0826][attempt as usize];
    let lift = [1.0, 4.7, 0.31, 23.0][attempt as usize];
    let scale = opts.r0.max(opts.re_min);
    let mut finder = RectZeroFinder::new(1e-9 * scale, opts.root_tol);
    // lower edge sits below the axis so real zeros are strictly inside; its
    // offset grows with the radius since noise disks of real zeros do
    let eps = 2.3e-3 * opts.re_min.max(1e-6 * scale) * jitter;
    let below = |rr: f64| eps.max(1e-4 * rr) * lift;
    let re_lo = opts.re_min * (1.0 - 1.1e-3 * jitter);
    let mut raw = Vec::new();
    let mut r_old = 0.0;
    let mut r = opts.r0 * jitter;
    loop {
        let top = |rr: f64| rr.min(opts.im_max * 1.001 + eps);
        // the below-axis piece is retried further down when its lower edge
        // grazes a real zero
        let (lo_re, hi_im) = if r_old == 0.0 { (re_lo, top(r)) } else { (r_old, top(r_old)) };
        let mut res = Err(Error::IntegrationFailure("unreached".into()));
        for m in [1.0, 4.1, 17.0] {
            res = rect_search(&mut finder, f, C::new(lo_re, -below(r) * m), C::new(r, hi_im), opts, &mut raw);
            if !matches!(res, Err(Error::IntegrationFailure(_))) {
                break;
            }
        }
        res?;
        if r_old != 0.0 && top(r) > top(r_old) {
            rect_search(&mut finder, f, C::new(re_lo, top(r_old)), C::new(r, top(r)), opts, &mut raw)?;
        }
        let (roots, unresolved) = finalize(f, &raw, opts);
        let enclosed = roots.iter().filter(|z| z.norm() <= r).count();
        if count != usize::MAX && enclosed >= count {
            let mut roots: Vec<C> = roots.into_iter().filter(|z| z.norm() <= r).collect();
            roots.truncate(count);
            return Ok(SearchResult { roots, radius: r, evals: finder.evals(), unresolved });
        }
        if r >= opts.r_max {
            if count == usize::MAX {
                let roots: Vec<C> = roots.into_iter().filter(|z| z.norm() <= r).collect();
                return Ok(SearchResult { roots, radius: r, evals: finder.evals(), unresolved });
            }
            return Err(Error::IncompleteSpectrum { found: enclosed, expected: count });
        }
        r_old = r;
        r = (r * opts.growth).min(opts.r_max);
    }
}
