//! Zeroth-order WKB secular equations for real eigenvalues.
//!
//! The box `[-1, 1]` (mapped frame) is deformed into the polyline
//! `G: -1 -> a1 -> a2 -> +1` through the mirror pair of turning points
//! nearest the real axis. With `s = hbar^-1 g^(1/2) L^((2n+3)/2)`:
//!
//! * `I_T = s int_G sqrt(Q)`, `I_M = s int_{a1}^{a2} sqrt(Q)`,
//! * `I_L = s Re int_{-1}^{a1} sqrt(Q)`,
//! * `Delta = (-1)^(n+1) 2 s Im int_{-1}^{a1} sqrt(Q)`,
//!
//! and real eigenvalues solve `+-sin(I_T) + e^Delta cos(I_M) = 0`. The root is
//! principal at `y = -1` and is continued along `G`, passing each turning
//! point on the side that faces the real axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    action_integral_tol, bisect, find_root_complex, sqrt_q_continued, ComplexFunctionQ, ComplexPath, ModelParams,
    TOL_QUAD,
};
use crate::stokes::{relevant_turning_point, seed_radius, turning_points};

type C = Complex64;

/// The Maslov phase in every quantization rule here.
pub const MASLOV: f64 = PI / 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecularData {
    pub i_t: C,
    pub i_m: C,
    pub i_l: f64,
    pub delta: f64,
    /// `int_{-1}^{a1}` and `int_{a2}^{+1}` (unscaled) on the continued branch.
    pub left: C,
    pub right: C,
    /// Vertices of `G` in the mapped frame.
    pub path: Vec<C>,
}

/// Continue `w = sqrt(Q)` from `alpha + rho u_in` to `alpha + rho u_out` on
/// the half circle of radius `rho` facing the real axis.
fn detour(q: &ComplexFunctionQ, alpha: C, rho: f64, w_in: C, u_in: C, u_out: C) -> C {
    let (a0, a1) = (u_in.arg(), u_out.arg());
    let mut ccw = a1 - a0;
    while ccw <= 0.0 {
        ccw += 2.0 * PI;
    }
    let cw = ccw - 2.0 * PI;
    let mid = |sweep: f64| (alpha + C::from_polar(rho, a0 + 0.5 * sweep)).im.abs();
    let sweep = if mid(ccw) <= mid(cw) { ccw } else { cw };
    let steps = 128;
    let mut w = w_in;
    for k in 1..=steps {
        let y = alpha + C::from_polar(rho, a0 + sweep * k as f64 / steps as f64);
        let r = q.eval(y).sqrt();
        w = if (r - w).norm() <= (-r - w).norm() { r } else { -r };
    }
    w
}

fn unit(z: C) -> C {
    z / z.norm()
}

/// The mirror pair `(a1, a2 = -conj(a1))` in the mapped frame; `a1 = a2` for `n = 0`.
pub fn relevant_pair(e_mapped: f64, n: u32) -> Result<(C, C)> {
    let a1 = relevant_turning_point(e_mapped, n)?;
    let a2 = -a1.conj();
    Ok((a1, if (a2 - a1).norm() < 1e-14 * a1.norm() { a1 } else { a2 }))
}

pub fn secular_data(e_real: f64, params: &ModelParams) -> Result<SecularData> {
    params.validate()?;
    if !(e_real > 0.0) {
        return Err(Error::DegenerateEnergy(e_real));
    }
    let n = params.n;
    let em = params.to_mapped(C::new(e_real, 0.0));
    let q = ComplexFunctionQ::new(em, n);
    let (a1, a2) = relevant_pair(em.re, n)?;
    let rho = seed_radius(em, n);
    let start = C::new(-1.0, 0.0);
    let end = C::new(1.0, 0.0);

    // absolute tolerance grows with the size of the integrand along G
    let tol = TOL_QUAD * (1.0 + em.norm().sqrt()) * (1.0 + a1.norm());
    let integral = |path: &ComplexPath| action_integral_tol(path, &q, tol);
    let left = integral(&ComplexPath::segment(start, a1)?)?;
    let d1 = unit(a1 - start);
    let w_in = *sqrt_q_continued(&ComplexPath::segment(start, a1 - d1 * rho)?, &q)?.last().expect("vertex");
    let (middle, w_last, last_tp) = if a1 == a2 {
        (C::new(0.0, 0.0), w_in, a1)
    } else {
        let d2 = unit(a2 - a1);
        let w_out = detour(&q, a1, rho, w_in, -d1, d2);
        let mid_path = ComplexPath::segment(a1, a2)?.with_seed(w_out);
        let middle = integral(&mid_path)?;
        let pre = ComplexPath::segment(a1, a2 - d2 * rho)?.with_seed(w_out);
        let w2 = *sqrt_q_continued(&pre, &q)?.last().expect("vertex");
        (middle, w2, a2)
    };
    let d_prev = if a1 == a2 { d1 } else { unit(a2 - a1) };
    let d3 = unit(end - last_tp);
    let w_out = detour(&q, last_tp, rho, w_last, -d_prev, d3);
    let right = integral(&ComplexPath::segment(last_tp, end)?.with_seed(w_out))?;

    let s = params.scale();
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let path = if a1 == a2 { vec![start, a1, end] } else { vec![start, a1, a2, end] };
    Ok(SecularData {
        i_t: (left + middle + right) * s,
        i_m: middle * s,
        i_l: left.re * s,
        delta: sign * 2.0 * s * left.im,
        left,
        right,
        path,
    })
}

/// The `+` and `-` equations divided by `max(1, e^Delta)`: same zeros as the
/// raw pair, values in `[-2, 2]`.
pub fn secular_residuals(e_real: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let d = secular_data(e_real, params)?;
    Ok(bounded_pair(d.i_t.re, d.i_m.re, d.delta))
}

pub fn bounded_pair(i_t: f64, i_m: f64, delta: f64) -> (f64, f64) {
    let a = (-delta.max(0.0)).exp();
    let b = (delta - delta.max(0.0)).exp();
    (a * i_t.sin() + b * i_m.cos(), -a * i_t.sin() + b * i_m.cos())
}

/// Solves `f(E) = target(j)` for `j = 1..=j_max`, skipping indices whose
/// target lies below `f(e_lo)`.
fn solve_levels<F, T>(f: F, target: T, j_max: u32, e_lo: f64) -> Result<Vec<(u32, f64)>>
where
    F: Fn(f64) -> Result<f64>,
    T: Fn(u32) -> f64,
{
    let floor = f(e_lo)?;
    let mut out = Vec::new();
    let mut lo = e_lo;
    for j in (1..=j_max).filter(|&j| target(j) > floor) {
        let t = target(j);
        let g = |e: f64| f(e).map(|v| v - t).unwrap_or(f64::NAN);
        let mut hi = lo * 2.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            if !(hi < 1e300) {
                return Err(Error::NotMonotone(format!("action never reaches {t}")));
            }
        }
        let e = bisect(g, lo, hi, 1e-14 * hi)?;
        out.push((j, e));
        lo = e;
    }
    Ok(out)
}

/// Box-type levels `(j, E)` with `I_T(E) = j pi`, `j <= j_max`. Indices whose
/// action is already exceeded at `E -> 0` (the complex part of the spectrum)
/// have no real solution and are skipped.
pub fn bt_levels(params: &ModelParams, j_max: u32) -> Result<Vec<(u32, f64)>> {
    let lo = params.box_level(1) * 1e-3;
    solve_levels(|e| Ok(secular_data(e, params)?.i_t.re.abs()), |j| j as f64 * PI, j_max, lo)
}

/// Bohr-Sommerfeld levels `(j, E)` with `I_M(E) = (j - 1/2) pi`,
/// `j = 1..=j_max`. Empty for `n = 0`, where the pair collapses to one
/// turning point.
pub fn bs_levels(params: &ModelParams, j_max: u32) -> Result<Vec<(u32, f64)>> {
    if params.n == 0 {
        return Ok(Vec::new());
    }
    let lo = 1e-6 * params.g.powf(2.0 / (2 * params.n + 3) as f64);
    solve_levels(|e| Ok(secular_data(e, params)?.i_m.re.abs()), |j| (j as f64 - 0.5) * PI, j_max, lo)
}

/// Distance of `x` to the nearest multiple of `pi`.
pub fn distance_to_pi_multiple(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    r.min(PI - r)
}

/// Break-up conditions `+-I_L + pi/4` and `+-(I_L + I_M) + pi/4` measured as
/// distances to `pi Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakupResiduals {
    pub l_plus: f64,
    pub l_minus: f64,
    pub lm_plus: f64,
    pub lm_minus: f64,
}

pub fn breakup_residuals(e_real: f64, params: &ModelParams) -> Result<BreakupResiduals> {
    let d = secular_data(e_real, params)?;
    let (il, im) = (d.i_l, d.i_m.re);
    Ok(BreakupResiduals {
        l_plus: distance_to_pi_multiple(il + MASLOV),
        l_minus: distance_to_pi_multiple(-il + MASLOV),
        lm_plus: distance_to_pi_multiple(il + im + MASLOV),
        lm_minus: distance_to_pi_multiple(-(il + im) + MASLOV),
    })
}

/// `s int sqrt(Q)` from `alpha` to the box end `y = end`, oriented so the
/// real part is non-negative.
pub fn y_action_from(e: C, params: &ModelParams, alpha: C, end: f64) -> Result<C> {
    let em = params.to_mapped(e);
    let q = ComplexFunctionQ::new(em, params.n);
    let tol = TOL_QUAD * (1.0 + em.norm().sqrt()) * (1.0 + alpha.norm());
    let v = action_integral_tol(&ComplexPath::segment(alpha, C::new(end, 0.0))?, &q, tol)?;
    Ok(if v.re < 0.0 { -v } else { v } * params.scale())
}

/// The turning point whose action to `y = -1` is most nearly real.
pub fn y_turning_point(e: C, params: &ModelParams) -> Result<C> {
    let em = params.to_mapped(e);
    let mut best: Option<(f64, C)> = None;
    for tp in turning_points(em, params.n)? {
        let v = match y_action_from(e, params, tp.alpha, -1.0) {
            Ok(v) => v,
            Err(Error::TurningPointOnPath { .. }) | Err(Error::InvalidParams(_)) => continue,
            Err(e) => return Err(e),
        };
        let skew = v.im.abs() / v.norm().max(1e-300);
        if best.map_or(true, |b| skew < b.0) {
            best = Some((skew, tp.alpha));
        }
    }
    best.map(|b| b.1).ok_or(Error::TurningPairUnavailable(em))
}

/// Action over `Y`, from [`y_turning_point`] to `y = -1`. In the half-plane
/// opposite to the scaling branch the mirrored path to `y = +1` is used,
/// which returns the conjugate of the action at `conj(E)`.
pub fn y_action(e: C, params: &ModelParams) -> Result<C> {
    let sigma = if params.n % 2 == 0 { 1.0 } else { -1.0 };
    if e.im * sigma < 0.0 {
        return Ok(y_action(e.conj(), params)?.conj());
    }
    y_action_from(e, params, y_turning_point(e, params)?, -1.0)
}

pub fn quantization_residual_of(a: C) -> f64 {
    (a + MASLOV).sin().norm() + a.im.abs()
}

/// `|sin(A + pi/4)| + |Im A|` for the action `A` over `Y`.
pub fn complex_quantization_residual(e: C, params: &ModelParams) -> Result<f64> {
    Ok(quantization_residual_of(y_action(e, params)?))
}

/// Complex energy with `A(E) = (4j - 1) pi / 4`, by secant from `seed`.
pub fn complex_quantization_solve(j: u32, params: &ModelParams, seed: C) -> Result<C> {
    let target = (4.0 * j as f64 - 1.0) * PI / 4.0;
    find_root_complex(|e| y_action(e, params).map(|a| a - target).unwrap_or(C::new(f64::NAN, f64::NAN)), seed, 1e-12)
}
