//! The complex component of the asymptotic scaling graph: the curve `E(tau)`
//! in the mapped frame that starts at `(-1)^n i` and ends on the positive real
//! axis at `(tau_c, E_c)`. Along it the action between the turning point next
//! to the left wall and the wall itself stays real and equals `tau`.
//!
//! The curve solves
//! `dE/dtau = (2n+1) E / ((2n+3) tau / 2 + sqrt(E - (-1)^n i))`.
//! Internally the square root `w` is carried as the state (so its branch is
//! continuous by construction) and `u = tau^(1/3)` is the independent
//! variable, which removes the `tau^(2/3)` cusp at the seed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    action_integral, brent, parity, Integrator, ModelParams, RkOptions, StepAction, ComplexFunctionQ, ComplexPath, I,
};

type C = Complex64;

/// Default seed offset `delta tau`.
pub const DELTA_TAU: f64 = 1e-6;
/// Samples stored per branch.
pub const BRANCH_SAMPLES: usize = 401;
const TAU_LIMIT: f64 = 100.0;

/// `(-1)^n i`, the start of the branch.
pub fn branch_origin(n: u32) -> C {
    parity(n) * I
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingBranch {
    pub n: u32,
    /// `(tau, E_mapped)` from the seed to `tau_c`.
    pub samples: Vec<(f64, C)>,
    pub tau_c: f64,
    pub e_c: f64,
    /// `|Im E|` decreased monotonically over the samples.
    pub monotone: bool,
}

impl ScalingBranch {
    /// `sqrt(E - (-1)^n i)` on the branch's sheet at sample `k`.
    fn root_at(&self, k: usize) -> C {
        let mut prev = puiseux_root(self.n, self.samples[0].0);
        // samples are dense enough for continuation by proximity
        for &(_, e) in &self.samples[..=k] {
            prev = continue_root(e, self.n, prev);
        }
        prev
    }

    /// `E(tau)` for `0 <= tau <= tau_c`, continued from the nearest sample.
    pub fn eval(&self, tau: f64) -> Result<C> {
        if !(0.0..=self.tau_c * (1.0 + 1e-12)).contains(&tau) {
            return Err(Error::InvalidParams(format!("tau = {tau} outside [0, {}]", self.tau_c)));
        }
        let first = self.samples[0].0;
        if tau <= first {
            return Ok(if tau == 0.0 { branch_origin(self.n) } else { puiseux_seed(self.n, tau) });
        }
        let k = self.samples.partition_point(|s| s.0 <= tau) - 1;
        let (t0, _) = self.samples[k];
        if t0 == tau {
            return Ok(self.samples[k].1);
        }
        let w0 = self.root_at(k);
        let w = integrate_w(self.n, t0.cbrt(), tau.cbrt(), w0, 1e-12, None)?.1;
        Ok(branch_origin(self.n) + w * w)
    }

    /// The full complex component: this branch and its conjugate.
    pub fn conjugate_samples(&self) -> Vec<(f64, C)> {
        self.samples.iter().map(|&(t, e)| (t, e.conj())).collect()
    }
}

/// `(-1)^n i + [3(2n+1) dtau / 2]^(2/3) exp(-(-1)^n i 7pi/3)`, valid for
/// `0 < dtau <= 1e-3`.
pub fn puiseux_seed(n: u32, delta_tau: f64) -> C {
    let w = puiseux_root(n, delta_tau);
    branch_origin(n) + w * w
}

/// The square root of the Puiseux correction on the branch the ODE follows:
/// `[3(2n+1) dtau / 2]^(1/3) exp(-(-1)^n i 7pi/6)`.
pub fn puiseux_root(n: u32, delta_tau: f64) -> C {
    let r = (1.5 * (2 * n + 1) as f64 * delta_tau).cbrt();
    C::from_polar(r, -parity(n) * 7.0 * std::f64::consts::PI / 6.0)
}

/// The root of `E - (-1)^n i` closest to `prev`.
pub fn continue_root(e: C, n: u32, prev: C) -> C {
    let w = (e - branch_origin(n)).sqrt();
    if (w - prev).norm() <= (-w - prev).norm() {
        w
    } else {
        -w
    }
}

/// Right-hand side of the branch ODE with `root = sqrt(E - (-1)^n i)` on the
/// chosen sheet.
pub fn ode_rhs(tau: f64, e: C, root: C, n: u32) -> Result<C> {
    let den = 0.5 * (2 * n + 3) as f64 * tau + root;
    if den.norm() < 1e-12 {
        return Err(Error::SingularDenominator(tau));
    }
    Ok((2 * n + 1) as f64 * e / den)
}

/// `dw/du` with `w = sqrt(E - (-1)^n i)` and `u = tau^(1/3)`.
fn w_rhs(n: u32, u: f64, w: C) -> C {
    let tau = u * u * u;
    let e = branch_origin(n) + w * w;
    let den = 0.5 * (2 * n + 3) as f64 * tau + w;
    (2 * n + 1) as f64 * e / (den * 2.0 * w) * (3.0 * u * u)
}

type WTrajectory = crate::numerics::Trajectory<1>;

/// Integrate `w` in `u` from `u0` to `u1`; with `stop_sign` the run ends at
/// the first step where `Im E` leaves that sign.
fn integrate_w(n: u32, u0: f64, u1: f64, w0: C, tol: f64, stop_sign: Option<f64>) -> Result<(WTrajectory, C)> {
    let opts = RkOptions { rtol: tol, atol: tol, record: stop_sign.is_some(), ..Default::default() };
    let sigma = branch_origin(n);
    let traj = Integrator::new(opts).integrate_with(
        |u, y: &[C; 1]| [w_rhs(n, u, y[0])],
        u0,
        u1,
        [w0],
        |view| match stop_sign {
            Some(s) if (sigma + view.y[0] * view.y[0]).im * s <= 0.0 => StepAction::Stop,
            _ => StepAction::Continue,
        },
    )?;
    let w = traj.y_end[0];
    Ok((traj, w))
}

/// Integrate the branch seeded at `(-1)^n i` up to its real crossing.
pub fn integrate_branch(n: u32, tol: f64) -> Result<ScalingBranch> {
    integrate_branch_with(n, tol, DELTA_TAU, BRANCH_SAMPLES)
}

pub fn integrate_branch_with(n: u32, tol: f64, delta_tau: f64, samples: usize) -> Result<ScalingBranch> {
    if n > 15 {
        return Err(Error::InvalidParams(format!("n = {n} exceeds 15")));
    }
    if !(delta_tau > 0.0 && delta_tau <= 1e-3) {
        return Err(Error::InvalidParams(format!("seed offset {delta_tau} outside (0, 1e-3]")));
    }
    let sigma = branch_origin(n);
    let u0 = delta_tau.cbrt();
    let w0 = puiseux_root(n, delta_tau);
    let (traj, w_end) = integrate_w(n, u0, TAU_LIMIT.cbrt(), w0, tol, Some(sigma.im))?;
    if !traj.stopped_early || (sigma + w_end * w_end).im * sigma.im > 0.0 {
        return Err(Error::NoRealCrossing(TAU_LIMIT));
    }
    let seg = traj.segments.last().expect("recorded run");
    let (a, b) = (seg.t0, seg.t1());
    let im_e = |u: f64| {
        let w = seg.eval(u)[0];
        (sigma + w * w).im
    };
    let u_c = brent(im_e, a.min(b), a.max(b), 1e-15)?;
    let tau_c = u_c.powi(3);
    let w_c = seg.eval(u_c)[0];
    let e_c = (sigma + w_c * w_c).re;

    let samples = samples.max(2);
    let mut pts = Vec::with_capacity(samples);
    for k in 0..samples {
        let u = u0 + (u_c - u0) * k as f64 / (samples - 1) as f64;
        let e = if k == samples - 1 {
            C::new(e_c, 0.0)
        } else {
            let w = traj.eval(u).expect("inside recorded run")[0];
            sigma + w * w
        };
        pts.push((u.powi(3), e));
    }
    let monotone = pts.windows(2).all(|p| p[1].1.im.abs() <= p[0].1.im.abs());
    Ok(ScalingBranch { n, samples: pts, tau_c, e_c, monotone })
}

/// Turning point of `Q = E + (-1)^n i y^(2n+1)` that continues from `y = -1`
/// at the seed, tracked over the samples up to `k`.
fn wall_turning_point(branch: &ScalingBranch, k: usize) -> C {
    let mut alpha = C::new(-1.0, 0.0);
    for &(_, e) in &branch.samples[..=k] {
        let roots = ComplexFunctionQ::new(e, branch.n).roots();
        alpha = roots.into_iter().min_by(|a, b| (a - alpha).norm().total_cmp(&(b - alpha).norm())).unwrap_or(alpha);
    }
    alpha
}

/// `|Im T| + |Re T - tau|` for `T = int_{alpha}^{-1} sqrt(Q) dy` at sample
/// `index`, with the sign of the root chosen so that `Re T >= 0`.
pub fn reality_residual(branch: &ScalingBranch, index: usize) -> Result<f64> {
    let (tau, e) = *branch
        .samples
        .get(index)
        .ok_or_else(|| Error::InvalidParams(format!("sample {index} out of range")))?;
    let alpha = wall_turning_point(branch, index);
    let q = ComplexFunctionQ::new(e, branch.n);
    let t = action_integral(&ComplexPath::segment(alpha, C::new(-1.0, 0.0))?, &q)?;
    let t = if t.re < 0.0 { -t } else { t };
    Ok(t.im.abs() + (t.re - tau).abs())
}

/// `tau(E_j) = (4j - 1) pi hbar / (4 sqrt(g L^(2n+3)))`.
pub fn mode_tau(j: u32, params: &ModelParams) -> f64 {
    (4.0 * j as f64 - 1.0) * std::f64::consts::PI / (4.0 * params.scale())
}

/// Predicted mapped energy of complex mode `j`.
pub fn predict_mode(j: u32, params: &ModelParams, branch: &ScalingBranch) -> Result<C> {
    let tau = mode_tau(j, params);
    if tau >= branch.tau_c {
        return Err(Error::OutOfBranch { j, tau, tau_c: branch.tau_c });
    }
    branch.eval(tau)
}

/// Number of modes `j >= 1` with `tau(E_j) < tau_c`.
pub fn complex_mode_count(params: &ModelParams, branch: &ScalingBranch) -> u32 {
    // tau_j < tau_c  <=>  4j - 1 < 4 tau_c scale / pi
    let bound = 4.0 * branch.tau_c * params.scale() / std::f64::consts::PI;
    let mut j = 0;
    while 4.0 * (j + 1) as f64 - 1.0 < bound {
        j += 1;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{scaling_closed_form, tau_c_n0};
    use std::f64::consts::PI;

    #[test]
    fn rhs_matches_closed_form_derivative() {
        for tau in [1e-3, 0.1, 0.5, 0.8] {
            let e = scaling_closed_form(tau);
            let root = continue_root(e, 0, puiseux_root(0, tau));
            let want = C::from_polar(1.5f64.powf(2.0 / 3.0) * (2.0 / 3.0) * tau.powf(-1.0 / 3.0), -PI / 3.0);
            assert!((ode_rhs(tau, e, root, 0).unwrap() - want).norm() < 1e-8);
        }
        // real inputs, principal root
        let r = ode_rhs(50.0, C::new(30.0, 0.0), C::new(30.0, -1.0).sqrt(), 0).unwrap();
        assert!(r.im.abs() < 0.01 * r.norm());
        assert!(matches!(ode_rhs(0.0, I, C::new(0.0, 0.0), 0), Err(Error::SingularDenominator(_))));
    }

    #[test]
    fn seed_geometry() {
        let dt = 1e-4;
        assert!((puiseux_seed(0, dt) - scaling_closed_form(dt)).norm() < dt.powf(4.0 / 3.0));
        for n in 0..6 {
            let s = puiseux_seed(n, dt);
            assert!((s - branch_origin(n)).norm() < 0.02);
            let r = (1.5 * (2 * n + 1) as f64 * dt).powf(2.0 / 3.0);
            assert!(((s - branch_origin(n)).norm() - r).abs() < 1e-15);
        }
    }

    #[test]
    fn n0_branch_against_closed_form() {
        let b = integrate_branch(0, 1e-9).unwrap();
        assert!((b.tau_c - tau_c_n0()).abs() < 1e-6, "{}", b.tau_c);
        assert!((b.e_c - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        assert!(b.samples.len() >= 400);
        assert!(b.monotone);
        let sup = b.samples.iter().map(|&(t, e)| (e - scaling_closed_form(t)).norm()).fold(0.0, f64::max);
        assert!(sup < 1e-6, "{sup}");
        let mid = b.eval(0.5 * b.tau_c).unwrap();
        assert!((mid - scaling_closed_form(0.5 * b.tau_c)).norm() < 1e-8);
    }

    #[test]
    fn reality_residuals() {
        let b0 = integrate_branch(0, 1e-10).unwrap();
        assert!(reality_residual(&b0, 0).unwrap() < 1e-5);
        assert!(reality_residual(&b0, 200).unwrap() < 1e-6);
        let b1 = integrate_branch(1, 1e-10).unwrap();
        assert!(reality_residual(&b1, 200).unwrap() < 1e-5);
    }

    #[test]
    fn mode_tau_reproduces_airy_branch() {
        let params = ModelParams::unit(0, 1.0, 6.0).unwrap();
        let b = integrate_branch(0, 1e-10).unwrap();
        let kappa = params.l; // g = hbar = 1
        for j in 1..=3 {
            let s = crate::airy::airy_zero_wkb(j);
            let tau = mode_tau(j, &params);
            let tau_s = (2.0 / 3.0) * params.l.powf(-1.5) * s.powf(1.5);
            assert!((tau - tau_s).abs() < 1e-12);
            let want = I + C::from_polar(s / kappa, -PI / 3.0);
            assert!((predict_mode(j, &params, &b).unwrap() - want).norm() < 1e-7);
        }
        let far = ModelParams::unit(0, 1.0, 1.0).unwrap();
        assert!(matches!(predict_mode(1, &far, &b), Err(Error::OutOfBranch { .. })));
    }

    #[test]
    fn mode_count_grows_with_l() {
        let b = integrate_branch(0, 1e-9).unwrap();
        let mut last = 0;
        for l in [1.0, 2.0, 3.0, 5.0, 8.0] {
            let c = complex_mode_count(&ModelParams::unit(0, 1.0, l).unwrap(), &b);
            assert!(c >= last);
            last = c;
        }
        assert!(last > 3);
    }
}
