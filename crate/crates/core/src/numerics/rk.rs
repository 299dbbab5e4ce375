//! Dormand-Prince 5(4) with the standard fourth-order continuous extension.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Keep accepted states and dense-output segments.
    pub record: bool,
}

impl RkOptions {
    pub fn with_tol(tol: f64) -> Self {
        RkOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions { rtol: 1e-9, atol: 1e-9, h0: None, h_max: f64::INFINITY, max_steps: 1_000_000, record: true }
    }
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    /// Accumulated `ln` of all rescale factors applied before this step.
    pub log_scale: f64,
    rcont: [[C; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` (in the rescaled units of this segment).
    pub fn eval(&self, t: f64) -> [C; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

/// Accepted steps of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[C; N]>,
    pub segments: Vec<DenseSegment<N>>,
    pub t_end: f64,
    pub y_end: [C; N],
    /// Total `ln` of rescale factors applied during the run.
    pub log_scale: f64,
    pub steps: usize,
    pub rhs_evals: usize,
    pub stopped_early: bool,
}

impl<const N: usize> Trajectory<N> {
    /// Dense output at `t`; `None` when nothing was recorded or `t` is outside the run.
    pub fn eval(&self, t: f64) -> Option<[C; N]> {
        let seg = self.segment_at(t)?;
        Some(seg.eval(t))
    }

    pub fn segment_at(&self, t: f64) -> Option<&DenseSegment<N>> {
        let first = self.segments.first()?;
        let forward = first.h > 0.0;
        let idx = if forward {
            self.segments.partition_point(|s| s.t1() < t)
        } else {
            self.segments.partition_point(|s| s.t1() > t)
        };
        let seg = self.segments.get(idx)?;
        let (lo, hi) = if forward { (seg.t0, seg.t1()) } else { (seg.t1(), seg.t0) };
        let slack = 1e-12 * seg.h.abs();
        if t < lo - slack || t > hi + slack {
            return None;
        }
        Some(seg)
    }
}

/// What an observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepAction {
    Continue,
    /// Multiply the state by this positive factor (linear homogeneous systems only).
    Rescale(f64),
    Stop,
}

/// Read-only view of an accepted step handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a, const N: usize> {
    pub t: f64,
    pub y: &'a [C; N],
    pub segment: &'a DenseSegment<N>,
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub opts: RkOptions,
}

fn finite<const N: usize>(v: &[C; N]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[inline]
fn axpy<const N: usize>(y: &[C; N], h: f64, terms: &[(f64, &[C; N])]) -> [C; N] {
    std::array::from_fn(|i| {
        let mut s = C::new(0.0, 0.0);
        for (c, k) in terms {
            s += k[i] * *c;
        }
        y[i] + s * h
    })
}

struct StepResult<const N: usize> {
    y1: [C; N],
    k7: [C; N],
    err: f64,
    rcont: [[C; N]; 5],
}

fn dopri_step<const N: usize, F: FnMut(f64, &[C; N]) -> [C; N]>(
    f: &mut F,
    t: f64,
    y: &[C; N],
    k1: &[C; N],
    h: f64,
    opts: &RkOptions,
) -> Result<StepResult<N>> {
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y1);
    for k in [&k2, &k3, &k4, &k5, &k6, &k7] {
        if !finite(k) {
            return Err(Error::RhsSingular { t });
        }
    }
    let mut acc = 0.0;
    for i in 0..N {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let sc = opts.atol + opts.rtol * y[i].norm().max(y1[i].norm());
        acc += (e.norm() / sc).powi(2);
    }
    let err = (acc / N as f64).sqrt();

    let mut rcont = [[C::new(0.0, 0.0); N]; 5];
    for i in 0..N {
        let dy = y1[i] - y[i];
        let bspl = k1[i] * h - dy;
        rcont[0][i] = y[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - k7[i] * h - bspl;
        rcont[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
    }
    Ok(StepResult { y1, k7, err, rcont })
}

impl Integrator {
    pub fn new(opts: RkOptions) -> Self {
        Integrator { opts }
    }

    pub fn integrate<const N: usize, F>(&self, rhs: F, t0: f64, t1: f64, y0: [C; N]) -> Result<Trajectory<N>>
    where
        F: FnMut(f64, &[C; N]) -> [C; N],
    {
        self.integrate_with(rhs, t0, t1, y0, |_| StepAction::Continue)
    }

    /// Integrate from `t0` to `t1` (either direction), calling `observe` after
    /// every accepted step.
    pub fn integrate_with<const N: usize, F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        t1: f64,
        y0: [C; N],
        mut observe: O,
    ) -> Result<Trajectory<N>>
    where
        F: FnMut(f64, &[C; N]) -> [C; N],
        O: FnMut(StepView<'_, N>) -> StepAction,
    {
        let opts = &self.opts;
        let span = (t1 - t0).abs();
        if !(span.is_finite()) || !finite(&y0) {
            return Err(Error::IntegrationFailure("non-finite input".into()));
        }
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut traj = Trajectory {
            t: Vec::new(),
            y: Vec::new(),
            segments: Vec::new(),
            t_end: t0,
            y_end: y0,
            log_scale: 0.0,
            steps: 0,
            rhs_evals: 0,
            stopped_early: false,
        };
        if opts.record {
            traj.t.push(t0);
            traj.y.push(y0);
        }
        if span == 0.0 {
            return Ok(traj);
        }

        let mut evals = 0usize;
        let mut f = |t: f64, y: &[C; N]| {
            evals += 1;
            rhs(t, y)
        };

        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        if !finite(&k1) {
            return Err(Error::RhsSingular { t });
        }
        let mut h = match opts.h0 {
            Some(h0) => h0.abs().min(span),
            None => {
                let yn = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let fn_ = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let tol = opts.atol + opts.rtol * yn;
                if fn_ > 0.0 {
                    (0.1 * tol.powf(0.2) * (yn.max(tol)) / fn_).min(0.01 * span).max(1e-6 * span)
                } else {
                    0.01 * span
                }
            }
        }
        .min(opts.h_max);
        let h_min = 1e-14 * span;

        loop {
            let remaining = (t1 - t) * dir;
            if remaining <= 1e-15 * span {
                break;
            }
            if traj.steps >= opts.max_steps {
                return Err(Error::IntegrationFailure(format!("step budget {} exhausted at t = {t}", opts.max_steps)));
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;
            let step = dopri_step(&mut f, t, &y, &k1, hs, opts)?;
            let err = step.err;
            if !err.is_finite() {
                h *= 0.1;
                if h < h_min {
                    return Err(Error::StepUnderflow { t });
                }
                continue;
            }
            if err <= 1.0 {
                let t_new = if last { t1 } else { t + hs };
                let seg = DenseSegment { t0: t, h: t_new - t, log_scale: traj.log_scale, rcont: step.rcont };
                t = t_new;
                y = step.y1;
                k1 = step.k7;
                traj.steps += 1;
                let action = observe(StepView { t, y: &y, segment: &seg });
                if opts.record {
                    traj.t.push(t);
                    traj.y.push(y);
                    traj.segments.push(seg);
                }
                match action {
                    StepAction::Continue => {}
                    StepAction::Rescale(s) => {
                        for v in y.iter_mut() {
                            *v *= s;
                        }
                        for v in k1.iter_mut() {
                            *v *= s;
                        }
                        traj.log_scale += s.ln();
                    }
                    StepAction::Stop => {
                        traj.stopped_early = true;
                        break;
                    }
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * fac).min(opts.h_max);
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < h_min {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        traj.t_end = t;
        traj.y_end = y;
        traj.rhs_evals = evals;
        Ok(traj)
    }
}

/// Adaptive DP5(4) from `t0` to `t1` with relative and absolute tolerance `tol`.
pub fn rk_adaptive<const N: usize, F>(rhs: F, t0: f64, t1: f64, y0: [C; N], tol: f64) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[C; N]) -> [C; N],
{
    Integrator::new(RkOptions::with_tol(tol)).integrate(rhs, t0, t1, y0)
}
