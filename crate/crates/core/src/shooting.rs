//! Reference spectra by bidirectional shooting on `[-L, L]` with Dirichlet
//! walls, for every `n`.
//!
//! The left solution starts at `x = -L` with `(psi, psi') = (0, 1)`, the right
//! one at `x = +L` with `(0, 1)`. For the residual both are continued along
//! straight complex segments to a matching point `x_m` on the imaginary axis;
//! the Wronskian does not depend on the path, and off the real axis the two
//! wall solutions stay balanced where on it one of them swamps the other by
//! many orders. Amplitudes are renormalized by positive factors on the way,
//! which leaves the phase of the Wronskian untouched. The residual divides it
//! by the peak amplitudes of both sides, so it is bounded, continuous in `E`,
//! real on the real axis and satisfies `r(conj E) = conj r(E)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    parity, simpson, smallest_zeros, zeros_within, Integrator, ModelParams, RkOptions, SearchOptions, StepAction,
    Trajectory, I,
};
use crate::scaling::integrate_branch;
use crate::stokes::relevant_turning_point;

type C = Complex64;

/// Rescale the state once `max(|psi|, L |psi'|)` exceeds this.
pub const RENORM_THRESHOLD: f64 = 1e100;
/// Relative `|Im E| / |E|` below which an eigenvalue counts as real.
pub const TOL_REAL: f64 = 1e-8;
/// Relative half-width around `E_c` treated as the transition region.
pub const TRANSITION_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Integrator tolerance per unit length.
    pub tol: f64,
    /// Residual tolerance for accepted eigenvalues.
    pub root_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { tol: 1e-11, root_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Box type, real, `E_mapped > E_c`.
    BT,
    /// Bohr-Sommerfeld type, real, `E_mapped < E_c`.
    BS,
    /// On the complex component of the scaling graph.
    CO,
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub j: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub e: C,
    pub e_mapped: C,
    pub regime: Regime,
}

/// Endpoint `E_c` of the complex scaling branch for `n`, computed once.
pub fn branch_end(n: u32) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&n) {
        return Ok(*v);
    }
    let ec = integrate_branch(n, 1e-10)?.e_c;
    cache.lock().expect("cache lock").insert(n, ec);
    Ok(ec)
}

pub fn classify(e: C, params: &ModelParams) -> Result<Regime> {
    if params.is_empty_box() {
        return Ok(Regime::BT);
    }
    let em = params.to_mapped(e);
    let ec = branch_end(params.n)?;
    if (em - ec).norm() <= TRANSITION_WIDTH * ec {
        return Ok(Regime::Transition);
    }
    Ok(if e.im.abs() > TOL_REAL * e.norm() {
        Regime::CO
    } else if em.re > ec {
        Regime::BT
    } else {
        Regime::BS
    })
}

fn rhs_fn(params: &ModelParams, e: C) -> impl Fn(f64, &[C; 2]) -> [C; 2] + '_ {
    // psi'' = (V - E) psi / hbar^2, V = -g (ix)^(2n+1) = -g (-1)^n i x^(2n+1)
    let c = -params.g * parity(params.n) * I;
    let deg = params.degree() as i32;
    let inv_h2 = 1.0 / (params.hbar * params.hbar);
    move |x: f64, y: &[C; 2]| [y[1], (c * x.powi(deg) - e) * inv_h2 * y[0]]
}

fn amplitude(y: &[C; 2], l: f64) -> f64 {
    y[0].norm().max(l * y[1].norm())
}

/// One side of the shot on the real axis, from the wall at `from` to `x = 0`.
fn shoot_side(params: &ModelParams, e: C, from: f64, opts: &ShootingOptions, record: bool) -> Result<Trajectory<2>> {
    let l = params.l;
    let rk = RkOptions { rtol: opts.tol, atol: opts.tol * 1e-3, record, ..Default::default() };
    Integrator::new(rk)
        .integrate_with(rhs_fn(params, e), from, 0.0, [C::new(0.0, 0.0), C::new(1.0, 0.0)], |view| {
            let a = amplitude(view.y, l);
            if a > RENORM_THRESHOLD {
                StepAction::Rescale(1.0 / a)
            } else {
                StepAction::Continue
            }
        })
        .map_err(integration_error)
}

fn integration_error(e: Error) -> Error {
    match e {
        Error::IntegrationFailure(_) => e,
        other => Error::IntegrationFailure(other.to_string()),
    }
}

/// Matching point `i c L`: `c` is `Im` of the relevant turning point at
/// `|E_mapped|` up to `E_c` and decays like `E_c / |E_mapped|` beyond.
fn matching_point(e: C, params: &ModelParams) -> Result<C> {
    if params.is_empty_box() {
        return Ok(C::new(0.0, 0.0));
    }
    let n = params.n;
    let em = params.to_mapped(e).norm();
    let ec = branch_end(n)?;
    let unit = relevant_turning_point(1.0, n)?.im;
    let c = unit * em.min(ec).powf(1.0 / (2 * n + 1) as f64) * (ec / em).min(1.0);
    Ok(C::new(0.0, c * params.l))
}

/// Cauchy data `(psi, psi')` at `to` of the solution leaving the wall at
/// `from` with `(0, 1)`, and the peak of `max(|psi|, L |psi'|)` on the way,
/// both in the units of the final state.
fn shoot_to(params: &ModelParams, e: C, from: f64, to: C, opts: &ShootingOptions) -> Result<([C; 2], f64)> {
    let l = params.l;
    let start = C::new(from, 0.0);
    let d = to - start;
    let rk = RkOptions { rtol: opts.tol, atol: opts.tol * 1e-3, ..Default::default() };
    let c = -params.g * parity(params.n) * I;
    let deg = params.degree() as i32;
    let inv_h2 = 1.0 / (params.hbar * params.hbar);
    let rhs = |t: f64, y: &[C; 2]| {
        let x = start + d * t;
        [d * y[1], d * (c * x.powi(deg) - e) * inv_h2 * y[0]]
    };
    let y0 = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
    let mut peak = amplitude(&y0, l);
    let traj = Integrator::new(rk)
        .integrate_with(rhs, 0.0, 1.0, y0, |view| {
            let a = amplitude(view.y, l);
            peak = peak.max(a);
            if a > RENORM_THRESHOLD {
                peak /= a;
                StepAction::Rescale(1.0 / a)
            } else {
                StepAction::Continue
            }
        })
        .map_err(integration_error)?;
    Ok((traj.y_end, peak))
}

/// Matching Wronskian `psi_L psi'_R - psi_R psi'_L` at the matching point,
/// normalized by the peak amplitudes `max(|psi|, L |psi'|)` of both sides and
/// multiplied by `L`.
pub fn shoot_residual(e: C, params: &ModelParams) -> Result<C> {
    shoot_residual_with(e, params, &ShootingOptions::default())
}

pub fn shoot_residual_with(e: C, params: &ModelParams, opts: &ShootingOptions) -> Result<C> {
    if !(e.re.is_finite() && e.im.is_finite()) {
        return Err(Error::IntegrationFailure(format!("non-finite energy {e}")));
    }
    let l = params.l;
    let xm = matching_point(e, params)?;
    let (a, peak_l) = shoot_to(params, e, -l, xm, opts)?;
    let (b, peak_r) = shoot_to(params, e, l, xm, opts)?;
    let w = a[0] * b[1] - b[0] * a[1];
    Ok(w * l / (peak_l * peak_r))
}

fn search_options(params: &ModelParams, opts: &ShootingOptions) -> SearchOptions {
    let re_min = params.box_level(1);
    let mut s = SearchOptions::new(re_min, params.energy_unit(), 2.0 * re_min);
    s.root_tol = opts.root_tol * 1e-2;
    s
}

fn records(mut roots: Vec<C>, params: &ModelParams) -> Result<Vec<EigenvalueRecord>> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
    roots
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            Ok(EigenvalueRecord {
                j: k + 1,
                l: params.l,
                e,
                e_mapped: if params.is_empty_box() { e } else { params.to_mapped(e) },
                regime: classify(e, params)?,
            })
        })
        .collect()
}

/// Zeros are certified by their winding number. Complex modes far off the
/// axis sit in vortices too small for the residual to resolve, so only real
/// zeros are held to the flat tolerance.
fn check_residuals(roots: &[C], params: &ModelParams, opts: &ShootingOptions) -> Result<()> {
    for &e in roots {
        let r = shoot_residual_with(e, params, opts)?.norm();
        if !r.is_finite() || (e.im == 0.0 && r > opts.root_tol) {
            return Err(Error::NoConvergence { best: e, residual: r });
        }
    }
    Ok(())
}

/// The `count` eigenvalues of smallest modulus, ordered by `Re E` (complex
/// partners with `Im E > 0` first) and numbered from 1.
pub fn find_spectrum(params: &ModelParams, count: usize) -> Result<Vec<EigenvalueRecord>> {
    find_spectrum_with(params, count, &ShootingOptions::default())
}

pub fn find_spectrum_with(params: &ModelParams, count: usize, opts: &ShootingOptions) -> Result<Vec<EigenvalueRecord>> {
    if !params.is_empty_box() {
        params.validate()?;
    }
    if count > 60 {
        return Err(Error::InvalidParams(format!("count {count} exceeds 60")));
    }
    let f = |e: C| shoot_residual_with(e, params, opts).unwrap_or(C::new(f64::NAN, f64::NAN));
    let res = smallest_zeros(f, count, &search_options(params, opts))?;
    if res.unresolved > 0 {
        return Err(Error::IncompleteSpectrum { found: res.roots.len() - res.unresolved, expected: count });
    }
    check_residuals(&res.roots, params, opts)?;
    records(res.roots, params)
}

/// Every eigenvalue with `|E| <= radius`.
pub fn find_spectrum_within(params: &ModelParams, radius: f64) -> Result<Vec<EigenvalueRecord>> {
    if !params.is_empty_box() {
        params.validate()?;
    }
    let opts = ShootingOptions::default();
    let f = |e: C| shoot_residual_with(e, params, &opts).unwrap_or(C::new(f64::NAN, f64::NAN));
    let res = zeros_within(f, radius, &search_options(params, &opts))?;
    if res.unresolved > 0 {
        return Err(Error::IncompleteSpectrum { found: res.roots.len() - res.unresolved, expected: res.roots.len() });
    }
    check_residuals(&res.roots, params, &opts)?;
    records(res.roots, params)
}

/// Eigenvalue branches continued over an `L` ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    pub l_grid: Vec<f64>,
    /// `branches[b][k]`: energy of branch `b` at `l_grid[k]`.
    pub branches: Vec<Vec<C>>,
    /// `(k, a, b)`: branches `a` and `b` turned from a real pair at
    /// `l_grid[k-1]` into a conjugate pair at `l_grid[k]`.
    pub births: Vec<(usize, usize, usize)>,
    /// Some assignment was ambiguous (second-best match within twice the best).
    pub swap_suspected: bool,
}

impl BranchTable {
    pub fn mapped(&self, base: &ModelParams) -> Vec<Vec<C>> {
        self.branches
            .iter()
            .map(|b| {
                b.iter()
                    .zip(&self.l_grid)
                    .map(|(e, &l)| e / (base.g * l.powi(base.degree() as i32)))
                    .collect()
            })
            .collect()
    }
}

/// Spectra at every `L` (in parallel), then branch identity by nearest
/// neighbour in the mapped plane.
pub fn track_branches(base: &ModelParams, l_grid: &[f64], count: usize) -> Result<BranchTable> {
    if l_grid.len() < 2 || l_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("L grid must be ascending with at least two points".into()));
    }
    let spectra: Vec<Vec<C>> = l_grid
        .par_iter()
        .map(|&l| {
            let p = ModelParams { l, ..*base };
            find_spectrum(&p, count).map(|r| r.into_iter().map(|x| x.e_mapped).collect())
        })
        .collect::<Result<_>>()?;

    let mut branches: Vec<Vec<C>> = spectra[0].iter().map(|&e| vec![e]).collect();
    let mut swap_suspected = false;
    let mut births = Vec::new();
    for k in 1..l_grid.len() {
        let next = &spectra[k];
        let mut taken = vec![false; next.len()];
        // pairs sorted by distance; greedy assignment
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (b, br) in branches.iter().enumerate() {
            let prev = *br.last().expect("non-empty branch");
            for (m, &e) in next.iter().enumerate() {
                pairs.push(((e - prev).norm(), b, m));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut assigned = vec![None; branches.len()];
        for &(d, b, m) in &pairs {
            if assigned[b].is_none() && !taken[m] {
                assigned[b] = Some((m, d));
                taken[m] = true;
            }
        }
        for (b, a) in assigned.iter().enumerate() {
            if let Some((m, d)) = *a {
                let prev = *branches[b].last().expect("non-empty branch");
                let second = next
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != m)
                    .map(|(_, e)| (e - prev).norm())
                    .fold(f64::INFINITY, f64::min);
                // conjugate partners are equidistant from a real parent
                let partner = next[m].im != 0.0 && next.iter().any(|e| (e - next[m].conj()).norm() < 1e-12);
                if second < 2.0 * d && !partner {
                    swap_suspected = true;
                }
            }
        }
        let mut new_branches = Vec::with_capacity(branches.len());
        for (b, a) in assigned.iter().enumerate() {
            if let Some((m, _)) = *a {
                let mut br = branches[b].clone();
                br.push(next[m]);
                new_branches.push(br);
            }
        }
        branches = new_branches;
        let reals_before: Vec<bool> = branches.iter().map(|b| b[k - 1].im == 0.0).collect();
        for a in 0..branches.len() {
            for b in (a + 1)..branches.len() {
                let (ea, eb) = (branches[a][k], branches[b][k]);
                if reals_before[a] && reals_before[b] && ea.im != 0.0 && (ea - eb.conj()).norm() < 1e-9 * ea.norm() {
                    births.push((k, a, b));
                }
            }
        }
    }
    Ok(BranchTable { l_grid: l_grid.to_vec(), branches, births, swap_suspected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub grid: Vec<f64>,
    pub psi: Vec<C>,
    pub e: C,
    /// `int |psi|^2 / |int psi^2|`
    pub kappa_proj: f64,
    /// Change of `kappa_proj` between the grid and one of half the spacing.
    pub richardson_delta: f64,
}

/// Default number of grid points (odd, for Simpson).
pub const EIGENFUNCTION_POINTS: usize = 2001;

/// Samples in log form: `psi = m * exp(s)`.
fn side_samples(traj: &Trajectory<2>, xs: &[f64]) -> Vec<([C; 2], f64)> {
    xs.iter()
        .map(|&x| {
            let seg = traj.segment_at(x).expect("grid inside the shot");
            (seg.eval(x), -seg.log_scale)
        })
        .collect()
}

fn assemble(params: &ModelParams, e: C, points: usize) -> Result<(Vec<f64>, Vec<C>)> {
    let opts = ShootingOptions::default();
    let l = params.l;
    let points = points.max(5) | 1;
    let h = 2.0 * l / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|k| -l + h * k as f64).collect();
    let mid = points / 2;
    let left = shoot_side(params, e, -l, &opts, true)?;
    let right = shoot_side(params, e, l, &opts, true)?;
    let mut ls = side_samples(&left, &xs[..=mid]);
    let rs = side_samples(&right, &xs[mid..]);
    // least-squares match of the Cauchy data (psi, L psi') at x = 0
    let ((yl, sl), (yr, sr)) = (ls[mid], rs[0]);
    let den = yr[0].norm_sqr() + (l * yr[1]).norm_sqr();
    if den == 0.0 {
        return Err(Error::NormalizationDegenerate);
    }
    let ratio = (yr[0].conj() * yl[0] + (l * yr[1]).conj() * (l * yl[1])) / den;
    let shift = sl - sr;
    ls.pop();
    let mut logs: Vec<(C, f64)> = ls.iter().map(|(y, s)| (y[0], *s)).collect();
    logs.extend(rs.iter().map(|(y, s)| (y[0] * ratio, s + shift)));
    let top = logs.iter().filter(|(m, _)| m.norm() > 0.0).map(|(m, s)| m.norm().ln() + s).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::NormalizationDegenerate);
    }
    let psi: Vec<C> = logs.iter().map(|(m, s)| m * (s - top).exp()).collect();
    Ok((xs, psi))
}

fn kappa_of(psi: &[C], h: f64) -> Result<(f64, f64)> {
    let abs2: Vec<C> = psi.iter().map(|z| C::new(z.norm_sqr(), 0.0)).collect();
    let sq: Vec<C> = psi.iter().map(|z| z * z).collect();
    let norm = simpson(&abs2, h).re;
    if norm < 1e-300 {
        return Err(Error::NormalizationDegenerate);
    }
    let bil = simpson(&sq, h).norm();
    if bil == 0.0 {
        return Ok((norm, f64::INFINITY));
    }
    Ok((norm, norm / bil))
}

/// Normalized eigenfunction on a uniform grid and its projector norm.
pub fn eigenfunction_and_kappa(e: C, params: &ModelParams) -> Result<Eigenfunction> {
    eigenfunction_with(e, params, EIGENFUNCTION_POINTS)
}

pub fn eigenfunction_with(e: C, params: &ModelParams, points: usize) -> Result<Eigenfunction> {
    let (grid, mut psi) = assemble(params, e, points)?;
    let h = grid[1] - grid[0];
    let (norm, kappa) = kappa_of(&psi, h)?;
    let (fine_grid, fine) = assemble(params, e, 2 * grid.len() - 1)?;
    let (_, kappa_fine) = kappa_of(&fine, fine_grid[1] - fine_grid[0])?;
    let s = 1.0 / norm.sqrt();
    for z in psi.iter_mut() {
        *z *= s;
    }
    Ok(Eigenfunction { grid, psi, e, kappa_proj: kappa, richardson_delta: (kappa_fine - kappa).abs() })
}
