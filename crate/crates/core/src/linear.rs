//! The linear model `n = 0`, `V = -igx`: exact Airy characteristic
//! determinant, the straight-line complex branches obtained when one Airy
//! factor vanishes (configurations III and X), the threshold for complex
//! eigenvalues, the real box-type quantization and the closed-form scaling
//! branch.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_ai_scaled, airy_zero_wkb, airy_zeros, mu, ScaledAiry};
use crate::error::{Error, Result};
use crate::numerics::{
    action_integral, bisect, find_root_complex, smallest_zeros, zeros_within, ComplexFunctionQ, ComplexPath, ModelParams,
    SearchOptions, SearchResult, I,
};
use crate::scaling::ScalingBranch;

type C = Complex64;

fn require_linear(params: &ModelParams) -> Result<()> {
    if params.n != 0 {
        return Err(Error::WrongModel(params.n));
    }
    Ok(())
}

/// `kappa = hbar^(-2/3) g^(1/3) L` and the Airy arguments at the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMapping {
    pub kappa: f64,
    pub z_plus: C,
    pub z_minus: C,
}

impl LinearMapping {
    pub fn new(e: C, params: &ModelParams) -> Result<Self> {
        require_linear(params)?;
        let kappa = params.hbar.powf(-2.0 / 3.0) * params.g.cbrt() * params.l;
        let em = params.to_mapped(e);
        let rot = C::from_polar(1.0, -PI / 6.0);
        Ok(LinearMapping { kappa, z_plus: rot * kappa * (1.0 - I * em), z_minus: rot * kappa * (-1.0 - I * em) })
    }
}

/// Which two of `Ai(z), Ai(mu z), Ai(mu^2 z)` span the solution space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AiryPairing {
    ZMu,
    ZMu2,
    MuMu2,
}

impl AiryPairing {
    pub const ALL: [AiryPairing; 3] = [AiryPairing::ZMu, AiryPairing::ZMu2, AiryPairing::MuMu2];

    fn factors(self) -> (C, C) {
        let m = mu();
        match self {
            AiryPairing::ZMu => (C::new(1.0, 0.0), m),
            AiryPairing::ZMu2 => (C::new(1.0, 0.0), m * m),
            AiryPairing::MuMu2 => (m, m * m),
        }
    }
}

/// Determinant `w1(z+) w2(z-) - w1(z-) w2(z+)` as `value * exp(log_scale)`,
/// where `exp(log_scale) = |t1| + |t2|` is the size of the two products, so
/// `|value| <= 1` measures the cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharDet {
    pub value: C,
    pub log_scale: f64,
}

impl CharDet {
    /// Unscaled determinant; may overflow for large `kappa`.
    pub fn raw(&self) -> C {
        self.value * self.log_scale.exp()
    }
}

fn product(a: ScaledAiry, b: ScaledAiry) -> (C, f64) {
    (a.mantissa * b.mantissa, a.exponent + b.exponent)
}

pub fn characteristic_det_with(e: C, params: &ModelParams, pairing: AiryPairing) -> Result<CharDet> {
    let map = LinearMapping::new(e, params)?;
    let (c1, c2) = pairing.factors();
    let w1p = airy_ai_scaled(c1 * map.z_plus)?;
    let w1m = airy_ai_scaled(c1 * map.z_minus)?;
    let w2p = airy_ai_scaled(c2 * map.z_plus)?;
    let w2m = airy_ai_scaled(c2 * map.z_minus)?;
    let (m1, e1) = product(w1p, w2m);
    let (m2, e2) = product(w1m, w2p);
    let top = e1.max(e2);
    let (a, b) = (m1 * (e1 - top).exp(), m2 * (e2 - top).exp());
    let s = a.norm() + b.norm();
    if s == 0.0 || !s.is_finite() {
        return Err(Error::OverflowRisk(e));
    }
    Ok(CharDet { value: (a - b) / s, log_scale: top + s.ln() })
}

/// Characteristic determinant with the pairing `{Ai(z), Ai(mu z)}`.
pub fn characteristic_det(e: C, params: &ModelParams) -> Result<CharDet> {
    characteristic_det_with(e, params, AiryPairing::ZMu)
}

/// The `{Ai(z), Ai(mu z)}` determinant equals `e^(2 pi i/3)` times a positive
/// constant times the value at `x = L` of the solution with `psi(-L) = 0`,
/// `psi'(-L) = 1`; that value is real for real `E`. This returns the
/// normalized determinant rotated onto that real line.
pub fn rotated_det(e: C, params: &ModelParams) -> Result<C> {
    Ok(characteristic_det(e, params)?.value * C::from_polar(1.0, -2.0 * PI / 3.0))
}

/// Newton correction `det / (d det / dE)` at `e`: the distance to the nearest
/// root to first order, independent of the determinant's overall size.
pub fn newton_offset(e: C, params: &ModelParams) -> Result<C> {
    let d0 = characteristic_det(e, params)?;
    let h = 1e-6 * e.norm().max(1e-3);
    let rel = |d: CharDet| d.value * (d.log_scale - d0.log_scale).exp();
    let dp = rel(characteristic_det(e + h, params)?);
    let dm = rel(characteristic_det(e - h, params)?);
    let slope = (dp - dm) / (2.0 * h);
    if slope.norm() == 0.0 {
        return Err(Error::NotMonotone(format!("flat determinant at {e}")));
    }
    Ok(d0.value / slope)
}

/// Source of the Airy zeros used for the straight-line branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroSource {
    /// `s_k = [3 pi (4k - 1)/8]^(2/3)`
    Wkb,
    /// Newton-refined zeros of `Ai(-s)`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SshBranch {
    III,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshBranchPoint {
    pub s: f64,
    pub branch: SshBranch,
    pub e_mapped: C,
    pub e_phys: C,
}

/// `kappa = hbar^(-2/3) g^(1/3) L`
pub fn kappa(params: &ModelParams) -> f64 {
    params.hbar.powf(-2.0 / 3.0) * params.g.cbrt() * params.l
}

/// End of the straight-line segment, `s_c = 2 kappa / sqrt(3)`.
pub fn s_c(params: &ModelParams) -> f64 {
    2.0 * kappa(params) / 3f64.sqrt()
}

/// `gL^3` below which the WKB branches carry no complex eigenvalue:
/// `(3/4)^(3/2) (9 hbar pi / 8)^2`.
pub fn ssh_threshold(hbar: f64) -> f64 {
    0.75f64.powf(1.5) * (9.0 * hbar * PI / 8.0).powi(2)
}

pub fn ssh_point(s: f64, branch: SshBranch, params: &ModelParams) -> SshBranchPoint {
    let k = kappa(params);
    let e_mapped = match branch {
        SshBranch::III => I + C::from_polar(s / k, -PI / 3.0),
        SshBranch::X => -I + C::from_polar(s / k, PI / 3.0),
    };
    SshBranchPoint { s, branch, e_mapped, e_phys: params.from_mapped(e_mapped) }
}

/// Conjugate pairs `E(s_k) = +-igL + e^(-+i pi/3) s_k (g hbar)^(2/3)` for every `s_k < s_c`.
pub fn ssh_complex_eigenvalues_with(
    params: &ModelParams,
    source: ZeroSource,
) -> Result<Vec<(SshBranchPoint, SshBranchPoint)>> {
    require_linear(params)?;
    let sc = s_c(params);
    let mut out = Vec::new();
    let exact = match source {
        ZeroSource::Exact => Some(airy_zeros(100)?),
        ZeroSource::Wkb => None,
    };
    for k in 1..=100u32 {
        let s = match &exact {
            Some(z) => z[k as usize - 1],
            None => airy_zero_wkb(k),
        };
        if s >= sc {
            break;
        }
        out.push((ssh_point(s, SshBranch::III, params), ssh_point(s, SshBranch::X, params)));
    }
    Ok(out)
}

/// Straight-line branch predictions from the WKB Airy zeros.
pub fn ssh_complex_eigenvalues(params: &ModelParams) -> Result<Vec<(SshBranchPoint, SshBranchPoint)>> {
    ssh_complex_eigenvalues_with(params, ZeroSource::Wkb)
}

/// Real box-type levels from `hbar^(-1) int_{-L}^{L} sqrt(E + igx) dx = pi j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxQuantization {
    /// `(j, E_j)` with mapped energy `>= 3^(-1/2)`.
    pub levels: Vec<(u32, f64)>,
    /// Number of `j <= j_max` whose solution fell outside that domain.
    pub discarded: usize,
}

/// `int_{-1}^{1} sqrt(E_mapped + i y) dy` along the real segment.
pub fn box_action(e_mapped: f64) -> Result<C> {
    let q = ComplexFunctionQ::new(C::new(e_mapped, 0.0), 0);
    action_integral(&ComplexPath::segment(C::new(-1.0, 0.0), C::new(1.0, 0.0))?, &q)
}

pub fn box_quantization_real(params: &ModelParams, j_max: u32) -> Result<BoxQuantization> {
    require_linear(params)?;
    let scale = params.scale();
    let phase = |em: f64| -> f64 { box_action(em).map(|v| scale * v.re).unwrap_or(f64::NAN) };
    let floor = phase(0.0);
    let mut levels = Vec::new();
    let mut discarded = 0;
    let e_min = 1.0 / 3f64.sqrt();
    for j in 1..=j_max {
        let target = PI * j as f64;
        if floor >= target {
            discarded += 1;
            continue;
        }
        let mut hi = 1.0;
        while phase(hi) < target {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NotMonotone(format!("box action never reaches {target}")));
            }
        }
        let em = bisect(|e| phase(e) - target, 0.0, hi, 1e-15 * hi)?;
        if em >= e_min {
            levels.push((j, params.from_mapped(C::new(em, 0.0)).re));
        } else {
            discarded += 1;
        }
    }
    Ok(BoxQuantization { levels, discarded })
}

/// `tau_c = 2^(5/2) 3^(-7/4)`
pub fn tau_c_n0() -> f64 {
    2f64.powf(2.5) * 3f64.powf(-1.75)
}

/// Closed-form branch `E(tau) = i + e^(-i pi/3) (3 tau/2)^(2/3)`.
pub fn scaling_closed_form(tau: f64) -> C {
    I + C::from_polar((1.5 * tau).powf(2.0 / 3.0), -PI / 3.0)
}

/// The `n = 0` scaling branch sampled at `samples` points on `[0, tau_c]`.
pub fn scaling_graph_n0(samples: usize) -> ScalingBranch {
    let samples = samples.max(2);
    let tc = tau_c_n0();
    let pts = (0..samples)
        .map(|k| {
            let tau = tc * k as f64 / (samples - 1) as f64;
            (tau, scaling_closed_form(tau))
        })
        .collect();
    ScalingBranch { n: 0, samples: pts, tau_c: tc, e_c: 1.0 / 3f64.sqrt(), monotone: true }
}

/// Secant refinement of a characteristic root from `seed`.
pub fn refine_root(seed: C, params: &ModelParams) -> Result<C> {
    require_linear(params)?;
    find_root_complex(|e| rotated_det(e, params).unwrap_or(C::new(f64::NAN, f64::NAN)), seed, 1e-13)
}

/// The `count` exact eigenvalues of smallest modulus, from the zeros of the
/// characteristic determinant.
pub fn exact_spectrum(params: &ModelParams, count: usize) -> Result<Vec<C>> {
    require_linear(params)?;
    let re_min = params.box_level(1);
    let im_max = params.energy_unit();
    let mut opts = SearchOptions::new(re_min, im_max, 2.0 * re_min);
    opts.root_tol = 1e-13;
    let f = |e: C| rotated_det(e, params).unwrap_or(C::new(f64::NAN, f64::NAN));
    let res = smallest_zeros(f, count, &opts)?;
    complete(res)
}

fn complete(res: SearchResult) -> Result<Vec<C>> {
    if res.unresolved > 0 {
        return Err(Error::IncompleteSpectrum { found: res.roots.len() - res.unresolved, expected: res.roots.len() });
    }
    Ok(res.roots)
}

/// All exact eigenvalues with `|E| <= radius`.
pub fn exact_spectrum_within(params: &ModelParams, radius: f64) -> Result<Vec<C>> {
    require_linear(params)?;
    let re_min = params.box_level(1);
    let mut opts = SearchOptions::new(re_min, params.energy_unit(), 2.0 * re_min);
    opts.root_tol = 1e-13;
    let f = |e: C| rotated_det(e, params).unwrap_or(C::new(f64::NAN, f64::NAN));
    complete(zeros_within(f, radius, &opts)?)
}
