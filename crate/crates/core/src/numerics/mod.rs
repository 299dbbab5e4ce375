//! Shared numerical kernels: model parameters, the rescaled turning-point
//! function `Q`, branch-continuous `sqrt(Q)` along complex paths, quadrature,
//! polynomial and scalar root finding, and an adaptive Runge-Kutta integrator.
//!
//! Everything in here works in the dimensionless frame `y = x/L`,
//! `E_mapped = E / (g L^(2n+1))`; physical units only appear in
//! [`ModelParams`] conversions.

mod path;
mod poly;
mod quad;
mod rk;
mod roots;
mod spectral;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use path::{action_integral, action_integral_tol, sqrt_q_continued, ComplexPath};
pub use poly::{poly_eval, poly_roots};
pub use quad::{gauss_kronrod, simpson};
pub use rk::{rk_adaptive, DenseSegment, Integrator, RkOptions, StepAction, StepView, Trajectory};
pub use roots::{bisect, brent, find_root_complex, find_root_complex_pair, RectZeroFinder, ZeroCluster};
pub use spectral::{smallest_zeros, zeros_within, SearchOptions, SearchResult};

/// Distance (in the `y` plane) below which a point counts as sitting on a turning point.
pub const TOL_TP: f64 = 1e-6;
/// Absolute tolerance for action integrals.
pub const TOL_QUAD: f64 = 1e-10;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(-1)^n`
#[inline]
pub fn parity(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One truncated model instance `H = p^2 - g (ix)^(2n+1)` on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub g: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub hbar: f64,
}

impl ModelParams {
    pub fn new(n: u32, g: f64, l: f64, hbar: f64) -> Result<Self> {
        let p = ModelParams { n, g, l, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Shorthand for `hbar = 1`.
    pub fn unit(n: u32, g: f64, l: f64) -> Result<Self> {
        Self::new(n, g, l, 1.0)
    }

    /// The empty box (`g = 0`). Only the shooting route accepts it; mapped
    /// energies are undefined.
    pub fn empty_box(l: f64, hbar: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0 && hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParams(format!("L = {l}, hbar = {hbar}")));
        }
        Ok(ModelParams { n: 0, g: 0.0, l, hbar })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.g.is_finite()
            && self.l.is_finite()
            && self.hbar.is_finite()
            && self.g > 0.0
            && self.l > 0.0
            && self.hbar > 0.0;
        if !ok {
            return Err(Error::InvalidParams(format!(
                "g = {}, L = {}, hbar = {} must be finite and positive",
                self.g, self.l, self.hbar
            )));
        }
        if self.n > 15 {
            return Err(Error::InvalidParams(format!("n = {} exceeds 15", self.n)));
        }
        let s = self.scale();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParams(format!("scale factor {s} not finite")));
        }
        Ok(())
    }

    pub fn degree(&self) -> u32 {
        2 * self.n + 1
    }

    pub fn is_empty_box(&self) -> bool {
        self.g == 0.0
    }

    /// `hbar^-1 g^(1/2) L^((2n+3)/2)`: converts dimensionless actions to physical ones.
    pub fn scale(&self) -> f64 {
        self.g.sqrt() * self.l.powf((2 * self.n + 3) as f64 / 2.0) / self.hbar
    }

    /// `g L^(2n+1)`, the energy unit of the mapped frame.
    pub fn energy_unit(&self) -> f64 {
        self.g * self.l.powi(self.degree() as i32)
    }

    pub fn to_mapped(&self, e: Complex64) -> Complex64 {
        e / self.energy_unit()
    }

    pub fn from_mapped(&self, em: Complex64) -> Complex64 {
        em * self.energy_unit()
    }

    /// Physical potential `V(x) = -g (ix)^(2n+1)`.
    pub fn potential(&self, x: f64) -> Complex64 {
        // (ix)^(2n+1) = i (-1)^n x^(2n+1)
        -self.g * parity(self.n) * I * x.powi(self.degree() as i32)
    }

    /// Empty-box level `pi^2 hbar^2 j^2 / (4 L^2)`.
    pub fn box_level(&self, j: u32) -> f64 {
        let j = j as f64;
        std::f64::consts::PI.powi(2) * self.hbar.powi(2) * j * j / (4.0 * self.l * self.l)
    }
}

/// `Q(y) = E_mapped + i (-1)^n y^(2n+1)`, the rescaled `E - V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFunctionQ {
    pub energy: Complex64,
    pub n: u32,
    coupled: bool,
}

impl ComplexFunctionQ {
    pub fn new(energy: Complex64, n: u32) -> Self {
        ComplexFunctionQ { energy, n, coupled: true }
    }

    /// Test hook: `Q == energy` with the potential term switched off.
    pub fn constant(energy: Complex64) -> Self {
        ComplexFunctionQ { energy, n: 0, coupled: false }
    }

    pub fn is_constant(&self) -> bool {
        !self.coupled
    }

    pub fn degree(&self) -> u32 {
        2 * self.n + 1
    }

    #[inline]
    pub fn eval(&self, y: Complex64) -> Complex64 {
        if !self.coupled {
            return self.energy;
        }
        self.energy + parity(self.n) * I * y.powu(self.degree())
    }

    pub fn derivative(&self, y: Complex64) -> Complex64 {
        if !self.coupled {
            return Complex64::new(0.0, 0.0);
        }
        parity(self.n) * I * (self.degree() as f64) * y.powu(2 * self.n)
    }

    /// The `2n+1` turning points: roots of `y^(2n+1) = i (-1)^n E_mapped`,
    /// sorted by argument in `(-pi, pi]`.
    pub fn roots(&self) -> Vec<Complex64> {
        if !self.coupled || self.energy.norm() == 0.0 {
            return Vec::new();
        }
        let d = self.degree();
        let rhs = parity(self.n) * I * self.energy;
        let r = rhs.norm().powf(1.0 / d as f64);
        let base = rhs.arg() / d as f64;
        let mut out: Vec<Complex64> = (0..d)
            .map(|k| {
                let a = base + 2.0 * std::f64::consts::PI * k as f64 / d as f64;
                Complex64::from_polar(r, a)
            })
            .collect();
        out.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        out
    }
}
