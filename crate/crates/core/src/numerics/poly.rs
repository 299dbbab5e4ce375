use num_complex::Complex64;

use crate::error::{Error, Result};

/// Horner evaluation; `coeffs[k]` multiplies `y^k`.
pub fn poly_eval(coeffs: &[Complex64], y: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * y + c)
}

fn poly_eval_with_derivative(coeffs: &[Complex64], y: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * y + p;
        p = p * y + c;
    }
    (p, dp)
}

/// All roots of `sum coeffs[k] y^k` by Aberth-Ehrlich iteration.
///
/// Roots are assumed simple; clustered roots still converge, only more
/// slowly and to reduced accuracy. Degree is capped at 32.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let lead = *coeffs.last().ok_or(Error::DegenerateLeadingCoefficient)?;
    if lead.norm() == 0.0 || !lead.norm().is_finite() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let deg = coeffs.len() - 1;
    if deg > 32 {
        return Err(Error::InvalidParams(format!("polynomial degree {deg} exceeds 32")));
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();

    // Initial guesses on a circle bounded by the Cauchy radius, with a twist
    // to avoid symmetric stalls.
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300).min(radius);
    let r0 = r0.powf(1.0 / deg as f64).max(0.5);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4))
        .collect();

    let mut done = vec![false; deg];
    for _ in 0..500 {
        let mut all = true;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (p, dp) = poly_eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for (k, zk) in z.iter().enumerate() {
                if k != i {
                    s += 1.0 / (z[i] - zk);
                }
            }
            let step = ratio / (1.0 - ratio * s);
            z[i] -= step;
            if step.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    // A couple of plain Newton polishing steps.
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = poly_eval_with_derivative(&monic, *zi);
            if dp.norm() > 0.0 {
                let nz = *zi - p / dp;
                if poly_eval(&monic, nz).norm() <= p.norm() {
                    *zi = nz;
                }
            }
        }
    }
    Ok(z)
}
