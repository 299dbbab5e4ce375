use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; every
// other node is a 7-point Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of a complex integrand over `[a, b]`
/// to absolute tolerance `tol`, splitting the interval with the largest error
/// estimate until the summed estimate drops below `tol`.
pub fn gauss_kronrod<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<Complex64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, Complex64, f64)> = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        let total: Complex64 = parts.iter().map(|p| p.2).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::QuadratureFailure { tol, estimate: f64::INFINITY });
        }
        if total_err <= tol {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::QuadratureFailure { tol, estimate: total_err });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::QuadratureFailure { tol, estimate: total_err });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Composite Simpson rule on uniformly spaced samples (odd count).
pub fn simpson(samples: &[Complex64], h: f64) -> Complex64 {
    let n = samples.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number (>= 3) of samples");
    let mut acc = samples[0] + samples[n - 1];
    for (i, s) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * s } else { 2.0 * s };
    }
    acc * h / 3.0
}
