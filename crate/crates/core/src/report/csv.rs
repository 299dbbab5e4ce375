//! CSV tables. Floats use the shortest round-trip representation, so equal
//! bundles give equal bytes.

use std::fmt::Write;

use super::bundle::{SecularLevels, SpectrumRecord};
use crate::scaling::ScalingBranch;

/// Column set version 1.
pub const SPECTRUM_HEADER: &str = "n,g,L,hbar,j,Re_E,Im_E,Re_Emapped,Im_Emapped,regime,residual";
pub const SCALING_HEADER: &str = "n,tau,Re_E,Im_E";
pub const SECULAR_HEADER: &str = "n,g,L,hbar,kind,j,E";

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn spectrum_csv<'a>(records: impl IntoIterator<Item = &'a SpectrumRecord>) -> String {
    let mut s = format!("{SPECTRUM_HEADER}\n");
    for r in records {
        let (p, e) = (&r.params, &r.record);
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{:?},{}",
            p.n,
            num(p.g),
            num(p.l),
            num(p.hbar),
            e.j,
            num(e.e.re),
            num(e.e.im),
            num(e.e_mapped.re),
            num(e.e_mapped.im),
            e.regime,
            num(r.residual)
        )
        .expect("string write");
    }
    s
}

/// Samples of every branch, then one footer line `#tau_c,E_c` per branch.
pub fn scaling_csv<'a>(branches: impl IntoIterator<Item = &'a ScalingBranch> + Clone) -> String {
    let mut s = format!("{SCALING_HEADER}\n");
    for b in branches.clone() {
        for (t, e) in &b.samples {
            writeln!(s, "{},{},{},{}", b.n, num(*t), num(e.re), num(e.im)).expect("string write");
        }
    }
    for b in branches {
        writeln!(s, "#tau_c,E_c,{},{},{}", b.n, num(b.tau_c), num(b.e_c)).expect("string write");
    }
    s
}

pub fn secular_csv<'a>(levels: impl IntoIterator<Item = &'a SecularLevels>) -> String {
    let mut s = format!("{SECULAR_HEADER}\n");
    for lv in levels {
        let p = &lv.params;
        for (kind, list) in [("BT", &lv.bt), ("BS", &lv.bs)] {
            for &(j, e) in list {
                writeln!(s, "{},{},{},{},{kind},{j},{}", p.n, num(p.g), num(p.l), num(p.hbar), num(e)).expect("string write");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ModelParams;
    use crate::report::bundle::Source;
    use crate::shooting::{EigenvalueRecord, Regime};
    use num_complex::Complex64 as C;

    #[test]
    fn golden_headers() {
        assert_eq!(spectrum_csv(&Vec::<SpectrumRecord>::new()), "n,g,L,hbar,j,Re_E,Im_E,Re_Emapped,Im_Emapped,regime,residual\n");
        assert_eq!(scaling_csv(&Vec::<ScalingBranch>::new()), "n,tau,Re_E,Im_E\n");
        assert_eq!(secular_csv(&Vec::<SecularLevels>::new()), "n,g,L,hbar,kind,j,E\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-300, 4.1857360998774057e-16, 1.0 / 3.0, 6.02e23, -1e-4] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(4.1857360998774057e-16), "4.1857360998774057e-16");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn spectrum_row_round_trips() {
        let p = ModelParams::unit(1, 1.0, 3.0).unwrap();
        let e = C::new(0.1 + 0.2, -1.0 / 3.0);
        let r = SpectrumRecord {
            params: p,
            record: EigenvalueRecord { j: 4, l: 3.0, e, e_mapped: p.to_mapped(e), regime: Regime::CO },
            residual: 1e-12,
            source: Source::Shooting,
        };
        let text = spectrum_csv([&r]);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[4], "4");
        assert_eq!(row[5].parse::<f64>().unwrap(), e.re);
        assert_eq!(row[6].parse::<f64>().unwrap(), e.im);
        assert_eq!(row[9], "CO");
    }
}
