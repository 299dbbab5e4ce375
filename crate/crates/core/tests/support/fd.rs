//! Finite-difference eigenvalue oracle, independent of the shooting code.
//!
//! `-hbar^2 psi'' + V psi = E psi` on `[-L, L]` with Dirichlet walls becomes a
//! complex-symmetric tridiagonal matrix on a uniform interior grid. Single
//! eigenvalues are refined by Rayleigh-quotient inverse iteration from a seed,
//! and two grids with halved spacing are Richardson-combined.

use num_complex::Complex64 as C;

pub struct Grid {
    pub diag: Vec<C>,
    pub off: f64,
}

impl Grid {
    /// `points` interior nodes with spacing `2L / (points + 1)`.
    pub fn new(potential: impl Fn(f64) -> C, l: f64, hbar: f64, points: usize) -> Self {
        let h = 2.0 * l / (points + 1) as f64;
        let k = hbar * hbar / (h * h);
        let diag = (1..=points).map(|i| C::new(2.0 * k, 0.0) + potential(-l + i as f64 * h)).collect();
        Grid { diag, off: -k }
    }

    fn apply(&self, v: &[C]) -> Vec<C> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(A - sigma) x = b` by the Thomas recursion.
    fn solve_shifted(&self, sigma: C, b: &[C]) -> Vec<C> {
        let n = b.len();
        let mut c = vec![C::new(0.0, 0.0); n];
        let mut d = vec![C::new(0.0, 0.0); n];
        let a = C::new(self.off, 0.0);
        let mut m = self.diag[0] - sigma;
        c[0] = a / m;
        d[0] = b[0] / m;
        for i in 1..n {
            m = self.diag[i] - sigma - a * c[i - 1];
            c[i] = a / m;
            d[i] = (b[i] - a * d[i - 1]) / m;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        x
    }

    /// Bilinear Rayleigh quotient `v^T A v / v^T v`.
    fn rayleigh(&self, v: &[C]) -> C {
        let av = self.apply(v);
        let num: C = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let den: C = v.iter().map(|a| a * a).sum();
        num / den
    }

    /// Eigenvalue nearest `seed`: three inverse-iteration sweeps at the fixed
    /// shift, then Rayleigh-quotient updates until the shift stalls.
    pub fn eigenvalue_near(&self, seed: C) -> Option<C> {
        let n = self.diag.len();
        // smooth start vector with both parities present
        let mut v: Vec<C> = (0..n)
            .map(|i| {
                let t = (i + 1) as f64 / (n + 1) as f64;
                C::new((std::f64::consts::PI * t).sin() * (1.0 + 0.3 * t), 0.1 * t)
            })
            .collect();
        let mut sigma = seed;
        let mut lambda = seed;
        for it in 0..60 {
            let w = self.solve_shifted(sigma, &v);
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return None;
            }
            v = w.into_iter().map(|z| z / norm).collect();
            let next = self.rayleigh(&v);
            let done = (next - lambda).norm() <= 1e-14 * next.norm();
            lambda = next;
            if done && it >= 3 {
                return Some(lambda);
            }
            if it >= 2 {
                // nudge off the exact eigenvalue to keep the solve regular
                sigma = lambda * (1.0 + 1e-13);
            }
        }
        Some(lambda)
    }
}

/// Richardson-extrapolated eigenvalue from grids of `points` and
/// `2 points + 1` interior nodes (spacing exactly halved).
pub fn extrapolated(potential: impl Fn(f64) -> C + Copy, l: f64, hbar: f64, points: usize, seed: C) -> Option<C> {
    let coarse = Grid::new(potential, l, hbar, points).eigenvalue_near(seed)?;
    let fine = Grid::new(potential, l, hbar, 2 * points + 1).eigenvalue_near(coarse)?;
    Some((4.0 * fine - coarse) / 3.0)
}
