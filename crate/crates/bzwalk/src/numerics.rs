//! Small numerical kernels shared by the physics modules: a symmetric
//! tridiagonal eigensolver, composite Simpson quadrature, a periodic cubic
//! spline, and phase/probability helpers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Wrap an angle to the interval (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Total-variation distance (1/2) sum |p_i - q_i| between two discrete
/// distributions of equal length. Inputs need not be normalized; they are
/// normalized internally so the result lies in [0, 1].
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "tv_distance: length mismatch");
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return 1.0;
    }
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a / sp - b / sq).abs())
        .sum::<f64>()
}

/// Composite Simpson rule on a uniformly sampled integrand.
///
/// Requires an even number of intervals (odd number of samples >= 3).
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson_uniform: need odd sample count");
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Trapezoid rule on an arbitrary (e.g. log-spaced) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "trapezoid: length mismatch");
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// All eigenvalues and eigenvectors of a real symmetric tridiagonal matrix,
/// by the implicit-shift QL algorithm. Eigenvalues are returned in ascending
/// order; `vectors[j]` is the normalized eigenvector of `values[j]`.
///
/// The plane-wave Bloch Hamiltonian of a sinusoidal lattice is exactly
/// tridiagonal in this basis, so this solver covers the whole band module
/// without an external LAPACK dependency (and runs on wasm targets).
pub fn eigh_tridiagonal(diagonal: &[f64], off_diagonal: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diagonal.len();
    assert_eq!(off_diagonal.len() + 1, n, "eigh_tridiagonal: off-diagonal length");
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }

    let mut d = diagonal.to_vec();
    // e is padded to length n with a trailing zero, as the QL sweep expects.
    let mut e: Vec<f64> = off_diagonal.iter().copied().chain([0.0]).collect();
    // z[i][j]: component i of eigenvector j, starting from the identity.
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the first small off-diagonal element at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Numerical(format!(
                    "tridiagonal QL failed to converge at row {l} after 50 sweeps"
                )));
            }

            // Wilkinson shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // Accumulate the rotation into the eigenvector matrix.
                for row in z.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Sort ascending, carrying eigenvectors along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| z.iter().map(|row| row[j]).collect())
        .collect();
    Ok((values, vectors))
}

/// Periodic cubic spline on a uniform grid.
///
/// Interpolates samples `y[i]` at `x_i = x0 + i*h`, with `y` continuing
/// periodically with period `n*h`. Used to evaluate band quantities at walk
/// sites that do not coincide with the band grid.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len();
        assert!(n >= 3, "PeriodicSpline: need at least 3 samples");
        // Solve the cyclic tridiagonal system for the second derivatives:
        //   m[i-1] + 4 m[i] + m[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / h^2
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let ym = y[(i + n - 1) % n];
                let yp = y[(i + 1) % n];
                6.0 * (ym - 2.0 * y[i] + yp) / (h * h)
            })
            .collect();
        let m = solve_cyclic_tridiagonal(1.0, 4.0, 1.0, &rhs);
        Self { x0, h, y: y.to_vec(), m }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len() as f64;
        let t = ((x - self.x0) / self.h).rem_euclid(n);
        let i = (t.floor() as usize).min(self.y.len() - 1);
        (i, t - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let (i, t) = self.locate(x);
        let j = (i + 1) % n;
        let (y0, y1) = (self.y[i], self.y[j]);
        let (m0, m1) = (self.m[i], self.m[j]);
        let h2 = self.h * self.h;
        let a = 1.0 - t;
        y0 * a + y1 * t + h2 / 6.0 * (m0 * (a * a * a - a) + m1 * (t * t * t - t))
    }

    /// Exact integral of the spline over [a, b] (b may exceed one period).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate(b, a);
        }
        let n = self.y.len();
        let (ia, ta) = self.locate(a);
        let steps = ((b - a) / self.h).ceil() as usize + 1;
        let mut acc = 0.0;
        let mut i = ia;
        let mut t_lo = ta;
        let mut remaining = (b - a) / self.h;
        for _ in 0..=steps {
            if remaining <= 0.0 {
                break;
            }
            let t_hi = (t_lo + remaining).min(1.0);
            acc += self.segment_integral(i, t_lo, t_hi);
            remaining -= t_hi - t_lo;
            i = (i + 1) % n;
            t_lo = 0.0;
        }
        acc
    }

    /// Integral over the fraction [t0, t1] of segment i, 0 <= t0 <= t1 <= 1.
    fn segment_integral(&self, i: usize, t0: f64, t1: f64) -> f64 {
        let n = self.y.len();
        let j = (i + 1) % n;
        let (y0, y1) = (self.y[i], self.y[j]);
        let (m0, m1) = (self.m[i], self.m[j]);
        let h2 = self.h * self.h;
        // Antiderivative in t of the segment polynomial, times h.
        let f = |t: f64| {
            let a = 1.0 - t;
            self.h
                * (-y0 * a * a / 2.0 + y1 * t * t / 2.0
                    + h2 / 6.0
                        * (m0 * (-(a * a * a * a) / 4.0 + a * a / 2.0)
                            + m1 * (t * t * t * t / 4.0 - t * t / 2.0)))
        };
        f(t1) - f(t0)
    }
}

/// Solve a cyclic tridiagonal system with constant coefficients
/// `lo*x[i-1] + diag*x[i] + hi*x[i+1] = rhs[i]` (indices mod n) via the
/// Sherman-Morrison correction of the plain tridiagonal solve.
fn solve_cyclic_tridiagonal(lo: f64, diag: f64, hi: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    assert!(n >= 3);
    let gamma = -diag;
    // Modified diagonal for the non-cyclic system.
    let mut dmod = vec![diag; n];
    dmod[0] = diag - gamma;
    dmod[n - 1] = diag - lo * hi / gamma;

    let solve = |d: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = hi / d[0];
        x[0] = b[0] / d[0];
        for i in 1..n {
            let m = d[i] - lo * c[i - 1];
            c[i] = hi / m;
            x[i] = (b[i] - lo * x[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };

    let x = solve(&dmod, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = lo;
    let z = solve(&dmod, &u);
    let factor = (x[0] + hi * x[n - 1] / gamma) / (1.0 + z[0] + hi * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}
