//! Lowest eigenvalues of real symmetric tridiagonal and cyclic tridiagonal
//! (periodic) matrices by inertia counting and bisection.

use rayon::prelude::*;

/// Symmetric Jacobi matrix, optionally closed into a ring by `corner = A[0][n-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub corner: Option<f64>,
}

impl JacobiMatrix {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, corner: Option<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length");
        if corner.is_some() {
            assert!(diag.len() >= 3, "cyclic matrices need n >= 3");
        }
        Self { diag, off, corner }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn pivot_floor(&self) -> f64 {
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        f64::EPSILON * scale.max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `A - xI`).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let floor = self.pivot_floor();
        let guard = |p: f64| {
            if p.abs() < floor {
                if p < 0.0 {
                    -floor
                } else {
                    floor
                }
            } else {
                p
            }
        };
        match self.corner {
            None => {
                let mut count = 0;
                let mut p = guard(self.diag[0] - x);
                if p < 0.0 {
                    count += 1;
                }
                for i in 1..n {
                    p = guard(self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / p);
                    if p < 0.0 {
                        count += 1;
                    }
                }
                count
            }
            Some(c) => self.count_below_ring(x, c, floor),
        }
    }

    /// Ring inertia: fold the ring into a ladder of index pairs `(j, n-1-j)` and
    /// run a 2×2 block Sturm recurrence. Unlike eliminating the corner as a
    /// rank-two update, this stays stable at the degenerate pairs rings have.
    fn count_below_ring(&self, x: f64, corner: f64, floor: f64) -> usize {
        let n = self.diag.len();
        let d = &self.diag;
        let off = &self.off;
        let m = n / 2;
        let neg = |s: &[f64; 3]| -> usize {
            let det = s[0] * s[2] - s[1] * s[1];
            if det < 0.0 {
                1
            } else if s[0] + s[2] < 0.0 {
                2
            } else {
                0
            }
        };
        let regularize = |s: &mut [f64; 3]| {
            let det = s[0] * s[2] - s[1] * s[1];
            let scale = s[0].abs().max(s[2].abs()).max(s[1].abs()).max(floor);
            if det.abs() < floor * scale {
                s[0] += floor;
                s[2] += floor;
            }
        };
        // s = [s00, s01, s11] for the current pair block.
        let block = |j: usize| -> [f64; 3] {
            let coupling = if j == 0 {
                corner
            } else if n % 2 == 0 && j == m - 1 {
                off[m - 1]
            } else {
                0.0
            };
            [d[j] - x, coupling, d[n - 1 - j] - x]
        };
        let mut s = block(0);
        regularize(&mut s);
        let mut count = neg(&s);
        for j in 1..m {
            let (b0, b1) = (off[j - 1], off[n - 1 - j]);
            let det = s[0] * s[2] - s[1] * s[1];
            let inv = [s[2] / det, -s[1] / det, s[0] / det];
            let mut next = block(j);
            next[0] -= b0 * b0 * inv[0];
            next[1] -= b0 * b1 * inv[1];
            next[2] -= b1 * b1 * inv[2];
            s = next;
            regularize(&mut s);
            count += neg(&s);
        }
        if n % 2 == 1 {
            let (w0, w1) = (off[m - 1], off[m]);
            let det = s[0] * s[2] - s[1] * s[1];
            let inv = [s[2] / det, -s[1] / det, s[0] / det];
            let q = d[m] - x - (w0 * w0 * inv[0] + 2.0 * w0 * w1 * inv[1] + w1 * w1 * inv[2]);
            let q = if q.abs() < floor { floor.copysign(q) } else { q };
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    radius += c.abs();
                }
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `count` smallest eigenvalues in nondecreasing order.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        let count = count.min(self.len());
        let mut values: Vec<f64> = (0..count).into_par_iter().map(|k| self.eigenvalue(k)).collect();
        // Bisection results are individually monotone in k; enforce it against ties.
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        values
    }
}
