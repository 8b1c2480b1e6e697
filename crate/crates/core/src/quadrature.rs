//! Gauss–Jacobi rules for integrals of the form
//! `∫_{-1}^{1} (1 - x)^a (1 + x)^b g(x) dx`.
//!
//! Nodes are the eigenvalues of the symmetric Jacobi matrix, located by
//! Sturm-sequence bisection and then polished with Newton steps on the
//! orthonormal recurrence. Weights come from the Christoffel function
//! `w_i = 1 / Σ_k p_k(x_i)²`, which avoids ratios of Gamma functions and
//! keeps full relative accuracy for the small weights near the endpoints.

use crate::error::{domain, Result};
use statrs::function::gamma::ln_gamma;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

const CACHE_LIMIT: usize = 256;

/// A fixed-order Gauss–Jacobi rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobi {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi {
    /// Builds the `n`-point rule for weight `(1 - x)^a (1 + x)^b`.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, "quadrature order must be positive"));
        }
        if !(a.is_finite() && a > -1.0) {
            return Err(domain("a", a, "Jacobi exponent must exceed -1"));
        }
        if !(b.is_finite() && b > -1.0) {
            return Err(domain("b", b, "Jacobi exponent must exceed -1"));
        }
        let rec = Recurrence::new(n, a, b);
        let mut nodes = rec.eigenvalues();
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = rec.eval_with_derivative(*x);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                let next = *x - step;
                if !(next > -1.0 && next < 1.0) {
                    break;
                }
                *x = next;
                if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            weights.push(1.0 / rec.christoffel_sum(*x));
        }
        Ok(Self {
            a,
            b,
            nodes,
            weights,
        })
    }

    /// Shared copy of the rule from a process-wide cache, so repeated
    /// quadratures with the same weight pay for node construction once.
    pub fn cached(n: usize, a: f64, b: f64) -> Result<Arc<Self>> {
        type Key = (usize, u64, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<GaussJacobi>>>> = OnceLock::new();
        let key = (n, a.to_bits(), b.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(n, a, b)?);
        let mut map = cache.lock().expect("rule cache poisoned");
        if map.len() >= CACHE_LIMIT {
            map.clear();
        }
        map.insert(key, Arc::clone(&rule));
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i g(x_i)` on the reference interval.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Total mass `∫_{-1}^{1} (1 - x)^a (1 + x)^b dx`.
pub fn jacobi_moment(a: f64, b: f64) -> f64 {
    let ln = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0);
    ln.exp()
}

/// Three-term recurrence of the orthonormal Jacobi polynomials,
/// `x p_k = β_{k+1} p_{k+1} + d_k p_k + β_k p_{k-1}`.
struct Recurrence {
    diag: Vec<f64>,
    // off[k] = β_{k+1}, couples p_k and p_{k+1}
    off: Vec<f64>,
    p0: f64,
}

impl Recurrence {
    fn new(n: usize, a: f64, b: f64) -> Self {
        let ab = a + b;
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        for k in 0..n {
            let kf = k as f64;
            let d = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * kf + ab;
                (b * b - a * a) / (s * (s + 2.0))
            };
            diag.push(d);
            let j = kf + 1.0;
            let beta = if k == 0 {
                // closed form of the j = 1 entry; the general formula is 0/0 at a + b = -1
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * j + ab;
                (4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            off.push(beta);
        }
        Self {
            diag,
            off,
            p0: 1.0 / jacobi_moment(a, b).sqrt(),
        }
    }

    fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues of the leading `n × n` Jacobi matrix below `x`.
    fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_prev = if q == 0.0 { f64::EPSILON * 1e-3 } else { q };
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q_prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n);
        let mut lower = -1.0;
        for k in 0..n {
            // the k-th eigenvalue lies in (lower, 1)
            let (mut lo, mut hi) = (lower, 1.0);
            for _ in 0..128 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi || hi - lo <= 1e-18 {
                    break;
                }
                if self.count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let x = 0.5 * (lo + hi);
            out.push(x);
            lower = lo;
        }
        out
    }

    /// Value and derivative of the degree-`n` orthonormal polynomial.
    fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p_prev = 0.0;
        let mut p = self.p0;
        let mut dp_prev = 0.0;
        let mut dp = 0.0;
        for k in 0..self.n() {
            let beta_next = self.off[k];
            let beta = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = ((x - self.diag[k]) * p - beta * p_prev) / beta_next;
            let dp_next = (p + (x - self.diag[k]) * dp - beta * dp_prev) / beta_next;
            p_prev = p;
            p = p_next;
            dp_prev = dp;
            dp = dp_next;
        }
        (p, dp)
    }

    fn christoffel_sum(&self, x: f64) -> f64 {
        let mut p_prev = 0.0;
        let mut p = self.p0;
        let mut sum = p * p;
        for k in 0..self.n() - 1 {
            let beta = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = ((x - self.diag[k]) * p - beta * p_prev) / self.off[k];
            p_prev = p;
            p = p_next;
            sum += p * p;
        }
        sum
    }
}
