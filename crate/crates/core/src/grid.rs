//! Equispaced periodic grids and trigonometric interpolation.

use crate::error::{domain, Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `N` equispaced collocation nodes `t_j = jT/N` on `[0, T)`.
///
/// The trigonometric basis attached to the grid uses the integer modes
/// `k = -N/2, ..., N/2 - 1` with angular frequencies `ω_k = 2πk/T`. The
/// single unpaired mode `k = -N/2` is the Nyquist mode and is read as a
/// pure cosine, so real nodal data always has a real interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    period: f64,
    node_count: usize,
}

impl PeriodicGrid {
    pub fn new(period: f64, node_count: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(domain("period", period, "must be positive and finite"));
        }
        if node_count < 4 || !node_count.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "node count must be even and at least 4, got {node_count}"
            )));
        }
        Ok(Self { period, node_count })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.node_count as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period / self.node_count as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count).map(|j| self.node(j)).collect()
    }

    /// Mode indices `-N/2 ..= N/2 - 1` paired with `ω_k`.
    pub fn frequencies(&self) -> Vec<(i64, f64)> {
        let half = (self.node_count / 2) as i64;
        (-half..half)
            .map(|k| (k, self.angular_frequency(k)))
            .collect()
    }

    pub fn angular_frequency(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    /// Mode index stored at FFT slot `idx`.
    pub fn mode_of_slot(&self, idx: usize) -> i64 {
        let n = self.node_count;
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.node_count {
            return Err(Error::Dimension {
                expected: self.node_count,
                got: len,
            });
        }
        Ok(())
    }
}

/// Normalised discrete Fourier coefficients `c_k = (1/N) Σ_j v_j e^{-2πijk/N}`
/// in FFT slot order.
pub fn fourier_coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`fourier_coefficients`]; returns complex nodal values.
pub fn nodal_values(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    buf
}

/// Real trigonometric interpolant of nodal data on a [`PeriodicGrid`].
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(grid: &PeriodicGrid, values: &[f64]) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self {
            grid: grid.clone(),
            coeffs: fourier_coefficients(values),
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn sum_modes(&self, t: f64, derivative: bool) -> f64 {
        let n = self.grid.node_count;
        let half = n / 2;
        let w1 = self.grid.angular_frequency(1);
        let theta = w1 * t;
        let rot = Complex64::from_polar(1.0, theta);
        let mut z = Complex64::new(1.0, 0.0);
        let mut acc = if derivative { 0.0 } else { self.coeffs[0].re };
        for k in 1..half {
            // re-anchor the running power every 32 steps to bound drift
            z = if k % 32 == 0 {
                Complex64::from_polar(1.0, theta * k as f64)
            } else {
                z * rot
            };
            let term = self.coeffs[k] * z;
            acc += if derivative {
                -2.0 * w1 * k as f64 * term.im
            } else {
                2.0 * term.re
            };
        }
        let nyq = self.coeffs[half].re;
        let wn = w1 * half as f64;
        acc + if derivative {
            -nyq * wn * (wn * t).sin()
        } else {
            nyq * (wn * t).cos()
        }
    }

    /// Interpolant value at any real `t` (periodic extension).
    pub fn eval(&self, t: f64) -> f64 {
        self.sum_modes(t, false)
    }

    /// Exact derivative of the interpolant at `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.sum_modes(t, true)
    }

    /// Values on the `M` equispaced points `jT/M`, `j = 0..M`, by zero padding.
    pub fn resample(&self, m: usize) -> Result<Vec<f64>> {
        let n = self.grid.node_count;
        if m < n {
            return Err(Error::Config(format!(
                "interpolation count {m} is below the node count {n}"
            )));
        }
        let half = n / 2;
        let mut padded = vec![Complex64::new(0.0, 0.0); m];
        padded[0] = self.coeffs[0];
        for k in 1..half {
            padded[k] = self.coeffs[k];
            padded[m - k] = self.coeffs[n - k];
        }
        let nyq = self.coeffs[half];
        if m == n {
            padded[half] = nyq;
        } else {
            padded[half] += nyq * 0.5;
            padded[m - half] += nyq * 0.5;
        }
        Ok(nodal_values(&padded).into_iter().map(|c| c.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = PeriodicGrid::new(2.0, 8).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        assert!((nodes[7] - (2.0 - 0.25)).abs() < 1e-15);
        assert!(nodes.windows(2).all(|w| (w[1] - w[0] - 0.25).abs() < 1e-15));
        let freqs = g.frequencies();
        assert_eq!(freqs.len(), 8);
        assert_eq!(freqs[0].0, -4);
        assert_eq!(freqs[7].0, 3);
        assert!((freqs[5].1 - PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_and_small() {
        assert!(PeriodicGrid::new(1.0, 7).is_err());
        assert!(PeriodicGrid::new(1.0, 2).is_err());
        assert!(PeriodicGrid::new(0.0, 8).is_err());
    }

    #[test]
    fn interpolant_reproduces_band_limited_signal() {
        let g = PeriodicGrid::new(1.5, 16).unwrap();
        let f = |t: f64| 0.3 + (2.0 * PI * t / 1.5).sin() - 0.2 * (6.0 * PI * t / 1.5).cos();
        let df = |t: f64| {
            (2.0 * PI / 1.5) * (2.0 * PI * t / 1.5).cos()
                + 0.2 * (6.0 * PI / 1.5) * (6.0 * PI * t / 1.5).sin()
        };
        let vals: Vec<f64> = g.nodes().iter().map(|&t| f(t)).collect();
        let p = TrigInterpolant::new(&g, &vals).unwrap();
        for &t in &[0.0, 0.123, 0.77, 1.49, -0.4, 3.1] {
            assert!((p.eval(t) - f(t)).abs() < 1e-13);
            assert!((p.derivative(t) - df(t)).abs() < 1e-12);
        }
        let dense = p.resample(40).unwrap();
        for (j, v) in dense.iter().enumerate() {
            assert!((v - f(j as f64 * 1.5 / 40.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn nyquist_reads_as_cosine() {
        let g = PeriodicGrid::new(1.0, 8).unwrap();
        let vals: Vec<f64> = (0..8)
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let p = TrigInterpolant::new(&g, &vals).unwrap();
        let t = 0.03;
        assert!((p.eval(t) - (8.0 * PI * t).cos()).abs() < 1e-14);
        let dense = p.resample(16).unwrap();
        assert!((dense[1] - (8.0 * PI / 16.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn resample_identity_at_same_size() {
        let g = PeriodicGrid::new(1.0, 10).unwrap();
        let vals: Vec<f64> = (0..10).map(|j| ((j * 7) % 5) as f64).collect();
        let p = TrigInterpolant::new(&g, &vals).unwrap();
        let back = p.resample(10).unwrap();
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(p.resample(6).is_err());
    }
}
