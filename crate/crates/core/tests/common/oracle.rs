//! Reference quadratures for the tests, written without any of the crate's
//! own quadrature code.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Lanczos approximation (g = 7, nine coefficients).
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_n` from Chebyshev starting points.
pub fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let p_prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| f(mid + half * x) * *w)
        .sum::<Complex64>()
        * half
}

fn rules() -> &'static [(Vec<f64>, Vec<f64>); 2] {
    static RULES: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    RULES.get_or_init(|| [legendre(20), legendre(30)])
}

/// Adaptive panel quadrature: 20- against 30-point Legendre on each panel,
/// bisecting until they agree to `1e-13` of the panel's absolute mass.
/// Tighter targets stall on the rounding of large phases `ωu`.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let [lo, hi] = rules();
    let mut stack = vec![(a, b, 0u32)];
    let mut total = Complex64::new(0.0, 0.0);
    while let Some((a, b, depth)) = stack.pop() {
        let coarse = panel(f, a, b, lo);
        let fine = panel(f, a, b, hi);
        let mass = panel(&|t| Complex64::new(f(t).norm(), 0.0), a, b, hi).re;
        if (coarse - fine).norm() <= 1e-13 * mass.max(1e-300) || depth >= 10 {
            total += fine;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, depth + 1));
            stack.push((m, b, depth + 1));
        }
    }
    total
}

/// `∫_0^L u^{-α} e^{-iωu} du`: a power series on `[0, h]` with `|ω|h ≤ 1/2`,
/// geometrically graded panels up to the oscillation scale, then panels of
/// width at most `1/(2|ω|)`.
pub fn kernel_transform(alpha: f64, memory: f64, omega: f64) -> Complex64 {
    let h = memory
        .min(if omega == 0.0 {
            memory
        } else {
            0.5 / omega.abs()
        })
        .min(1e-3);
    let mut head = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for k in 0..200 {
        if k > 0 {
            pow *= Complex64::new(0.0, -omega);
            fact *= k as f64;
        }
        let e = k as f64 + 1.0 - alpha;
        let term = pow * h.powf(e) / (fact * e);
        head += term;
        if term.norm() < 1e-22 * head.norm() {
            break;
        }
    }
    let f = |u: f64| Complex64::from_polar(u.powf(-alpha), -omega * u);
    let mut total = head;
    let mut a = h;
    let scale = if omega == 0.0 {
        memory
    } else {
        (0.5 / omega.abs()).min(memory)
    };
    while a < memory {
        let b = (2.0 * a).min(a + scale).min(memory);
        total += adaptive(&f, a, b);
        a = b;
    }
    total
}

/// `m(ω) = iω/Γ(1-α) · ∫_0^L u^{-α} e^{-iωu} du`.
pub fn multiplier(alpha: f64, memory: f64, omega: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, omega) * kernel_transform(alpha, memory, omega) / gamma(1.0 - alpha)
}
