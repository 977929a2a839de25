//! Special functions and quadrature shared across the crate: factorials and
//! binomials, physicists' Hermite polynomials, normalized harmonic-oscillator
//! wavefunctions, and Gauss-Hermite rules for integrals against `exp(-x^2)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

const MAX_FACTORIAL: usize = 170; // 171! overflows f64
const MAX_LN_FACTORIAL: usize = 2048;

fn factorial_table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for n in 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

fn ln_factorial_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_LN_FACTORIAL + 1];
        for n in 1..=MAX_LN_FACTORIAL {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// `n!` as f64. Exact below 21!, correctly rounded up to 170!, infinite beyond.
pub fn factorial(n: usize) -> f64 {
    if n <= MAX_FACTORIAL {
        factorial_table()[n]
    } else {
        f64::INFINITY
    }
}

/// `ln(n!)`, usable far beyond the overflow point of [`factorial`].
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_factorial_table();
    if n < table.len() {
        table[n]
    } else {
        // Stirling with the 1/12n correction; only reached for huge n.
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x)
    }
}

/// Binomial coefficient C(n, k) as f64.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= MAX_FACTORIAL {
        let t = factorial_table();
        t[n] / (t[k] * t[n - k])
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// Odd double factorial `(2l-1)!! = (2l)!/(2^l l!)`, with `(-1)!! = 1`.
pub fn double_factorial_odd(l: usize) -> f64 {
    if l == 0 {
        return 1.0;
    }
    if 2 * l <= MAX_FACTORIAL {
        factorial(2 * l) / (2f64.powi(l as i32) * factorial(l))
    } else {
        (ln_factorial(2 * l) - (l as f64) * 2f64.ln() - ln_factorial(l)).exp()
    }
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * (k as f64) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Monomial coefficients of `H_n`: returns `c` with `H_n(x) = sum c[r] x^r`.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        // H_{k+1} = 2x H_k - 2k H_{k-1}
        let mut next = vec![0.0; k + 2];
        for (r, &c) in cur.iter().enumerate() {
            next[r + 1] += 2.0 * c;
        }
        for (r, &c) in prev.iter().enumerate() {
            next[r] -= 2.0 * (k as f64) * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// The moment integral of a Hermite polynomial against the Gaussian weight,
/// `int x^r H_n(x) e^{-x^2} dx`. Vanishes when `r - n` is odd or `n > r`;
/// otherwise equals `sqrt(pi) r! / (2^{r-n} ((r-n)/2)!)`.
pub fn hermite_moment_integral(r: usize, n: usize) -> f64 {
    if n > r || (r - n) % 2 != 0 {
        return 0.0;
    }
    let half = (r - n) / 2;
    PI.sqrt() * factorial(r) / (2f64.powi((r - n) as i32) * factorial(half))
}

/// Normalized harmonic-oscillator wavefunctions `psi_0..=psi_nmax` at `x`,
/// with `psi_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi))`.
///
/// The normalized recurrence keeps every value of order unity, so this is
/// stable well past n = 150 where the raw `H_n` would overflow.
pub fn hermite_function_row(nmax: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(nmax + 1);
    let psi0 = (-0.5 * x * x).exp() / PI.powf(0.25);
    psi.push(psi0);
    if nmax == 0 {
        return psi;
    }
    psi.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 1..nmax {
        let a = (2.0 / (n as f64 + 1.0)).sqrt();
        let b = (n as f64 / (n as f64 + 1.0)).sqrt();
        let next = a * x * psi[n] - b * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// A Gauss-Hermite quadrature rule for the weight `e^{-x^2}` on the real line.
///
/// `weights` integrate `f` in `int f(x) e^{-x^2} dx ~ sum w_i f(x_i)`;
/// `total_weights` fold the weight in, `int F(x) dx ~ sum W_i F(x_i)`, and stay
/// well-scaled because they are computed as `1/(n psi_{n-1}(x_i)^2)` rather
/// than `w_i e^{x_i^2}`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub total_weights: Vec<f64>,
}

impl GaussHermite {
    /// Build an `n`-point rule (exact for polynomials of degree `2n-1`).
    ///
    /// Nodes are found by Newton iteration on the normalized oscillator
    /// wavefunction `psi_n`, bracketed by the interlacing zeros of `psi_{n-1}`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let mut zeros: Vec<f64> = vec![];
        for k in 1..=n {
            let bound = (2.0 * k as f64 + 1.0).sqrt() + 1.0;
            let mut brackets = Vec::with_capacity(k + 1);
            brackets.push(-bound);
            brackets.extend_from_slice(&zeros);
            brackets.push(bound);
            let mut next = Vec::with_capacity(k);
            for w in brackets.windows(2) {
                next.push(newton_zero(k, w[0], w[1]));
            }
            zeros = next;
        }
        let mut weights = Vec::with_capacity(n);
        let mut total_weights = Vec::with_capacity(n);
        for &x in &zeros {
            let psi = hermite_function_row(n.saturating_sub(1), x);
            let w_total = 1.0 / (n as f64 * psi[n - 1] * psi[n - 1]);
            total_weights.push(w_total);
            weights.push(w_total * (-x * x).exp());
        }
        GaussHermite {
            nodes: zeros,
            weights,
            total_weights,
        }
    }

    /// `int f(x) e^{-x^2} dx` for a smooth `f`.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `int F(x) dx` for an `F` that decays at least like the Gaussian weight.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.total_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Zero of `psi_n` inside `(lo, hi)`, by safeguarded Newton iteration.
fn newton_zero(n: usize, lo: f64, hi: f64) -> f64 {
    let psi_pair = |x: f64| {
        let row = hermite_function_row(n, x);
        // psi_n'(x) = sqrt(2n) psi_{n-1}(x) - x psi_n(x)
        let deriv = (2.0 * n as f64).sqrt() * row[n - 1] - x * row[n];
        (row[n], deriv)
    };
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = psi_pair(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (f, df) = psi_pair(x);
        if f == 0.0 {
            return x;
        }
        // Shrink the bracket before taking the step.
        if (f > 0.0) == (flo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / df;
        let candidate = x - step;
        let next = if candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}
