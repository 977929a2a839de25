//! Quadrature-distribution machinery: sampled tomogram grids, the series
//! expressing a tomogram through normally ordered moments, its inversion back
//! to moments, and the maps between tomographic moments and ordered moments.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::math::{factorial, hermite, hermite_coefficients, GaussHermite};
use crate::moments::{convert_ordering, index_pairs, MomentTable, Ordering};

pub use crate::math::hermite_moment_integral;

/// A tomogram sampled on uniform angles and a weighted quadrature in X.
///
/// `x_weights` are plain integration weights: `int F dX ~ sum W_i F(x_i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomogramGrid {
    thetas: Vec<f64>,
    xs: Vec<f64>,
    x_weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TomogramGrid {
    /// Sample `w(theta, x)` on `n_theta` uniform angles and a scaled
    /// Gauss-Hermite rule in X. With `x_scale = s`, integrands of the form
    /// `poly(X/s) e^{-(X/s)^2}` are integrated exactly.
    pub fn sample_gauss_hermite<F>(n_theta: usize, n_x: usize, x_scale: f64, w: F) -> TomogramGrid
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let quad = GaussHermite::new(n_x);
        let xs: Vec<f64> = quad.nodes.iter().map(|&t| t * x_scale).collect();
        let x_weights: Vec<f64> = quad.total_weights.iter().map(|&w| w * x_scale).collect();
        Self::sample_on(uniform_angles(n_theta), xs, x_weights, w)
    }

    /// Sample on `n_theta` uniform angles and `n_x` uniform points over
    /// `[-x_max, x_max]` with trapezoid weights. For smooth rapidly decaying
    /// tomograms the uniform trapezoid rule converges spectrally.
    pub fn sample_uniform<F>(n_theta: usize, n_x: usize, x_max: f64, w: F) -> TomogramGrid
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        assert!(n_x >= 2);
        let h = 2.0 * x_max / (n_x - 1) as f64;
        let xs: Vec<f64> = (0..n_x).map(|i| -x_max + h * i as f64).collect();
        let x_weights = trapezoid_weights(&xs);
        Self::sample_on(uniform_angles(n_theta), xs, x_weights, w)
    }

    fn sample_on<F>(thetas: Vec<f64>, xs: Vec<f64>, x_weights: Vec<f64>, w: F) -> TomogramGrid
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let values: Vec<Vec<f64>> = thetas
            .par_iter()
            .map(|&theta| xs.iter().map(|&x| w(theta, x)).collect())
            .collect();
        TomogramGrid {
            thetas,
            xs,
            x_weights,
            values,
        }
    }

    pub fn from_parts(
        thetas: Vec<f64>,
        xs: Vec<f64>,
        x_weights: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> TomogramGrid {
        assert_eq!(thetas.len(), values.len());
        assert_eq!(xs.len(), x_weights.len());
        for row in &values {
            assert_eq!(row.len(), xs.len());
        }
        TomogramGrid {
            thetas,
            xs,
            x_weights,
            values,
        }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    pub fn value(&self, theta_idx: usize, x_idx: usize) -> f64 {
        self.values[theta_idx][x_idx]
    }

    pub fn row(&self, theta_idx: usize) -> &[f64] {
        &self.values[theta_idx]
    }

    /// `int f(X) w(X, theta_j) dX` over this grid's quadrature.
    pub fn integrate_row<F: Fn(f64) -> f64>(&self, theta_idx: usize, f: F) -> f64 {
        self.xs
            .iter()
            .zip(&self.x_weights)
            .zip(&self.values[theta_idx])
            .map(|((&x, &w), &v)| w * v * f(x))
            .sum()
    }

    /// Nonnegativity (within `tol_neg`) and per-angle normalization
    /// (within `tol_norm`).
    pub fn check_invariants(&self, tol_neg: f64, tol_norm: f64) -> Result<()> {
        for (j, row) in self.values.iter().enumerate() {
            if let Some(&bad) = row.iter().find(|v| **v < -tol_neg) {
                return Err(Error::InvalidParameter(format!(
                    "tomogram value {bad:.3e} below -{tol_neg:.1e} at theta index {j}"
                )));
            }
            let norm = self.integrate_row(j, |_| 1.0);
            if (norm - 1.0).abs() > tol_norm {
                return Err(Error::InvalidParameter(format!(
                    "tomogram row {j} integrates to {norm} (off by {:.3e})",
                    (norm - 1.0).abs()
                )));
            }
        }
        Ok(())
    }

    /// Write `theta,x,w` rows, row-major by theta, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta,x,w")?;
        for (j, &theta) in self.thetas.iter().enumerate() {
            for (i, &x) in self.xs.iter().enumerate() {
                writeln!(out, "{theta:.16e},{x:.16e},{:.16e}", self.values[j][i])?;
            }
        }
        Ok(())
    }

    /// Read a `theta,x,w` CSV. X-quadrature weights are reconstructed with
    /// the trapezoid rule, the fallback for externally supplied grids.
    pub fn read_csv<R: BufRead>(input: R) -> Result<TomogramGrid> {
        let mut thetas: Vec<f64> = vec![];
        let mut xs: Vec<f64> = vec![];
        let mut values: Vec<Vec<f64>> = vec![];
        let mut first_block = true;
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(format!("csv read: {e}")))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("theta")) {
                continue;
            }
            let mut parts = line.split(',');
            let bad = || Error::InvalidParameter(format!("bad csv line {}: '{line}'", lineno + 1));
            let theta: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let x: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let w: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let new_block = match thetas.last() {
                None => true,
                Some(&t) => (t - theta).abs() > 1e-12,
            };
            if new_block {
                if !values.is_empty() {
                    first_block = false;
                }
                thetas.push(theta);
                values.push(vec![]);
            }
            if first_block {
                xs.push(x);
            } else {
                let row = values.len() - 1;
                let col = values[row].len();
                if col >= xs.len() || (xs[col] - x).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "csv line {}: x grid differs between theta blocks",
                        lineno + 1
                    )));
                }
            }
            values.last_mut().unwrap().push(w);
        }
        if thetas.is_empty() {
            return Err(Error::GridTooCoarse("empty tomogram csv".into()));
        }
        let x_weights = trapezoid_weights(&xs);
        Ok(TomogramGrid {
            thetas,
            xs,
            x_weights,
            values,
        })
    }
}

pub fn uniform_angles(n_theta: usize) -> Vec<f64> {
    (0..n_theta)
        .map(|j| 2.0 * PI * j as f64 / n_theta as f64)
        .collect()
}

fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (xs[1] - xs[0]) / 2.0
            } else if i == n - 1 {
                (xs[n - 1] - xs[n - 2]) / 2.0
            } else {
                (xs[i + 1] - xs[i - 1]) / 2.0
            }
        })
        .collect()
}

// --- moments -> tomogram -----------------------------------------------------

/// Tomogram evaluator backed by a normally ordered moment table.
///
/// Antinormal input is converted first: the direct antinormal series carries a
/// divergent `e^{xi^2/4}` factor unless resummed, while the two forms are
/// analytically identical.
#[derive(Debug, Clone)]
pub struct MomentTomogram {
    normal: MomentTable,
}

impl MomentTomogram {
    pub fn new(table: &MomentTable) -> MomentTomogram {
        let normal = match table.ordering() {
            Ordering::Normal => table.clone(),
            Ordering::Antinormal => convert_ordering(table),
        };
        MomentTomogram { normal }
    }

    /// `w(X, theta) = e^{-X^2}/sqrt(pi) sum_nm <(a^dag)^n a^m> e^{i(n-m)theta}
    /// H_{n+m}(X) / sqrt(2^{n+m}) / (n! m!)`, truncated at the table degree.
    pub fn eval(&self, theta: f64, x: f64) -> f64 {
        let r = self.normal.max_degree();
        let phase = Complex64::from_polar(1.0, theta);
        // per-degree angular sums, then one Hermite value per degree
        let mut acc = 0.0;
        for d in 0..=r {
            let mut ang = Complex64::new(0.0, 0.0);
            for m in 0..=d {
                let n = d - m;
                let v = self.normal.get(n, m);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                ang += v * phase.powi(n as i32 - m as i32) / (factorial(n) * factorial(m));
            }
            if ang.norm_sqr() == 0.0 {
                continue;
            }
            acc += (ang * hermite(d, x)).re / 2f64.powi(d as i32).sqrt();
        }
        acc * (-x * x).exp() / PI.sqrt()
    }

    /// Symplectic generalization `w(X, mu, nu)`; reduces to [`Self::eval`] at
    /// `mu = cos(theta)`, `nu = sin(theta)`.
    pub fn eval_symplectic(&self, x: f64, mu: f64, nu: f64) -> Result<f64> {
        let s = mu * mu + nu * nu;
        if s < 1e-12 {
            return Err(Error::DegenerateDirection(s));
        }
        let r = self.normal.max_degree();
        let dir = Complex64::new(mu, nu);
        let mut acc = 0.0;
        for d in 0..=r {
            let mut ang = Complex64::new(0.0, 0.0);
            for m in 0..=d {
                let n = d - m;
                let v = self.normal.get(n, m);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                ang += v * dir.powu(n as u32) * dir.conj().powu(m as u32)
                    / (factorial(n) * factorial(m));
            }
            if ang.norm_sqr() == 0.0 {
                continue;
            }
            let scale = (2f64.powi(d as i32) * s.powi(d as i32 + 1)).sqrt();
            acc += (ang * hermite(d, x / s.sqrt())).re / scale;
        }
        Ok(acc * (-x * x / s).exp() / PI.sqrt())
    }
}

/// One-shot form of [`MomentTomogram::eval`].
pub fn tomogram_from_moments(table: &MomentTable, theta: f64, x: f64) -> f64 {
    MomentTomogram::new(table).eval(theta, x)
}

/// One-shot form of [`MomentTomogram::eval_symplectic`].
pub fn symplectic_tomogram_from_moments(
    table: &MomentTable,
    x: f64,
    mu: f64,
    nu: f64,
) -> Result<f64> {
    MomentTomogram::new(table).eval_symplectic(x, mu, nu)
}

// --- tomogram -> moments -----------------------------------------------------

/// Recover ordered moments from a tomogram grid.
///
/// Normal entries use the Hermite-orthogonality inversion
/// `<(a^dag)^n a^m> = n! m! / (2 pi sqrt(2^{n+m}) (n+m)!) *
///  int dtheta int dX w e^{i(m-n)theta} H_{n+m}(X)`;
/// antinormal entries use the same double integral with the kernel
/// `sum_p 2^p H_{k+l-2p}(X) / (p! (k+l-2p)!)` and prefactor without
/// the `(n+m)!`.
pub fn moments_from_tomogram(
    grid: &TomogramGrid,
    ordering: Ordering,
    r: usize,
) -> Result<MomentTable> {
    let m_theta = grid.thetas.len();
    if m_theta < 2 * r + 1 {
        return Err(Error::GridTooCoarse(format!(
            "{m_theta} angles cannot resolve degree {r} (need at least {})",
            2 * r + 1
        )));
    }
    if grid.xs.len() < 2 * r + 2 {
        return Err(Error::GridTooCoarse(format!(
            "{} X nodes for degree {r} (need at least {})",
            grid.xs.len(),
            2 * r + 2
        )));
    }
    // hermite_integrals[j][d] = int w(X, theta_j) H_d(X) dX
    let hermite_integrals: Vec<Vec<f64>> = (0..m_theta)
        .map(|j| {
            (0..=r)
                .map(|d| grid.integrate_row(j, |x| hermite(d, x)))
                .collect()
        })
        .collect();
    let dtheta = 2.0 * PI / m_theta as f64;

    let mut table = MomentTable::normalized_zero(ordering, r);
    for (i, j) in index_pairs(r) {
        let d = i + j;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t_idx, &theta) in grid.thetas.iter().enumerate() {
            // e^{i(m-n)theta} for normal (n,m); e^{i(k-l)theta} for antinormal (k,l)
            let phase_arg = match ordering {
                Ordering::Normal => (j as f64 - i as f64) * theta,
                Ordering::Antinormal => (i as f64 - j as f64) * theta,
            };
            let kernel = match ordering {
                Ordering::Normal => hermite_integrals[t_idx][d] / factorial(d),
                Ordering::Antinormal => (0..=i.min(j))
                    .map(|p| {
                        2f64.powi(p as i32) * hermite_integrals[t_idx][d - 2 * p]
                            / (factorial(p) * factorial(d - 2 * p))
                    })
                    .sum(),
            };
            acc += Complex64::from_polar(1.0, phase_arg) * kernel;
        }
        let prefactor = factorial(i) * factorial(j) / (2.0 * PI * 2f64.powi(d as i32).sqrt());
        table.set(i, j, acc * prefactor * dtheta);
    }
    Ok(table)
}

// --- tomographic moments -----------------------------------------------------

/// Per-angle quadrature moments `<X_theta^r>`, r = 0..=max_order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographicMoments {
    pub thetas: Vec<f64>,
    pub max_order: usize,
    /// `values[j][r]` is the r-th moment at `thetas[j]`.
    pub values: Vec<Vec<f64>>,
    /// Standard errors, present for estimates from sampled records.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<Vec<Vec<f64>>>,
}

impl TomographicMoments {
    /// Moments at an angle already present in `thetas` (mod 2pi, tol 1e-9).
    pub fn at(&self, theta: f64) -> Result<&[f64]> {
        let two_pi = 2.0 * PI;
        let wrapped = theta.rem_euclid(two_pi);
        for (j, &t) in self.thetas.iter().enumerate() {
            let d = (t.rem_euclid(two_pi) - wrapped).abs();
            if d < 1e-9 || (two_pi - d) < 1e-9 {
                return Ok(&self.values[j]);
            }
        }
        Err(Error::MissingAngles(theta))
    }

    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for row in &self.values {
            if (row[0] - 1.0).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "zeroth tomographic moment {} != 1",
                    row[0]
                )));
            }
            if row.len() >= 3 && row[2] < row[1] * row[1] - 1e-9 {
                return Err(Error::InvalidParameter(
                    "second tomographic moment below squared first".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Quadrature moments of a sampled tomogram, `<X^r> = int X^r w(X,theta) dX`.
pub fn tomographic_moments_from_grid(grid: &TomogramGrid, r: usize) -> Result<TomographicMoments> {
    if grid.xs.len() < r + 2 {
        return Err(Error::GridTooCoarse(format!(
            "{} X nodes for moment order {r}",
            grid.xs.len()
        )));
    }
    let values = (0..grid.thetas.len())
        .map(|j| {
            (0..=r)
                .map(|order| grid.integrate_row(j, |x| x.powi(order as i32)))
                .collect()
        })
        .collect();
    Ok(TomographicMoments {
        thetas: grid.thetas.clone(),
        max_order: r,
        values,
        stderr: None,
    })
}

/// Tomographic moments predicted by normally ordered moments:
/// `<X_theta^r> = sum_{n+m<=r, r-n-m even} r! sqrt(2^{n+m-2r}) /
///  (n! m! ((r-n-m)/2)!) <(a^dag)^n a^m> e^{i(n-m)theta}`.
pub fn tomographic_moments_from_normal_moments(
    table: &MomentTable,
    theta: f64,
    r: usize,
) -> Result<Vec<f64>> {
    if table.ordering() != Ordering::Normal {
        return Err(Error::OrderingMismatch {
            expected: "normal",
            got: table.ordering().name(),
        });
    }
    if r > table.max_degree() {
        return Err(Error::InsufficientDegree {
            need: r,
            got: table.max_degree(),
        });
    }
    let phase = Complex64::from_polar(1.0, theta);
    let mut out = Vec::with_capacity(r + 1);
    for order in 0..=r {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, m) in index_pairs(order) {
            let d = n + m;
            if (order - d) % 2 != 0 {
                continue;
            }
            let coeff = factorial(order) * 2f64.powi(d as i32 - 2 * order as i32).sqrt()
                / (factorial(n) * factorial(m) * factorial((order - d) / 2));
            acc += table.get(n, m) * phase.powi(n as i32 - m as i32) * coeff;
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// Full-grid version of [`tomographic_moments_from_normal_moments`].
pub fn tomographic_moments_table_from_normal_moments(
    table: &MomentTable,
    thetas: &[f64],
    r: usize,
) -> Result<TomographicMoments> {
    let values = thetas
        .iter()
        .map(|&theta| tomographic_moments_from_normal_moments(table, theta, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographicMoments {
        thetas: thetas.to_vec(),
        max_order: r,
        values,
        stderr: None,
    })
}

/// `<H_d(X_theta)>` from tomographic moments, replacing `X^s -> <X_theta^s>`.
pub fn expected_hermite(moments: &[f64], d: usize) -> f64 {
    hermite_coefficients(d)
        .iter()
        .enumerate()
        .map(|(s, &c)| c * moments[s])
        .sum()
}
