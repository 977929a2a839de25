//! The linear-amplifier measurement chain. The amplified mode is
//! `b = sqrt(g) a + sqrt(g-1) h^dag` (signal port) or
//! `b = sqrt(g-1) a^dag + sqrt(g) h` (idler port); its antinormal moments mix
//! the signal and noise moment tables through a binomial double sum, which is
//! triangular in total degree and therefore invertible degree by degree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{binomial, double_factorial_odd, factorial};
use crate::moments::{closed_form_moments, index_pairs, thermal_occupation, MomentTable, Ordering};
use crate::states::StateSpec;
use crate::tomography::{TomogramGrid, TomographicMoments};

const MIN_GAIN_EXCESS: f64 = 1e-9;
const TOMOGRAM_GAIN_VALIDITY: f64 = 10.0;

/// Which output of the amplifier is measured.
///
/// The port fixes the orderings: the signal port pairs antinormal signal
/// moments with normal noise moments; the idler port swaps both, so the
/// recovered signal table is normally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Signal,
    Idler,
}

impl Port {
    pub fn signal_ordering(self) -> Ordering {
        match self {
            Port::Signal => Ordering::Antinormal,
            Port::Idler => Ordering::Normal,
        }
    }

    pub fn noise_ordering(self) -> Ordering {
        match self {
            Port::Signal => Ordering::Normal,
            Port::Idler => Ordering::Antinormal,
        }
    }
}

/// The noise mode entering the amplifier.
#[derive(Debug, Clone)]
pub enum NoiseSpec {
    /// Thermal noise at unitless temperature `T`; moments come from the
    /// closed thermal forms at whatever degree is requested.
    Thermal { temperature: f64 },
    /// An explicit measured/assumed noise moment table.
    Table(MomentTable),
}

/// Gain, port, and noise model of one amplifier.
#[derive(Debug, Clone)]
pub struct AmplifierModel {
    gain: f64,
    port: Port,
    noise: NoiseSpec,
}

impl AmplifierModel {
    pub fn new(gain: f64, port: Port, noise: NoiseSpec) -> Result<AmplifierModel> {
        if gain <= 1.0 + MIN_GAIN_EXCESS {
            return Err(Error::GainTooSmall {
                g: gain,
                degree: 0,
                amplification: f64::INFINITY,
            });
        }
        match &noise {
            NoiseSpec::Thermal { temperature } if *temperature <= 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "noise temperature must be positive, got {temperature}"
                )));
            }
            NoiseSpec::Table(t) if t.ordering() != port.noise_ordering() => {
                return Err(Error::OrderingMismatch {
                    expected: port.noise_ordering().name(),
                    got: t.ordering().name(),
                });
            }
            _ => {}
        }
        Ok(AmplifierModel { gain, port, noise })
    }

    pub fn thermal(gain: f64, port: Port, temperature: f64) -> Result<AmplifierModel> {
        AmplifierModel::new(gain, port, NoiseSpec::Thermal { temperature })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn port(&self) -> Port {
        self.port
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    /// The noise moment table at degree `r`, in the port's noise ordering.
    pub fn noise_table(&self, r: usize) -> Result<MomentTable> {
        match &self.noise {
            NoiseSpec::Thermal { temperature } => closed_form_moments(
                &StateSpec::thermal(*temperature),
                self.port.noise_ordering(),
                r,
            ),
            NoiseSpec::Table(t) => {
                if t.max_degree() < r {
                    return Err(Error::InsufficientDegree {
                        need: r,
                        got: t.max_degree(),
                    });
                }
                Ok(t.truncated(r))
            }
        }
    }

    /// Gaussian width of the tomogram-level noise kernel for thermal noise,
    /// `sigma = sqrt(coth(1/2T) / 2)`.
    pub fn sigma(&self) -> Option<f64> {
        match &self.noise {
            NoiseSpec::Thermal { temperature } => {
                Some((0.5 + thermal_occupation(*temperature)).sqrt())
            }
            NoiseSpec::Table(_) => None,
        }
    }

    /// Noise occupation for thermal noise.
    pub fn noise_occupation(&self) -> Option<f64> {
        match &self.noise {
            NoiseSpec::Thermal { temperature } => Some(thermal_occupation(*temperature)),
            NoiseSpec::Table(_) => None,
        }
    }
}

/// The two gain factors of one term of the binomial sum: `g^{(i+j)/2}` times
/// `(g-1)^{(k+l-i-j)/2}` for the signal port, swapped for the idler port.
fn gain_factor(port: Port, g: f64, picked: usize, rest: usize) -> f64 {
    let (on_signal, on_noise) = match port {
        Port::Signal => (g, g - 1.0),
        Port::Idler => (g - 1.0, g),
    };
    on_signal.powf(picked as f64 / 2.0) * on_noise.powf(rest as f64 / 2.0)
}

/// Forward map: antinormal moments of the amplified mode from the signal and
/// noise tables,
/// `<b^k (b^dag)^l> = sum_ij C(k,i) C(l,j) g^{(i+j)/2} (g-1)^{(k+l-i-j)/2}
///  <signal_ij> <noise_{k-i,l-j}>`.
pub fn amplify_moments(
    signal: &MomentTable,
    amp: &AmplifierModel,
    r: usize,
) -> Result<MomentTable> {
    if signal.ordering() != amp.port().signal_ordering() {
        return Err(Error::OrderingMismatch {
            expected: amp.port().signal_ordering().name(),
            got: signal.ordering().name(),
        });
    }
    if signal.max_degree() < r {
        return Err(Error::InsufficientDegree {
            need: r,
            got: signal.max_degree(),
        });
    }
    let noise = amp.noise_table(r)?;
    let g = amp.gain();
    let mut out = MomentTable::normalized_zero(Ordering::Antinormal, r);
    for (k, l) in index_pairs(r) {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=k {
            for j in 0..=l {
                let s = signal.get(i, j);
                let n = noise.get(k - i, l - j);
                if s.norm_sqr() == 0.0 || n.norm_sqr() == 0.0 {
                    continue;
                }
                let coeff = binomial(k, i)
                    * binomial(l, j)
                    * gain_factor(amp.port(), g, i + j, k + l - i - j);
                acc += coeff * s * n;
            }
        }
        out.set(k, l, acc);
    }
    Ok(out)
}

/// Calibration output: the recovered noise table plus per-degree sensitivity
/// factors of the triangular solve.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub g: f64,
    pub port: Port,
    pub noise_moments: MomentTable,
    /// `condition_numbers[d]` bounds how much a perturbation of the measured
    /// vacuum response at degree `d` is amplified into the noise moments.
    pub condition_numbers: Vec<f64>,
}

/// Solve for the noise moments from the amplifier's response to a vacuum
/// signal.
///
/// On the signal port the vacuum's antinormal moments `i! delta_ij` couple
/// noise moments of equal and lower degree, so the system is triangular:
/// degree by degree,
/// `<(h^dag)^k h^l> = (g-1)^{-(k+l)/2} [V_kl - sum_{i>=1} k!l!/(i!(k-i)!(l-i)!)
///  g^i (g-1)^{(k+l)/2-i} <(h^dag)^{k-i} h^{l-i}>]`.
/// On the idler port the vacuum's normal moments vanish except (0,0), and the
/// solve is diagonal: `<h^k (h^dag)^l> = g^{-(k+l)/2} V_kl`.
pub fn calibrate_noise(
    vacuum_response: &MomentTable,
    g: f64,
    port: Port,
    r: usize,
) -> Result<Calibration> {
    if vacuum_response.ordering() != Ordering::Antinormal {
        return Err(Error::OrderingMismatch {
            expected: "antinormal",
            got: vacuum_response.ordering().name(),
        });
    }
    if vacuum_response.max_degree() < r {
        return Err(Error::InsufficientDegree {
            need: r,
            got: vacuum_response.max_degree(),
        });
    }
    if g <= 1.0 + MIN_GAIN_EXCESS {
        return Err(Error::GainTooSmall {
            g,
            degree: r,
            amplification: (g - 1.0).abs().max(f64::MIN_POSITIVE).powf(-(r as f64) / 2.0),
        });
    }
    let mut noise = MomentTable::normalized_zero(port.noise_ordering(), r);
    let mut condition_numbers = vec![1.0f64; r + 1];
    match port {
        Port::Signal => {
            for (k, l) in index_pairs(r) {
                if k + l == 0 {
                    continue;
                }
                let d = k + l;
                let diag = (g - 1.0).powf(d as f64 / 2.0);
                let mut rhs = vacuum_response.get(k, l);
                let mut coeff_sum = diag;
                for i in 1..=k.min(l) {
                    let coeff = factorial(k) * factorial(l)
                        / (factorial(i) * factorial(k - i) * factorial(l - i))
                        * g.powi(i as i32)
                        * (g - 1.0).powf(d as f64 / 2.0 - i as f64);
                    rhs -= coeff * noise.get(k - i, l - i);
                    coeff_sum += coeff.abs();
                }
                noise.set(k, l, rhs / diag);
                condition_numbers[d] = condition_numbers[d].max(coeff_sum / diag);
            }
        }
        Port::Idler => {
            for (k, l) in index_pairs(r) {
                if k + l == 0 {
                    continue;
                }
                let d = k + l;
                let scale = g.powf(d as f64 / 2.0);
                noise.set(k, l, vacuum_response.get(k, l) / scale);
                condition_numbers[d] = condition_numbers[d].max(1.0 / scale);
            }
        }
    }
    Ok(Calibration {
        g,
        port,
        noise_moments: noise,
        condition_numbers,
    })
}

/// Invert the forward map: recover the signal moments from measured amplified
/// moments, given the noise model. Exact triangular solve in total degree;
/// `deamplify(amplify(t)) = t` up to rounding.
pub fn deamplify_moments(
    amplified: &MomentTable,
    amp: &AmplifierModel,
    r: usize,
) -> Result<MomentTable> {
    if amplified.ordering() != Ordering::Antinormal {
        return Err(Error::OrderingMismatch {
            expected: "antinormal",
            got: amplified.ordering().name(),
        });
    }
    if amplified.max_degree() < r {
        return Err(Error::InsufficientDegree {
            need: r,
            got: amplified.max_degree(),
        });
    }
    let noise = amp.noise_table(r)?;
    let g = amp.gain();
    // The diagonal coefficient is g^{d/2} on the signal port but (g-1)^{d/2}
    // on the idler port, where g -> 1 genuinely loses the signal.
    let diag_base = match amp.port() {
        Port::Signal => g,
        Port::Idler => g - 1.0,
    };
    if diag_base <= MIN_GAIN_EXCESS {
        return Err(Error::GainTooSmall {
            g,
            degree: r,
            amplification: diag_base.max(f64::MIN_POSITIVE).powf(-(r as f64) / 2.0),
        });
    }
    let mut signal = MomentTable::normalized_zero(amp.port().signal_ordering(), r);
    for (k, l) in index_pairs(r) {
        if k + l == 0 {
            continue;
        }
        let mut rhs = amplified.get(k, l);
        for i in 0..=k {
            for j in 0..=l {
                if (i, j) == (k, l) {
                    continue;
                }
                let s = signal.get(i, j);
                let n = noise.get(k - i, l - j);
                if s.norm_sqr() == 0.0 || n.norm_sqr() == 0.0 {
                    continue;
                }
                rhs -= binomial(k, i)
                    * binomial(l, j)
                    * gain_factor(amp.port(), g, i + j, k + l - i - j)
                    * s
                    * n;
            }
        }
        signal.set(k, l, rhs / diag_base.powf((k + l) as f64 / 2.0));
    }
    Ok(signal)
}

/// Tomogram of the amplified signal under thermal noise in the `g >> 1`
/// regime: rescale `X -> X/sqrt(g)` and convolve with a Gaussian of variance
/// `sigma^2`.
///
/// The convolution integral is evaluated with the input grid's own
/// quadrature, `w_amp(X) = 1/sqrt(g) sum_i W_i w(x_i) N_sigma(X/sqrt(g) - x_i)`,
/// so no interpolation of the input is needed. Values are returned on a
/// uniform grid wide enough for the amplified support.
///
/// Gains below 10 violate the stated regime and are rejected unless
/// `allow_low_gain` is set.
pub fn amplified_tomogram(
    grid: &TomogramGrid,
    g: f64,
    sigma: f64,
    allow_low_gain: bool,
) -> Result<TomogramGrid> {
    if g < TOMOGRAM_GAIN_VALIDITY && !allow_low_gain {
        return Err(Error::GainBelowValidity(g));
    }
    if g <= 0.0 {
        return Err(Error::InvalidParameter(format!("gain must be positive, got {g}")));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise width must be nonnegative, got {sigma}"
        )));
    }
    if sigma < 1e-8 {
        if (g - 1.0).abs() < 1e-12 {
            // transparent chain
            return Ok(grid.clone());
        }
        return Err(Error::InvalidParameter(
            "sigma below 1e-8 is only supported at g = 1 (identity map)".into(),
        ));
    }
    let sqrt_g = g.sqrt();
    let x_in_max = grid
        .xs()
        .iter()
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let x_out_max = sqrt_g * (x_in_max + 8.0 * sigma);
    let n_out = grid.xs().len().max(65) | 1; // odd, so zero is a node
    let h = 2.0 * x_out_max / (n_out - 1) as f64;
    let xs_out: Vec<f64> = (0..n_out).map(|i| -x_out_max + h * i as f64).collect();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();

    let mut values = Vec::with_capacity(grid.thetas().len());
    for j in 0..grid.thetas().len() {
        let row: Vec<f64> = xs_out
            .iter()
            .map(|&x| {
                let u = x / sqrt_g;
                let conv = grid.integrate_row(j, |xi| {
                    let y = u - xi;
                    (-y * y / (2.0 * sigma * sigma)).exp()
                });
                norm * conv / sqrt_g
            })
            .collect();
        values.push(row);
    }
    let mut x_weights = vec![h; n_out];
    x_weights[0] = h / 2.0;
    x_weights[n_out - 1] = h / 2.0;
    Ok(TomogramGrid::from_parts(
        grid.thetas().to_vec(),
        xs_out,
        x_weights,
        values,
    ))
}

/// Forward map on tomographic moments:
/// `<X^r>_amp = g^{r/2} sum_l C(r,2l) (2l-1)!! <X^{r-2l}> sigma^{2l}`.
pub fn amplified_tomographic_moments(
    m: &TomographicMoments,
    g: f64,
    sigma: f64,
) -> TomographicMoments {
    let values = m
        .values
        .iter()
        .map(|row| {
            (0..row.len())
                .map(|r| {
                    let mut acc = 0.0;
                    for l in 0..=r / 2 {
                        acc += binomial(r, 2 * l)
                            * double_factorial_odd(l)
                            * sigma.powi(2 * l as i32)
                            * row[r - 2 * l];
                    }
                    g.powf(r as f64 / 2.0) * acc
                })
                .collect()
        })
        .collect();
    TomographicMoments {
        thetas: m.thetas.clone(),
        max_order: m.max_order,
        values,
        stderr: None,
    }
}

/// Exact lower-triangular inversion of [`amplified_tomographic_moments`].
pub fn deamplified_tomographic_moments(
    m: &TomographicMoments,
    g: f64,
    sigma: f64,
) -> TomographicMoments {
    let values = m
        .values
        .iter()
        .map(|row| {
            let mut out: Vec<f64> = Vec::with_capacity(row.len());
            for r in 0..row.len() {
                let mut acc = row[r] / g.powf(r as f64 / 2.0);
                for l in 1..=r / 2 {
                    acc -= binomial(r, 2 * l)
                        * double_factorial_odd(l)
                        * sigma.powi(2 * l as i32)
                        * out[r - 2 * l];
                }
                out.push(acc);
            }
            out
        })
        .collect();
    TomographicMoments {
        thetas: m.thetas.clone(),
        max_order: m.max_order,
        values,
        stderr: None,
    }
}
