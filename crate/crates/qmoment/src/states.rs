//! The catalogue of one-mode states used throughout: number states, coherent
//! states, thermal states, and the even/odd coherent superpositions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Specification of a catalogue state, independent of any basis cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Number state `|N>`.
    Fock { n: u32 },
    /// Coherent state `|alpha>`.
    Coherent { re: f64, im: f64 },
    /// Thermal state at unitless temperature `T > 0` (populations ~ e^{-n/T}).
    Thermal { t: f64 },
    /// Even cat state `N_+ (|alpha> + |-alpha>)`.
    EvenCoherent { re: f64, im: f64 },
    /// Odd cat state `N_- (|alpha> - |-alpha>)`; undefined at alpha = 0.
    OddCoherent { re: f64, im: f64 },
}

impl StateSpec {
    pub fn fock(n: u32) -> Self {
        StateSpec::Fock { n }
    }

    pub fn coherent(alpha: Complex64) -> Self {
        StateSpec::Coherent {
            re: alpha.re,
            im: alpha.im,
        }
    }

    pub fn thermal(t: f64) -> Self {
        StateSpec::Thermal { t }
    }

    pub fn even_coherent(alpha: Complex64) -> Self {
        StateSpec::EvenCoherent {
            re: alpha.re,
            im: alpha.im,
        }
    }

    pub fn odd_coherent(alpha: Complex64) -> Self {
        StateSpec::OddCoherent {
            re: alpha.re,
            im: alpha.im,
        }
    }

    /// Check parameter domains (T > 0; odd cat needs alpha != 0).
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Thermal { t } if t <= 0.0 => Err(Error::InvalidParameter(format!(
                "thermal temperature must be positive, got {t}"
            ))),
            StateSpec::OddCoherent { re, im } if (re * re + im * im) < 1e-24 => {
                Err(Error::InvalidParameter(
                    "odd coherent state is undefined at alpha = 0".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// A Fock-basis cutoff that captures the state to well below 1e-10
    /// missing norm; callers may always pass a larger one.
    pub fn suggested_cutoff(&self) -> usize {
        match *self {
            StateSpec::Fock { n } => n as usize + 2,
            StateSpec::Coherent { re, im }
            | StateSpec::EvenCoherent { re, im }
            | StateSpec::OddCoherent { re, im } => {
                let a2 = re * re + im * im;
                (a2 + 10.0 * a2.sqrt() + 24.0).ceil() as usize
            }
            StateSpec::Thermal { t } => {
                // populations e^{-n/T}: need e^{-n/T} ~ 1e-14
                ((34.0 * t).ceil() as usize).max(32)
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn cx(re: f64, im: f64) -> String {
            if im == 0.0 {
                format!("{re}")
            } else if im < 0.0 {
                format!("{re}{im}i")
            } else {
                format!("{re}+{im}i")
            }
        }
        match *self {
            StateSpec::Fock { n } => write!(f, "fock:{n}"),
            StateSpec::Coherent { re, im } => write!(f, "coherent:{}", cx(re, im)),
            StateSpec::Thermal { t } => write!(f, "thermal:{t}"),
            StateSpec::EvenCoherent { re, im } => write!(f, "even:{}", cx(re, im)),
            StateSpec::OddCoherent { re, im } => write!(f, "odd:{}", cx(re, im)),
        }
    }
}

/// Parse `"a"`, `"a+bi"`, `"a-bi"` or `"bi"` into a complex number.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse complex number from '{s}'"));
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        // find the split between real and imaginary parts, skipping a leading sign
        // and exponent signs like 1e-3
        let mut split = None;
        for (idx, ch) in body.char_indices().skip(1) {
            if (ch == '+' || ch == '-')
                && !matches!(body.as_bytes()[idx - 1], b'e' | b'E')
            {
                split = Some(idx);
            }
        }
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|_| bad())?;
                let im_str = &body[idx..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, 0.0))
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    /// Accepts `fock:N`, `coherent:ALPHA`, `thermal:T`, `even:ALPHA`,
    /// `odd:ALPHA`, with `ALPHA` in `a`, `a+bi`, or `bi` form.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("state spec '{s}' missing ':'")))?;
        let spec = match kind {
            "fock" => StateSpec::Fock {
                n: arg.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad Fock index '{arg}'"))
                })?,
            },
            "coherent" => StateSpec::coherent(parse_complex(arg)?),
            "thermal" => StateSpec::Thermal {
                t: arg.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad temperature '{arg}'"))
                })?,
            },
            "even" => StateSpec::even_coherent(parse_complex(arg)?),
            "odd" => StateSpec::odd_coherent(parse_complex(arg)?),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown state kind '{other}' (expected fock|coherent|thermal|even|odd)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl StateSpec {
    pub fn alpha(&self) -> Option<Complex64> {
        match *self {
            StateSpec::Coherent { re, im }
            | StateSpec::EvenCoherent { re, im }
            | StateSpec::OddCoherent { re, im } => Some(Complex64::new(re, im)),
            _ => None,
        }
    }
}
