//! Finite-sample data generation for the simulation study: a single random
//! walk regressor, regression errors `u_t = ρu_{t−1} + ξ_t` with five kinds of
//! short-run dynamics, and optional large initial values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detrend::DeterministicCase;
use crate::error::{Error, Result};
use crate::numeric::{RngStream, SeriesMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShortRunDynamics {
    Iid,
    Ar { phi: f64 },
    Ma { theta: f64 },
    Arma { phi: f64, theta: f64 },
    Garch { a1: f64, a2: f64 },
}

impl ShortRunDynamics {
    pub fn validate(self) -> Result<()> {
        let unit = |v: f64, name: &str| {
            if v.abs() < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("|{name}| must be below 1, got {v}")))
            }
        };
        match self {
            Self::Iid => Ok(()),
            Self::Ar { phi } => unit(phi, "phi"),
            Self::Ma { theta } => unit(theta, "theta"),
            Self::Arma { phi, theta } => unit(phi, "phi").and(unit(theta, "theta")),
            Self::Garch { a1, a2 } if a1 >= 0.0 && a2 >= 0.0 && a1 + a2 < 1.0 => Ok(()),
            Self::Garch { a1, a2 } => Err(Error::InvalidConfig(format!(
                "GARCH needs a1, a2 >= 0 and a1 + a2 < 1, got ({a1}, {a2})"
            ))),
        }
    }

    /// `(φ, θ)` of the equivalent ARMA(1,1); GARCH behaves like IID here.
    fn arma_parts(self) -> (f64, f64) {
        match self {
            Self::Iid | Self::Garch { .. } => (0.0, 0.0),
            Self::Ar { phi } => (phi, 0.0),
            Self::Ma { theta } => (0.0, theta),
            Self::Arma { phi, theta } => (phi, theta),
        }
    }

    /// The short-run designs of the simulation study.
    pub fn study_grid() -> Vec<Self> {
        let mut out = vec![Self::Iid];
        out.extend([0.3, 0.6, 0.9].map(|phi| Self::Ar { phi }));
        out.extend([0.3, 0.6, 0.9].map(|theta| Self::Ma { theta }));
        out.extend([(0.3, 0.6), (0.3, 0.3), (0.6, 0.3)].map(|(phi, theta)| Self::Arma { phi, theta }));
        out.extend([(0.05, 0.94), (0.01, 0.98)].map(|(a1, a2)| Self::Garch { a1, a2 }));
        out
    }
}

impl fmt::Display for ShortRunDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Iid => f.write_str("iid"),
            Self::Ar { phi } => write!(f, "ar({phi})"),
            Self::Ma { theta } => write!(f, "ma({theta})"),
            Self::Arma { phi, theta } => write!(f, "arma({phi};{theta})"),
            Self::Garch { a1, a2 } => write!(f, "garch({a1};{a2})"),
        }
    }
}

impl FromStr for ShortRunDynamics {
    type Err = Error;

    /// Accepts `iid`, `ar(φ)`, `ma(θ)`, `arma(φ;θ)` and `garch(a1;a2)`;
    /// a space or `/` may replace `;`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "iid" {
            return Ok(Self::Iid);
        }
        let bad = || Error::InvalidConfig(format!("unknown dynamics '{s}'"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<f64> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split([';', ' ', '/'])
            .filter(|a| !a.is_empty())
            .map(|a| a.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let out = match (name, args.as_slice()) {
            ("ar", [phi]) => Self::Ar { phi: *phi },
            ("ma", [theta]) => Self::Ma { theta: *theta },
            ("arma", [phi, theta]) => Self::Arma { phi: *phi, theta: *theta },
            ("garch", [a1, a2]) => Self::Garch { a1: *a1, a2: *a2 },
            _ => return Err(bad()),
        };
        out.validate()?;
        Ok(out)
    }
}

/// How `u_0` is set after the burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum U0Rule {
    /// Keep the burned-in value.
    Zero,
    LargeFixed(f64),
    LargeRandom(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub t: usize,
    pub case: DeterministicCase,
    pub dynamics: ShortRunDynamics,
    pub r_squared: f64,
    pub rho: f64,
    pub burn_in: usize,
    pub u0_rule: U0Rule,
}

impl DgpConfig {
    /// Null design (`ρ = 1`) with 100 burn-in periods.
    pub fn null(t: usize, case: DeterministicCase, dynamics: ShortRunDynamics, r_squared: f64) -> Self {
        Self { t, case, dynamics, r_squared, rho: 1.0, burn_in: 100, u0_rule: U0Rule::Zero }
    }

    /// Local alternative `ρ_T = 1 + c/T`.
    pub fn with_local(mut self, c: f64) -> Self {
        self.rho = 1.0 + c / self.t as f64;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 2 {
            return Err(Error::InvalidConfig(format!("T must be at least 2, got {}", self.t)));
        }
        if !(0.0..1.0).contains(&self.r_squared) {
            return Err(Error::InvalidConfig(format!("R² must lie in [0, 1), got {}", self.r_squared)));
        }
        if !self.rho.is_finite() || self.rho.abs() > 1.0 {
            return Err(Error::InvalidConfig(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        self.dynamics.validate()
    }

    /// `(x_0, μ, τ)` of the study design.
    fn deterministics(&self) -> (f64, f64, [f64; 2]) {
        match self.case {
            DeterministicCase::D0 => (0.0, 0.0, [0.0, 0.0]),
            DeterministicCase::D1 => (1.0, 0.0, [1.0, 0.0]),
            DeterministicCase::D2 => (1.0, 1.0, [1.0, 1.0]),
        }
    }
}

/// One simulated data set: `y` and a single-column `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub y: Vec<f64>,
    pub x: SeriesMatrix,
}

/// `u_0` of order `T^{1/2}` for a local alternative.
pub fn large_u0(lambda_u: f64, rho_t: f64, rule: U0Rule, rng: &mut RngStream) -> Result<f64> {
    if rho_t.abs() >= 1.0 {
        return Err(Error::UnitRho);
    }
    let scale = (1.0 - rho_t * rho_t).sqrt();
    Ok(match rule {
        U0Rule::Zero => 0.0,
        U0Rule::LargeFixed(_) => lambda_u / scale,
        U0Rule::LargeRandom(_) => lambda_u / scale * rng.standard_normal(),
    })
}

/// Long-run covariance of `[ξ_t, v_t]'`.
pub fn longrun_covariance(dynamics: ShortRunDynamics, sigma_ev: f64) -> [[f64; 2]; 2] {
    let (phi, theta) = dynamics.arma_parts();
    let a = (1.0 - theta) / (1.0 - phi);
    [[a * a, a * sigma_ev], [a * sigma_ev, 1.0]]
}

/// `Ω_ξv² / (Ω_ξξ Ω_vv)`.
pub fn implied_r_squared(omega: [[f64; 2]; 2]) -> f64 {
    omega[0][1] * omega[1][0] / (omega[0][0] * omega[1][1])
}

pub fn generate_sample(config: &DgpConfig, rng: &mut RngStream) -> Result<Sample> {
    config.validate()?;
    let sigma = config.r_squared.sqrt();
    let orth = (1.0 - config.r_squared).sqrt();
    let steps = config.burn_in + config.t;
    let (mut xi, mut eps_prev, mut h) = (0.0_f64, 0.0_f64, 1.0_f64);
    let mut u = 0.0;
    let mut v = Vec::with_capacity(config.t);
    let mut u_path = Vec::with_capacity(config.t);
    let mut u0_shift = None;
    for step in 0..steps {
        let z1 = rng.standard_normal();
        let z2 = rng.standard_normal();
        let eps = z1;
        xi = match config.dynamics {
            ShortRunDynamics::Iid => eps,
            ShortRunDynamics::Ar { phi } => phi * xi + eps,
            ShortRunDynamics::Ma { theta } => eps - theta * eps_prev,
            ShortRunDynamics::Arma { phi, theta } => phi * xi + eps - theta * eps_prev,
            ShortRunDynamics::Garch { a1, a2 } => {
                h = (1.0 - a1 - a2) + a1 * xi * xi + a2 * h;
                h.sqrt() * eps
            }
        };
        eps_prev = eps;
        u = config.rho * u + xi;
        if step + 1 == config.burn_in {
            u0_shift = Some(u);
        }
        if step >= config.burn_in {
            v.push(sigma * z1 + orth * z2);
            u_path.push(u);
        }
    }
    if !matches!(config.u0_rule, U0Rule::Zero) {
        // u_t = ρ^t u_0 + (terms after t = 0), so replacing u_0 shifts u_t by ρ^t (u_0' − u_0).
        let lambda = match config.u0_rule {
            U0Rule::LargeFixed(l) | U0Rule::LargeRandom(l) => l,
            U0Rule::Zero => unreachable!(),
        };
        let new_u0 = large_u0(lambda, config.rho, config.u0_rule, rng)?;
        let old_u0 = u0_shift.unwrap_or(0.0);
        let mut factor = config.rho;
        for ut in u_path.iter_mut() {
            *ut += factor * (new_u0 - old_u0);
            factor *= config.rho;
        }
    }
    let (x0, mu, tau) = config.deterministics();
    let mut x = Vec::with_capacity(config.t);
    let mut level = x0;
    let mut y = Vec::with_capacity(config.t);
    for (i, (vt, ut)) in v.iter().zip(&u_path).enumerate() {
        let t = (i + 1) as f64;
        level += mu + vt;
        x.push(level);
        let det = match config.case {
            DeterministicCase::D0 => 0.0,
            DeterministicCase::D1 => tau[0],
            DeterministicCase::D2 => tau[0] + tau[1] * t,
        };
        y.push(det + level + ut);
    }
    Ok(Sample { y, x: SeriesMatrix::from_column(x)? })
}
