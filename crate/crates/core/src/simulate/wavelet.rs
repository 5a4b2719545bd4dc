use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sha256_hex;
use crate::quadrature::{integrate_segments, AdaptiveOptions};
use crate::wavelet_kernel::{interp_lagrange, KernelTable, MeyerProfile, TableSpec};

/// Time-domain mother wavelet `ψ(t) = (1/π) ∫ cos((t + 1/2)ξ) b(ξ) dξ` over the band.
pub fn psi_time_domain(profile: &MeyerProfile, t: f64) -> Result<f64> {
    let shift = t + 0.5;
    let e = integrate_segments(
        |xi| (shift * xi).cos() * profile.amplitude(xi),
        &profile.breakpoints(),
        &AdaptiveOptions::default(),
    )?;
    Ok(e.value / PI)
}

/// Compactly supported wavelet sampled on a uniform grid, e.g. a Daubechies
/// wavelet from the cascade algorithm. Zero outside the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedWavelet {
    pub name: String,
    pub t_min: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TabulatedWavelet {
    pub fn new(name: impl Into<String>, t_min: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        let w = Self { name: name.into(), t_min, dt, values };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_min.is_finite()) || self.values.len() < 2 {
            return Err(Error::InvalidParameter("tabulated wavelet needs dt > 0 and at least two samples".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated wavelet has non-finite samples".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: Self = serde_json::from_str(text)?;
        w.validate()?;
        Ok(w)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.t_min, self.t_min + self.dt * (self.values.len() - 1) as f64)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = (t - self.t_min) / self.dt;
        if !(u >= 0.0 && u <= (self.values.len() - 1) as f64) {
            return 0.0;
        }
        interp_lagrange(&self.values, u)
    }

    pub fn envelope(&self, order: u32) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (3.0 + (self.t_min + self.dt * i as f64).abs()).powi(order as i32) * v.abs())
            .fold(0.0, f64::max)
    }

    pub fn shift_sum(&self) -> f64 {
        let (a, b) = self.support();
        (0..32)
            .map(|s| {
                let x = s as f64 / 32.0;
                ((x - b).ceil() as i64..=(x - a).floor() as i64).map(|k| self.eval(x - k as f64).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// The wavelet summed by `synth_fh`.
#[derive(Debug, Clone)]
pub enum TimeWavelet {
    /// Meyer wavelet tabulated as the `θ = −1/2` kernel row.
    Meyer(KernelTable),
    Tabulated(TabulatedWavelet),
}

pub(crate) const MEYER_THETA: f64 = -0.5;

impl TimeWavelet {
    pub fn meyer() -> Result<Self> {
        Ok(Self::Meyer(KernelTable::build(&TableSpec::with_thetas(vec![MEYER_THETA]))?))
    }

    /// Reuses the `θ = −1/2` row of an existing table.
    pub fn meyer_from(table: &KernelTable) -> Result<Self> {
        let idx = table.thetas.iter().position(|&th| th == MEYER_THETA).ok_or(Error::TableCoverage {
            what: "mother wavelet exponent",
            lo: MEYER_THETA,
            hi: MEYER_THETA,
            table_lo: table.theta_range().0,
            table_hi: table.theta_range().1,
        })?;
        let mut single = table.clone();
        single.values = table.row_values(idx).to_vec();
        single.thetas = vec![MEYER_THETA];
        Ok(Self::Meyer(single))
    }

    /// `None` outside the tabulated range of a non-compact wavelet.
    #[inline]
    pub fn eval(&self, t: f64) -> Option<f64> {
        match self {
            Self::Meyer(table) => table.eval(t, MEYER_THETA),
            Self::Tabulated(w) => Some(w.eval(t)),
        }
    }

    pub fn digest(&self) -> String {
        match self {
            Self::Meyer(table) => table.digest(),
            Self::Tabulated(w) => {
                let mut bytes = Vec::with_capacity(8 * w.values.len() + 16);
                for v in [w.t_min, w.dt].iter().chain(&w.values) {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                sha256_hex(&bytes)
            }
        }
    }

    /// Half-width beyond which the wavelet is treated as zero.
    pub fn radius(&self) -> f64 {
        match self {
            Self::Meyer(table) => {
                let (a, b) = table.t_range();
                a.abs().min(b.abs())
            }
            Self::Tabulated(w) => {
                let (a, b) = w.support();
                a.abs().max(b.abs())
            }
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Self::Tabulated(_))
    }

    /// `sup (3 + |t|)^L |ψ(t)|` over the samples.
    pub fn envelope(&self, order: u32) -> f64 {
        match self {
            Self::Meyer(table) => table.decay_envelope(order, 0),
            Self::Tabulated(w) => w.envelope(order),
        }
    }

    /// `sup_x Σ_k |ψ(x − k)|`.
    pub fn shift_sum(&self) -> f64 {
        match self {
            Self::Meyer(table) => table.shift_sum(MEYER_THETA, 0),
            Self::Tabulated(w) => w.shift_sum(),
        }
    }
}
