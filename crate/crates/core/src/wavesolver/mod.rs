//! Per-mode evolution of `Box_S u = f` on Tangherlini in the ingoing chart
//! `(v~, r, omega)`, with energy, lateral flux and localized-energy
//! diagnostics.
//!
//! A mode `u = Y_l(omega) v(v~, r)` with `-Lap Y_l = l(l + d + 1) Y_l` is
//! evolved as a first-order system in `(u, P)`, `P` the momentum
//! conjugate to `u` on the slices, by second-order differences in `r` and
//! classical Runge-Kutta in `v~`. Snapshots carry `(u, w = d_v~ u)`.

mod convergence;
mod diagnostics;
mod evolve;
mod operator;

pub use convergence::{convergence_study, ConvergenceReport, LevelResult};
pub use diagnostics::{
    diagnostics, observed_constant, slice_energy, AnnulusNorm, DensitySample, EnergyReport, NormReport,
};
pub use evolve::{evolve, BoundaryTrace, History, CFL_MAX};
pub use operator::{assemble_mode, ModeOperator};

use crate::error::{Error, Result};
use crate::geometry::{IngoingChart, SchwParams};
use crate::numerics::smooth;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverDomain {
    pub r_e: f64,
    pub r_max: f64,
    pub dr: f64,
    pub l: u32,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    /// Spacing in `v~` of the stored snapshots.
    pub sample_dt: f64,
}

impl Default for SolverDomain {
    fn default() -> Self {
        SolverDomain { r_e: 0.95, r_max: 64.0, dr: 0.02, l: 0, dt: 0.01, t_max: 50.0, sample_dt: 0.1 }
    }
}

impl SolverDomain {
    pub fn validate(&self, sp: &SchwParams) -> Result<()> {
        if !(0.0 < self.r_e && self.r_e < sp.r_s && sp.r_ps() < self.r_max) {
            return Err(Error::Config(format!(
                "need 0 < r_e < r_s < r_ps < r_max, got r_e = {}, r_max = {}",
                self.r_e, self.r_max
            )));
        }
        if !(self.dr > 0.0 && self.dt > 0.0 && self.t_max > 0.0 && self.sample_dt > 0.0) {
            return Err(Error::Config("dr, dt, T and sample_dt must be positive".into()));
        }
        if self.cells() < 8 {
            return Err(Error::Config(format!("grid too coarse: {} cells", self.cells())));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        ((self.r_max - self.r_e) / self.dr).round().max(1.0) as usize
    }

    /// Grid spacing, adjusted so the cells tile `[r_e, r_max]` exactly.
    pub fn h(&self) -> f64 {
        (self.r_max - self.r_e) / self.cells() as f64
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    /// Time step, adjusted so the steps tile `[0, T]` exactly.
    pub fn k(&self) -> f64 {
        self.t_max / self.steps() as f64
    }

    pub fn cadence(&self) -> usize {
        (self.sample_dt / self.k()).round().max(1.0) as usize
    }

    /// `l(l + d + 1)`.
    pub fn eigenvalue(&self, sp: &SchwParams) -> f64 {
        let l = self.l as f64;
        l * (l + sp.d as f64 + 1.0)
    }

    /// The realized steps divided by `2^m`, so that grids are nested.
    pub fn refined(&self, m: u32) -> Self {
        let s = 2f64.powi(m as i32);
        SolverDomain { dr: self.h() / s, dt: self.k() / s, ..*self }
    }
}

/// Initial data with `d_v~ u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialData {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// Smooth, supported in `|r - center| < width`.
    Bump { center: f64, width: f64, amplitude: f64 },
    /// Indicator of `|r - center| < width`.
    Step { center: f64, width: f64, amplitude: f64 },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian { center: 3.0, width: 0.5, amplitude: 1.0 }
    }
}

impl InitialData {
    pub fn profile(&self, r: f64) -> f64 {
        match *self {
            InitialData::Gaussian { center, width, amplitude } => amplitude * (-((r - center) / width).powi(2)).exp(),
            InitialData::Bump { center, width, amplitude } => amplitude * smooth::bump((r - center) / width),
            InitialData::Step { center, width, amplitude } => {
                if (r - center).abs() < width {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn field(&self, grid: &[f64]) -> ModeField {
        ModeField { u: grid.iter().map(|&r| self.profile(r)).collect(), w: vec![0.0; grid.len()] }
    }
}

/// Right-hand side `f`, a product of bumps in `r` and `v~`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Forcing {
    #[default]
    None,
    Pulse { center: f64, width: f64, amplitude: f64, v_center: f64, v_width: f64 },
}

impl Forcing {
    pub fn is_none(&self) -> bool {
        matches!(self, Forcing::None)
    }

    pub fn spatial(&self, grid: &[f64]) -> Vec<f64> {
        match *self {
            Forcing::None => vec![0.0; grid.len()],
            Forcing::Pulse { center, width, amplitude, .. } => {
                grid.iter().map(|&r| amplitude * smooth::bump((r - center) / width)).collect()
            }
        }
    }

    pub fn temporal(&self, v: f64) -> f64 {
        match *self {
            Forcing::None => 0.0,
            Forcing::Pulse { v_center, v_width, .. } => smooth::bump((v - v_center) / v_width),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeField {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl ModeField {
    pub fn zeros(n: usize) -> Self {
        ModeField { u: vec![0.0; n], w: vec![0.0; n] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveRun {
    #[serde(flatten)]
    pub domain: SolverDomain,
    pub data: InitialData,
    pub forcing: Forcing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveResult {
    pub energy: EnergyReport,
    pub norms: NormReport,
    pub c_obs: f64,
    pub final_field: ModeField,
}

/// Chart, operator, evolution and diagnostics for one run.
pub fn run_wave(sp: SchwParams, run: &WaveRun) -> Result<WaveResult> {
    run.domain.validate(&sp)?;
    let chart = IngoingChart::new(sp, run.domain.r_e, run.domain.r_max)?;
    let op = assemble_mode(sp, &chart, &run.domain)?;
    let init = run.data.field(&op.r);
    let hist = evolve(&op, init, &run.forcing)?;
    let (energy, norms) = diagnostics(&hist, &op);
    let c_obs = observed_constant(&energy, &norms);
    let final_field = hist.snapshots.last().cloned().unwrap_or_else(|| ModeField::zeros(op.r.len()));
    Ok(WaveResult { energy, norms, c_obs, final_field })
}
