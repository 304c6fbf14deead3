use crate::error::{Error, Result};
use crate::geometry::{BlackHoleParams, SchwParams};
use crate::schw_multiplier::MultiplierConfig;
use crate::sos::Region;
use crate::wavesolver::{InitialData, WaveRun};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::PathBuf;

/// Named verification tasks. `All` runs every other task in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MetricInversion,
    Rderiv,
    TrappedScan,
    Geodesic,
    MultiplierVerify,
    BoundaryForms,
    SosVerify,
    WaveEvolve,
    Convergence,
    All,
}

impl Task {
    pub const COMPONENTS: [Task; 9] = [
        Task::MetricInversion,
        Task::Rderiv,
        Task::TrappedScan,
        Task::Geodesic,
        Task::MultiplierVerify,
        Task::BoundaryForms,
        Task::SosVerify,
        Task::WaveEvolve,
        Task::Convergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::MetricInversion => "metric-inversion",
            Task::Rderiv => "rderiv",
            Task::TrappedScan => "trapped-scan",
            Task::Geodesic => "geodesic",
            Task::MultiplierVerify => "multiplier-verify",
            Task::BoundaryForms => "boundary-forms",
            Task::SosVerify => "sos-verify",
            Task::WaveEvolve => "wave-evolve",
            Task::Convergence => "convergence",
            Task::All => "all",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Myers-Perry parameters as read from a config; checked by
/// [`RunConfig::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamsBlock {
    pub r_s: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        ParamsBlock { r_s: 1.0, a: 0.03, b: 0.03 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchwBlock {
    pub r_s: f64,
    pub d: u32,
}

impl Default for SchwBlock {
    fn default() -> Self {
        SchwBlock { r_s: 1.0, d: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub inversion: f64,
    pub rderiv: f64,
    pub oracle: f64,
    pub trapped_radius: f64,
    pub trapped_sphere: f64,
    pub drift: f64,
    pub hold: f64,
    pub c_star_stability: f64,
    pub kappa_max: f64,
    pub sos_residual: f64,
    pub lambda_identity: f64,
    pub bracket_floor: f64,
    pub envelope_factor: f64,
    pub c_obs_stability: f64,
    pub flux_floor: f64,
    pub order: [f64; 2],
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inversion: 1e-12,
            rderiv: 1e-8,
            oracle: 1e-8,
            trapped_radius: 1e-12,
            trapped_sphere: 1e-10,
            drift: 1e-8,
            hold: 1e-3,
            c_star_stability: 0.01,
            kappa_max: 10.0,
            sos_residual: 1e-8,
            lambda_identity: 1e-12,
            bracket_floor: -1e-10,
            envelope_factor: 2.0,
            c_obs_stability: 0.05,
            flux_floor: 1e-12,
            order: [1.8, 2.2],
        }
    }
}

/// Random phase-space sampling for the metric and trapping identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingBlock {
    pub samples: usize,
    /// Bound on `|a|, |b|` in units of `r_s`.
    pub ab_max: f64,
    pub inversion_r: [f64; 2],
    pub rderiv_r: [f64; 2],
    pub oracle_samples: usize,
}

impl Default for SamplingBlock {
    fn default() -> Self {
        SamplingBlock { samples: 10_000, ab_max: 0.3, inversion_r: [1.1, 6.0], rderiv_r: [1.1, 3.0], oracle_samples: 1000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrappedScanBlock {
    /// Grid points per direction in the `(Phi, Psi)` cone.
    pub n: usize,
    /// Cone half-width; measured from the geometry when absent.
    pub c_mp: Option<f64>,
    pub phi_hat: f64,
    pub psi_hat: f64,
}

impl Default for TrappedScanBlock {
    fn default() -> Self {
        TrappedScanBlock { n: 8, c_mp: None, phi_hat: 0.0, psi_hat: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeodesicBlock {
    /// Start of the scattering ray, `x = r^2`.
    pub x0: f64,
    pub theta0: f64,
    /// `(Theta, Phi, Psi)` of the scattering ray at `tau = -1`.
    pub angular: [f64; 3],
    pub span: f64,
    pub tol: f64,
    pub h_max: f64,
    pub hold_theta: f64,
    pub hold_span: f64,
    pub hold_tol: f64,
    pub departure_phi: f64,
    pub departure_psi: f64,
    pub departure_theta: f64,
    /// Relative lowering of `K` below the trapped value.
    pub departure_offset: f64,
    pub departure_span: f64,
    pub r_escape: f64,
}

impl Default for GeodesicBlock {
    fn default() -> Self {
        GeodesicBlock {
            x0: 36.0,
            theta0: 0.9,
            angular: [1.5, 2.0, -1.2],
            span: 1000.0,
            tol: 1e-10,
            h_max: 1.0,
            hold_theta: 0.6,
            hold_span: 50.0,
            hold_tol: 1e-12,
            departure_phi: 0.1,
            departure_psi: -0.05,
            departure_theta: 0.8,
            departure_offset: 1e-6,
            departure_span: 400.0,
            r_escape: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiplierBlock {
    pub profile: MultiplierConfig,
    pub grid: usize,
    pub profile_rows: usize,
    pub c_energy: f64,
    pub boundary_r_e: f64,
    pub boundary_grid: usize,
    /// Sample count for `n`, `l(F)` and `F'`.
    pub samples: usize,
}

impl Default for MultiplierBlock {
    fn default() -> Self {
        MultiplierBlock {
            profile: MultiplierConfig::default(),
            grid: 2000,
            profile_rows: 400,
            c_energy: 100.0,
            boundary_r_e: 0.95,
            boundary_grid: 2000,
            samples: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SosBlock {
    pub window: Region,
    pub bracket_samples: usize,
    /// Rows of the bracket table written to disk.
    pub csv_rows: usize,
    pub mu_region: Region,
    pub eps0: f64,
    pub envelope_eps0: Vec<f64>,
    pub envelope_samples: usize,
}

impl Default for SosBlock {
    fn default() -> Self {
        SosBlock {
            window: Region { r_lo: 1.2, r_hi: 1.7, samples: 10_000, ..Default::default() },
            bracket_samples: 100_000,
            csv_rows: 2000,
            mu_region: Region::default(),
            eps0: 0.05,
            envelope_eps0: vec![0.0125, 0.025, 0.05],
            envelope_samples: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveBlock {
    pub run: WaveRun,
    pub ls: Vec<u32>,
    pub snapshots: bool,
}

impl Default for WaveBlock {
    fn default() -> Self {
        let run = WaveRun { data: InitialData::Bump { center: 3.0, width: 1.5, amplitude: 1.0 }, ..Default::default() };
        WaveBlock { run, ls: vec![0, 1, 2], snapshots: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceBlock {
    pub run: WaveRun,
    pub levels: usize,
}

impl Default for ConvergenceBlock {
    fn default() -> Self {
        let mut run = WaveRun::default();
        run.domain.r_max = 34.0;
        run.domain.dr = 0.01;
        run.domain.dt = 0.005;
        run.domain.t_max = 20.0;
        ConvergenceBlock { run, levels: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub params: ParamsBlock,
    pub schw: SchwBlock,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub sampling: SamplingBlock,
    pub trapped_scan: TrappedScanBlock,
    pub geodesic: GeodesicBlock,
    pub multiplier: MultiplierBlock,
    pub sos: SosBlock,
    pub wave: WaveBlock,
    pub convergence: ConvergenceBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: None,
            params: ParamsBlock::default(),
            schw: SchwBlock::default(),
            out: None,
            seed: 7,
            tolerances: Tolerances::default(),
            sampling: SamplingBlock::default(),
            trapped_scan: TrappedScanBlock::default(),
            geodesic: GeodesicBlock::default(),
            multiplier: MultiplierBlock::default(),
            sos: SosBlock::default(),
            wave: WaveBlock::default(),
            convergence: ConvergenceBlock::default(),
        }
    }
}

/// Keys of `input` absent from `echo`, as dotted paths.
fn unknown_keys(input: &Value, echo: &Value, path: &str, out: &mut Vec<String>) {
    match (input, echo) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &p, out),
                    None => out.push(p),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates; every error here is a usage error.
    pub fn from_json(text: &str) -> Result<Self> {
        let input: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        if !input.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let cfg: RunConfig =
            serde_json::from_value(input.clone()).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
        let echo = serde_json::to_value(&cfg).map_err(|e| Error::Config(e.to_string()))?;
        let mut unknown = vec![];
        unknown_keys(&input, &echo, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bh(&self) -> Result<BlackHoleParams> {
        BlackHoleParams::new(self.params.r_s, self.params.a, self.params.b)
    }

    pub fn sp(&self) -> Result<SchwParams> {
        SchwParams::new(self.schw.r_s, self.schw.d)
    }

    pub fn validate(&self) -> Result<()> {
        self.bh()?;
        let sp = self.sp()?;
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.inversion", t.inversion),
            ("tolerances.rderiv", t.rderiv),
            ("tolerances.oracle", t.oracle),
            ("tolerances.trapped_radius", t.trapped_radius),
            ("tolerances.trapped_sphere", t.trapped_sphere),
            ("tolerances.drift", t.drift),
            ("tolerances.hold", t.hold),
            ("tolerances.c_star_stability", t.c_star_stability),
            ("tolerances.kappa_max", t.kappa_max),
            ("tolerances.sos_residual", t.sos_residual),
            ("tolerances.lambda_identity", t.lambda_identity),
            ("tolerances.envelope_factor", t.envelope_factor),
            ("tolerances.c_obs_stability", t.c_obs_stability),
            ("tolerances.flux_floor", t.flux_floor),
        ] {
            positive(name, v)?;
        }
        if !(t.order[0] < t.order[1]) {
            return Err(Error::Config(format!("tolerances.order must be an increasing pair, got {:?}", t.order)));
        }
        let s = &self.sampling;
        if s.samples == 0 || s.oracle_samples == 0 {
            return Err(Error::Config("sampling counts must be positive".into()));
        }
        positive("sampling.ab_max", s.ab_max)?;
        for (name, r) in [("sampling.inversion_r", s.inversion_r), ("sampling.rderiv_r", s.rderiv_r)] {
            if !(0.0 < r[0] && r[0] < r[1]) {
                return Err(Error::Config(format!("{name} must satisfy 0 < lo < hi, got {r:?}")));
            }
        }
        let g = &self.geodesic;
        for (name, v) in [
            ("geodesic.x0", g.x0),
            ("geodesic.span", g.span),
            ("geodesic.tol", g.tol),
            ("geodesic.h_max", g.h_max),
            ("geodesic.hold_span", g.hold_span),
            ("geodesic.hold_tol", g.hold_tol),
            ("geodesic.departure_span", g.departure_span),
            ("geodesic.r_escape", g.r_escape),
        ] {
            positive(name, v)?;
        }
        let m = &self.multiplier;
        if m.grid < 2 || m.boundary_grid < 2 || m.samples == 0 {
            return Err(Error::Config("multiplier grids need at least 2 points".into()));
        }
        positive("multiplier.c_energy", m.c_energy)?;
        if !(0.0 < m.boundary_r_e && m.boundary_r_e < sp.r_s) {
            return Err(Error::Config(format!("multiplier.boundary_r_e = {} must lie in (0, r_s)", m.boundary_r_e)));
        }
        let so = &self.sos;
        for (name, r) in [("sos.window", &so.window), ("sos.mu_region", &so.mu_region)] {
            if !(r.r_lo < r.r_hi && r.theta_lo < r.theta_hi && r.samples > 0) {
                return Err(Error::Config(format!("{name} must have r_lo < r_hi, theta_lo < theta_hi, samples > 0")));
            }
        }
        if so.bracket_samples == 0 || so.envelope_samples == 0 || so.envelope_eps0.len() < 2 {
            return Err(Error::Config("sos needs positive sample counts and at least two envelope eps0".into()));
        }
        positive("sos.eps0", so.eps0)?;
        if self.wave.ls.is_empty() {
            return Err(Error::Config("wave.ls must list at least one mode".into()));
        }
        self.wave.run.domain.validate(&sp)?;
        self.convergence.run.domain.validate(&sp)?;
        if self.convergence.levels < 3 {
            return Err(Error::Config(format!("convergence.levels must be at least 3, got {}", self.convergence.levels)));
        }
        Ok(())
    }
}
