use super::{run_wave, WaveRun};
use crate::error::{Error, Result};
use crate::geometry::SchwParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub dr: f64,
    pub dt: f64,
    pub energy_final: f64,
    pub c_obs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelResult>,
    /// Weighted `L^2` distance of `u(T)` between successive levels on the
    /// coarser grid.
    pub field_errors: Vec<f64>,
    pub energy_errors: Vec<f64>,
    pub field_order: f64,
    pub energy_order: f64,
    /// Set when either order falls below 1.8.
    pub low_order: bool,
}

/// Least-squares slope of `-log2 e_m` against the level index.
fn fitted_order(e: &[f64]) -> f64 {
    let m = e.len() as f64;
    let xs: Vec<f64> = (0..e.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = e.iter().map(|x| x.log2()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    -sxy / sxx
}

fn check_monotone(name: &str, e: &[f64]) -> Result<()> {
    if e.iter().any(|x| !(x.is_finite() && *x > 0.0)) || e.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InconclusiveConvergence(format!("{name} differences not decreasing: {e:?}")));
    }
    Ok(())
}

/// Self-convergence over `levels` runs, each halving `dr` and `dt`.
pub fn convergence_study(sp: SchwParams, base: &WaveRun, levels: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::Config(format!("need at least 3 resolutions, got {levels}")));
    }
    let k = sp.dim() + 2;
    let mut out = vec![];
    let mut prev: Option<(Vec<f64>, f64)> = None;
    let (mut field_errors, mut energy_errors) = (vec![], vec![]);
    for m in 0..levels {
        let run = WaveRun { domain: base.domain.refined(m as u32), ..base.clone() };
        let res = run_wave(sp, &run)?;
        let e_final = *res.energy.e_slice.last().unwrap_or(&0.0);
        let u = res.final_field.u;
        if let Some((pu, pe)) = prev.take() {
            if u.len() != 2 * pu.len() - 1 {
                return Err(Error::Config(format!("grids of {} and {} points are not nested", pu.len(), u.len())));
            }
            let h = run.domain.h() * 2.0;
            let r0 = run.domain.r_e;
            let s: f64 = pu
                .iter()
                .enumerate()
                .map(|(i, x)| (x - u[2 * i]).powi(2) * (r0 + h * i as f64).powi(k) * h)
                .sum();
            field_errors.push(s.sqrt());
            energy_errors.push((pe - e_final).abs());
        }
        out.push(LevelResult { dr: run.domain.h(), dt: run.domain.k(), energy_final: e_final, c_obs: res.c_obs });
        prev = Some((u, e_final));
    }
    check_monotone("field", &field_errors)?;
    check_monotone("energy", &energy_errors)?;
    let field_order = fitted_order(&field_errors);
    let energy_order = fitted_order(&energy_errors);
    Ok(ConvergenceReport {
        levels: out,
        field_errors,
        energy_errors,
        field_order,
        energy_order,
        low_order: field_order < 1.8 || energy_order < 1.8,
    })
}
