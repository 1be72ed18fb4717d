//! Separating equilibrium with a continuum of types and cost `e^2 / theta`.
//!
//! Productivity is spread over `[theta_min, theta_max]`. The separating
//! schedule is
//!
//! ```text
//! e(theta) = sqrt((1 - chi) (theta^2 - theta_min^2) / 2)
//! w(theta) = chi E[theta] + (1 - chi) theta
//! ```
//!
//! so cursedness both lowers education and flattens wages around the mean.

use serde::Serialize;

use crate::chi::Chi;
use crate::error::{Error, Result};

/// Shape of the type distribution, used only for its mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Density {
    #[default]
    Uniform,
    Triangular {
        mode: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumModel {
    theta_min: f64,
    theta_max: f64,
    mean: f64,
    density: Density,
}

impl ContinuumModel {
    /// A model whose mean comes from `density`, unless `mean` is given; a
    /// given mean that disagrees with the density wins with a warning.
    pub fn new(theta_min: f64, theta_max: f64, density: Density, mean: Option<f64>) -> Result<Self> {
        if !(theta_min > 0.0 && theta_max > theta_min && theta_max.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < theta_min < theta_max, got [{theta_min}, {theta_max}]"
            )));
        }
        let implied = match density {
            Density::Uniform => 0.5 * (theta_min + theta_max),
            Density::Triangular { mode } => {
                if !(theta_min..=theta_max).contains(&mode) {
                    return Err(Error::invalid(format!("triangular mode {mode} outside the support")));
                }
                (theta_min + theta_max + mode) / 3.0
            }
        };
        let mean = match mean {
            Some(m) => {
                if (m - implied).abs() > 1e-12 * implied {
                    log::warn!("given mean {m} differs from the density's mean {implied}; using {m}");
                }
                m
            }
            None => implied,
        };
        if !(theta_min < mean && mean < theta_max) {
            return Err(Error::invalid(format!("mean {mean} must lie strictly inside [{theta_min}, {theta_max}]")));
        }
        Ok(ContinuumModel { theta_min, theta_max, mean, density })
    }

    /// Uniform density on `[theta_min, 2 mean - theta_min]`.
    pub fn from_mean(theta_min: f64, mean: f64) -> Result<Self> {
        ContinuumModel::new(theta_min, 2.0 * mean - theta_min, Density::Uniform, None)
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn density(&self) -> Density {
        self.density
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if !(self.theta_min..=self.theta_max).contains(&theta) {
            return Err(Error::invalid(format!(
                "theta {theta} outside the support [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        Ok(())
    }

    /// `n` evenly spaced types in `(theta_min, theta_max]`.
    pub fn interior_grid(&self, n: usize) -> Vec<f64> {
        let step = (self.theta_max - self.theta_min) / n as f64;
        (1..=n).map(|i| self.theta_min + step * i as f64).collect()
    }

    /// `n` evenly spaced types in `[theta_min, theta_max]`.
    pub fn closed_grid(&self, n: usize) -> Vec<f64> {
        let step = (self.theta_max - self.theta_min) / (n - 1).max(1) as f64;
        (0..n).map(|i| self.theta_min + step * i as f64).collect()
    }

    fn education(&self, chi: Chi, theta: f64) -> f64 {
        (0.5 * chi.complement() * (theta * theta - self.theta_min * self.theta_min)).max(0.0).sqrt()
    }

    fn wage(&self, chi: Chi, theta: f64) -> f64 {
        chi.value() * self.mean + chi.complement() * theta
    }
}

pub fn separating_education(model: &ContinuumModel, chi: Chi, theta: f64) -> Result<f64> {
    model.check_theta(theta)?;
    Ok(model.education(chi, theta))
}

pub fn separating_wage(model: &ContinuumModel, chi: Chi, theta: f64) -> Result<f64> {
    model.check_theta(theta)?;
    Ok(model.wage(chi, theta))
}

/// Largest education at which every type can pool.
pub fn pooling_education_bound(model: &ContinuumModel, chi: Chi) -> f64 {
    let lo = model.theta_min;
    (chi.complement() * (lo * model.mean - lo * lo)).max(0.0).sqrt()
}

/// Type to (education, wage).
pub trait Schedule {
    fn at(&self, theta: f64) -> (f64, f64);
}

impl<F: Fn(f64) -> (f64, f64)> Schedule for F {
    fn at(&self, theta: f64) -> (f64, f64) {
        self(theta)
    }
}

/// The separating schedule of `model` at `chi`, defined for any `theta`.
pub fn separating_schedule(model: &ContinuumModel, chi: Chi) -> impl Schedule + '_ {
    move |theta: f64| (model.education(chi, theta), model.wage(chi, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncentiveCheck {
    pub theta: f64,
    /// The grid type the worker would best imitate.
    pub best_mimic: f64,
    /// Payoff from imitating `best_mimic` minus payoff from the own signal.
    pub advantage: f64,
    pub step: f64,
}

/// Brute-force best imitation for type `theta` over a `grid_size` grid of
/// the support.
pub fn incentive_check(model: &ContinuumModel, chi: Chi, theta: f64, grid_size: usize) -> Result<IncentiveCheck> {
    model.check_theta(theta)?;
    if chi.is_fully_cursed() {
        return Err(Error::invalid("the incentive check needs chi < 1"));
    }
    if grid_size < 100 {
        return Err(Error::invalid("grid_size must be at least 100"));
    }
    let payoff = |mimic: f64| {
        let e = model.education(chi, mimic);
        model.wage(chi, mimic) - e * e / theta
    };
    let grid = model.closed_grid(grid_size);
    let (best_mimic, best) = grid
        .iter()
        .map(|&m| (m, payoff(m)))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(IncentiveCheck {
        theta,
        best_mimic,
        advantage: best - payoff(theta),
        step: grid[1] - grid[0],
    })
}

/// Largest violation of the first-order condition
/// `(w - chi E) w'(e) = 2 (1 - chi) e` along `schedule`, with `w'(e)` taken
/// from central differences in `theta` (forward differences where the step
/// would leave the support). Non-finite derivatives count as infinite
/// violations.
pub fn ode_residual_of(model: &ContinuumModel, chi: Chi, schedule: &dyn Schedule, theta_grid: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &theta in theta_grid {
        let h = 1e-6 * theta;
        let (lo, hi) = if theta - h < model.theta_min { (theta, theta + h) } else { (theta - h, theta + h) };
        let (e_lo, w_lo) = schedule.at(lo);
        let (e_hi, w_hi) = schedule.at(hi);
        let slope = (w_hi - w_lo) / (e_hi - e_lo);
        let (e, w) = schedule.at(theta);
        let r = (w - chi.value() * model.mean) * slope - 2.0 * chi.complement() * e;
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r.abs());
    }
    worst
}

/// [`ode_residual_of`] for the separating schedule.
pub fn ode_residual(model: &ContinuumModel, chi: Chi, theta_grid: &[f64]) -> Result<f64> {
    if chi.is_fully_cursed() {
        return Err(Error::invalid("the first-order condition needs chi < 1"));
    }
    if let Some(&t) = theta_grid.iter().find(|&&t| !(model.theta_min..=model.theta_max).contains(&t)) {
        return Err(Error::invalid(format!("grid point {t} outside the support")));
    }
    Ok(ode_residual_of(model, chi, &separating_schedule(model, chi), theta_grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionRow {
    pub chi: Chi,
    /// Wage slope across the support.
    pub slope: f64,
    /// The type whose wage does not move with `chi`.
    pub pivot: f64,
    pub wage_at_pivot: f64,
}

pub fn wage_compression_report(model: &ContinuumModel, chi_grid: &[Chi]) -> Vec<CompressionRow> {
    chi_grid
        .iter()
        .map(|&chi| {
            let (lo, hi) = (model.theta_min, model.theta_max);
            CompressionRow {
                chi,
                slope: (model.wage(chi, hi) - model.wage(chi, lo)) / (hi - lo),
                pivot: model.mean,
                wage_at_pivot: model.wage(chi, model.mean),
            }
        })
        .collect()
}
