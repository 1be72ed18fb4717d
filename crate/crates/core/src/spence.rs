//! Closed-form geometry of the two-type education game.
//!
//! A worker of productivity `theta_L` or `theta_H` (prior `p` on the high
//! type) picks education `e` at cost `c(e | theta)`, and the firm pays the
//! posterior mean. With cursed beliefs the wage after a separating signal is
//! pulled toward the prior mean, which shrinks every incentive gap by the
//! factor `1 - chi`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::chi::Chi;
use crate::error::{Error, Result};
use crate::game::{PriorDistribution, SignalingGame};
use crate::solver::OPT_TOL;

type CostFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Signaling cost `c(e | theta)`.
#[derive(Clone)]
pub enum CostFunction {
    /// `e / theta`
    Linear,
    /// `e^2 / theta`
    Quadratic,
    /// `e^k / theta`
    Power(f64),
    /// Any `(e, theta) -> cost`, inverted numerically.
    Custom(Arc<CostFn>),
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFunction::Linear => f.write_str("Linear"),
            CostFunction::Quadratic => f.write_str("Quadratic"),
            CostFunction::Power(k) => write!(f, "Power({k})"),
            CostFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl CostFunction {
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        CostFunction::Custom(Arc::new(f))
    }

    pub fn eval(&self, e: f64, theta: f64) -> f64 {
        match self {
            CostFunction::Linear => e / theta,
            CostFunction::Quadratic => e * e / theta,
            CostFunction::Power(k) => e.powf(*k) / theta,
            CostFunction::Custom(f) => f(e, theta),
        }
    }

    fn closed_inverse(&self, value: f64, theta: f64) -> Option<f64> {
        match self {
            CostFunction::Linear => Some(value * theta),
            CostFunction::Quadratic => Some((value * theta).sqrt()),
            CostFunction::Power(k) => Some((value * theta).powf(1.0 / k)),
            CostFunction::Custom(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpenceType {
    Low,
    High,
}

#[derive(Debug, Clone)]
pub struct SpenceModel {
    theta_l: f64,
    theta_h: f64,
    p: f64,
    cost: CostFunction,
}

impl SpenceModel {
    /// Validates `theta_H > theta_L > 0`, `p` in `(0, 1)`, and spot-checks
    /// that the cost vanishes at zero, increases in `e`, and is lower for the
    /// high type. A cost that is not convex only triggers a warning.
    pub fn new(theta_l: f64, theta_h: f64, p: f64, cost: CostFunction) -> Result<Self> {
        if !(theta_l > 0.0 && theta_h > theta_l && theta_h.is_finite()) {
            return Err(Error::invalid(format!("need theta_H > theta_L > 0, got theta_L = {theta_l}, theta_H = {theta_h}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("prior p = {p} must lie in (0, 1)")));
        }
        if let CostFunction::Power(k) = cost {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::invalid(format!("cost exponent {k} must be positive")));
            }
        }
        let model = SpenceModel { theta_l, theta_h, p, cost };
        model.check_cost()?;
        Ok(model)
    }

    fn check_cost(&self) -> Result<()> {
        for theta in [self.theta_l, self.theta_h] {
            let c0 = self.cost.eval(0.0, theta);
            if c0.abs() > 1e-12 {
                return Err(Error::invalid(format!("cost at zero education is {c0} for theta = {theta}")));
            }
        }
        let top = self.cost_inverse(self.delta(), SpenceType::High)?;
        let n = 200;
        let mut convex_warned = false;
        for i in 0..=n {
            let e = top * i as f64 / n as f64;
            for theta in [self.theta_l, self.theta_h] {
                let (c, c_up) = (self.cost.eval(e, theta), self.cost.eval(e + 1e-6, theta));
                if !(c_up > c) {
                    return Err(Error::invalid(format!("cost is not increasing at e = {e}, theta = {theta}")));
                }
                let h = top / n as f64;
                if !convex_warned && e >= h {
                    let second = self.cost.eval(e + h, theta) - 2.0 * c + self.cost.eval(e - h, theta);
                    if second < -1e-9 * c.abs().max(1.0) {
                        log::warn!("cost function is not convex near e = {e}, theta = {theta}");
                        convex_warned = true;
                    }
                }
            }
            if e > 0.0 && !(self.cost.eval(e, self.theta_h) < self.cost.eval(e, self.theta_l)) {
                return Err(Error::invalid(format!("high type's cost is not below the low type's at e = {e}")));
            }
        }
        Ok(())
    }

    pub fn theta_l(&self) -> f64 {
        self.theta_l
    }

    pub fn theta_h(&self) -> f64 {
        self.theta_h
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn cost_function(&self) -> &CostFunction {
        &self.cost
    }

    pub fn delta(&self) -> f64 {
        self.theta_h - self.theta_l
    }

    pub fn theta(&self, ty: SpenceType) -> f64 {
        match ty {
            SpenceType::Low => self.theta_l,
            SpenceType::High => self.theta_h,
        }
    }

    pub fn cost(&self, e: f64, ty: SpenceType) -> f64 {
        self.cost.eval(e, self.theta(ty))
    }

    /// Education at which type `ty` pays `value`.
    pub fn cost_inverse(&self, value: f64, ty: SpenceType) -> Result<f64> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("cost value {value} must be finite and non-negative")));
        }
        if value == 0.0 {
            return Ok(0.0);
        }
        let theta = self.theta(ty);
        if let Some(e) = self.cost.closed_inverse(value, theta) {
            return Ok(e);
        }
        let f = |e: f64| self.cost.eval(e, theta);
        let mut hi = 10.0 * self.delta() * self.theta_l;
        loop {
            let c = f(hi);
            if !c.is_finite() {
                return Err(Error::invalid(format!("cost is not finite at e = {hi} while inverting {value}")));
            }
            if c >= value {
                break;
            }
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::invalid(format!("cost never reaches {value}")));
            }
        }
        let tol = 1e-10 * value.max(1.0);
        let mut lo = 0.0;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            let c = f(mid);
            if (c - value).abs() <= tol * 1e-3 || hi - lo <= f64::EPSILON * hi {
                return Ok(mid);
            }
            if c < value {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Prior-mean wage.
    pub fn pooling_wage(&self) -> f64 {
        self.p * self.theta_h + (1.0 - self.p) * self.theta_l
    }
}

/// A closed interval of education levels, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Interval {
    Empty,
    Closed { lo: f64, hi: f64 },
}

impl Interval {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Interval::Empty => None,
            Interval::Closed { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.bounds().is_some_and(|(lo, hi)| x >= lo - tol && x <= hi + tol)
    }

    /// `n + 1` evenly spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match self.bounds() {
            None => Vec::new(),
            Some((lo, hi)) if hi == lo || n == 0 => vec![lo],
            Some((lo, hi)) => (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect(),
        }
    }
}

/// Equilibrium wages after the low and the high signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WagePair {
    pub w_l: f64,
    pub w_h: f64,
}

/// High-type educations that support a separating equilibrium with the low
/// type at zero. Empty when fully cursed.
pub fn separating_region(model: &SpenceModel, chi: Chi) -> Result<Interval> {
    if chi.is_fully_cursed() {
        return Ok(Interval::Empty);
    }
    let gap = chi.complement() * model.delta();
    Ok(Interval::Closed {
        lo: model.cost_inverse(gap, SpenceType::Low)?,
        hi: model.cost_inverse(gap, SpenceType::High)?,
    })
}

/// Pooled educations that support a pooling equilibrium.
pub fn pooling_region(model: &SpenceModel, chi: Chi) -> Result<Interval> {
    let gap = chi.complement() * model.p * model.delta();
    Ok(Interval::Closed { lo: 0.0, hi: model.cost_inverse(gap, SpenceType::Low)? })
}

/// High-type education that keeps the low type indifferent when it joins
/// the high signal with probability `q`.
pub fn hybrid_locus(model: &SpenceModel, chi: Chi, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!("mixing probability {q} must lie in (0, 1]")));
    }
    let p = model.p;
    let share = p / (p + (1.0 - p) * q);
    model.cost_inverse(chi.complement() * share * model.delta(), SpenceType::Low)
}

/// `(e_H, e_L)` of the least-cost separating outcome, or `(0, 0)` when fully
/// cursed.
pub fn riley_outcome(model: &SpenceModel, chi: Chi) -> Result<(f64, f64)> {
    if chi.is_fully_cursed() {
        return Ok((0.0, 0.0));
    }
    Ok((model.cost_inverse(chi.complement() * model.delta(), SpenceType::Low)?, 0.0))
}

/// Wages paid after a fully separating signal, under cursed beliefs.
pub fn equilibrium_wages(model: &SpenceModel, chi: Chi) -> WagePair {
    let x = chi.value();
    let d = model.delta();
    WagePair { w_l: model.theta_l + model.p * x * d, w_h: model.theta_h - (1.0 - model.p) * x * d }
}

/// Weak set order on intervals: `a` reaches at least as high as `b` at both
/// ends.
pub fn weak_set_dominates(a: &Interval, b: &Interval) -> Result<bool> {
    match (a.bounds(), b.bounds()) {
        (Some((alo, ahi)), Some((blo, bhi))) => Ok(ahi >= bhi && alo >= blo),
        _ => Err(Error::EmptyInterval),
    }
}

/// Everything the region diagram shows at one `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRow {
    pub chi: Chi,
    pub separating: Interval,
    pub pooling: Interval,
    pub riley_e: f64,
    pub wages: WagePair,
}

pub fn region_sweep(model: &SpenceModel, chis: &[Chi]) -> Result<Vec<RegionRow>> {
    chis.iter()
        .map(|&chi| {
            Ok(RegionRow {
                chi,
                separating: separating_region(model, chi)?,
                pooling: pooling_region(model, chi)?,
                riley_e: riley_outcome(model, chi)?.0,
                wages: equilibrium_wages(model, chi),
            })
        })
        .collect()
}

/// An equilibrium outcome of the continuous-education game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Candidate {
    /// Low type at zero, high type at `e_h`.
    Separating { e_h: f64 },
    /// Both types at `e`.
    Pooling { e: f64 },
    /// High type at `e_h`; low type at `e_h` with probability `q`, else zero.
    Hybrid { q: f64, e_h: f64 },
}

impl Candidate {
    /// Equilibrium payoffs `(u_L, u_H)` at `chi`.
    pub fn payoffs(&self, model: &SpenceModel, chi: Chi) -> (f64, f64) {
        let x = chi.value();
        let d = model.delta();
        let wages = equilibrium_wages(model, chi);
        match *self {
            Candidate::Separating { e_h } => (wages.w_l, wages.w_h - model.cost(e_h, SpenceType::High)),
            Candidate::Pooling { e } => {
                let w = model.pooling_wage();
                (w - model.cost(e, SpenceType::Low), w - model.cost(e, SpenceType::High))
            }
            Candidate::Hybrid { q, e_h } => {
                let p = model.p;
                let mu = x * p + (1.0 - x) * p / (p + (1.0 - p) * q);
                let w = model.theta_l + mu * d;
                (wages.w_l, w - model.cost(e_h, SpenceType::High))
            }
        }
    }
}

/// The cursed intuitive criterion for a candidate, with every positive
/// education level available as a deviation.
///
/// Wages supported by `chi`-consistent beliefs run from `w_L` to `w_H` of
/// [`equilibrium_wages`]. A type breaks the candidate either because even
/// the lowest such wage at almost no education beats its payoff, or because
/// it is the high type and some education level is too expensive for the low
/// type to ever want, yet cheap enough that the high type gains at the wage
/// the pinned belief then forces.
pub fn criterion_survives(model: &SpenceModel, chi: Chi, candidate: &Candidate) -> Result<bool> {
    let (u_l, u_h) = candidate.payoffs(model, chi);
    let wages = equilibrium_wages(model, chi);
    if wages.w_l > u_l + OPT_TOL || wages.w_l > u_h + OPT_TOL {
        return Ok(false);
    }
    let b = wages.w_h - u_h;
    if b <= OPT_TOL {
        return Ok(true);
    }
    let a = wages.w_h - u_l;
    let lo = if a >= 0.0 { model.cost_inverse(a, SpenceType::Low)? } else { 0.0 };
    let reach = model.cost_inverse(b, SpenceType::High)?;
    Ok(reach <= lo + OPT_TOL * lo.max(1.0))
}

/// Separating and pooling candidates on `n`-step grids over their regions,
/// plus hybrids on the locus at the given mixing probabilities that keep the
/// high type from dropping to zero education.
pub fn closed_form_candidates(model: &SpenceModel, chi: Chi, n: usize, hybrid_qs: &[f64]) -> Result<Vec<Candidate>> {
    let mut out: Vec<Candidate> = separating_region(model, chi)?
        .grid(n)
        .into_iter()
        .map(|e_h| Candidate::Separating { e_h })
        .collect();
    out.extend(pooling_region(model, chi)?.grid(n).into_iter().map(|e| Candidate::Pooling { e }));
    if !chi.is_fully_cursed() {
        for &q in hybrid_qs {
            let e_h = hybrid_locus(model, chi, q)?;
            let cand = Candidate::Hybrid { q, e_h };
            if cand.payoffs(model, chi).1 >= equilibrium_wages(model, chi).w_l - OPT_TOL {
                out.push(cand);
            }
        }
    }
    Ok(out)
}

/// The finite game with education restricted to `grid`; types are
/// `[theta_L, theta_H]`.
pub fn discretized_game(model: &SpenceModel, grid: &[f64]) -> Result<SignalingGame> {
    if grid.is_empty() {
        return Err(Error::invalid("education grid is empty"));
    }
    let costs = [SpenceType::Low, SpenceType::High]
        .iter()
        .map(|&ty| grid.iter().map(|&e| model.cost(e, ty)).collect())
        .collect();
    SignalingGame::wage_quadratic(
        vec!["theta_L".into(), "theta_H".into()],
        PriorDistribution::new(vec![1.0 - model.p, model.p])?,
        vec![model.theta_l, model.theta_h],
        grid.iter().map(|e| crate::format::fmt_num(*e)).collect(),
        costs,
    )
}
