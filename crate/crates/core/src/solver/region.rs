//! Polytopes of admissible beliefs.
//!
//! Every belief set used by the solver and the refinement has the same shape:
//! some types are pinned to a fixed mass, the others are bounded below, and
//! the whole vector sums to one. Writing `mu = lower + r * nu` with `r` the
//! residual mass turns the free part into a standard simplex over the free
//! types, which keeps linear optimization and feasibility questions exact.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chi::Chi;
use crate::error::{Error, Result};
use crate::game::{belief_floor, PriorDistribution, PROB_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefRegion {
    lower: Vec<f64>,
    pinned: Vec<bool>,
}

impl BeliefRegion {
    /// The whole simplex over `n` types.
    pub fn simplex(n: usize) -> Self {
        BeliefRegion { lower: vec![0.0; n], pinned: vec![false; n] }
    }

    /// Beliefs dominating the floor `chi F`.
    pub fn consistent(prior: &PriorDistribution, chi: Chi) -> Self {
        BeliefRegion { lower: belief_floor(prior, chi), pinned: vec![false; prior.len()] }
    }

    /// Floor-dominating beliefs with the `targets` pinned exactly at the floor.
    pub fn pinned(prior: &PriorDistribution, chi: Chi, targets: &[usize]) -> Result<Self> {
        let n = prior.len();
        if let Some(&t) = targets.iter().find(|&&t| t >= n) {
            return Err(Error::invalid(format!("type index {t} out of range")));
        }
        let region = BeliefRegion {
            lower: belief_floor(prior, chi),
            pinned: (0..n).map(|t| targets.contains(&t)).collect(),
        };
        if region.free_types().is_empty() && region.residual() > PROB_TOL {
            return Err(Error::InfeasiblePin { chi: chi.value(), residual: region.residual() });
        }
        Ok(region)
    }

    pub fn n_types(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn is_pinned(&self, t: usize) -> bool {
        self.pinned[t]
    }

    pub fn pinned_types(&self) -> Vec<usize> {
        (0..self.lower.len()).filter(|&t| self.pinned[t]).collect()
    }

    pub fn free_types(&self) -> Vec<usize> {
        (0..self.lower.len()).filter(|&t| !self.pinned[t]).collect()
    }

    /// Mass left after every type receives its lower bound.
    pub fn residual(&self) -> f64 {
        (1.0 - self.lower.iter().sum::<f64>()).max(0.0)
    }

    /// True when the region is a single belief.
    pub fn is_point(&self) -> bool {
        self.residual() <= PROB_TOL || self.free_types().len() <= 1
    }

    pub fn contains(&self, belief: &[f64], tol: f64) -> bool {
        belief.len() == self.lower.len()
            && (belief.iter().sum::<f64>() - 1.0).abs() <= tol
            && belief.iter().zip(&self.lower).zip(&self.pinned).all(|((&b, &lo), &pin)| {
                if pin {
                    (b - lo).abs() <= tol
                } else {
                    b >= lo - tol
                }
            })
    }

    /// Extreme points: the residual placed entirely on one free type.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let free = self.free_types();
        if free.is_empty() {
            return vec![self.lower.clone()];
        }
        let r = self.residual();
        free.iter()
            .map(|&t| {
                let mut v = self.lower.clone();
                v[t] += r;
                v
            })
            .collect()
    }

    /// Minimum of `sum_t coeffs[t] mu[t]` over the region, with a minimizer.
    pub fn min_linear(&self, coeffs: &[f64]) -> (f64, Vec<f64>) {
        self.vertices()
            .into_iter()
            .map(|v| (dot(&v, coeffs), v))
            .fold(None, |best: Option<(f64, Vec<f64>)>, cand| match best {
                Some(b) if b.0 <= cand.0 => Some(b),
                _ => Some(cand),
            })
            .expect("region has at least one vertex")
    }

    /// Maximum of `sum_t coeffs[t] mu[t]` over the region, with a maximizer.
    pub fn max_linear(&self, coeffs: &[f64]) -> (f64, Vec<f64>) {
        let neg: Vec<f64> = coeffs.iter().map(|c| -c).collect();
        let (v, arg) = self.min_linear(&neg);
        (-v, arg)
    }

    /// Some belief in the region with `sum_t g[t] mu[t] >= -tol` for every
    /// constraint row `g`, or `None` if the intersection is empty.
    ///
    /// Exact up to floating point: the feasible set is a bounded polytope, so
    /// it is nonempty iff one of its vertices is feasible, and every vertex
    /// is the solution of a square system picked from the active
    /// constraints. Vertices of the region itself are tried first.
    pub fn find_point(&self, constraints: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
        let feasible = |mu: &[f64]| constraints.iter().all(|g| dot(g, mu) >= -tol);
        let free = self.free_types();
        let r = self.residual();
        if free.len() <= 1 || r <= PROB_TOL {
            let mu = self.vertices().swap_remove(0);
            return feasible(&mu).then_some(mu);
        }
        for v in self.vertices() {
            if feasible(&v) {
                return Some(v);
            }
        }
        let k = free.len();
        // rows: nu_i >= 0, then a . nu >= -b for each constraint
        let mut rows: Vec<(Vec<f64>, f64)> = (0..k)
            .map(|i| {
                let mut a = vec![0.0; k];
                a[i] = 1.0;
                (a, 0.0)
            })
            .collect();
        for g in constraints {
            let a: Vec<f64> = free.iter().map(|&t| r * g[t]).collect();
            let b = dot(g, &self.lower);
            rows.push((a, b));
        }
        let mut chosen = Vec::with_capacity(k - 1);
        let mut found = None;
        for_each_combination(rows.len(), k - 1, &mut chosen, &mut |combo| {
            let mut m = DMatrix::<f64>::zeros(k, k);
            let mut rhs = DVector::<f64>::zeros(k);
            for (i, &row) in combo.iter().enumerate() {
                for j in 0..k {
                    m[(i, j)] = rows[row].0[j];
                }
                rhs[i] = -rows[row].1;
            }
            for j in 0..k {
                m[(k - 1, j)] = 1.0;
            }
            rhs[k - 1] = 1.0;
            let Some(nu) = m.lu().solve(&rhs) else { return false };
            if nu.iter().any(|v| !v.is_finite() || *v < -1e-12) {
                return false;
            }
            let mut mu = self.lower.clone();
            for (i, &t) in free.iter().enumerate() {
                mu[t] += r * nu[i].max(0.0);
            }
            let s: f64 = mu.iter().sum();
            mu.iter_mut().for_each(|x| *x /= s);
            if feasible(&mu) {
                found = Some(mu);
                true
            } else {
                false
            }
        });
        found
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Calls `f` on each `size`-subset of `0..n` in lexicographic order until it
/// returns true.
fn for_each_combination(n: usize, size: usize, buf: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, size: usize, buf: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if buf.len() == size {
            return f(buf);
        }
        for i in start..n {
            buf.push(i);
            if rec(i + 1, n, size, buf, f) {
                return true;
            }
            buf.pop();
        }
        false
    }
    buf.clear();
    rec(0, n, size, buf, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(x: f64) -> Chi {
        Chi::new(x).unwrap()
    }

    #[test]
    fn two_type_floor_region_is_an_interval() {
        let prior = PriorDistribution::new(vec![0.3, 0.7]).unwrap();
        let region = BeliefRegion::consistent(&prior, chi(0.5));
        let (lo, _) = region.min_linear(&[1.0, 0.0]);
        let (hi, _) = region.max_linear(&[1.0, 0.0]);
        assert!((lo - 0.15).abs() < 1e-15);
        assert!((hi - (1.0 - 0.35)).abs() < 1e-15);
    }

    #[test]
    fn pinning_two_types_gives_a_point() {
        let prior = PriorDistribution::new(vec![0.4, 0.6]).unwrap();
        let region = BeliefRegion::pinned(&prior, chi(0.5), &[0]).unwrap();
        assert!(region.is_point());
        let v = region.vertices();
        assert_eq!(v.len(), 1);
        assert!((v[0][0] - 0.2).abs() < 1e-15);
        assert!(BeliefRegion::pinned(&prior, chi(0.5), &[0, 1]).is_err());
        assert!(BeliefRegion::pinned(&prior, Chi::ONE, &[0, 1]).is_ok());
    }

    #[test]
    fn find_point_interior_intersection() {
        // three types, need mu0 >= 0.4 and mu1 >= 0.4: only interior-ish points work
        let region = BeliefRegion::simplex(3);
        let cons = vec![vec![0.6, -0.4, -0.4], vec![-0.4, 0.6, -0.4]];
        let mu = region.find_point(&cons, 1e-12).unwrap();
        assert!(mu[0] >= 0.4 - 1e-12 && mu[1] >= 0.4 - 1e-12);
        // infeasible: mu0 >= 0.6 and mu1 >= 0.6
        let cons = vec![vec![0.4, -0.6, -0.6], vec![-0.6, 0.4, -0.6]];
        assert!(region.find_point(&cons, 1e-12).is_none());
    }

    #[test]
    fn find_point_respects_floor() {
        let prior = PriorDistribution::uniform(3).unwrap();
        let region = BeliefRegion::consistent(&prior, chi(0.9));
        // mu0 <= 0.2 is impossible when the floor is 0.3
        let cons = vec![vec![-0.8, 0.2, 0.2]];
        assert!(region.find_point(&cons, 1e-12).is_none());
        let cons = vec![vec![-0.6, 0.4, 0.4]];
        assert!(region.find_point(&cons, 1e-12).is_some());
    }
}
