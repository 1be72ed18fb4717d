//! Independent reference implementations used by the integration tests.
//!
//! Everything here works in exact rational arithmetic on small integer
//! games and shares no code with the library's solver.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cursed_sig::game::{PayoffTable, PriorDistribution};
use cursed_sig::SignalingGame;
use num_rational::Rational64 as Q;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct IntGame {
    pub nt: usize,
    pub nm: usize,
    pub na: usize,
    pub weights: Vec<i64>,
    /// `[t][m][a]`
    pub u1: Vec<Vec<Vec<i64>>>,
    pub u2: Vec<Vec<Vec<i64>>>,
}

/// Pure sender profile plus the receiver's action at each on-path message.
pub type Outcome = (Vec<usize>, Vec<(usize, usize)>);

impl IntGame {
    pub fn random(rng: &mut impl Rng) -> Self {
        let nt = rng.random_range(2..=3);
        let nm = rng.random_range(1..=3);
        let na = rng.random_range(1..=3);
        let table = |rng: &mut dyn rand::RngCore| {
            (0..nt)
                .map(|_| (0..nm).map(|_| (0..na).map(|_| rng.random_range(-2..=2)).collect()).collect())
                .collect::<Vec<Vec<Vec<i64>>>>()
        };
        let u1 = table(rng);
        let u2 = table(rng);
        let weights = (0..nt).map(|_| rng.random_range(1..=4)).collect();
        IntGame { nt, nm, na, weights, u1, u2 }
    }

    pub fn prior(&self) -> Vec<Q> {
        let total: i64 = self.weights.iter().sum();
        self.weights.iter().map(|&w| Q::new(w, total)).collect()
    }

    pub fn to_game(&self) -> SignalingGame {
        let total: i64 = self.weights.iter().sum();
        let prior = PriorDistribution::new(self.weights.iter().map(|&w| w as f64 / total as f64).collect()).unwrap();
        SignalingGame::finite(
            (0..self.nt).map(|t| format!("t{t}")).collect(),
            prior,
            (0..self.nm).map(|m| format!("m{m}")).collect(),
            (0..self.na).map(|a| format!("a{a}")).collect(),
            PayoffTable::from_fn(self.nt, self.nm, self.na, |t, m, a| self.u1[t][m][a] as f64),
            PayoffTable::from_fn(self.nt, self.nm, self.na, |t, m, a| self.u2[t][m][a] as f64),
        )
        .unwrap()
    }

    fn value(&self, belief: &[Q], m: usize, a: usize) -> Q {
        belief.iter().enumerate().map(|(t, &b)| b * Q::from(self.u2[t][m][a])).sum()
    }

    pub fn best_actions(&self, belief: &[Q], m: usize) -> Vec<usize> {
        let vals: Vec<Q> = (0..self.na).map(|a| self.value(belief, m, a)).collect();
        let best = *vals.iter().max().unwrap();
        (0..self.na).filter(|&a| vals[a] == best).collect()
    }

    /// Actions that are a best response to some belief supported on `types`.
    pub fn rationalizable(&self, m: usize, types: &[usize]) -> Vec<usize> {
        (0..self.na).filter(|&a| self.supports(m, a, types)).collect()
    }

    /// Whether the polytope `{mu in simplex(types) : a is optimal}` is
    /// nonempty, by checking every basic solution.
    fn supports(&self, m: usize, a: usize, types: &[usize]) -> bool {
        let k = types.len();
        // rows are `row . mu >= 0`
        let mut rows: Vec<Vec<Q>> = (0..k)
            .map(|i| (0..k).map(|j| Q::from((i == j) as i64)).collect())
            .collect();
        for b in (0..self.na).filter(|&b| b != a) {
            rows.push(types.iter().map(|&t| Q::from(self.u2[t][m][a] - self.u2[t][m][b])).collect());
        }
        let feasible = |mu: &[Q]| rows.iter().all(|r| r.iter().zip(mu).map(|(x, y)| x * y).sum::<Q>() >= Q::from(0));
        let mut found = false;
        choose(rows.len(), k - 1, &mut |tight| {
            if found {
                return;
            }
            let mut mat: Vec<Vec<Q>> = tight.iter().map(|&i| rows[i].clone()).collect();
            let mut rhs = vec![Q::from(0); k - 1];
            mat.push(vec![Q::from(1); k]);
            rhs.push(Q::from(1));
            if let Some(mu) = solve(mat, rhs) {
                if feasible(&mu) {
                    found = true;
                }
            }
        });
        found
    }

    fn sender(&self, t: usize, m: usize, a: usize) -> i64 {
        self.u1[t][m][a]
    }

    /// Every pure perfect Bayesian equilibrium outcome, by brute force over
    /// pure sender and receiver strategies.
    pub fn pure_pbe(&self) -> BTreeSet<Outcome> {
        let prior = self.prior();
        let mut out = BTreeSet::new();
        for s in product(self.nt, self.nm) {
            let onpath: Vec<usize> = (0..self.nm).filter(|m| s.contains(m)).collect();
            let posterior = |m: usize| {
                let mass: Q = (0..self.nt).filter(|&t| s[t] == m).map(|t| prior[t]).sum();
                (0..self.nt).map(|t| if s[t] == m { prior[t] / mass } else { Q::from(0) }).collect::<Vec<_>>()
            };
            let all: Vec<usize> = (0..self.nt).collect();
            let allowed: Vec<Vec<usize>> = (0..self.nm)
                .map(|m| if onpath.contains(&m) { self.best_actions(&posterior(m), m) } else { self.rationalizable(m, &all) })
                .collect();
            for r in product(self.nm, self.na) {
                if (0..self.nm).any(|m| !allowed[m].contains(&r[m])) {
                    continue;
                }
                let ic = (0..self.nt).all(|t| (0..self.nm).all(|m| self.sender(t, s[t], r[s[t]]) >= self.sender(t, m, r[m])));
                if ic {
                    out.insert((s.clone(), onpath.iter().map(|&m| (m, r[m])).collect()));
                }
            }
        }
        out
    }

    /// Cho and Kreps' intuitive criterion for a pure outcome.
    pub fn intuitive(&self, outcome: &Outcome) -> bool {
        let (s, acts) = outcome;
        let act: BTreeMap<usize, usize> = acts.iter().copied().collect();
        let u_star: Vec<i64> = (0..self.nt).map(|t| self.sender(t, s[t], act[&s[t]])).collect();
        let all: Vec<usize> = (0..self.nt).collect();
        for m in (0..self.nm).filter(|m| !act.contains_key(m)) {
            let br = self.rationalizable(m, &all);
            let dominated: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&t| br.iter().all(|&a| u_star[t] > self.sender(t, m, a)))
                .collect();
            if dominated.len() == self.nt {
                continue;
            }
            let rest: Vec<usize> = all.iter().copied().filter(|t| !dominated.contains(t)).collect();
            let br = self.rationalizable(m, &rest);
            if all.iter().any(|&t| br.iter().all(|&a| self.sender(t, m, a) > u_star[t])) {
                return false;
            }
        }
        true
    }
}

/// All vectors in `{0..base}^len`.
pub fn product(len: usize, base: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..base).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn choose(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..n {
            acc.push(i);
            go(i + 1, n, k, acc, f);
            acc.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f)
}

/// Unique solution of a square system by Gauss-Jordan elimination.
fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != Q::from(0))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r][col] != Q::from(0) {
                let f = a[r][col] / a[col][col];
                for c in 0..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Outcome key of a pure record from the library.
pub fn outcome_of(game: &SignalingGame, record: &cursed_sig::solver::EquilibriumRecord) -> Outcome {
    let s = record.assessment.sender.as_pure().expect("pure sender");
    let acts = record
        .onpath_messages
        .iter()
        .map(|&m| {
            let a = (0..game.n_actions())
                .find(|&a| match record.assessment.receiver.at(m) {
                    cursed_sig::game::Response::Mixed(row) => row[a] == 1.0,
                    cursed_sig::game::Response::Wage(_) => false,
                })
                .expect("pure on-path action");
            (m, a)
        })
        .collect();
    (s, acts)
}
