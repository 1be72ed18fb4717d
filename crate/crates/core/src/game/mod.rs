//! Finite signaling games and the cursed belief machinery.
//!
//! A game has a privately informed sender with finitely many types, a finite
//! message set, and a receiver who either picks from a finite action set or
//! offers a wage under quadratic loss (so that the optimal wage is the
//! posterior mean productivity). Ids are opaque strings; everything internal
//! works on declaration-order indices.

mod beliefs;
pub mod file;

pub use beliefs::{
    average_sender_strategy, belief_floor, cursed_bayes_update, cursed_perception,
    minimal_belief_on,
};

use serde::Serialize;

use crate::chi::Chi;
use crate::error::{Error, Result};

/// Normalization tolerance for every probability vector.
pub const PROB_TOL: f64 = 1e-12;

/// Validates a probability vector and renormalizes it if it sums to one
/// within [`PROB_TOL`].
pub(crate) fn check_distribution(values: &[f64], what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{what}: empty distribution")));
    }
    for &v in values {
        if !v.is_finite() || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) {
            return Err(Error::invalid(format!("{what}: entry {v} outside [0, 1]")));
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!("{what}: entries sum to {sum}, not 1")));
    }
    Ok(values.iter().map(|v| v.max(0.0) / sum).collect())
}

/// Common prior over sender types. Every weight is strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorDistribution {
    weights: Vec<f64>,
}

impl PriorDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::invalid(format!("prior weight {w} is not strictly positive")));
        }
        Ok(PriorDistribution { weights: check_distribution(&weights, "prior")? })
    }

    /// Uniform prior over `n` types.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("prior over zero types"));
        }
        PriorDistribution::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, t: usize) -> f64 {
        self.weights[t]
    }
}

/// Payoffs indexed by (type, message, action).
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    n_types: usize,
    n_messages: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl PayoffTable {
    pub fn from_fn(
        n_types: usize,
        n_messages: usize,
        n_actions: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(n_types * n_messages * n_actions);
        for t in 0..n_types {
            for m in 0..n_messages {
                for a in 0..n_actions {
                    values.push(f(t, m, a));
                }
            }
        }
        PayoffTable { n_types, n_messages, n_actions, values }
    }

    #[inline]
    pub fn get(&self, t: usize, m: usize, a: usize) -> f64 {
        self.values[(t * self.n_messages + m) * self.n_actions + a]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_types, self.n_messages, self.n_actions)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReceiverMode {
    FiniteActions {
        actions: Vec<String>,
        sender_payoff: PayoffTable,
        receiver_payoff: PayoffTable,
    },
    /// Receiver payoff `-(w - productivity)^2`; sender payoff `w - cost`.
    WageQuadratic { productivity: Vec<f64> },
}

/// What the receiver does after one message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Response<'a> {
    Mixed(&'a [f64]),
    Wage(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalingGame {
    types: Vec<String>,
    prior: PriorDistribution,
    messages: Vec<String>,
    receiver: ReceiverMode,
    /// Signaling cost per (type, message), subtracted from sender payoff.
    sender_cost: Vec<f64>,
}

impl SignalingGame {
    pub fn finite(
        types: Vec<String>,
        prior: PriorDistribution,
        messages: Vec<String>,
        actions: Vec<String>,
        sender_payoff: PayoffTable,
        receiver_payoff: PayoffTable,
    ) -> Result<Self> {
        let dims = (types.len(), messages.len(), actions.len());
        if actions.is_empty() {
            return Err(Error::invalid("finite receiver needs at least one action"));
        }
        for (table, name) in [(&sender_payoff, "sender payoff"), (&receiver_payoff, "receiver payoff")] {
            if table.dims() != dims {
                return Err(Error::invalid(format!(
                    "{name} table has dims {:?}, game has {:?}",
                    table.dims(),
                    dims
                )));
            }
            if table.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("{name} table has a non-finite entry")));
            }
        }
        let game = SignalingGame {
            sender_cost: vec![0.0; types.len() * messages.len()],
            types,
            prior,
            messages,
            receiver: ReceiverMode::FiniteActions { actions, sender_payoff, receiver_payoff },
        };
        game.check_shape()?;
        Ok(game)
    }

    /// Wage-setting receiver. `sender_cost[t][m]` is the signaling cost.
    pub fn wage_quadratic(
        types: Vec<String>,
        prior: PriorDistribution,
        productivity: Vec<f64>,
        messages: Vec<String>,
        sender_cost: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if productivity.len() != types.len() {
            return Err(Error::DimensionMismatch {
                what: "productivity",
                expected: types.len(),
                got: productivity.len(),
            });
        }
        if let Some(p) = productivity.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("productivity {p} is not finite")));
        }
        let mut game = SignalingGame {
            sender_cost: vec![0.0; types.len() * messages.len()],
            types,
            prior,
            messages,
            receiver: ReceiverMode::WageQuadratic { productivity },
        };
        game.check_shape()?;
        game.set_costs(sender_cost)?;
        Ok(game)
    }

    /// Replaces the signaling cost table (`cost[t][m]`).
    pub fn with_sender_cost(mut self, cost: Vec<Vec<f64>>) -> Result<Self> {
        self.set_costs(cost)?;
        Ok(self)
    }

    fn set_costs(&mut self, cost: Vec<Vec<f64>>) -> Result<()> {
        if cost.len() != self.types.len() {
            return Err(Error::DimensionMismatch {
                what: "sender cost rows",
                expected: self.types.len(),
                got: cost.len(),
            });
        }
        let nm = self.messages.len();
        for (t, row) in cost.iter().enumerate() {
            if row.len() != nm {
                return Err(Error::DimensionMismatch { what: "sender cost columns", expected: nm, got: row.len() });
            }
            for (m, &c) in row.iter().enumerate() {
                if !c.is_finite() {
                    return Err(Error::invalid(format!("sender cost for type {t}, message {m} is not finite")));
                }
                self.sender_cost[t * nm + m] = c;
            }
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<()> {
        if self.types.is_empty() || self.messages.is_empty() {
            return Err(Error::invalid("game needs at least one type and one message"));
        }
        if self.prior.len() != self.types.len() {
            return Err(Error::DimensionMismatch {
                what: "prior",
                expected: self.types.len(),
                got: self.prior.len(),
            });
        }
        for (ids, what) in [(&self.types, "type"), (&self.messages, "message")] {
            for (i, id) in ids.iter().enumerate() {
                if ids[..i].contains(id) {
                    return Err(Error::invalid(format!("duplicate {what} id {id:?}")));
                }
            }
        }
        if let ReceiverMode::FiniteActions { actions, .. } = &self.receiver {
            for (i, id) in actions.iter().enumerate() {
                if actions[..i].contains(id) {
                    return Err(Error::invalid(format!("duplicate action id {id:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn prior(&self) -> &PriorDistribution {
        &self.prior
    }

    pub fn receiver_mode(&self) -> &ReceiverMode {
        &self.receiver
    }

    pub fn n_types(&self) -> usize {
        self.types.len()
    }

    pub fn n_messages(&self) -> usize {
        self.messages.len()
    }

    /// Number of receiver actions; zero for the wage receiver.
    pub fn n_actions(&self) -> usize {
        match &self.receiver {
            ReceiverMode::FiniteActions { actions, .. } => actions.len(),
            ReceiverMode::WageQuadratic { .. } => 0,
        }
    }

    pub fn actions(&self) -> &[String] {
        match &self.receiver {
            ReceiverMode::FiniteActions { actions, .. } => actions,
            ReceiverMode::WageQuadratic { .. } => &[],
        }
    }

    pub fn is_wage(&self) -> bool {
        matches!(self.receiver, ReceiverMode::WageQuadratic { .. })
    }

    pub fn productivity(&self) -> Option<&[f64]> {
        match &self.receiver {
            ReceiverMode::WageQuadratic { productivity } => Some(productivity),
            ReceiverMode::FiniteActions { .. } => None,
        }
    }

    pub fn type_index(&self, id: &str) -> Result<usize> {
        self.types
            .iter()
            .position(|t| t == id)
            .ok_or_else(|| Error::invalid(format!("unknown type id {id:?}")))
    }

    pub fn message_index(&self, id: &str) -> Result<usize> {
        self.messages
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| Error::invalid(format!("unknown message id {id:?}")))
    }

    pub fn action_index(&self, id: &str) -> Result<usize> {
        self.actions()
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| Error::invalid(format!("unknown action id {id:?}")))
    }

    #[inline]
    pub fn sender_cost(&self, t: usize, m: usize) -> f64 {
        self.sender_cost[t * self.messages.len() + m]
    }

    /// Sender utility from a pure receiver action (finite mode), net of cost.
    #[inline]
    pub fn sender_action_payoff(&self, t: usize, m: usize, a: usize) -> f64 {
        match &self.receiver {
            ReceiverMode::FiniteActions { sender_payoff, .. } => {
                sender_payoff.get(t, m, a) - self.sender_cost(t, m)
            }
            ReceiverMode::WageQuadratic { .. } => panic!("sender_action_payoff on a wage game"),
        }
    }

    /// Sender utility given the receiver's response to `m`, net of cost.
    pub fn sender_payoff(&self, t: usize, m: usize, response: Response<'_>) -> f64 {
        match (&self.receiver, response) {
            (ReceiverMode::FiniteActions { sender_payoff, .. }, Response::Mixed(mix)) => {
                mix.iter()
                    .enumerate()
                    .map(|(a, &p)| p * sender_payoff.get(t, m, a))
                    .sum::<f64>()
                    - self.sender_cost(t, m)
            }
            (ReceiverMode::WageQuadratic { .. }, Response::Wage(w)) => w - self.sender_cost(t, m),
            _ => panic!("receiver response does not match the game's receiver mode"),
        }
    }

    /// Receiver's expected utility from pure action `a` at `m` under `belief`.
    pub fn receiver_action_value(&self, belief: &[f64], m: usize, a: usize) -> f64 {
        match &self.receiver {
            ReceiverMode::FiniteActions { receiver_payoff, .. } => belief
                .iter()
                .enumerate()
                .map(|(t, &mu)| mu * receiver_payoff.get(t, m, a))
                .sum(),
            ReceiverMode::WageQuadratic { .. } => panic!("receiver_action_value on a wage game"),
        }
    }

    /// Raw receiver payoff `u2(t, m, a)` in finite mode.
    pub fn receiver_payoff(&self, t: usize, m: usize, a: usize) -> f64 {
        match &self.receiver {
            ReceiverMode::FiniteActions { receiver_payoff, .. } => receiver_payoff.get(t, m, a),
            ReceiverMode::WageQuadratic { .. } => panic!("receiver_payoff on a wage game"),
        }
    }

    /// Expected quadratic-loss payoff of wage `w` under `belief`.
    pub fn receiver_wage_value(&self, belief: &[f64], w: f64) -> f64 {
        let prod = self.productivity().expect("receiver_wage_value on a finite game");
        -belief.iter().zip(prod).map(|(mu, th)| mu * (w - th).powi(2)).sum::<f64>()
    }

    /// Posterior-mean productivity.
    pub fn mean_productivity(&self, belief: &[f64]) -> f64 {
        let prod = self.productivity().expect("mean_productivity on a finite game");
        belief.iter().zip(prod).map(|(mu, th)| mu * th).sum()
    }
}

/// Per type, a distribution over messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SenderStrategy {
    rows: Vec<Vec<f64>>,
}

impl SenderStrategy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        let rows = rows
            .iter()
            .enumerate()
            .map(|(t, row)| {
                if row.len() != width {
                    return Err(Error::DimensionMismatch { what: "sender strategy row", expected: width, got: row.len() });
                }
                check_distribution(row, &format!("sender strategy row {t}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SenderStrategy { rows })
    }

    /// Each type `t` sends `choices[t]` with certainty.
    pub fn pure(choices: &[usize], n_messages: usize) -> Self {
        let rows = choices
            .iter()
            .map(|&m| {
                let mut row = vec![0.0; n_messages];
                row[m] = 1.0;
                row
            })
            .collect();
        SenderStrategy { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, t: usize, m: usize) -> f64 {
        self.rows[t][m]
    }

    pub fn n_types(&self) -> usize {
        self.rows.len()
    }

    pub fn n_messages(&self) -> usize {
        self.rows.first().map(Vec::len).unwrap_or(0)
    }

    /// Messages sent with positive probability by type `t`.
    pub fn support(&self, t: usize) -> Vec<usize> {
        self.rows[t].iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(m, _)| m).collect()
    }

    /// The message each type sends, if the strategy is pure.
    pub fn as_pure(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| row.iter().position(|&p| p == 1.0))
            .collect()
    }
}

/// Receiver behavior after every message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReceiverStrategy {
    /// Per message, a distribution over actions.
    Mixed(Vec<Vec<f64>>),
    /// Per message, a wage.
    Wages(Vec<f64>),
}

impl ReceiverStrategy {
    pub fn mixed(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(m, row)| check_distribution(row, &format!("receiver strategy at message {m}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReceiverStrategy::Mixed(rows))
    }

    pub fn wages(wages: Vec<f64>) -> Result<Self> {
        if let Some(w) = wages.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("wage {w} must be finite and non-negative")));
        }
        Ok(ReceiverStrategy::Wages(wages))
    }

    pub fn at(&self, m: usize) -> Response<'_> {
        match self {
            ReceiverStrategy::Mixed(rows) => Response::Mixed(&rows[m]),
            ReceiverStrategy::Wages(w) => Response::Wage(w[m]),
        }
    }

    pub fn n_messages(&self) -> usize {
        match self {
            ReceiverStrategy::Mixed(rows) => rows.len(),
            ReceiverStrategy::Wages(w) => w.len(),
        }
    }
}

/// Per message, a distribution over types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefSystem {
    beliefs: Vec<Vec<f64>>,
}

impl BeliefSystem {
    pub fn new(beliefs: Vec<Vec<f64>>) -> Result<Self> {
        let beliefs = beliefs
            .iter()
            .enumerate()
            .map(|(m, b)| check_distribution(b, &format!("belief at message {m}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(BeliefSystem { beliefs })
    }

    pub fn at(&self, m: usize) -> &[f64] {
        &self.beliefs[m]
    }

    pub fn all(&self) -> &[Vec<f64>] {
        &self.beliefs
    }
}

/// A strategy profile with a belief system, evaluated at one `chi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assessment {
    pub sender: SenderStrategy,
    pub receiver: ReceiverStrategy,
    pub beliefs: BeliefSystem,
    pub chi: Chi,
}

impl Assessment {
    /// Checks that all parts agree with the game's dimensions.
    pub fn check_dims(&self, game: &SignalingGame) -> Result<()> {
        let (nt, nm) = (game.n_types(), game.n_messages());
        if self.sender.n_types() != nt {
            return Err(Error::DimensionMismatch { what: "sender strategy types", expected: nt, got: self.sender.n_types() });
        }
        if self.sender.n_messages() != nm {
            return Err(Error::DimensionMismatch { what: "sender strategy messages", expected: nm, got: self.sender.n_messages() });
        }
        if self.receiver.n_messages() != nm {
            return Err(Error::DimensionMismatch { what: "receiver strategy messages", expected: nm, got: self.receiver.n_messages() });
        }
        match (&self.receiver, game.is_wage()) {
            (ReceiverStrategy::Mixed(rows), false) => {
                for row in rows {
                    if row.len() != game.n_actions() {
                        return Err(Error::DimensionMismatch { what: "receiver strategy actions", expected: game.n_actions(), got: row.len() });
                    }
                }
            }
            (ReceiverStrategy::Wages(_), true) => {}
            _ => return Err(Error::invalid("receiver strategy does not match the game's receiver mode")),
        }
        if self.beliefs.all().len() != nm {
            return Err(Error::DimensionMismatch { what: "belief system messages", expected: nm, got: self.beliefs.all().len() });
        }
        if let Some(b) = self.beliefs.all().iter().find(|b| b.len() != nt) {
            return Err(Error::DimensionMismatch { what: "belief types", expected: nt, got: b.len() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_validation() {
        assert!(PriorDistribution::new(vec![0.4, 0.6]).is_ok());
        assert!(PriorDistribution::new(vec![0.0, 1.0]).is_err());
        assert!(PriorDistribution::new(vec![0.5, 0.6]).is_err());
        // within tolerance: renormalized
        let p = PriorDistribution::new(vec![0.5 + 1e-13, 0.5]).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sender_strategy_rows_must_sum_to_one() {
        assert!(SenderStrategy::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
        assert!(SenderStrategy::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(SenderStrategy::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(SenderStrategy::new(vec![vec![1.0, 0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let prior = PriorDistribution::uniform(2).unwrap();
        let err = SignalingGame::wage_quadratic(
            vec!["a".into(), "a".into()],
            prior,
            vec![1.0, 2.0],
            vec!["m".into()],
            vec![vec![0.0], vec![0.0]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn negative_wage_rejected() {
        assert!(ReceiverStrategy::wages(vec![1.0, -0.5]).is_err());
    }
}
