//! Equilibrium search and verification.
//!
//! [`enumerate_pure_cse`] walks every pure sender profile, [`solve_support_cse`]
//! solves the indifference conditions for a declared support, and
//! [`verify_cse`] checks an arbitrary assessment. Off-path messages are
//! handled the same way everywhere: an equilibrium exists only if some belief
//! in the relevant [`BeliefRegion`] makes a pure receiver response deter
//! every type from deviating.

mod pure;
mod region;
mod support;
mod verify;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

pub use pure::enumerate_pure_cse;
pub use region::BeliefRegion;
pub use support::solve_support_cse;
pub use verify::{verify_cse, Condition, Verdict, Violation};

use crate::error::{Error, Result};
use crate::game::{Assessment, ReceiverStrategy, SenderStrategy, SignalingGame};

/// Equality tolerance for beliefs and indifference residuals.
pub const EQ_TOL: f64 = 1e-10;
/// Tolerance for optimality comparisons.
pub const OPT_TOL: f64 = 1e-9;
/// Largest number of pure sender profiles the enumerator will visit.
pub const PROFILE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Separating,
    Pooling,
    Hybrid,
    Other,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::Separating => "separating",
            EquilibriumKind::Pooling => "pooling",
            EquilibriumKind::Hybrid => "hybrid",
            EquilibriumKind::Other => "other",
        }
    }
}

/// Pure sender profiles are separating, pooling, or other; anything with a
/// mixing type is hybrid.
pub fn classify(sender: &SenderStrategy) -> EquilibriumKind {
    let Some(choices) = sender.as_pure() else {
        return EquilibriumKind::Hybrid;
    };
    let mut distinct = choices.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == 1 {
        EquilibriumKind::Pooling
    } else if distinct.len() == choices.len() {
        EquilibriumKind::Separating
    } else {
        EquilibriumKind::Other
    }
}

/// Sender and receiver supports for [`solve_support_cse`], as indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportSpec {
    /// Per type, the messages sent with positive probability.
    pub sender: Vec<Vec<usize>>,
    /// Per message, the actions played with positive probability. Ignored for
    /// wage games and for messages no type sends.
    pub receiver: Vec<Vec<usize>>,
}

impl SupportSpec {
    /// Builds a spec from id lists. Every type must be listed; receiver
    /// entries are needed for every sent message in finite games.
    pub fn from_ids(
        game: &SignalingGame,
        sender: &[(String, Vec<String>)],
        receiver: &[(String, Vec<String>)],
    ) -> Result<Self> {
        let mut s = vec![Vec::new(); game.n_types()];
        for (t, ms) in sender {
            let t = game.type_index(t)?;
            s[t] = ms.iter().map(|m| game.message_index(m)).collect::<Result<_>>()?;
        }
        let mut r = vec![Vec::new(); game.n_messages()];
        for (m, acts) in receiver {
            let m = game.message_index(m)?;
            if game.is_wage() {
                return Err(Error::invalid("receiver supports are not used in wage games"));
            }
            r[m] = acts.iter().map(|a| game.action_index(a)).collect::<Result<_>>()?;
        }
        let spec = SupportSpec { sender: s, receiver: r };
        spec.check(game)?;
        Ok(spec)
    }

    pub(crate) fn check(&self, game: &SignalingGame) -> Result<()> {
        if self.sender.len() != game.n_types() {
            return Err(Error::DimensionMismatch { what: "sender support types", expected: game.n_types(), got: self.sender.len() });
        }
        if self.receiver.len() != game.n_messages() {
            return Err(Error::DimensionMismatch { what: "receiver support messages", expected: game.n_messages(), got: self.receiver.len() });
        }
        for (t, ms) in self.sender.iter().enumerate() {
            if ms.is_empty() {
                return Err(Error::invalid(format!("type {} has an empty sender support", game.types()[t])));
            }
            if let Some(m) = ms.iter().find(|&&m| m >= game.n_messages()) {
                return Err(Error::invalid(format!("message index {m} out of range")));
            }
            if has_duplicates(ms) {
                return Err(Error::invalid(format!("duplicate message in the support of type {}", game.types()[t])));
            }
        }
        if !game.is_wage() {
            for m in self.sent_messages() {
                let acts = &self.receiver[m];
                if acts.is_empty() {
                    return Err(Error::invalid(format!(
                        "message {} is sent but has no receiver support",
                        game.messages()[m]
                    )));
                }
                if acts.iter().any(|&a| a >= game.n_actions()) || has_duplicates(acts) {
                    return Err(Error::invalid(format!("bad receiver support at message {}", game.messages()[m])));
                }
            }
        }
        Ok(())
    }

    /// Messages in some type's support, ascending.
    pub fn sent_messages(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = self.sender.iter().flatten().copied().collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }
}

fn has_duplicates(xs: &[usize]) -> bool {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.windows(2).any(|w| w[0] == w[1])
}

/// One equilibrium with the data reported alongside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumRecord {
    pub kind: EquilibriumKind,
    pub assessment: Assessment,
    /// Equilibrium payoff of each type.
    pub sender_payoffs: Vec<f64>,
    pub onpath_messages: Vec<usize>,
    /// Supporting belief at each off-path message.
    pub offpath_beliefs: Vec<(usize, Vec<f64>)>,
    /// Refinement name to survival, filled in by callers that run them.
    pub refinement_verdicts: BTreeMap<String, bool>,
}

impl EquilibriumRecord {
    pub(crate) fn new(game: &SignalingGame, assessment: Assessment) -> Self {
        let sender = &assessment.sender;
        let sender_payoffs = (0..game.n_types())
            .map(|t| {
                (0..game.n_messages())
                    .filter(|&m| sender.prob(t, m) > 0.0)
                    .map(|m| sender.prob(t, m) * game.sender_payoff(t, m, assessment.receiver.at(m)))
                    .sum()
            })
            .collect();
        let onpath: Vec<usize> = (0..game.n_messages())
            .filter(|&m| (0..game.n_types()).any(|t| sender.prob(t, m) > 0.0))
            .collect();
        let offpath_beliefs = (0..game.n_messages())
            .filter(|m| !onpath.contains(m))
            .map(|m| (m, assessment.beliefs.at(m).to_vec()))
            .collect();
        EquilibriumRecord {
            kind: classify(sender),
            assessment,
            sender_payoffs,
            onpath_messages: onpath,
            offpath_beliefs,
            refinement_verdicts: BTreeMap::new(),
        }
    }
}

/// Canonical order: kind, then sender rows compared entrywise with larger
/// probabilities first, then receiver strategy.
pub fn sort_records(records: &mut [EquilibriumRecord]) {
    records.sort_by(compare_records);
}

fn compare_records(a: &EquilibriumRecord, b: &EquilibriumRecord) -> Ordering {
    a.kind
        .cmp(&b.kind)
        .then_with(|| cmp_desc(a.assessment.sender.rows().iter().flatten(), b.assessment.sender.rows().iter().flatten()))
        .then_with(|| match (&a.assessment.receiver, &b.assessment.receiver) {
            (ReceiverStrategy::Mixed(x), ReceiverStrategy::Mixed(y)) => cmp_desc(x.iter().flatten(), y.iter().flatten()),
            (ReceiverStrategy::Wages(x), ReceiverStrategy::Wages(y)) => cmp_desc(x.iter(), y.iter()).reverse(),
            _ => Ordering::Equal,
        })
}

fn cmp_desc<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> Ordering {
    for (x, y) in a.zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// A pure receiver reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PureResponse {
    Action(usize),
    Wage(f64),
}

impl PureResponse {
    /// Sender payoff of type `t` when this response follows `m`.
    pub fn sender_payoff(self, game: &SignalingGame, t: usize, m: usize) -> f64 {
        match self {
            PureResponse::Action(a) => game.sender_action_payoff(t, m, a),
            PureResponse::Wage(w) => w - game.sender_cost(t, m),
        }
    }
}

/// Receiver best responses to `belief` after `m`: every action within
/// [`OPT_TOL`] of the best, or the posterior-mean wage.
pub fn receiver_best_response(game: &SignalingGame, belief: &[f64], m: usize) -> Vec<PureResponse> {
    if game.is_wage() {
        return vec![PureResponse::Wage(game.mean_productivity(belief))];
    }
    let values: Vec<f64> = (0..game.n_actions()).map(|a| game.receiver_action_value(belief, m, a)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len())
        .filter(|&a| values[a] >= best - OPT_TOL)
        .map(PureResponse::Action)
        .collect()
}

/// Payoff-maximizing messages of type `t` against `receiver`, within [`OPT_TOL`].
pub fn sender_best_response(game: &SignalingGame, t: usize, receiver: &ReceiverStrategy) -> Vec<usize> {
    let values: Vec<f64> = (0..game.n_messages()).map(|m| game.sender_payoff(t, m, receiver.at(m))).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&m| values[m] >= best - OPT_TOL).collect()
}

/// A belief and a pure best response to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deterrent {
    pub belief: Vec<f64>,
    pub response: PureResponse,
}

/// A belief in `region` with a pure best response after `m` that leaves every
/// type `t` no better off than `u_star[t]`, if one exists.
pub fn deterring_response(
    game: &SignalingGame,
    m: usize,
    region: &BeliefRegion,
    u_star: &[f64],
) -> Option<Deterrent> {
    let nt = game.n_types();
    if game.is_wage() {
        let prod = game.productivity().expect("wage game");
        let (w, belief) = region.min_linear(prod);
        let cap = (0..nt).map(|t| u_star[t] + game.sender_cost(t, m)).fold(f64::INFINITY, f64::min);
        return (w <= cap + OPT_TOL).then_some(Deterrent { belief, response: PureResponse::Wage(w) });
    }
    let na = game.n_actions();
    for a in 0..na {
        if (0..nt).any(|t| game.sender_action_payoff(t, m, a) > u_star[t] + OPT_TOL) {
            continue;
        }
        let constraints: Vec<Vec<f64>> = (0..na)
            .filter(|&b| b != a)
            .map(|b| (0..nt).map(|t| game.receiver_payoff(t, m, a) - game.receiver_payoff(t, m, b)).collect())
            .collect();
        if let Some(belief) = region.find_point(&constraints, OPT_TOL) {
            return Some(Deterrent { belief, response: PureResponse::Action(a) });
        }
    }
    None
}

/// Receiver strategy from one pure response per message.
pub(crate) fn receiver_from_pure(game: &SignalingGame, responses: &[PureResponse]) -> Result<ReceiverStrategy> {
    if game.is_wage() {
        ReceiverStrategy::wages(
            responses
                .iter()
                .map(|r| match r {
                    PureResponse::Wage(w) => *w,
                    PureResponse::Action(_) => unreachable!("action response in a wage game"),
                })
                .collect(),
        )
    } else {
        ReceiverStrategy::mixed(
            responses
                .iter()
                .map(|r| {
                    let mut row = vec![0.0; game.n_actions()];
                    match r {
                        PureResponse::Action(a) => row[*a] = 1.0,
                        PureResponse::Wage(_) => unreachable!("wage response in a finite game"),
                    }
                    row
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chi::Chi;
    use crate::game::PriorDistribution;

    #[test]
    fn classification() {
        assert_eq!(classify(&SenderStrategy::pure(&[0, 1], 2)), EquilibriumKind::Separating);
        assert_eq!(classify(&SenderStrategy::pure(&[1, 1], 2)), EquilibriumKind::Pooling);
        assert_eq!(classify(&SenderStrategy::pure(&[0, 0, 1], 2)), EquilibriumKind::Other);
        let mixed = SenderStrategy::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(classify(&mixed), EquilibriumKind::Hybrid);
    }

    #[test]
    fn wage_deterrence_uses_lowest_consistent_wage() {
        let prior = PriorDistribution::new(vec![0.5, 0.5]).unwrap();
        let game = SignalingGame::wage_quadratic(
            vec!["L".into(), "H".into()],
            prior.clone(),
            vec![10.0, 50.0],
            vec!["0".into(), "1".into()],
            vec![vec![0.0, 45.0], vec![0.0, 9.0]],
        )
        .unwrap();
        let region = BeliefRegion::consistent(&prior, Chi::new(0.5).unwrap());
        // lowest wage is 10 + 0.25 * 40 = 20
        let d = deterring_response(&game, 1, &region, &[30.0, 11.0]).unwrap();
        assert_eq!(d.response, PureResponse::Wage(20.0));
        assert!(deterring_response(&game, 1, &region, &[30.0, 10.9]).is_none());
    }
}
