//! The cursed intuitive criterion.
//!
//! For an off-path message `m`, a type is equilibrium-dominated when its
//! equilibrium payoff beats everything the receiver could do after `m` under
//! a belief that is consistent at `chi`. Beliefs after `m` are then required
//! to put exactly the floor mass `chi F(t)` on every dominated type. The
//! equilibrium fails if some type gains from `m` against every best response
//! to every such belief. With `chi = 0` this is the intuitive criterion of
//! Cho and Kreps.
//!
//! When every type is equilibrium-dominated no one can profit from `m` and
//! the message is treated as passing.

use serde::Serialize;

use crate::chi::Chi;
use crate::error::Result;
use crate::game::{Assessment, SignalingGame};
use crate::solver::{BeliefRegion, EquilibriumRecord, OPT_TOL};

/// Verdict key for the criterion evaluated at the equilibrium's own `chi`.
pub const CURSED_INTUITIVE: &str = "cursed_intuitive";
/// Verdict key for the criterion evaluated with `chi = 0` beliefs.
pub const STANDARD_INTUITIVE: &str = "standard_intuitive";

/// Receiver responses to `m` that are optimal against some belief in `region`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSet {
    Actions(Vec<usize>),
    /// Every wage in `[lo, hi]`.
    Wages { lo: f64, hi: f64 },
}

impl ResponseSet {
    fn payoffs(&self, game: &SignalingGame, t: usize, m: usize) -> Vec<f64> {
        match self {
            ResponseSet::Actions(acts) => acts.iter().map(|&a| game.sender_action_payoff(t, m, a)).collect(),
            ResponseSet::Wages { lo, hi } => vec![lo - game.sender_cost(t, m), hi - game.sender_cost(t, m)],
        }
    }

    /// Best payoff type `t` can get from `m` against this set.
    pub fn max_payoff(&self, game: &SignalingGame, t: usize, m: usize) -> f64 {
        self.payoffs(game, t, m).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Worst payoff type `t` can get from `m` against this set.
    pub fn min_payoff(&self, game: &SignalingGame, t: usize, m: usize) -> f64 {
        self.payoffs(game, t, m).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Best responses to `m` over all beliefs in `region`.
pub fn best_responses_over(game: &SignalingGame, m: usize, region: &BeliefRegion) -> ResponseSet {
    if let Some(prod) = game.productivity() {
        let (lo, _) = region.min_linear(prod);
        let (hi, _) = region.max_linear(prod);
        return ResponseSet::Wages { lo, hi };
    }
    let na = game.n_actions();
    let nt = game.n_types();
    ResponseSet::Actions(
        (0..na)
            .filter(|&a| {
                let constraints: Vec<Vec<f64>> = (0..na)
                    .filter(|&b| b != a)
                    .map(|b| (0..nt).map(|t| game.receiver_payoff(t, m, a) - game.receiver_payoff(t, m, b)).collect())
                    .collect();
                region.find_point(&constraints, OPT_TOL).is_some()
            })
            .collect(),
    )
}

/// Best responses to `m` over the whole simplex.
pub fn br_over_all_beliefs(game: &SignalingGame, m: usize) -> ResponseSet {
    best_responses_over(game, m, &BeliefRegion::simplex(game.n_types()))
}

/// Types whose equilibrium payoff strictly exceeds the best they could get
/// from `m` under some `chi`-consistent belief.
pub fn equilibrium_dominated_types(game: &SignalingGame, u_star: &[f64], m: usize, chi: Chi) -> Vec<usize> {
    let responses = best_responses_over(game, m, &BeliefRegion::consistent(game.prior(), chi));
    (0..game.n_types())
        .filter(|&t| u_star[t] > responses.max_payoff(game, t, m) + OPT_TOL)
        .collect()
}

/// Beliefs with the floor mass pinned on `dominated` and the rest free above
/// the floor.
pub fn constrained_belief_set(game: &SignalingGame, dominated: &[usize], chi: Chi) -> Result<BeliefRegion> {
    BeliefRegion::pinned(game.prior(), chi, dominated)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageCheck {
    pub message: usize,
    pub dominated: Vec<usize>,
    /// Belief components fixed by the criterion, as (type, mass).
    pub pinned: Vec<(usize, f64)>,
    /// Admissible beliefs, absent when every type is dominated.
    pub region: Option<BeliefRegion>,
    /// Responses to admissible beliefs.
    pub responses: Option<ResponseSet>,
    /// A type that gains from the message against every admissible response.
    pub breaking_type: Option<usize>,
    pub passes: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub chi: Chi,
    pub messages: Vec<MessageCheck>,
    pub survives: bool,
}

/// Payoff of every type in `assessment`.
pub fn equilibrium_payoffs(game: &SignalingGame, assessment: &Assessment) -> Vec<f64> {
    (0..game.n_types())
        .map(|t| {
            (0..game.n_messages())
                .map(|m| assessment.sender.prob(t, m) * game.sender_payoff(t, m, assessment.receiver.at(m)))
                .sum()
        })
        .collect()
}

/// Runs the criterion with beliefs restricted at `chi` against the
/// equilibrium payoffs of `assessment`.
pub fn intuitive_criterion(game: &SignalingGame, assessment: &Assessment, chi: Chi) -> Result<CriterionReport> {
    assessment.check_dims(game)?;
    let u_star = equilibrium_payoffs(game, assessment);
    let nt = game.n_types();
    let mut messages = Vec::new();
    for m in 0..game.n_messages() {
        if (0..nt).any(|t| assessment.sender.prob(t, m) > 0.0) {
            continue;
        }
        let dominated = equilibrium_dominated_types(game, &u_star, m, chi);
        let pinned: Vec<(usize, f64)> = dominated.iter().map(|&t| (t, chi.value() * game.prior().get(t))).collect();
        if dominated.len() == nt {
            messages.push(MessageCheck {
                message: m,
                dominated,
                pinned,
                region: None,
                responses: None,
                breaking_type: None,
                passes: true,
                note: Some("all types equilibrium-dominated".into()),
            });
            continue;
        }
        let region = constrained_belief_set(game, &dominated, chi)?;
        let responses = best_responses_over(game, m, &region);
        let breaking_type = (0..nt).find(|&t| responses.min_payoff(game, t, m) > u_star[t] + OPT_TOL);
        messages.push(MessageCheck {
            message: m,
            dominated,
            pinned,
            region: Some(region),
            responses: Some(responses),
            breaking_type,
            passes: breaking_type.is_none(),
            note: None,
        });
    }
    let survives = messages.iter().all(|c| c.passes);
    Ok(CriterionReport { chi, messages, survives })
}

/// The cursed intuitive criterion at the assessment's own `chi`.
pub fn survives_cursed_intuitive(game: &SignalingGame, record: &EquilibriumRecord) -> Result<CriterionReport> {
    intuitive_criterion(game, &record.assessment, record.assessment.chi)
}

/// The standard criterion: dominance and pins computed with `chi = 0`.
pub fn survives_standard_intuitive(game: &SignalingGame, record: &EquilibriumRecord) -> Result<CriterionReport> {
    intuitive_criterion(game, &record.assessment, Chi::ZERO)
}

/// Annotates every record with both verdicts. Nothing is dropped.
pub fn refine_equilibrium_set(game: &SignalingGame, records: &mut [EquilibriumRecord]) -> Result<Vec<CriterionReport>> {
    let mut reports = Vec::with_capacity(records.len());
    for record in records.iter_mut() {
        let standard = survives_standard_intuitive(game, record)?;
        let cursed = survives_cursed_intuitive(game, record)?;
        record.refinement_verdicts.insert(STANDARD_INTUITIVE.into(), standard.survives);
        record.refinement_verdicts.insert(CURSED_INTUITIVE.into(), cursed.survives);
        reports.push(cursed);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{PayoffTable, PriorDistribution};

    fn beer_quiche() -> SignalingGame {
        // types: weak, strong; messages: Beer, Quiche; actions: Fight, NotFight
        let u1 = [[[0.0, 2.0], [1.0, 3.0]], [[1.0, 3.0], [0.0, 2.0]]];
        let u2 = [[[4.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]];
        SignalingGame::finite(
            vec!["weak".into(), "strong".into()],
            PriorDistribution::new(vec![0.4, 0.6]).unwrap(),
            vec!["Beer".into(), "Quiche".into()],
            vec!["Fight".into(), "NotFight".into()],
            PayoffTable::from_fn(2, 2, 2, |t, m, a| u1[t][m][a]),
            PayoffTable::from_fn(2, 2, 2, |t, m, a| u2[t][m][a]),
        )
        .unwrap()
    }

    #[test]
    fn both_actions_rationalizable_after_beer() {
        let game = beer_quiche();
        assert_eq!(br_over_all_beliefs(&game, 0), ResponseSet::Actions(vec![0, 1]));
    }

    #[test]
    fn weak_type_dominated_at_beer_in_quiche_pool() {
        let game = beer_quiche();
        // pooling on Quiche, not fought: weak gets 3, strong gets 2
        let dominated = equilibrium_dominated_types(&game, &[3.0, 2.0], 0, Chi::ZERO);
        assert_eq!(dominated, vec![0]);
        let region = constrained_belief_set(&game, &dominated, Chi::new(0.5).unwrap()).unwrap();
        assert!(region.is_point());
        assert!((region.lower()[0] - 0.2).abs() < 1e-15);
    }
}
