use std::fmt;

use serde::Serialize;

use crate::game::{belief_floor, cursed_bayes_update, Assessment, ReceiverStrategy, SignalingGame};

use super::OPT_TOL;

/// The equilibrium conditions, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Dimensions or receiver mode do not match the game.
    Malformed,
    /// An on-path belief differs from the cursed Bayes posterior.
    OnPathBelief,
    /// Some belief puts less than `chi F(t)` on a type.
    BeliefFloor,
    /// A type sends a message that is not a best response.
    SenderOptimality,
    /// The receiver plays something other than a best response.
    ReceiverOptimality,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Malformed => "malformed assessment",
            Condition::OnPathBelief => "on-path belief",
            Condition::BeliefFloor => "belief floor",
            Condition::SenderOptimality => "sender optimality",
            Condition::ReceiverOptimality => "receiver optimality",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks every equilibrium condition of `assessment` at its own `chi`.
///
/// All violations are collected; they are ordered by condition so that
/// [`Verdict::first`] names the first one that fails.
pub fn verify_cse(game: &SignalingGame, assessment: &Assessment) -> Verdict {
    let mut out = Vec::new();
    if let Err(e) = assessment.check_dims(game) {
        out.push(Violation { condition: Condition::Malformed, detail: e.to_string(), magnitude: f64::NAN });
        return Verdict { violations: out };
    }
    let (nt, nm) = (game.n_types(), game.n_messages());
    let chi = assessment.chi;
    let beliefs = &assessment.beliefs;
    let sender = &assessment.sender;
    let receiver = &assessment.receiver;

    for m in 0..nm {
        let posterior = match cursed_bayes_update(game, sender, chi, m) {
            Ok(p) => p,
            Err(e) => {
                out.push(Violation { condition: Condition::Malformed, detail: e.to_string(), magnitude: f64::NAN });
                return Verdict { violations: out };
            }
        };
        if let Some(p) = posterior {
            let gap = p.iter().zip(beliefs.at(m)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if gap > OPT_TOL {
                out.push(Violation {
                    condition: Condition::OnPathBelief,
                    detail: format!("belief at {} differs from the cursed posterior {:?}", game.messages()[m], p),
                    magnitude: gap,
                });
            }
        }
    }

    let floor = belief_floor(game.prior(), chi);
    for m in 0..nm {
        for t in 0..nt {
            let deficit = floor[t] - beliefs.at(m)[t];
            if deficit > OPT_TOL {
                out.push(Violation {
                    condition: Condition::BeliefFloor,
                    detail: format!(
                        "belief at {} puts {} on {}, below the floor {}",
                        game.messages()[m],
                        beliefs.at(m)[t],
                        game.types()[t],
                        floor[t]
                    ),
                    magnitude: deficit,
                });
            }
        }
    }

    for t in 0..nt {
        let values: Vec<f64> = (0..nm).map(|m| game.sender_payoff(t, m, receiver.at(m))).collect();
        let (best_m, best) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (m, v)| if v > acc.1 { (m, v) } else { acc });
        for m in 0..nm {
            if sender.prob(t, m) > 0.0 && values[m] < best - OPT_TOL {
                out.push(Violation {
                    condition: Condition::SenderOptimality,
                    detail: format!(
                        "type {} sends {} for {} but {} pays {}",
                        game.types()[t],
                        game.messages()[m],
                        values[m],
                        game.messages()[best_m],
                        best
                    ),
                    magnitude: best - values[m],
                });
            }
        }
    }

    for m in 0..nm {
        let belief = beliefs.at(m);
        match receiver {
            ReceiverStrategy::Mixed(rows) => {
                let values: Vec<f64> = (0..game.n_actions()).map(|a| game.receiver_action_value(belief, m, a)).collect();
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (a, &p) in rows[m].iter().enumerate() {
                    if p > 0.0 && values[a] < best - OPT_TOL {
                        out.push(Violation {
                            condition: Condition::ReceiverOptimality,
                            detail: format!(
                                "action {} at {} is not a best response",
                                game.actions()[a],
                                game.messages()[m]
                            ),
                            magnitude: best - values[a],
                        });
                    }
                }
            }
            ReceiverStrategy::Wages(w) => {
                let mean = game.mean_productivity(belief);
                let gap = (w[m] - mean).abs();
                if gap > OPT_TOL * mean.abs().max(1.0) {
                    out.push(Violation {
                        condition: Condition::ReceiverOptimality,
                        detail: format!(
                            "wage {} at {} differs from the expected productivity {}",
                            w[m],
                            game.messages()[m],
                            mean
                        ),
                        magnitude: gap,
                    });
                }
            }
        }
    }

    out.sort_by_key(|v| v.condition);
    Verdict { violations: out }
}
