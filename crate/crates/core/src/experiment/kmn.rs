use serde::Serialize;

use crate::chi::Chi;
use crate::error::Result;
use crate::game::{PriorDistribution, SignalingGame};
use crate::refine::{refine_equilibrium_set, CURSED_INTUITIVE};
use crate::solver::{enumerate_pure_cse, solve_support_cse, EquilibriumKind, SupportSpec};

pub const THETA_H: f64 = 50.0;
pub const THETA_L: f64 = 10.0;
pub const COST_H: f64 = 9.0;
pub const COST_L: f64 = 45.0;
/// Pooling survives the criterion from here up.
pub const POOLING_THRESHOLD: f64 = 11.0 / 20.0;
/// Separating is an equilibrium up to here.
pub const SEPARATING_THRESHOLD: f64 = 31.0 / 40.0;

/// Types `theta_H`, `theta_L` (in that order) with equal prior, messages
/// `"0"` (no investment) and `"1"` (invest), posterior-mean wages.
pub fn kmn_game() -> SignalingGame {
    SignalingGame::wage_quadratic(
        vec!["theta_H".into(), "theta_L".into()],
        PriorDistribution::uniform(2).expect("two types"),
        vec![THETA_H, THETA_L],
        vec!["0".into(), "1".into()],
        vec![vec![0.0, COST_H], vec![0.0, COST_L]],
    )
    .expect("static game is valid")
}

/// High type mixes between both messages, low type stays at `"0"`.
pub fn hybrid_support() -> SupportSpec {
    SupportSpec { sender: vec![vec![0, 1], vec![0]], receiver: vec![Vec::new(), Vec::new()] }
}

/// Which equilibria survive the cursed intuitive criterion at `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub chi: Chi,
    pub separating_survives: bool,
    pub pooling_survives: bool,
    /// Investment probability of the high type in the hybrid equilibrium.
    pub hybrid_invest_prob: Option<f64>,
}

/// Closed-form regimes of the game.
pub fn regime(chi: Chi) -> RegimeVerdict {
    let x = chi.value();
    let hybrid = (POOLING_THRESHOLD < x && x < SEPARATING_THRESHOLD).then(|| (40.0 * x - 22.0) / 9.0);
    RegimeVerdict {
        chi,
        separating_survives: x <= SEPARATING_THRESHOLD,
        pooling_survives: x >= POOLING_THRESHOLD,
        hybrid_invest_prob: hybrid,
    }
}

/// The same verdict computed by the generic solver and refinement.
pub fn pipeline_regime(chi: Chi) -> Result<RegimeVerdict> {
    let game = kmn_game();
    let mut records = enumerate_pure_cse(&game, chi)?;
    records.extend(solve_support_cse(&game, chi, &hybrid_support())?);
    refine_equilibrium_set(&game, &mut records)?;
    let survives = |kind: EquilibriumKind| {
        records
            .iter()
            .filter(|r| r.kind == kind && r.refinement_verdicts[CURSED_INTUITIVE])
            .collect::<Vec<_>>()
    };
    let hybrid = survives(EquilibriumKind::Hybrid).first().map(|r| r.assessment.sender.prob(0, 1));
    Ok(RegimeVerdict {
        chi,
        separating_survives: !survives(EquilibriumKind::Separating).is_empty(),
        pooling_survives: !survives(EquilibriumKind::Pooling).is_empty(),
        hybrid_invest_prob: hybrid,
    })
}
