use crate::chi::Chi;
use crate::error::{Error, Result};
use crate::game::{cursed_bayes_update, Assessment, BeliefSystem, SenderStrategy, SignalingGame};

use super::{
    deterring_response, receiver_best_response, receiver_from_pure, sort_records, BeliefRegion,
    EquilibriumRecord, PureResponse, OPT_TOL, PROFILE_LIMIT,
};

/// Every pure-strategy cursed sequential equilibrium at `chi`, in canonical
/// order.
///
/// Each pure sender profile is paired with every combination of pure receiver
/// best responses at its on-path messages. Off-path messages need some
/// floor-dominating belief whose best response deters all types; the floor
/// belief itself is preferred when it works.
///
/// Fails with [`Error::SearchBudget`] when there are more than
/// [`PROFILE_LIMIT`] sender profiles.
pub fn enumerate_pure_cse(game: &SignalingGame, chi: Chi) -> Result<Vec<EquilibriumRecord>> {
    let (nt, nm) = (game.n_types(), game.n_messages());
    let profiles = (nm as u128)
        .checked_pow(nt as u32)
        .unwrap_or(u128::MAX);
    if profiles > PROFILE_LIMIT {
        return Err(Error::SearchBudget { profiles, limit: PROFILE_LIMIT });
    }
    let floor = BeliefRegion::consistent(game.prior(), chi);
    let mut out = Vec::new();
    let mut choice = vec![0usize; nt];
    for idx in 0..profiles {
        let mut rest = idx;
        for t in (0..nt).rev() {
            choice[t] = (rest % nm as u128) as usize;
            rest /= nm as u128;
        }
        let sender = SenderStrategy::pure(&choice, nm);
        let mut posteriors: Vec<Option<Vec<f64>>> = Vec::with_capacity(nm);
        for m in 0..nm {
            posteriors.push(cursed_bayes_update(game, &sender, chi, m)?);
        }
        let onpath: Vec<usize> = (0..nm).filter(|&m| posteriors[m].is_some()).collect();
        let options: Vec<Vec<PureResponse>> = onpath
            .iter()
            .map(|&m| receiver_best_response(game, posteriors[m].as_ref().unwrap(), m))
            .collect();
        let mut pick = vec![0usize; onpath.len()];
        loop {
            let mut responses = vec![PureResponse::Wage(0.0); nm];
            for (i, &m) in onpath.iter().enumerate() {
                responses[m] = options[i][pick[i]];
            }
            if let Some(record) = check_profile(game, chi, &choice, &sender, &posteriors, &onpath, &mut responses, &floor)? {
                out.push(record);
            }
            if !advance(&mut pick, &options) {
                break;
            }
        }
    }
    sort_records(&mut out);
    Ok(out)
}

fn advance(pick: &mut [usize], options: &[Vec<PureResponse>]) -> bool {
    for i in (0..pick.len()).rev() {
        pick[i] += 1;
        if pick[i] < options[i].len() {
            return true;
        }
        pick[i] = 0;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn check_profile(
    game: &SignalingGame,
    chi: Chi,
    choice: &[usize],
    sender: &SenderStrategy,
    posteriors: &[Option<Vec<f64>>],
    onpath: &[usize],
    responses: &mut [PureResponse],
    floor: &BeliefRegion,
) -> Result<Option<EquilibriumRecord>> {
    let nt = game.n_types();
    let u_star: Vec<f64> = (0..nt).map(|t| responses[choice[t]].sender_payoff(game, t, choice[t])).collect();
    for t in 0..nt {
        for &m in onpath {
            if responses[m].sender_payoff(game, t, m) > u_star[t] + OPT_TOL {
                return Ok(None);
            }
        }
    }
    let mut beliefs: Vec<Vec<f64>> = Vec::with_capacity(game.n_messages());
    for m in 0..game.n_messages() {
        match &posteriors[m] {
            Some(p) => beliefs.push(p.clone()),
            None => match deterring_response(game, m, floor, &u_star) {
                Some(d) => {
                    responses[m] = d.response;
                    beliefs.push(d.belief);
                }
                None => return Ok(None),
            },
        }
    }
    let assessment = Assessment {
        sender: sender.clone(),
        receiver: receiver_from_pure(game, responses)?,
        beliefs: BeliefSystem::new(beliefs)?,
        chi,
    };
    Ok(Some(EquilibriumRecord::new(game, assessment)))
}
