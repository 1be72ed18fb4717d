use crate::chi::Chi;
use crate::error::{Error, Result};

use super::{PriorDistribution, SenderStrategy, SignalingGame};

fn check_sender(sender: &SenderStrategy, prior: &PriorDistribution) -> Result<()> {
    if sender.n_types() != prior.len() {
        return Err(Error::DimensionMismatch {
            what: "sender strategy vs prior",
            expected: prior.len(),
            got: sender.n_types(),
        });
    }
    Ok(())
}

/// Type-averaged message distribution `sum_t F(t) sigma(m | t)`.
pub fn average_sender_strategy(sender: &SenderStrategy, prior: &PriorDistribution) -> Result<Vec<f64>> {
    check_sender(sender, prior)?;
    let mut avg = vec![0.0; sender.n_messages()];
    for (row, &f) in sender.rows().iter().zip(prior.weights()) {
        for (a, &p) in avg.iter_mut().zip(row) {
            *a += f * p;
        }
    }
    Ok(avg)
}

/// The strategy a cursed receiver believes the sender uses: each type's row
/// mixed with weight `chi` toward the type-averaged row.
pub fn cursed_perception(sender: &SenderStrategy, prior: &PriorDistribution, chi: Chi) -> Result<SenderStrategy> {
    let avg = average_sender_strategy(sender, prior)?;
    let x = chi.value();
    let rows = sender
        .rows()
        .iter()
        .map(|row| row.iter().zip(&avg).map(|(&p, &a)| x * a + (1.0 - x) * p).collect())
        .collect();
    Ok(SenderStrategy { rows })
}

/// Posterior over types after `m` under cursed Bayes' rule, or `None` when
/// no type sends `m`.
///
/// The update is Bayes' rule applied to the cursed perception of the sender,
/// which works out to `chi F(t) + (1 - chi) * (standard posterior)`.
pub fn cursed_bayes_update(
    game: &SignalingGame,
    sender: &SenderStrategy,
    chi: Chi,
    m: usize,
) -> Result<Option<Vec<f64>>> {
    if m >= game.n_messages() {
        return Err(Error::invalid(format!("message index {m} out of range")));
    }
    if sender.n_messages() != game.n_messages() {
        return Err(Error::DimensionMismatch {
            what: "sender strategy messages",
            expected: game.n_messages(),
            got: sender.n_messages(),
        });
    }
    let prior = game.prior();
    let perceived = cursed_perception(sender, prior, chi)?;
    let joint: Vec<f64> = prior
        .weights()
        .iter()
        .enumerate()
        .map(|(t, &f)| f * perceived.prob(t, m))
        .collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Ok(None);
    }
    Ok(Some(joint.into_iter().map(|j| j / total).collect()))
}

/// Componentwise lower bound `chi F(t)` on every consistent belief.
pub fn belief_floor(prior: &PriorDistribution, chi: Chi) -> Vec<f64> {
    prior.weights().iter().map(|f| chi.value() * f).collect()
}

/// Belief that puts exactly the floor mass on `targets` and spreads the rest
/// over the other types in proportion to the prior.
pub fn minimal_belief_on(targets: &[usize], prior: &PriorDistribution, chi: Chi) -> Result<Vec<f64>> {
    let n = prior.len();
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::invalid(format!("target type index {t} out of range")));
    }
    let floor = belief_floor(prior, chi);
    let is_target = |t: usize| targets.contains(&t);
    let pinned: f64 = (0..n).filter(|&t| is_target(t)).map(|t| floor[t]).sum();
    let residual = 1.0 - pinned;
    let free_prior: f64 = (0..n).filter(|&t| !is_target(t)).map(|t| prior.get(t)).sum();
    if free_prior == 0.0 {
        if residual > super::PROB_TOL {
            return Err(Error::InfeasiblePin { chi: chi.value(), residual });
        }
        return Ok(floor);
    }
    Ok((0..n)
        .map(|t| if is_target(t) { floor[t] } else { residual * prior.get(t) / free_prior })
        .collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::game::{PayoffTable, PriorDistribution};

    fn chi(x: f64) -> Chi {
        Chi::new(x).unwrap()
    }

    fn two_message_game(p_first: f64) -> SignalingGame {
        let prior = PriorDistribution::new(vec![p_first, 1.0 - p_first]).unwrap();
        SignalingGame::wage_quadratic(
            vec!["H".into(), "L".into()],
            prior,
            vec![2.0, 1.0],
            vec!["e0".into(), "e1".into()],
            vec![vec![0.0, 0.5], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn average_of_type_independent_strategy_is_the_common_row() {
        let prior = PriorDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let row = vec![0.1, 0.6, 0.3];
        let s = SenderStrategy::new(vec![row.clone(); 3]).unwrap();
        let avg = average_sender_strategy(&s, &prior).unwrap();
        for (a, r) in avg.iter().zip(&row) {
            assert!((a - r).abs() < 1e-15);
        }
    }

    #[test]
    fn average_of_separating_profile() {
        let prior = PriorDistribution::uniform(2).unwrap();
        let s = SenderStrategy::pure(&[0, 1], 2);
        assert_eq!(average_sender_strategy(&s, &prior).unwrap(), vec![0.5, 0.5]);
        let s = SenderStrategy::pure(&[1, 0], 2);
        assert_eq!(average_sender_strategy(&s, &prior).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn average_rejects_dimension_mismatch() {
        let prior = PriorDistribution::uniform(3).unwrap();
        let s = SenderStrategy::pure(&[0, 1], 2);
        assert!(matches!(average_sender_strategy(&s, &prior), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn perception_extremes() {
        let prior = PriorDistribution::new(vec![0.3, 0.7]).unwrap();
        let s = SenderStrategy::new(vec![vec![0.2, 0.8], vec![0.9, 0.1]]).unwrap();
        assert_eq!(cursed_perception(&s, &prior, Chi::ZERO).unwrap(), s);
        let avg = average_sender_strategy(&s, &prior).unwrap();
        let full = cursed_perception(&s, &prior, Chi::ONE).unwrap();
        for row in full.rows() {
            for (a, b) in row.iter().zip(&avg) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perception_half_cursed_separating() {
        let prior = PriorDistribution::uniform(2).unwrap();
        let s = SenderStrategy::pure(&[0, 1], 2);
        let p = cursed_perception(&s, &prior, chi(0.5)).unwrap();
        assert_eq!(p.rows()[0], vec![0.75, 0.25]);
        assert_eq!(p.rows()[1], vec![0.25, 0.75]);
    }

    #[test]
    fn separating_posterior_on_high_message() {
        for &(p, x) in &[(0.5, 0.3), (0.2, 0.7), (0.9, 0.0), (0.4, 1.0)] {
            let game = two_message_game(p);
            let s = SenderStrategy::pure(&[1, 0], 2); // H sends e1
            let post = cursed_bayes_update(&game, &s, chi(x), 1).unwrap().unwrap();
            assert!((post[0] - (x * p + (1.0 - x))).abs() < 1e-14);
        }
    }

    #[test]
    fn pooling_posterior_is_prior() {
        let game = two_message_game(0.35);
        let s = SenderStrategy::pure(&[0, 0], 2);
        for &x in &[0.0, 0.25, 0.8, 1.0] {
            let post = cursed_bayes_update(&game, &s, chi(x), 0).unwrap().unwrap();
            assert!((post[0] - 0.35).abs() < 1e-15);
            assert!(cursed_bayes_update(&game, &s, chi(x), 1).unwrap().is_none());
        }
    }

    #[test]
    fn floor_values() {
        let prior = PriorDistribution::uniform(2).unwrap();
        assert_eq!(belief_floor(&prior, Chi::ZERO), vec![0.0, 0.0]);
        assert_eq!(belief_floor(&prior, Chi::ONE), vec![0.5, 0.5]);
        assert_eq!(belief_floor(&prior, chi(0.5)), vec![0.25, 0.25]);
    }

    #[test]
    fn minimal_belief_examples() {
        // types ordered (H, L)
        let prior = PriorDistribution::uniform(2).unwrap();
        assert_eq!(minimal_belief_on(&[1], &prior, chi(0.5)).unwrap(), vec![0.75, 0.25]);
        assert_eq!(minimal_belief_on(&[1], &prior, Chi::ZERO).unwrap(), vec![1.0, 0.0]);
        // beer-quiche: weak type has prior 0.4
        let prior = PriorDistribution::new(vec![0.4, 0.6]).unwrap();
        let mu = minimal_belief_on(&[0], &prior, chi(0.5)).unwrap();
        assert!((mu[0] - 0.2).abs() < 1e-15);
        assert!((mu[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn minimal_belief_all_targets() {
        let prior = PriorDistribution::uniform(2).unwrap();
        assert!(matches!(
            minimal_belief_on(&[0, 1], &prior, chi(0.5)),
            Err(Error::InfeasiblePin { .. })
        ));
        assert_eq!(minimal_belief_on(&[0, 1], &prior, Chi::ONE).unwrap(), vec![0.5, 0.5]);
    }

    fn random_game() -> impl Strategy<Value = (SignalingGame, SenderStrategy)> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(nt, nm)| {
            (
                proptest::collection::vec(0.05f64..1.0, nt),
                proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, nm), nt),
            )
                .prop_map(move |(prior_raw, rows_raw)| {
                    let s: f64 = prior_raw.iter().sum();
                    let prior = PriorDistribution::new(prior_raw.iter().map(|w| w / s).collect()).unwrap();
                    let rows: Vec<Vec<f64>> = rows_raw
                        .iter()
                        .map(|r| {
                            let s: f64 = r.iter().sum();
                            r.iter().map(|x| x / s).collect()
                        })
                        .collect();
                    let game = SignalingGame::finite(
                        (0..nt).map(|t| format!("t{t}")).collect(),
                        prior,
                        (0..nm).map(|m| format!("m{m}")).collect(),
                        vec!["a".into()],
                        PayoffTable::from_fn(nt, nm, 1, |_, _, _| 0.0),
                        PayoffTable::from_fn(nt, nm, 1, |_, _, _| 0.0),
                    )
                    .unwrap();
                    (game, SenderStrategy::new(rows).unwrap())
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn uncursed_update_is_textbook_bayes((game, s) in random_game()) {
            let prior = game.prior().weights();
            for m in 0..game.n_messages() {
                let joint: Vec<f64> = (0..game.n_types()).map(|t| prior[t] * s.prob(t, m)).collect();
                let z: f64 = joint.iter().sum();
                let post = cursed_bayes_update(&game, &s, Chi::ZERO, m).unwrap().unwrap();
                for t in 0..game.n_types() {
                    prop_assert!((post[t] - joint[t] / z).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn cursed_posterior_is_linear_in_chi((game, s) in random_game(), x in 0.0f64..=1.0) {
            let c = Chi::new(x).unwrap();
            let floor = belief_floor(game.prior(), c);
            for m in 0..game.n_messages() {
                let post = cursed_bayes_update(&game, &s, c, m).unwrap().unwrap();
                let base = cursed_bayes_update(&game, &s, Chi::ZERO, m).unwrap().unwrap();
                prop_assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for t in 0..game.n_types() {
                    let closed = x * game.prior().get(t) + (1.0 - x) * base[t];
                    prop_assert!((post[t] - closed).abs() < 1e-12);
                    prop_assert!(post[t] >= floor[t] - 1e-15);
                }
            }
        }

        #[test]
        fn perception_is_row_stochastic((game, s) in random_game(), x in 0.0f64..=1.0) {
            let p = cursed_perception(&s, game.prior(), Chi::new(x).unwrap()).unwrap();
            for row in p.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(row.iter().all(|&v| (0.0..=1.0 + 1e-15).contains(&v)));
            }
        }
    }
}
