mod common;

use cursed_sig::game::{belief_floor, cursed_bayes_update, SenderStrategy};
use cursed_sig::refine::{intuitive_criterion, CURSED_INTUITIVE};
use cursed_sig::solver::{enumerate_pure_cse, verify_cse};
use cursed_sig::spence::{
    discretized_game, pooling_region, separating_region, weak_set_dominates, CostFunction, SpenceModel,
};
use cursed_sig::Chi;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn chi_strategy() -> impl Strategy<Value = Chi> {
    (0.0..=1.0f64).prop_map(|x| Chi::new(x).unwrap())
}

fn sender_rows(nt: usize, nm: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, nm), nt).prop_map(|rows| {
        rows.into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum::<f64>() + 1e-9;
                r.iter().map(|x| (x + 1e-9 / r.len() as f64) / s).collect()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posteriors_respect_the_floor(chi in chi_strategy(), rows in sender_rows(3, 3)) {
        let ig = common::IntGame { nt: 3, nm: 3, na: 1, weights: vec![1, 2, 3], u1: vec![vec![vec![0]; 3]; 3], u2: vec![vec![vec![0]; 3]; 3] };
        let game = ig.to_game();
        let sender = SenderStrategy::new(rows).unwrap();
        let floor = belief_floor(game.prior(), chi);
        for m in 0..3 {
            let post = cursed_bayes_update(&game, &sender, chi, m).unwrap().unwrap();
            prop_assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for t in 0..3 {
                prop_assert!(post[t] >= floor[t] - 1e-12);
            }
        }
    }

    #[test]
    fn floor_grows_with_chi(a in chi_strategy(), b in chi_strategy()) {
        let ig = common::IntGame { nt: 2, nm: 1, na: 1, weights: vec![1, 3], u1: vec![vec![vec![0]]; 2], u2: vec![vec![vec![0]]; 2] };
        let game = ig.to_game();
        let (lo, hi) = if a.value() <= b.value() { (a, b) } else { (b, a) };
        let (fl, fh) = (belief_floor(game.prior(), lo), belief_floor(game.prior(), hi));
        prop_assert!(fl.iter().zip(&fh).all(|(x, y)| x <= y));
    }

    #[test]
    fn enumerated_equilibria_verify(seed in any::<u64>(), chi in chi_strategy()) {
        let game = common::IntGame::random(&mut StdRng::seed_from_u64(seed)).to_game();
        for record in enumerate_pure_cse(&game, chi).unwrap() {
            let verdict = verify_cse(&game, &record.assessment);
            prop_assert!(verdict.passed(), "{:?}", verdict.first());
        }
    }

    #[test]
    fn criterion_is_deterministic_and_total(seed in any::<u64>(), chi in chi_strategy()) {
        let game = common::IntGame::random(&mut StdRng::seed_from_u64(seed)).to_game();
        let mut records = enumerate_pure_cse(&game, chi).unwrap();
        cursed_sig::refine::refine_equilibrium_set(&game, &mut records).unwrap();
        for r in &records {
            let again = intuitive_criterion(&game, &r.assessment, chi).unwrap();
            prop_assert_eq!(again.survives, r.refinement_verdicts[CURSED_INTUITIVE]);
        }
    }

    #[test]
    fn spence_regions_shrink_with_chi(
        theta_l in 0.5..2.0f64,
        gap in 0.2..3.0f64,
        p in 0.05..0.95f64,
        k in 1.0..3.0f64,
        a in 0.0..0.999f64,
        b in 0.0..0.999f64,
    ) {
        let model = SpenceModel::new(theta_l, theta_l + gap, p, CostFunction::Power(k)).unwrap();
        let (lo, hi) = (Chi::new(a.min(b)).unwrap(), Chi::new(a.max(b)).unwrap());
        prop_assert!(weak_set_dominates(&separating_region(&model, lo).unwrap(), &separating_region(&model, hi).unwrap()).unwrap());
        prop_assert!(weak_set_dominates(&pooling_region(&model, lo).unwrap(), &pooling_region(&model, hi).unwrap()).unwrap());
    }
}

/// Separating profiles of the finite game on an education grid appear exactly
/// at grid points inside the closed-form separating region.
#[test]
fn discretized_separating_matches_region() {
    let model = SpenceModel::new(1.0, 2.0, 0.5, CostFunction::Quadratic).unwrap();
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.05).collect();
    let game = discretized_game(&model, &grid).unwrap();
    for x in [0.0, 0.2, 0.45, 0.7, 0.9] {
        let chi = Chi::new(x).unwrap();
        let region = separating_region(&model, chi).unwrap();
        let (lo, hi) = region.bounds().unwrap();
        let records = enumerate_pure_cse(&game, chi).unwrap();
        for (j, &e) in grid.iter().enumerate().skip(1) {
            if (e - lo).abs() < 1e-6 || (e - hi).abs() < 1e-6 {
                continue;
            }
            let found = records.iter().any(|r| r.assessment.sender.as_pure() == Some(vec![0, j]));
            assert_eq!(found, region.contains(e, 0.0), "chi = {x}, e = {e}");
        }
    }
}

/// Pooling profiles of the discretized game appear exactly inside the
/// closed-form pooling region.
#[test]
fn discretized_pooling_matches_region() {
    let model = SpenceModel::new(1.0, 2.0, 0.5, CostFunction::Linear).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let game = discretized_game(&model, &grid).unwrap();
    for x in [0.0, 0.3, 0.6, 1.0] {
        let chi = Chi::new(x).unwrap();
        let region = pooling_region(&model, chi).unwrap();
        let (_, hi) = region.bounds().unwrap();
        let records = enumerate_pure_cse(&game, chi).unwrap();
        for (j, &e) in grid.iter().enumerate() {
            if (e - hi).abs() < 1e-6 {
                continue;
            }
            let found = records.iter().any(|r| r.assessment.sender.as_pure() == Some(vec![j, j]));
            assert_eq!(found, region.contains(e, 0.0), "chi = {x}, e = {e}");
        }
    }
}

#[test]
fn oracle_agrees_at_chi_zero() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let ig = common::IntGame::random(&mut rng);
        let game = ig.to_game();
        let got: std::collections::BTreeSet<_> = enumerate_pure_cse(&game, Chi::ZERO)
            .unwrap()
            .iter()
            .map(|r| common::outcome_of(&game, r))
            .collect();
        assert_eq!(got, ig.pure_pbe(), "{ig:?}");
    }
}
