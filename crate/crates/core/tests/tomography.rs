use proptest::prelude::*;
use rand::seq::SliceRandom;

use qbayes::definetti::{bayes_update, run_tomography, simulate_data, Particle};
use qbayes::gleason::basis_distribution;
use qbayes::operator::{sample_density, trace_distance, Ensemble};
use qbayes::{DensityOperator, GeneratingFunction, Schedule, SeededRng};

fn prior(count: usize, rng: &mut SeededRng) -> GeneratingFunction {
    GeneratingFunction::sample(2, count, Ensemble::HilbertSchmidt, rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weights_stay_a_distribution(seed: u64) {
        let mut rng = SeededRng::new(seed);
        let gen = prior(50, &mut rng);
        let truth = sample_density(2, Ensemble::HilbertSchmidt, &mut rng).unwrap();
        let schedule = Schedule::standard(2).unwrap();
        let data = simulate_data(&truth, &schedule, 300, &mut rng).unwrap();
        let run = run_tomography(&gen, &schedule, &data, None).unwrap();
        let w = run.posterior.weights();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    // Outcomes of the same basis commute, and so do whole (basis, outcome) pairs.
    #[test]
    fn update_order_does_not_matter(seed: u64) {
        let mut rng = SeededRng::new(seed);
        let gen = prior(30, &mut rng);
        let schedule = Schedule::standard(2).unwrap();
        let truth = sample_density(2, Ensemble::HilbertSchmidt, &mut rng).unwrap();
        let data = simulate_data(&truth, &schedule, 40, &mut rng).unwrap();
        let mut pairs: Vec<(usize, usize)> = data.sequence().iter().enumerate().map(|(t, &k)| (t % 3, k)).collect();
        let apply = |pairs: &[(usize, usize)]| {
            pairs.iter().fold(gen.clone(), |g, &(b, k)| bayes_update(&g, &schedule.bases()[b], k).unwrap())
        };
        let forward = apply(&pairs);
        pairs.shuffle(&mut rng);
        let shuffled = apply(&pairs);
        for (a, b) in forward.weights().iter().zip(shuffled.weights()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn predictive_matches_posterior_mean(seed: u64) {
        let mut rng = SeededRng::new(seed);
        let gen = prior(40, &mut rng);
        let schedule = Schedule::standard(2).unwrap();
        let post = bayes_update(&gen, &schedule.bases()[1], 0).unwrap();
        for basis in schedule.bases() {
            let mixture = post.predictive(basis).unwrap();
            let mean = basis_distribution(&post.mean_state(), basis).unwrap();
            for (a, b) in mixture.iter().zip(&mean) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn support_on_the_truth_concentrates() {
    let mut rng = SeededRng::new(11);
    let truth = DensityOperator::diagonal(&[0.95, 0.05]).unwrap();
    let mut states: Vec<DensityOperator> = (0..99)
        .map(|_| sample_density(2, Ensemble::HilbertSchmidt, &mut rng).unwrap())
        .collect();
    states.push(truth.clone());
    let gen = GeneratingFunction::uniform(states).unwrap();
    let schedule = Schedule::standard(2).unwrap();
    let data = simulate_data(&truth, &schedule, 2000, &mut rng).unwrap();
    let run = run_tomography(&gen, &schedule, &data, Some(&truth)).unwrap();
    assert!(run.final_distance().unwrap() < 0.05);
    assert!(run.posterior.weights()[99] > 0.5);
}

// A prior with no mass near the truth settles on the closest particle and no closer.
#[test]
fn adversarial_prior_stays_away() {
    let truth = DensityOperator::diagonal(&[0.99, 0.01]).unwrap();
    let far = vec![
        Particle { weight: 0.5, state: DensityOperator::diagonal(&[0.4, 0.6]).unwrap() },
        Particle { weight: 0.5, state: DensityOperator::diagonal(&[0.2, 0.8]).unwrap() },
    ];
    let gen = GeneratingFunction::new(2, far).unwrap();
    let schedule = Schedule::standard(2).unwrap();
    let data = simulate_data(&truth, &schedule, 1000, &mut SeededRng::new(1)).unwrap();
    let run = run_tomography(&gen, &schedule, &data, Some(&truth)).unwrap();
    let d = run.final_distance().unwrap();
    assert!(d > 0.5, "{d}");
    assert!((trace_distance(&run.mean, &DensityOperator::diagonal(&[0.4, 0.6]).unwrap()).unwrap()) < 1e-6);
}
