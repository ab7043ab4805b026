use qbayes::definetti::{run_tomography, simulate_data};
use qbayes::operator::Ensemble;
use qbayes::{DensityOperator, GeneratingFunction, Schedule, SeededRng};

fn main() -> qbayes::Result<()> {
    let truth = DensityOperator::diagonal(&[0.9, 0.1])?;
    let schedule = Schedule::standard(2)?;
    let mut rng = SeededRng::new(7);
    let prior = GeneratingFunction::sample(2, 200, Ensemble::HilbertSchmidt, &mut rng)?;
    let data = simulate_data(&truth, &schedule, 1000, &mut rng)?;
    let run = run_tomography(&prior, &schedule, &data, Some(&truth))?;
    println!("{:?}", run.final_distance());
    Ok(())
}
