//! First returns to a cell: the mean return time matches 1 / measure.

use ergolab::systems::{induce, sample_returns};
use ergolab::{StateSet, SystemModel};

fn report(name: &str, sys: SystemModel, target: StateSet) -> ergolab::Result<()> {
    let mass: f64 = target.iter().map(|i| sys.observable_measure()[i]).sum();
    let induced = induce(sys, target, 1 << 20)?;
    let returns = sample_returns(&induced, 200_000, 5)?;
    let mean = returns.iter().map(|&(_, t)| t as f64).sum::<f64>() / returns.len() as f64;
    println!("{name}: mean return {mean:.4}, 1/mass {:.4}", 1.0 / mass);
    Ok(())
}

fn main() -> ergolab::Result<()> {
    report(
        "bernoulli cell 1",
        SystemModel::bernoulli(vec![0.7, 0.3])?,
        StateSet::from_indices(2, [1])?,
    )?;
    report(
        "rotation arc 0",
        SystemModel::rotation_grid(0.4142135623730951, 5)?,
        StateSet::from_indices(5, [0])?,
    )?;
    Ok(())
}
