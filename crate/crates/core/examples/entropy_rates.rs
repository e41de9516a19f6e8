//! Plug-in entropy rates of a few sources against their closed forms.

use ergolab::entropy::{analytic_entropy, conditional_block_entropy, entropy_rate_profile};
use ergolab::systems::sample_trajectory;
use ergolab::SystemModel;

fn main() -> ergolab::Result<()> {
    let sources = [
        (
            "bernoulli(0.7, 0.3)",
            SystemModel::bernoulli(vec![0.7, 0.3])?,
        ),
        (
            "markov",
            SystemModel::markov(vec![vec![0.9, 0.1], vec![0.4, 0.6]])?,
        ),
        ("sturmian", SystemModel::sturmian(0.4142135623730951)?),
    ];
    for (name, sys) in &sources {
        let t = sample_trajectory(sys, &sys.generator(), 1_000_000, 7, 0)?;
        let (profile, _) = entropy_rate_profile(&t.labels, &[1, 4, 8, 12])?;
        let cond = conditional_block_entropy(&t.labels, 1, 4)?;
        println!("{name}: analytic {:?}", analytic_entropy(sys));
        for e in &profile {
            println!(
                "  H_{}/{} = {:.4}{}",
                e.block_length,
                e.block_length,
                e.value,
                if e.undersampled {
                    " (undersampled)"
                } else {
                    ""
                }
            );
        }
        println!(
            "  H(X0 | 4-past) = {:.4} +- {:.4}",
            cond.value, cond.std_error
        );
    }
    Ok(())
}
