//! Sample-level class checks on an i.i.d. source and a Sturmian one.

use ergolab::diagnostics::{k_property_check, vlb_zero_entropy, vwb_statistic};
use ergolab::systems::sample_trajectory;
use ergolab::SystemModel;

fn main() -> ergolab::Result<()> {
    let iid = SystemModel::bernoulli(vec![0.6, 0.4])?;
    let sturm = SystemModel::sturmian(0.4142135623730951)?;
    for (name, sys) in [("iid", &iid), ("sturmian", &sturm)] {
        let t = sample_trajectory(sys, &sys.generator(), 1_000_000, 2, 0)?;
        let vwb = vwb_statistic(&t.labels, 8, 4, 0.1)?;
        let k = k_property_check(&t.labels, 2, 2, 4, 0.1, 0.05)?;
        println!(
            "{name}: vwb {} (worst {:.3}), kcheck {} (rate {:.4})",
            vwb.verdict, vwb.worst_distance, k.verdict, k.h_rate
        );
        if name == "sturmian" {
            let z = vlb_zero_entropy(&t.labels, 64, 0.25)?;
            println!(
                "  zero-entropy vlb {} with {} words covering {:.3}",
                z.verdict,
                z.members.len(),
                z.g_mass
            );
        }
    }
    Ok(())
}
