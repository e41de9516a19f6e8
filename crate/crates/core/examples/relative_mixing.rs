//! Relative mixing statistics of the lower fiber half over a fiber walk.
//!
//! The two forms agree to rounding. A rotation cocycle gives an isometric
//! extension, so neither form decays in `n`.

use ergolab::diagnostics::relative_mixing_statistic;
use ergolab::systems::{skew_product, StateFunction};
use ergolab::{CocycleSpec, FiberMap, SystemModel};

fn main() -> ergolab::Result<()> {
    let base = SystemModel::bernoulli(vec![0.5, 0.5])?;
    let spec = CocycleSpec::CellDriven {
        cells: base.generator(),
        maps: vec![FiberMap::Rotation(0), FiberMap::Rotation(1)],
    };
    let sys = skew_product(base, &spec, 5)?;
    let SystemModel::Skew(ext) = &sys else {
        unreachable!()
    };
    let f = StateFunction::fiber_lower_half(ext);
    for n in [1, 4, 16, 64] {
        let r = relative_mixing_statistic(ext, &f, &f, n, 2048, 3)?;
        println!(
            "n={n:>3} centered {:.5} covariance {:.5} gap {:.1e}",
            r.centered_form, r.covariance_form, r.identity_gap
        );
    }
    Ok(())
}
