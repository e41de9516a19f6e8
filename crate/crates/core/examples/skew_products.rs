//! Builds rotation-valued skew products and shows the fiber walk above a
//! Bernoulli base.

use ergolab::systems::{sample_trajectory, skew_product};
use ergolab::{CocycleSpec, FiberMap, Partition, SystemModel};

fn main() -> ergolab::Result<()> {
    let base = SystemModel::bernoulli(vec![0.5, 0.5])?;
    let m = 8;
    let walk = CocycleSpec::CellDriven {
        cells: base.generator(),
        maps: vec![FiberMap::Rotation(1), FiberMap::Rotation(m - 1)],
    };
    let sys = skew_product(base.clone(), &walk, m)?;
    let SystemModel::Skew(ext) = &sys else {
        unreachable!()
    };
    let t = sample_trajectory(&sys, &Partition::discrete(sys.state_count())?, 24, 3, 0)?;
    let path: Vec<String> = t
        .labels
        .iter()
        .map(|&o| {
            let (x, u) = ext.split(o as usize);
            format!("{x}/{u}")
        })
        .collect();
    println!("base/fiber: {}", path.join(" "));

    let random = skew_product(
        base,
        &CocycleSpec::Random {
            cells: Partition::discrete(2)?,
            seed: 11,
        },
        m,
    )?;
    let SystemModel::Skew(r) = &random else {
        unreachable!()
    };
    println!("random cocycle maps: {:?}", r.cocycle().maps());
    println!(
        "product partition at level 2 has {} cells",
        random.product_partition(2)?.cell_count()
    );
    Ok(())
}
