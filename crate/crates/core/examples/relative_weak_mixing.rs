//! The EA statistic over a growing window for a fiber random walk and for
//! a frozen fiber.

use ergolab::diagnostics::rwm_verdict;
use ergolab::experiments::fiber_half_pairs;
use ergolab::systems::skew_product;
use ergolab::{CocycleSpec, FiberMap, SystemModel};

fn main() -> ergolab::Result<()> {
    let base = SystemModel::bernoulli(vec![0.5, 0.5])?;
    let m = 8;
    let cases = [
        (
            "walk",
            CocycleSpec::CellDriven {
                cells: base.generator(),
                maps: vec![FiberMap::Rotation(1), FiberMap::Rotation(m - 1)],
            },
        ),
        ("frozen", CocycleSpec::Constant(FiberMap::identity())),
    ];
    for (name, spec) in cases {
        let sys = skew_product(base.clone(), &spec, m)?;
        let SystemModel::Skew(ext) = &sys else {
            unreachable!()
        };
        let r = rwm_verdict(
            ext,
            &fiber_half_pairs(ext)?,
            &[16, 64, 256, 1024],
            None,
            0.05,
            256,
            1,
        )?;
        println!("{name}: verdict {:?}", r.verdict);
        for row in &r.trace {
            println!("  pair {} L={} EA={:.5}", row.series, row.x, row.value);
        }
    }
    Ok(())
}
