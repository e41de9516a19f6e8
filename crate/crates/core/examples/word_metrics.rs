//! Hamming and LCS distances between words, then the coupling distances
//! between two block laws.

use ergolab::metrics::{dbar_distributions, fbar_distributions};
use ergolab::{Alphabet, Word, WordDistribution};

fn main() -> ergolab::Result<()> {
    let a = Alphabet::new(2)?;
    let u = Word::from_digits(a, "01010101")?;
    let v = Word::from_digits(a, "10101010")?;
    // A shift by one costs every coordinate under d-bar but only one
    // letter at each end under f-bar.
    println!("dbar(u, v) = {}", ergolab::metrics::dbar_words(&u, &v)?);
    println!("fbar(u, v) = {}", ergolab::metrics::fbar_words(&u, &v)?);

    let p = WordDistribution::uniform_on(&[vec![0, 0, 1, 1], vec![0, 1, 0, 1]])?;
    let q = WordDistribution::uniform_on(&[vec![1, 0, 0, 1], vec![1, 1, 0, 0], vec![0, 1, 1, 0]])?;
    let d = dbar_distributions(&p, &q, 10_000)?;
    let f = fbar_distributions(&p, &q, 10_000)?;
    println!("dbar(p, q) = {:.4} ({:?})", d.value, d.method);
    println!("fbar(p, q) = {:.4} ({:?})", f.value, f.method);
    if let Some(c) = &f.coupling {
        for &(i, j, w) in &c.joint {
            println!("  {:?} -> {:?} mass {w:.4}", c.p_words[i], c.q_words[j]);
        }
    }
    Ok(())
}
