//! Changing the presentation of a coefficient family.
//!
//! A family of coefficients indexed by generator exponents can be rewritten
//! along a relation f_i = sum_j h_ij g_j + alpha_i with |h| = 1 and
//! |alpha_i| < 1. The rewrite multiplies out powers, so a weight-n bound on
//! the source only gives a weight-(n s l) bound on the target, with an
//! explicit constant; the certificate records both sides.

use num_rational::BigRational;
use tempered::padic::{Prime, Scalar};
use tempered::tube::{change_presentation, CoefficientFamily, GeneratorRelation};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(3)?;

    // unimodular change f1 = g1 + g2 + 3, f2 = g2 - 3, inverse g1 = f1 - f2 - 6
    let forward = GeneratorRelation::new(
        vec![vec![ratio(1, 1), ratio(1, 1)], vec![ratio(0, 1), ratio(1, 1)]],
        vec![ratio(3, 1), ratio(-3, 1)],
    )?;
    let backward = GeneratorRelation::new(
        vec![vec![ratio(1, 1), ratio(-1, 1)], vec![ratio(0, 1), ratio(1, 1)]],
        vec![ratio(-6, 1), ratio(3, 1)],
    )?;

    let family = CoefficientFamily::new(
        p,
        2,
        vec![
            (vec![0, 0], ratio(1, 1)),
            (vec![2, 0], ratio(1, 3)),
            (vec![1, 1], ratio(9, 1)),
            (vec![0, 3], ratio(1, 27)),
        ],
    )?;

    let n = 1;
    let (moved, cert) = change_presentation(&family, &forward, n)?;
    println!("forward: {cert}");
    println!("  {} terms -> {} terms", family.term_count(), moved.term_count());
    assert!(moved.norm_weighted(cert.output_weight).value() <= cert.bound.value());

    // composing with the inverse relation restores the family exactly
    let (back, cert2) = change_presentation(&moved, &backward, cert.output_weight)?;
    println!("backward: {cert2}");
    assert_eq!(back, family);
    println!("round trip is the identity, bit for bit");
    Ok(())
}
