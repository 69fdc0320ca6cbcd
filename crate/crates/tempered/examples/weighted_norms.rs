//! Weighted sup norms on p-adic power series.
//!
//! The weight-n norm of `sum a_j t^j` is `max |a_j| / (j+1)^n`, so a series
//! whose coefficients grow like powers of p can still be bounded once the
//! weight absorbs the growth. The family is decreasing in n, multiplicative
//! up to weight doubling, and exact: every value below is a rational number.

use num_rational::BigRational;
use tempered::padic::{Prime, Scalar};
use tempered::series::{GrowthSeries, SeriesSpec};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(2)?;
    let spec = SeriesSpec::power(p, &["t"], 16)?;

    // the log-type series sum t^i / i, the standard example of a series
    // that is unbounded but tempered of order 1
    let log = GrowthSeries::from_coeffs(
        spec.clone(),
        (1..=16).map(|i| (vec![i], ratio(1, i))),
    )?;

    println!("log-type series, {} terms, window {}", log.term_count(), spec.windows()[0]);
    for n in 0..=4 {
        println!("  weight {n}: norm {}", log.norm_weighted(n).value());
    }

    // monotonicity: the weight-n family decreases in n
    let n0 = log.norm_weighted(0);
    let n1 = log.norm_weighted(1);
    let n2 = log.norm_weighted(2);
    assert!(n1 <= n0 && n2 <= n1);
    println!("monotone in the weight: {} >= {} >= {}", n0.value(), n1.value(), n2.value());

    // products double the weight: |fg|_{2n} <= |f|_n |g|_n
    let geom = GrowthSeries::from_coeffs(
        spec.clone(),
        (0..=16).map(|i| (vec![i], Scalar::from_integer(1.into()))),
    )?;
    let prod = log.mul(&geom)?;
    let lhs = prod.norm_weighted(2);
    let rhs = &log.norm_weighted(1) * &geom.norm_weighted(1);
    println!(
        "product bound at doubled weight: {} <= {} ({})",
        lhs.value(),
        rhs.value(),
        if lhs <= rhs { "holds" } else { "violated" }
    );
    assert!(lhs <= rhs);

    // per-variable weights: a tube weights its normal directions only
    let spec2 = SeriesSpec::power(p, &["x", "y"], 8)?;
    let f = GrowthSeries::from_coeffs(
        spec2,
        vec![
            (vec![0, 3], ratio(1, 8)),
            (vec![2, 1], ratio(3, 2)),
            (vec![4, 0], ratio(1, 1)),
        ],
    )?;
    for w in [[0, 0], [0, 2], [2, 0]] {
        println!("  weights {:?}: norm {}", w, f.norm_weighted_per_var(&w).value());
    }
    Ok(())
}
