//! Division with norm certificates.
//!
//! Two divisions drive the whole theory: by the diagonal x - y (the slope
//! witness of a two-variable series) and by a linear unit polynomial
//! g*t - g'. Both come back with exact norm certificates: the diagonal
//! quotient obeys |q|_{2n} <= 2^n |f|_n, the linear quotient loses nothing,
//! |h|_n <= |(g t - g') h|_n.

use num_rational::BigRational;
use tempered::padic::{Prime, Scalar};
use tempered::series::{divide_diagonal, divide_linear, GrowthSeries, SeriesSpec};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(3)?;

    // ---- diagonal division ------------------------------------------
    // start from a known cofactor, multiply by t - x, divide back
    let spec = SeriesSpec::power(p, &["t", "x"], 8)?;
    let q0 = GrowthSeries::from_coeffs(
        spec.clone(),
        vec![
            (vec![0, 0], ratio(1, 1)),
            (vec![1, 2], ratio(1, 3)),
            (vec![3, 0], ratio(9, 1)),
        ],
    )?;
    let tx = GrowthSeries::from_coeffs(
        spec,
        vec![(vec![1, 0], ratio(1, 1)), (vec![0, 1], ratio(-1, 1))],
    )?;
    let f = tx.mul(&q0)?;
    let d = divide_diagonal(&f, 1)?;
    println!("diagonal quotient: {} terms", d.quotient.term_count());
    println!("  |f|_1           = {}", d.input_norm.value());
    println!("  |q|_2           = {}", d.quotient_norm.value());
    println!("  bound 2^1 |f|_1 = {}", d.bound.value());
    println!("  exact through total degree {}", d.exact_total_degree);
    assert!(d.quotient_norm.value() <= d.bound.value());

    // division inverts the multiplication on the exact simplex
    for (idx, c) in q0.support() {
        if idx.iter().sum::<i64>() <= d.exact_total_degree {
            assert_eq!(&d.quotient.coeff(idx), c);
        }
    }
    for (idx, c) in d.quotient.support() {
        assert_eq!(q0.coeff(idx), c.clone());
    }
    println!("  dividing recovers the cofactor on that simplex");

    // ---- linear division --------------------------------------------
    let uspec = SeriesSpec::power(p, &["t"], 10)?;
    let k = GrowthSeries::from_coeffs(
        uspec.clone(),
        vec![
            (vec![0], ratio(1, 1)),
            (vec![2], ratio(1, 3)),
            (vec![5], ratio(2, 9)),
        ],
    )?;
    // h' = (t - 2) k, a unit divisor at p = 3 since |1| = |2| = 1
    let divisor = GrowthSeries::from_coeffs(
        uspec,
        vec![(vec![1], ratio(1, 1)), (vec![0], ratio(-2, 1))],
    )?;
    let h_prime = divisor.mul(&k)?;
    let lin = divide_linear(&h_prime, &ratio(1, 1), &ratio(2, 1), &[0, 1, 2])?;
    println!("\nlinear division by t - 2:");
    for cert in &lin.certificates {
        println!(
            "  weight {}: |h|_n = {} <= |h'|_n = {}",
            cert.weight,
            cert.quotient_norm.value(),
            cert.input_norm.value()
        );
        assert!(cert.quotient_norm.value() <= cert.input_norm.value());
    }
    assert_eq!(lin.quotient, k);
    println!("  quotient equals the original cofactor, bit for bit");
    Ok(())
}
