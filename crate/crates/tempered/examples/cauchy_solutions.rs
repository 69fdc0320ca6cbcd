//! Formal fundamental solutions of p-adic differential systems.
//!
//! For a system d/dt T = T G the Taylor coefficients at a generic point
//! satisfy the Cauchy recursion T_{m} = (T_{m-1}' + T_{m-1} G) / m. Two
//! closed forms anchor the computation: G = c gives T_m = c^m / m!, and
//! G = 1/(1-t) gives T_m = 1 on the nose.

use num_rational::BigRational;
use tempered::ode::{self, DiffSystem};
use tempered::padic::{Prime, Scalar};
use tempered::series::{GrowthSeries, SeriesSpec};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(5)?;
    let spec = SeriesSpec::power(p, &["t"], 16)?;

    // constant coefficient: the exponential-type solution c^m / m!
    let c = ratio(3, 1);
    let constant = DiffSystem::new(vec![vec![GrowthSeries::constant(spec.clone(), c.clone())]])?;
    let sol = ode::cauchy_solve(&constant, 8)?;
    println!("G = 3, solution coefficients at the origin:");
    let mut expect = ratio(1, 1);
    for (m, step) in sol.origin.iter().enumerate() {
        if m > 0 {
            expect = expect * c.clone() / ratio(m as i64, 1);
        }
        assert_eq!(step.get(0, 0), &expect);
        println!("  T_{m}(0) = {}", step.get(0, 0));
    }

    // geometric coefficient: every Taylor matrix collapses to 1
    let geom = GrowthSeries::from_coeffs(
        spec.clone(),
        (0..=16).map(|i| (vec![i], ratio(1, 1))),
    )?;
    let system = DiffSystem::new(vec![vec![geom]])?;
    let sol = ode::cauchy_solve(&system, 8)?;
    println!("\nG = 1/(1-t):");
    for (m, step) in sol.generic.iter().enumerate() {
        println!("  |T_{m}|_Gauss = {}", step.gauss_norm().value());
        assert_eq!(sol.origin[m].get(0, 0), &ratio(1, 1));
    }

    // the generic-point re-expansion tau sends f(t) to f(t + w), exactly,
    // tracking both the remaining t-window and the w-degree
    let f = GrowthSeries::from_coeffs(
        spec,
        vec![(vec![0], ratio(1, 1)), (vec![2], ratio(1, 5)), (vec![4], ratio(2, 25))],
    )?;
    let expanded = ode::taylor_generic(&f, 3)?;
    println!("\ntau of a 3-term series through order 3:");
    for (idx, coeff) in expanded.support() {
        println!("  t^{} w^{}: {}", idx[0], idx[1], coeff);
    }
    Ok(())
}
