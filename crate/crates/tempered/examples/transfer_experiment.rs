//! Transfer of log-growth between the generic point and the origin.
//!
//! Solving a system with bounded coefficient matrix at both a generic
//! point and the origin, the growth order of the origin solution should
//! not exceed the generic one. The experiment grades both solutions
//! against the weighted norm family and compares. A system with unbounded
//! solution norms (the exponential) does not satisfy the hypothesis, and
//! the verdict says so instead of classifying.

use num_rational::BigRational;
use tempered::ode::{self, DiffSystem, TransferVerdict};
use tempered::padic::{Prime, Scalar};
use tempered::series::{GrowthSeries, SeriesSpec};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn run_one(name: &str, sys: &DiffSystem, order: usize) -> tempered::Result<()> {
    println!("system {name}:");
    let rep = ode::transfer_experiment(sys, order, 4)?;
    println!("  verdict: {}", rep.verdict);
    if rep.verdict != TransferVerdict::HypothesisNotMet {
        println!("  generic {}", rep.generic);
        println!("  origin  {}", rep.origin);
    }
    println!();
    Ok(())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(3)?;
    let spec = SeriesSpec::power(p, &["t"], 24)?;

    // zero system: constants, order 0 on both sides
    let zero = DiffSystem::new(vec![vec![GrowthSeries::zero(spec.clone())]])?;
    run_one("G = 0", &zero, 12)?;

    // geometric system: solution 1/(1-t), still order 0
    let geom = GrowthSeries::from_coeffs(
        spec.clone(),
        (0..=24).map(|i| (vec![i], ratio(1, 1))),
    )?;
    run_one("G = 1/(1-t)", &DiffSystem::new(vec![vec![geom]])?, 12)?;

    // 2x2 nilpotent log system: d/dt (1, log) frame, growth order 1
    let geom2 = GrowthSeries::from_coeffs(
        spec.clone(),
        (0..=24).map(|i| (vec![i], ratio(1, 1))),
    )?;
    let log_sys = DiffSystem::new(vec![
        vec![GrowthSeries::zero(spec.clone()), geom2],
        vec![GrowthSeries::zero(spec.clone()), GrowthSeries::zero(spec.clone())],
    ])?;
    run_one("nilpotent log system", &log_sys, 12)?;

    // the exponential: |T_m| = |1/m!| blows up, the hypothesis fails
    let one = DiffSystem::new(vec![vec![GrowthSeries::constant(spec, ratio(1, 1))]])?;
    run_one("G = 1 (exponential)", &one, 12)?;
    Ok(())
}
