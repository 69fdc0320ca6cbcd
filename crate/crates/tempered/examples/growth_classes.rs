//! The catalogue of growth classes on the line and membership testing.
//!
//! Eight classes of one-variable series are distinguished by how fast their
//! coefficient norms may grow: Tate (norms -> 0), bounded, tempered
//! (polynomial growth against the weight family), open-disk, fast decay,
//! and their versions at infinity. Membership at a finite window is decided
//! exactly against a doubling ladder of truncations.

use num_rational::BigRational;
use tempered::opens;
use tempered::opens::GrowthClass;
use tempered::padic::{Prime, Scalar};
use tempered::series::{GrowthSeries, SeriesSpec, Window};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    println!("classes:");
    for entry in opens::catalog() {
        println!("  {:<24} {}", entry.name, entry.summary);
    }

    println!("\nspace inclusions:");
    for fact in opens::lattice_relations() {
        println!("  {} <= {}", fact.smaller.cli_name(), fact.larger.cli_name());
    }
    // reachability closes under transitivity: the open disk sits in the
    // tempered disk, which sits in the bounded disk
    assert!(opens::query(&GrowthClass::OpenDisk { exponent: 1 }, &GrowthClass::Bounded));
    assert!(!opens::query(&GrowthClass::Tate, &GrowthClass::Tempered));

    // the log-type series is tempered but not bounded
    let p = Prime::new(2)?;
    let spec = SeriesSpec::power(p, &["t"], 32)?;
    let log = GrowthSeries::from_coeffs(
        spec,
        (1..=32).map(|i| (vec![i], ratio(1, i))),
    )?;
    let tempered = opens::membership(&log, GrowthClass::Tempered, 6)?;
    let bounded = opens::membership(&log, GrowthClass::Bounded, 6)?;
    println!("\nlog-type series against two classes:");
    println!("{tempered}\n");
    println!("{bounded}");
    assert!(tempered.is_member());
    assert!(!bounded.is_member());

    // a Laurent series splits into its finite piece and its piece at
    // infinity; the two reports certify each side
    let lspec = SeriesSpec::new(
        p,
        vec!["t".into()],
        vec![Window::new(-8, 8)],
    )?;
    let f = GrowthSeries::from_coeffs(
        lspec.clone(),
        vec![
            (vec![-3], ratio(1, 4)),
            (vec![-1], ratio(1, 2)),
            (vec![0], ratio(1, 1)),
            (vec![2], ratio(8, 1)),
        ],
    )?;
    let split = opens::split_cover(&f, 6)?;
    println!("\nsplit of a Laurent series:");
    println!("  at infinity: {} terms, {}", split.inf.term_count(), split.inf_report.verdict);
    println!("  finite:      {} terms, {}", split.fast.term_count(), split.fast_report.verdict);
    assert_eq!(split.inf.add(&split.fast)?, f);

    // duality: pairing a series against a dual-class one obeys the
    // weight-split bound |<f, g>| <= |f|_n |g|_{-n}
    let g = GrowthSeries::from_coeffs(
        lspec,
        vec![(vec![0], ratio(1, 1)), (vec![2], ratio(1, 16))],
    )?;
    let pair = opens::pair_dual(&f, &g, 1)?;
    println!("\npairing value {} with |.| = {} <= bound {}", pair.value, pair.abs.value(), pair.bound.value());
    assert!(pair.abs.value() <= pair.bound.value());
    Ok(())
}
