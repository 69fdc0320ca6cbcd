//! Reducing relation vectors on a tempered tube.
//!
//! A tube presentation lifts each tube variable y_i to a series f_i in the
//! ambient variables; the relations b_i = y_i - f_i cut out the tube. A
//! vector H pairs to psi(H) = sum H_i b_i, and two vectors with the same
//! pairing differ by a Koszul image. The reduction rewrites H, one residue
//! solve per y-monomial, into a representative D that lives in the weighted
//! unit ball after p-power scaling, and certifies every norm it claims.

use num_rational::BigRational;
use tempered::padic::{Prime, Scalar};
use tempered::series::{GrowthSeries, SeriesSpec};
use tempered::tube::{self, KoszulVector, TubePresentation};

fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(n.into(), d.into())
}

fn main() -> tempered::Result<()> {
    let p = Prime::new(5)?;
    let trunc = 6;

    // coordinate tube: y1, y2 lift to x1, x2
    let ambient = SeriesSpec::power(p, &["x1", "x2"], trunc)?;
    let lifts = vec![
        GrowthSeries::var(ambient.clone(), "x1")?,
        GrowthSeries::var(ambient.clone(), "x2")?,
    ];
    let pres = TubePresentation::new(p, &["x1", "x2"], &["y1", "y2"], lifts, trunc)?;
    let joint = pres.joint_spec().clone();

    // the anti-symmetry relation: phi followed by psi vanishes identically
    let g = GrowthSeries::from_coeffs(
        joint.clone(),
        vec![(vec![1, 0, 0, 0], ratio(1, 1)), (vec![0, 0, 1, 1], ratio(2, 5))],
    )?;
    let image = tube::koszul_phi(&[g], &pres)?;
    assert!(tube::psi_apply(&image, &pres)?.is_zero());
    println!("psi(phi(g)) = 0, exactly");

    // a bounded vector plus Koszul noise
    let bounded = KoszulVector::new(vec![
        GrowthSeries::from_coeffs(
            joint.clone(),
            vec![(vec![0, 0, 0, 0], ratio(1, 1)), (vec![1, 0, 1, 0], ratio(1, 1))],
        )?,
        GrowthSeries::from_coeffs(joint.clone(), vec![(vec![0, 1, 0, 0], ratio(2, 1))])?,
    ])?;
    let h = bounded.add(&image.scale(&ratio(1, 5)))?;

    let n = 1;
    println!("|H|_{n} = {}", pres.vector_norm(&h, n)?.value());
    let (d, cert) = tube::koszul_reduce(&h, &pres, n)?;
    println!("{cert}");
    assert!(cert.is_clean());
    // same pairing, now inside the unit ball after scaling
    assert_eq!(tube::psi_apply(&d, &pres)?, tube::psi_apply(&h, &pres)?);
    println!("|D|_{n} = {}", pres.vector_norm(&d, n)?.value());

    // a pure Koszul image with a p-denominator reduces all the way to zero
    let noise = tube::koszul_phi(
        &[GrowthSeries::constant(joint.clone(), ratio(1, 5))],
        &pres,
    )?;
    let (zero, _) = tube::koszul_reduce(&noise, &pres, n)?;
    assert!(zero.components().iter().all(GrowthSeries::is_zero));
    println!("phi(1/5) reduces to the zero vector");

    // normal form: replace each y-power by its lift, here y1^2 y2 -> x1^2 x2
    let monomial = GrowthSeries::from_coeffs(joint, vec![(vec![0, 0, 2, 1], ratio(1, 1))])?;
    let nf = tube::tube_normal_form(&monomial, &pres)?;
    for (idx, c) in nf.support() {
        println!("normal form term: {:?} -> {}", idx, c);
    }
    Ok(())
}
