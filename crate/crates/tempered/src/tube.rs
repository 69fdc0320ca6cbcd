//! Tube presentations and the Koszul correction engine.
//!
//! A tube is described by integral lifts `f~_1, .., f~_s` living in the
//! ambient coordinates; each tube variable `y_i` carries the relation
//! `b_i = y_i - f~_i`. The engine rewrites tuples against these relations:
//! [`psi_apply`] pairs a tuple with the relations, [`koszul_phi`] produces
//! kernel tuples, and [`koszul_reduce`] drives the weighted norm of a tuple
//! down by kernel corrections, returning a certificate with the full
//! correction ledger. [`tube_normal_form`] eliminates the tube variables,
//! [`change_presentation`] transports coefficient families between
//! presentations with a growth certificate, and [`weak_fibration_data`]
//! extends a presentation by fresh fibration coordinates.
//!
//! All arithmetic is exact; every series is truncated to the presentation
//! window and the sweeps only ever move mass toward lexicographically larger
//! tube exponents, so the algorithms terminate unconditionally.

use crate::error::{Error, Result};
use crate::linalg::solve_mod_p;
use crate::padic::{abs_value, p_pow, NormValue, Prime, Scalar};
use crate::series::{index_weight, pow_scalar, GrowthSeries, SeriesSpec, Window};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A tube inside a polydisk, presented by one integral lift per tube
/// variable. The joint coordinate ring uses the ambient variables first and
/// the tube variables after them; every variable shares one power window.
#[derive(Clone, Debug, PartialEq)]
pub struct TubePresentation {
    ambient: SeriesSpec,
    joint: SeriesSpec,
    lifts: Vec<GrowthSeries>,
}

impl TubePresentation {
    /// Builds a presentation from variable names and lifts. Each lift must be
    /// a series in the ambient variables with sup norm at most 1; wider
    /// windows are truncated to `trunc`, narrower ones are rejected.
    pub fn new(
        prime: Prime,
        ambient_vars: &[&str],
        tube_vars: &[&str],
        lifts: Vec<GrowthSeries>,
        trunc: i64,
    ) -> Result<TubePresentation> {
        let a: Vec<String> = ambient_vars.iter().map(|s| s.to_string()).collect();
        let t: Vec<String> = tube_vars.iter().map(|s| s.to_string()).collect();
        TubePresentation::from_names(prime, a, t, lifts, trunc)
    }

    /// Same as [`TubePresentation::new`] with owned variable names.
    pub fn from_names(
        prime: Prime,
        ambient_vars: Vec<String>,
        tube_vars: Vec<String>,
        lifts: Vec<GrowthSeries>,
        trunc: i64,
    ) -> Result<TubePresentation> {
        if trunc < 0 {
            return Err(Error::SpecMismatch("truncation order must be nonnegative".into()));
        }
        if tube_vars.is_empty() {
            return Err(Error::SpecMismatch("a tube needs at least one tube variable".into()));
        }
        if lifts.len() != tube_vars.len() {
            return Err(Error::SpecMismatch(format!(
                "{} tube variables but {} lifts",
                tube_vars.len(),
                lifts.len()
            )));
        }
        let ambient = SeriesSpec::new(
            prime,
            ambient_vars.clone(),
            vec![Window::power(trunc); ambient_vars.len()],
        )?;
        let mut joint_vars = ambient_vars;
        joint_vars.extend(tube_vars);
        let n_joint = joint_vars.len();
        let joint = SeriesSpec::new(prime, joint_vars, vec![Window::power(trunc); n_joint])?;
        let mut stored = Vec::with_capacity(lifts.len());
        for (i, lift) in lifts.into_iter().enumerate() {
            let lift = lift.embed_into(&ambient)?;
            let norm = lift.gauss_norm();
            if norm.value() > &BigRational::one() {
                return Err(Error::RelationNorm(format!(
                    "lift {} has sup norm {}",
                    i + 1,
                    norm.value()
                )));
            }
            stored.push(lift);
        }
        Ok(TubePresentation { ambient, joint, lifts: stored })
    }

    pub fn prime(&self) -> Prime {
        self.joint.prime()
    }

    /// Shared truncation order of every window.
    pub fn trunc(&self) -> i64 {
        self.joint.windows()[0].hi
    }

    /// Number of ambient variables.
    pub fn ambient_dim(&self) -> usize {
        self.ambient.arity()
    }

    /// Number of tube variables (the length of the relation sequence).
    pub fn tube_dim(&self) -> usize {
        self.lifts.len()
    }

    pub fn ambient_spec(&self) -> &SeriesSpec {
        &self.ambient
    }

    pub fn joint_spec(&self) -> &SeriesSpec {
        &self.joint
    }

    pub fn ambient_vars(&self) -> &[String] {
        &self.joint.vars()[..self.ambient_dim()]
    }

    pub fn tube_vars(&self) -> &[String] {
        &self.joint.vars()[self.ambient_dim()..]
    }

    /// The i-th lift as a series in the ambient variables.
    pub fn lift(&self, i: usize) -> &GrowthSeries {
        &self.lifts[i]
    }

    /// The i-th lift embedded into the joint coordinate ring.
    pub fn lift_joint(&self, i: usize) -> GrowthSeries {
        self.lifts[i].embed_into(&self.joint).expect("ambient embeds into joint")
    }

    /// The i-th relation `y_i - f~_i` in the joint coordinate ring.
    pub fn relation(&self, i: usize) -> GrowthSeries {
        let y = GrowthSeries::var(self.joint.clone(), &self.tube_vars()[i].clone())
            .expect("tube variable exists");
        y.sub(&self.lift_joint(i)).expect("shared spec")
    }

    /// Per-variable weights of the tube norm of weight `n`: ambient
    /// variables weigh nothing, tube variables weigh `n`.
    pub fn tube_weights(&self, n: i64) -> Vec<i64> {
        let mut w = vec![0; self.ambient_dim()];
        w.extend(vec![n; self.tube_dim()]);
        w
    }

    /// Weighted sup norm of a joint series: ambient exponents are ignored,
    /// tube exponents `j` contribute `(j+1)^(-n)` per variable.
    pub fn tube_norm(&self, f: &GrowthSeries, n: i64) -> Result<NormValue> {
        if f.spec() != &self.joint {
            return Err(Error::SpecMismatch(
                "series does not live in the joint coordinate ring".into(),
            ));
        }
        Ok(f.norm_weighted_per_var(&self.tube_weights(n)))
    }

    /// Maximum of the tube norms of the components of a tuple.
    pub fn vector_norm(&self, h: &KoszulVector, n: i64) -> Result<NormValue> {
        let mut best = NormValue::zero();
        for c in h.components() {
            best = best.max(self.tube_norm(c, n)?);
        }
        Ok(best)
    }
}

/// A tuple of joint series, one per tube variable (or one per variable pair
/// when used as a kernel certificate). All components share one spec.
#[derive(Clone, Debug, PartialEq)]
pub struct KoszulVector {
    components: Vec<GrowthSeries>,
}

impl KoszulVector {
    pub fn new(components: Vec<GrowthSeries>) -> Result<KoszulVector> {
        let Some(first) = components.first() else {
            return Err(Error::SpecMismatch("a tuple needs at least one component".into()));
        };
        let spec = first.spec().clone();
        for c in &components {
            if c.spec() != &spec {
                return Err(Error::SpecMismatch("tuple components disagree on their spec".into()));
            }
        }
        Ok(KoszulVector { components })
    }

    /// The zero tuple with one component per tube variable.
    pub fn zero(pres: &TubePresentation) -> KoszulVector {
        let z = GrowthSeries::constant(pres.joint_spec().clone(), Scalar::zero());
        KoszulVector { components: vec![z; pres.tube_dim()] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &GrowthSeries {
        &self.components[i]
    }

    pub fn components(&self) -> &[GrowthSeries] {
        &self.components
    }

    pub fn add(&self, rhs: &KoszulVector) -> Result<KoszulVector> {
        if self.len() != rhs.len() {
            return Err(Error::SpecMismatch(format!(
                "tuple lengths {} and {} disagree",
                self.len(),
                rhs.len()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&rhs.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(KoszulVector { components })
    }

    pub fn scale(&self, c: &Scalar) -> KoszulVector {
        KoszulVector { components: self.components.iter().map(|f| f.scale(c)).collect() }
    }
}

/// Pairs a tuple with the relation sequence: `sum_i (y_i - f~_i) H_i`.
pub fn psi_apply(h: &KoszulVector, pres: &TubePresentation) -> Result<GrowthSeries> {
    if h.len() != pres.tube_dim() {
        return Err(Error::SpecMismatch(format!(
            "pairing takes {} components, got {}",
            pres.tube_dim(),
            h.len()
        )));
    }
    let mut acc = GrowthSeries::constant(pres.joint_spec().clone(), Scalar::zero());
    for i in 0..h.len() {
        if h.component(i).spec() != pres.joint_spec() {
            return Err(Error::SpecMismatch(
                "tuple component does not live in the joint coordinate ring".into(),
            ));
        }
        acc = acc.add(&pres.relation(i).mul(h.component(i))?)?;
    }
    Ok(acc)
}

/// Ordered variable pairs `(u, v)` with `u < v`, indexing the components a
/// kernel certificate carries for `s` tube variables.
pub fn koszul_pairs(s: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(s * (s.saturating_sub(1)) / 2);
    for u in 0..s {
        for v in u + 1..s {
            pairs.push((u, v));
        }
    }
    pairs
}

/// The kernel map: a component per pair `(u, v)` maps to the tuple whose
/// i-th entry is `sum_{u<i} b_u V_(u,i) - sum_{v>i} b_v V_(i,v)`. Its image
/// pairs to zero under [`psi_apply`], exactly, window and all.
pub fn koszul_phi(v: &[GrowthSeries], pres: &TubePresentation) -> Result<KoszulVector> {
    let s = pres.tube_dim();
    let pairs = koszul_pairs(s);
    if v.len() != pairs.len() {
        return Err(Error::SpecMismatch(format!(
            "kernel map takes {} components for {} tube variables, got {}",
            pairs.len(),
            s,
            v.len()
        )));
    }
    for c in v {
        if c.spec() != pres.joint_spec() {
            return Err(Error::SpecMismatch(
                "kernel component does not live in the joint coordinate ring".into(),
            ));
        }
    }
    let zero = GrowthSeries::constant(pres.joint_spec().clone(), Scalar::zero());
    let mut out = vec![zero; s];
    for (t, &(u, w)) in pairs.iter().enumerate() {
        let term = pres.relation(u).mul(&v[t])?;
        out[w] = out[w].add(&term)?;
        let term = pres.relation(w).mul(&v[t])?;
        out[u] = out[u].sub(&term)?;
    }
    KoszulVector::new(out)
}

/// Everything [`koszul_reduce`] did and certified. `corrections` lists, per
/// tube exponent, the sup norm of the kernel correction applied there;
/// `obstructions` lists exponents whose residue solve had no solution, with
/// the level the coefficient is stuck at. An empty obstruction list means
/// the output reached the weighted unit ball after scaling; a nonempty one
/// is a defect report (the relation sequence is not regular, or the input
/// norm is genuinely forced above 1). `residual_zero` records the check
/// that the output pairs to the same series as the input; the reduction
/// fails loudly instead of ever returning `false` here.
#[derive(Clone, Debug)]
pub struct ReductionCertificate {
    pub weight: i64,
    pub scale: Scalar,
    pub input_norm: NormValue,
    pub psi_norm: NormValue,
    pub output_norm: NormValue,
    pub corrections: Vec<(Vec<i64>, NormValue)>,
    pub obstructions: Vec<(Vec<i64>, NormValue)>,
    pub residual_zero: bool,
}

impl ReductionCertificate {
    /// True when the sweep met no obstruction, i.e. the scaled output is in
    /// the weighted unit ball.
    pub fn is_clean(&self) -> bool {
        self.obstructions.is_empty()
    }
}

impl fmt::Display for ReductionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "weight: {}", self.weight)?;
        writeln!(f, "scale: {}", self.scale)?;
        writeln!(
            f,
            "input norm: {} ; pairing norm: {} ; output norm: {}",
            self.input_norm.value(),
            self.psi_norm.value(),
            self.output_norm.value()
        )?;
        writeln!(f, "residual zero: {}", self.residual_zero)?;
        writeln!(f, "corrections: {}", self.corrections.len())?;
        for (idx, level) in &self.corrections {
            writeln!(f, "  index {:?} level {}", idx, level.value())?;
        }
        if self.obstructions.is_empty() {
            write!(f, "obstructions: none")?;
        } else {
            write!(f, "obstructions: {}", self.obstructions.len())?;
            for (idx, level) in &self.obstructions {
                write!(f, "\n  index {:?} stuck at {}", idx, level.value())?;
            }
        }
        Ok(())
    }
}

/// Drives the weight-`n` norm of a tuple down by kernel corrections.
///
/// The input is scaled by a power of `p` so that its pairing image lands in
/// the weighted unit ball; the sweep then walks tube exponents in ascending
/// lexicographic order and, at each exponent whose coefficient exceeds its
/// weight bound, solves for a kernel correction in the residue ring and
/// subtracts it. Corrections only move mass to larger exponents, so one
/// pass suffices. The returned tuple pairs to exactly the same series as
/// the input (checked), and when the certificate is clean its scaled norm
/// is at most 1. Exponents whose residue solve is infeasible are left at
/// their forced level and recorded as obstructions.
pub fn koszul_reduce(
    h: &KoszulVector,
    pres: &TubePresentation,
    n: i64,
) -> Result<(KoszulVector, ReductionCertificate)> {
    let s = pres.tube_dim();
    if h.len() != s {
        return Err(Error::SpecMismatch(format!(
            "reduction takes {} components, got {}",
            s,
            h.len()
        )));
    }
    if n < 0 {
        return Err(Error::ClassMismatch("weights are nonnegative".into()));
    }
    let p = pres.prime();
    let input_norm = pres.vector_norm(h, n)?;
    let psi = psi_apply(h, pres)?;
    let psi_norm = pres.tube_norm(&psi, n)?;

    // Smallest e >= 0 with psi_norm <= p^e; scaling by p^-e puts the pairing
    // image inside the weighted unit ball.
    let p_big = BigRational::from_integer(p.to_bigint());
    let mut e = 0i64;
    {
        let mut v = psi_norm.value().clone();
        while v > BigRational::one() {
            v /= &p_big;
            e += 1;
        }
    }
    let p_scalar = Scalar::from_integer(p.to_bigint());
    let scale = pow_scalar(&p_scalar, -e);
    let mut cur: Vec<GrowthSeries> = h.components().iter().map(|c| c.scale(&scale)).collect();

    let m = pres.ambient_dim();
    let trunc = pres.trunc();
    let pairs = koszul_pairs(s);
    let xbox = box_indices(m, trunc);
    let xpos: BTreeMap<Vec<i64>, usize> =
        xbox.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let block = xbox.len();

    let mut corrections = Vec::new();
    let mut obstructions = Vec::new();

    for j in box_indices(s, trunc) {
        let base = j.iter().fold(BigRational::one(), |acc, &jl| {
            acc * BigRational::from_integer(BigInt::from(jl + 1))
        });
        let bound = pow_rational(&base, n);
        loop {
            let slices: Vec<BTreeMap<Vec<i64>, Scalar>> =
                cur.iter().map(|c| tube_slice(c, m, &j)).collect();
            let level = slices.iter().map(|sl| slice_gauss(sl, p)).fold(NormValue::zero(), NormValue::max);
            if level.value() <= &bound {
                break;
            }
            let k = p_level(&level, p);
            let level_norm = NormValue::new(p_pow(p, k));
            let lift_up = pow_scalar(&p_scalar, k);

            // Residue system: unknowns are (pair, ambient exponent), equations
            // are (component, ambient exponent); products are truncated to the
            // ambient box exactly like windowed series multiplication.
            let rows = s * block;
            let cols = pairs.len() * block;
            let mut mat = vec![vec![0u64; cols]; rows];
            let mut rhs = vec![0u64; rows];
            for (i, slice) in slices.iter().enumerate() {
                for (alpha, c) in slice {
                    let lifted = c * &lift_up;
                    let r = scalar_mod_p(&lifted, p.get());
                    rhs[i * block + xpos[alpha]] = (p.get() - r) % p.get();
                }
            }
            for (t, &(u, w)) in pairs.iter().enumerate() {
                for (bcol, beta) in xbox.iter().enumerate() {
                    let col = t * block + bcol;
                    for (alpha, c) in pres.lift(u).support() {
                        let Some(row) = shifted_row(alpha, beta, trunc, &xpos) else { continue };
                        let r = scalar_mod_p(c, p.get());
                        let cell = &mut mat[w * block + row][col];
                        *cell = (*cell + p.get() - r) % p.get();
                    }
                    for (alpha, c) in pres.lift(w).support() {
                        let Some(row) = shifted_row(alpha, beta, trunc, &xpos) else { continue };
                        let r = scalar_mod_p(c, p.get());
                        let cell = &mut mat[u * block + row][col];
                        *cell = (*cell + r) % p.get();
                    }
                }
            }
            let Some(sol) = solve_mod_p(&mat, &rhs, p.get()) else {
                obstructions.push((j.clone(), level_norm));
                break;
            };

            // Balanced lift of the solution at level p^-k, then one kernel
            // correction concentrated at this tube exponent.
            let tiny = pow_scalar(&p_scalar, -k);
            let mut kernel = Vec::with_capacity(pairs.len());
            for t in 0..pairs.len() {
                let mut coeffs = Vec::new();
                for (bcol, beta) in xbox.iter().enumerate() {
                    let c = sol[t * block + bcol];
                    if c == 0 {
                        continue;
                    }
                    let balanced = if 2 * c > p.get() {
                        BigInt::from(c) - p.to_bigint()
                    } else {
                        BigInt::from(c)
                    };
                    let mut idx = beta.clone();
                    idx.extend_from_slice(&j);
                    coeffs.push((idx, Scalar::from_integer(balanced) * &tiny));
                }
                kernel.push(GrowthSeries::from_coeffs(pres.joint_spec().clone(), coeffs)?);
            }
            let correction = koszul_phi(&kernel, pres)?;
            for (c, delta) in cur.iter_mut().zip(correction.components()) {
                *c = c.add(delta)?;
            }
            corrections.push((j.clone(), level_norm));

            let after = cur
                .iter()
                .map(|c| slice_gauss(&tube_slice(c, m, &j), p))
                .fold(NormValue::zero(), NormValue::max);
            if after.value() > &p_pow(p, k - 1) {
                return Err(Error::ReductionStalled(format!(
                    "index {:?} kept level {}",
                    j,
                    after.value()
                )));
            }
        }
    }

    let reduced = KoszulVector::new(cur)?;
    let residual = psi_apply(&reduced, pres)?.sub(&psi.scale(&scale))?;
    if residual.term_count() != 0 {
        return Err(Error::CertificateViolation(
            "reduction changed the pairing image".into(),
        ));
    }
    let unscale = pow_scalar(&p_scalar, e);
    let out = reduced.scale(&unscale);
    let output_norm = pres.vector_norm(&out, n)?;

    // Corrections never grow the scaled norm, so the output is bounded by
    // the input norm or, on a clean sweep, by the scale ceiling.
    let ceiling = NormValue::new(p_pow(p, e)).max(NormValue::one()).max(input_norm.clone());
    if output_norm.value() > ceiling.value() {
        return Err(Error::CertificateViolation(format!(
            "reduced norm {} exceeds its bound {}",
            output_norm.value(),
            ceiling.value()
        )));
    }

    let cert = ReductionCertificate {
        weight: n,
        scale,
        input_norm,
        psi_norm,
        output_norm,
        corrections,
        obstructions,
        residual_zero: true,
    };
    Ok((out, cert))
}

/// Eliminates the tube variables by substituting each lift for its
/// variable. The result lives in the ambient coordinate ring. Two inputs
/// that differ by a multiple of a relation map to the same output as far
/// as the window can see, and on inputs whose tube degrees jointly fit in
/// the window the map is a ring morphism.
pub fn tube_normal_form(g: &GrowthSeries, pres: &TubePresentation) -> Result<GrowthSeries> {
    let mut acc = g.embed_into(pres.joint_spec())?;
    for i in 0..pres.tube_dim() {
        let var = pres.tube_vars()[i].clone();
        acc = acc.substitute(&var, pres.lift(i))?;
    }
    acc.embed_into(pres.ambient_spec())
}

/// Writes `g = sum_i (y_i - f~_i) c_i + r` with `r` free of tube variables,
/// by synthetic division against one relation at a time. The identity holds
/// exactly on the window, and `r` equals [`tube_normal_form`] of `g`.
pub fn cofactor_decompose(
    g: &GrowthSeries,
    pres: &TubePresentation,
) -> Result<(KoszulVector, GrowthSeries)> {
    let s = pres.tube_dim();
    let joint = pres.joint_spec();
    let mut rest = g.embed_into(joint)?;
    let zero = GrowthSeries::constant(joint.clone(), Scalar::zero());
    let mut cofactors = vec![zero; s];
    for i in (0..s).rev() {
        let var = pres.tube_vars()[i].clone();
        let pos = pres.ambient_dim() + i;
        let lift = pres.lift_joint(i);
        let y = GrowthSeries::var(joint.clone(), &var)?;
        let degree = rest.support().map(|(idx, _)| idx[pos]).max().unwrap_or(0);

        let mut lift_pow = vec![GrowthSeries::constant(joint.clone(), Scalar::one())];
        let mut y_pow = vec![GrowthSeries::constant(joint.clone(), Scalar::one())];
        for d in 0..degree {
            lift_pow.push(lift_pow[d as usize].mul(&lift)?);
            y_pow.push(y_pow[d as usize].mul(&y)?);
        }

        let mut quotient = GrowthSeries::constant(joint.clone(), Scalar::zero());
        let mut remainder = GrowthSeries::constant(joint.clone(), Scalar::zero());
        for (d, slice) in var_slices(&rest, pos, degree) {
            remainder = remainder.add(&slice.mul(&lift_pow[d])?)?;
            for a in 0..d {
                let part = slice.mul(&y_pow[a])?.mul(&lift_pow[d - 1 - a])?;
                quotient = quotient.add(&part)?;
            }
        }
        cofactors[i] = quotient;
        rest = remainder;
    }
    let vector = KoszulVector::new(cofactors)?;
    // every tube exponent of the remainder is zero; project the indices
    let m = pres.ambient_dim();
    let coeffs: Vec<(Vec<i64>, Scalar)> = rest
        .support()
        .map(|(idx, c)| {
            debug_assert!(idx[m..].iter().all(|&j| j == 0));
            (idx[..m].to_vec(), c.clone())
        })
        .collect();
    let normal = GrowthSeries::from_coeffs(pres.ambient_spec().clone(), coeffs)?;
    Ok((vector, normal))
}

/// A formal family of coefficients indexed by monomials in the generators
/// of a presentation: the datum `a_J` attached to `f~^J`. Families are
/// exact and windowless; only the weighted sup norms interact with tubes.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFamily {
    prime: Prime,
    arity: usize,
    coeffs: BTreeMap<Vec<i64>, Scalar>,
}

impl CoefficientFamily {
    pub fn new<I>(prime: Prime, arity: usize, items: I) -> Result<CoefficientFamily>
    where
        I: IntoIterator<Item = (Vec<i64>, Scalar)>,
    {
        if arity == 0 {
            return Err(Error::SpecMismatch("a family needs at least one generator".into()));
        }
        let mut coeffs: BTreeMap<Vec<i64>, Scalar> = BTreeMap::new();
        for (idx, c) in items {
            if idx.len() != arity {
                return Err(Error::SpecMismatch(format!(
                    "index {:?} does not have {} entries",
                    idx, arity
                )));
            }
            if idx.iter().any(|&j| j < 0) {
                return Err(Error::SpecMismatch(format!("index {:?} has negative entries", idx)));
            }
            let entry = coeffs.entry(idx).or_insert_with(Scalar::zero);
            *entry += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(CoefficientFamily { prime, arity, coeffs })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeff(&self, idx: &[i64]) -> Scalar {
        self.coeffs.get(idx).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Vec<i64>, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Weighted sup norm `sup |a_J| prod (j+1)^(-n)`.
    pub fn norm_weighted(&self, n: i64) -> NormValue {
        let mut best = NormValue::zero();
        for (idx, c) in &self.coeffs {
            let mut w = abs_value(c, self.prime).value().clone();
            for &j in idx {
                w *= index_weight(j, n);
            }
            best = best.max(NormValue::new(w));
        }
        best
    }
}

/// An affine relation `f~_i = sum_j h_ij g~_j + alpha_i` expressing the
/// generators of one presentation in those of another. The matrix `h` must
/// have sup norm exactly 1 and every offset must be strictly small.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorRelation {
    h: Vec<Vec<Scalar>>,
    alpha: Vec<Scalar>,
}

impl GeneratorRelation {
    pub fn new(h: Vec<Vec<Scalar>>, alpha: Vec<Scalar>) -> Result<GeneratorRelation> {
        let s = h.len();
        if s == 0 {
            return Err(Error::SpecMismatch("relation matrix has no rows".into()));
        }
        let l = h[0].len();
        if l == 0 {
            return Err(Error::SpecMismatch("relation matrix has no columns".into()));
        }
        if h.iter().any(|row| row.len() != l) {
            return Err(Error::SpecMismatch("relation matrix is ragged".into()));
        }
        if alpha.len() != s {
            return Err(Error::SpecMismatch(format!(
                "{} offsets for {} generators",
                alpha.len(),
                s
            )));
        }
        Ok(GeneratorRelation { h, alpha })
    }

    /// Number of source generators (rows).
    pub fn source_dim(&self) -> usize {
        self.h.len()
    }

    /// Number of target generators (columns).
    pub fn target_dim(&self) -> usize {
        self.h[0].len()
    }

    pub fn coefficient(&self, i: usize, j: usize) -> &Scalar {
        &self.h[i][j]
    }

    pub fn offset(&self, i: usize) -> &Scalar {
        &self.alpha[i]
    }

    fn validate(&self, p: Prime) -> Result<()> {
        let mut sup = NormValue::zero();
        for row in &self.h {
            for c in row {
                sup = sup.max(abs_value(c, p));
            }
        }
        if sup != NormValue::one() {
            return Err(Error::RelationNorm(format!(
                "matrix sup norm is {}, needs to be 1",
                sup.value()
            )));
        }
        for (i, a) in self.alpha.iter().enumerate() {
            if abs_value(a, p).value() >= &BigRational::one() {
                return Err(Error::RelationNorm(format!(
                    "offset {} has absolute value {}",
                    i + 1,
                    abs_value(a, p).value()
                )));
            }
        }
        Ok(())
    }

    /// Largest offset absolute value.
    fn offset_norm(&self, p: Prime) -> NormValue {
        self.alpha.iter().map(|a| abs_value(a, p)).fold(NormValue::zero(), NormValue::max)
    }
}

/// The growth certificate of a presentation change: the input family is
/// bounded at `input_weight`, the output at `output_weight`, and the output
/// sup is certified against the computable bound.
#[derive(Clone, Debug)]
pub struct ChangeCertificate {
    pub input_weight: i64,
    pub output_weight: i64,
    pub input_sup: NormValue,
    pub output_sup: NormValue,
    pub bound: NormValue,
}

impl fmt::Display for ChangeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "weight {} -> {} ; sup {} -> {} ; bound {}",
            self.input_weight,
            self.output_weight,
            self.input_sup.value(),
            self.output_sup.value(),
            self.bound.value()
        )
    }
}

type IndexPoly = BTreeMap<Vec<i64>, Scalar>;

fn poly_mul(a: &IndexPoly, b: &IndexPoly) -> IndexPoly {
    let mut out: IndexPoly = BTreeMap::new();
    for (ia, ca) in a {
        for (ib, cb) in b {
            let idx: Vec<i64> = ia.iter().zip(ib).map(|(x, y)| x + y).collect();
            let entry = out.entry(idx).or_insert_with(Scalar::zero);
            *entry += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_pow(base: &IndexPoly, mut e: i64, arity: usize) -> IndexPoly {
    let mut out: IndexPoly = BTreeMap::new();
    out.insert(vec![0; arity], Scalar::one());
    let mut sq = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            out = poly_mul(&out, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = poly_mul(&sq, &sq);
        }
    }
    out
}

/// Rewrites a coefficient family indexed by monomials in `s` generators as
/// a family indexed by monomials in `l` target generators, through an
/// affine relation between the generator systems. A family bounded at
/// weight `n` comes out bounded at weight `n*s*l`, and the certificate
/// carries the explicit sup bound that proves it.
pub fn change_presentation(
    family: &CoefficientFamily,
    rel: &GeneratorRelation,
    n: i64,
) -> Result<(CoefficientFamily, ChangeCertificate)> {
    if n < 0 {
        return Err(Error::ClassMismatch("weights are nonnegative".into()));
    }
    if family.arity() != rel.source_dim() {
        return Err(Error::SpecMismatch(format!(
            "family indexes {} generators but the relation has {} rows",
            family.arity(),
            rel.source_dim()
        )));
    }
    let p = family.prime();
    rel.validate(p)?;
    let s = rel.source_dim();
    let l = rel.target_dim();

    // Per source generator, its expansion in the target monomials.
    let mut bases: Vec<IndexPoly> = Vec::with_capacity(s);
    for i in 0..s {
        let mut base: IndexPoly = BTreeMap::new();
        for j in 0..l {
            let c = rel.coefficient(i, j);
            if !c.is_zero() {
                let mut idx = vec![0i64; l];
                idx[j] = 1;
                base.insert(idx, c.clone());
            }
        }
        let a = rel.offset(i);
        if !a.is_zero() {
            base.insert(vec![0; l], a.clone());
        }
        bases.push(base);
    }

    let mut out: IndexPoly = BTreeMap::new();
    for (idx, c) in family.support() {
        let mut term: IndexPoly = BTreeMap::new();
        term.insert(vec![0; l], c.clone());
        for (i, &e) in idx.iter().enumerate() {
            if e > 0 {
                term = poly_mul(&term, &poly_pow(&bases[i], e, l));
            }
        }
        for (jdx, v) in term {
            let entry = out.entry(jdx).or_insert_with(Scalar::zero);
            *entry += v;
        }
    }
    out.retain(|_, c| !c.is_zero());
    let result = CoefficientFamily { prime: p, arity: l, coeffs: out };

    let input_sup = family.norm_weighted(n);
    let out_weight = n * (s as i64) * (l as i64);
    let output_sup = result.norm_weighted(out_weight);
    let bound = change_bound(&input_sup, &rel.offset_norm(p), out_weight, l);
    if output_sup.value() > bound.value() {
        return Err(Error::CertificateViolation(format!(
            "rewritten sup {} exceeds its bound {}",
            output_sup.value(),
            bound.value()
        )));
    }
    let cert = ChangeCertificate {
        input_weight: n,
        output_weight: out_weight,
        input_sup,
        output_sup,
        bound,
    };
    Ok((result, cert))
}

/// The certified sup bound `S * l^e * max_k (k+1)^e A^k` where `S` is the
/// input sup, `A < 1` the largest offset, and `e` the output weight. The
/// maximum is found by an exact ratio scan; the sequence rises while
/// `((k+2)/(k+1))^e * A > 1` and falls forever after.
fn change_bound(input_sup: &NormValue, offset: &NormValue, e: i64, l: usize) -> NormValue {
    let s = input_sup.value().clone();
    if e == 0 || offset.is_zero() {
        return NormValue::new(s);
    }
    let a = offset.value().clone();
    let l_pow = pow_rational(&BigRational::from_integer(BigInt::from(l as u64)), e);
    let mut best = BigRational::one();
    let mut cur = BigRational::one();
    let mut k: i64 = 0;
    loop {
        let step = pow_rational(
            &BigRational::new(BigInt::from(k + 2), BigInt::from(k + 1)),
            e,
        ) * &a;
        let next = &cur * &step;
        if next <= cur {
            break;
        }
        if next > best {
            best = next.clone();
        }
        cur = next;
        k += 1;
    }
    NormValue::new(s * l_pow * best)
}

/// Extends a presentation by `d` fibration coordinates: `d` fresh ambient
/// variables and `d` fresh tube variables whose lifts are exactly those
/// coordinates. The zero section identifies the old tube with the new one.
pub fn weak_fibration_data(pres: &TubePresentation, d: i64) -> Result<TubePresentation> {
    if d < 0 {
        return Err(Error::SpecMismatch("fibration dimension must be nonnegative".into()));
    }
    if d == 0 {
        return Ok(pres.clone());
    }
    let mut taken: Vec<String> = pres.joint_spec().vars().to_vec();
    let mut new_ambient = Vec::with_capacity(d as usize);
    let mut new_tube = Vec::with_capacity(d as usize);
    for _ in 0..d {
        new_ambient.push(fresh_name("t", &mut taken));
    }
    for _ in 0..d {
        new_tube.push(fresh_name("u", &mut taken));
    }

    let mut ambient_vars = pres.ambient_vars().to_vec();
    ambient_vars.extend(new_ambient.iter().cloned());
    let mut tube_vars = pres.tube_vars().to_vec();
    tube_vars.extend(new_tube.iter().cloned());

    let wide_ambient = SeriesSpec::new(
        pres.prime(),
        ambient_vars.clone(),
        vec![Window::power(pres.trunc()); ambient_vars.len()],
    )?;
    let mut lifts = Vec::with_capacity(tube_vars.len());
    for i in 0..pres.tube_dim() {
        lifts.push(pres.lift(i).embed_into(&wide_ambient)?);
    }
    for name in &new_ambient {
        lifts.push(GrowthSeries::var(wide_ambient.clone(), name)?);
    }
    TubePresentation::from_names(pres.prime(), ambient_vars, tube_vars, lifts, pres.trunc())
}

fn fresh_name(base: &str, taken: &mut Vec<String>) -> String {
    let mut k = 1usize;
    loop {
        let candidate = format!("{base}{k}");
        if !taken.iter().any(|v| v == &candidate) {
            taken.push(candidate.clone());
            return candidate;
        }
        k += 1;
    }
}

/// All exponent vectors of the given arity with entries in `0..=hi`, in
/// ascending lexicographic order.
fn box_indices(arity: usize, hi: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; arity];
    loop {
        out.push(cur.clone());
        let mut pos = arity;
        while pos > 0 {
            if cur[pos - 1] < hi {
                cur[pos - 1] += 1;
                for c in cur.iter_mut().skip(pos) {
                    *c = 0;
                }
                break;
            }
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
    }
}

/// The ambient-variable slice of a joint series at a fixed tube exponent.
fn tube_slice(f: &GrowthSeries, ambient: usize, j: &[i64]) -> BTreeMap<Vec<i64>, Scalar> {
    let mut out = BTreeMap::new();
    for (idx, c) in f.support() {
        if &idx[ambient..] == j {
            out.insert(idx[..ambient].to_vec(), c.clone());
        }
    }
    out
}

fn slice_gauss(slice: &BTreeMap<Vec<i64>, Scalar>, p: Prime) -> NormValue {
    slice.values().map(|c| abs_value(c, p)).fold(NormValue::zero(), NormValue::max)
}

/// Row index of the ambient exponent `alpha + beta`, or `None` when the sum
/// leaves the window box (matching what windowed multiplication drops).
fn shifted_row(alpha: &[i64], beta: &[i64], hi: i64, pos: &BTreeMap<Vec<i64>, usize>) -> Option<usize> {
    let sum: Vec<i64> = alpha.iter().zip(beta).map(|(a, b)| a + b).collect();
    if sum.iter().any(|&v| v > hi) {
        return None;
    }
    pos.get(&sum).copied()
}

/// Slices of a joint series by the exponent of one variable, with that
/// exponent zeroed out in the returned series.
fn var_slices(f: &GrowthSeries, pos: usize, degree: i64) -> Vec<(usize, GrowthSeries)> {
    let mut buckets: BTreeMap<i64, Vec<(Vec<i64>, Scalar)>> = BTreeMap::new();
    for (idx, c) in f.support() {
        let d = idx[pos];
        let mut stripped = idx.clone();
        stripped[pos] = 0;
        buckets.entry(d).or_default().push((stripped, c.clone()));
    }
    let mut out = Vec::new();
    for (d, coeffs) in buckets {
        debug_assert!(d <= degree);
        let series = GrowthSeries::from_coeffs(f.spec().clone(), coeffs)
            .expect("slice indices stay in the window");
        out.push((d as usize, series));
    }
    out
}

/// Exact power of the level `p^k` of a pure prime-power norm value.
fn p_level(r: &NormValue, p: Prime) -> i64 {
    let pb = BigRational::from_integer(p.to_bigint());
    let mut v = r.value().clone();
    let mut k = 0i64;
    while v > BigRational::one() {
        v /= &pb;
        k += 1;
    }
    while v < BigRational::one() {
        v *= &pb;
        k -= 1;
    }
    k
}

fn pow_rational(base: &BigRational, e: i64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= base;
    }
    out
}

/// Residue of a p-integral rational.
fn scalar_mod_p(c: &Scalar, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let num = ((c.numer() % &pb) + &pb) % &pb;
    let den = ((c.denom() % &pb) + &pb) % &pb;
    let num = num.to_u64().expect("residue fits in u64");
    let den = den.to_u64().expect("residue fits in u64");
    assert!(den != 0, "rational is not integral at the prime");
    mul_mod(num, inv_mod_u64(den, p), p)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod_u64(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_mod(result, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    result
}
