//! Linear differential systems d/dt Y = G Y solved by the divided
//! Taylor recursion, development at the generic point, log-growth
//! estimation of coefficient sequences, and the experiment comparing
//! solution growth at the origin against the generic point.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::opens::{doubling_truncations, stabilization_failure};
use crate::padic::{abs_value, NormValue, Prime, Scalar};
use crate::series::{index_weight, GrowthSeries, SeriesSpec, Window};
use num_bigint::BigInt;
use num_traits::One;
use std::fmt;

/// Square matrix of series sharing one spec. The spec travels with every
/// operation, so window bookkeeping (derivatives shrink, products take
/// minima) happens entrywise for free.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    dim: usize,
    entries: Vec<GrowthSeries>,
}

impl SeriesMatrix {
    pub fn from_rows(rows: Vec<Vec<GrowthSeries>>) -> Result<SeriesMatrix> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::SpecMismatch("matrix must be square and nonempty".into()));
        }
        let entries: Vec<GrowthSeries> = rows.into_iter().flatten().collect();
        for e in &entries[1..] {
            if e.spec() != entries[0].spec() {
                return Err(Error::SpecMismatch(
                    "matrix entries must share one series spec".into(),
                ));
            }
        }
        Ok(SeriesMatrix { dim, entries })
    }

    pub fn identity(spec: &SeriesSpec, dim: usize) -> SeriesMatrix {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(if i == j {
                    GrowthSeries::constant(spec.clone(), Scalar::one())
                } else {
                    GrowthSeries::zero(spec.clone())
                });
            }
        }
        SeriesMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &GrowthSeries {
        &self.entries[i * self.dim + j]
    }

    pub fn spec(&self) -> &SeriesSpec {
        self.entries[0].spec()
    }

    pub fn derivative(&self, var: &str) -> Result<SeriesMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.derivative(var))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix { dim: self.dim, entries })
    }

    pub fn add(&self, rhs: &SeriesMatrix) -> Result<SeriesMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::SpecMismatch("matrix dimensions differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix { dim: self.dim, entries })
    }

    pub fn mul(&self, rhs: &SeriesMatrix) -> Result<SeriesMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::SpecMismatch("matrix dimensions differ".into()));
        }
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc: Option<GrowthSeries> = None;
                for k in 0..self.dim {
                    let term = self.entry(i, k).mul(rhs.entry(k, j))?;
                    acc = Some(match acc {
                        None => term,
                        Some(s) => s.add(&term)?,
                    });
                }
                entries.push(acc.expect("dim >= 1"));
            }
        }
        Ok(SeriesMatrix { dim: self.dim, entries })
    }

    pub fn scale(&self, c: &Scalar) -> SeriesMatrix {
        SeriesMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    /// Constant terms as an exact rational matrix.
    pub fn at_zero(&self) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.entry(i, j).constant_term());
            }
        }
        m
    }

    /// Largest Gauss norm over the entries.
    pub fn gauss_norm(&self) -> NormValue {
        self.entries
            .iter()
            .map(|e| e.gauss_norm())
            .fold(NormValue::zero(), NormValue::max)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.term_count() == 0)
    }
}

/// The system d/dt Y = G Y with G a square matrix of power-window series
/// in one variable.
#[derive(Clone, Debug)]
pub struct DiffSystem {
    matrix: SeriesMatrix,
}

impl DiffSystem {
    pub fn new(rows: Vec<Vec<GrowthSeries>>) -> Result<DiffSystem> {
        let matrix = SeriesMatrix::from_rows(rows)?;
        let spec = matrix.spec();
        if spec.arity() != 1 {
            return Err(Error::SpecMismatch("a system lives in one variable".into()));
        }
        if !spec.is_power() {
            return Err(Error::LaurentUnsupported("differential system"));
        }
        Ok(DiffSystem { matrix })
    }

    pub fn matrix(&self) -> &SeriesMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn spec(&self) -> &SeriesSpec {
        self.matrix.spec()
    }

    pub fn prime(&self) -> Prime {
        self.spec().prime()
    }

    pub fn var(&self) -> &str {
        &self.spec().vars()[0]
    }

    /// Largest honest truncation order. The base terms Id and G carry the
    /// full window W; each later step costs one derivative, so term m is
    /// exact on [0, W-m+1] and m = W+1 still leaves a constant.
    pub fn max_order(&self) -> i64 {
        self.spec().windows()[0].hi + 1
    }
}

/// Divided-derivative family of a system. `generic[m]` is the matrix
/// T_m(x) with the solution through x equal to `sum_m T_m(x)(t-x)^m`;
/// its window shrinks by one per step. `origin[m]` is `T_m(0)`, the
/// Taylor coefficient matrix of the solution through 0.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub order: usize,
    pub generic: Vec<SeriesMatrix>,
    pub origin: Vec<Mat>,
}

/// Run the recursion T_0 = Id, T_1 = G, T_m = (1/m)(T_{m-1}' + T_{m-1} G)
/// up to the requested order. The system matrix multiplies on the right:
/// writing U for the fundamental solution with U(x) = Id, U^(m) = H_m U
/// gives H_{m+1} = H_m' + H_m G, and only this side makes the assembled
/// origin series solve dY/dt = G Y when G does not commute with itself
/// across degrees. The solution identity is checked on the exact part of
/// the window before returning.
pub fn cauchy_solve(sys: &DiffSystem, order: usize) -> Result<FundamentalSolution> {
    if (order as i64) > sys.max_order() {
        return Err(Error::WindowExhausted(format!(
            "order {order} needs {} derivatives but the window is {}",
            order as i64 - 1,
            sys.spec().windows()[0]
        )));
    }
    let var = sys.var().to_string();
    let mut generic = vec![SeriesMatrix::identity(sys.spec(), sys.dim())];
    if order >= 1 {
        generic.push(sys.matrix().clone());
    }
    for m in 2..=order {
        let prev = generic.last().expect("nonempty");
        let step = prev.derivative(&var)?.add(&prev.mul(sys.matrix())?)?;
        let inv_m = Scalar::new(BigInt::one(), BigInt::from(m));
        generic.push(step.scale(&inv_m));
    }
    let origin: Vec<Mat> = generic.iter().map(SeriesMatrix::at_zero).collect();
    check_origin_solution(sys, &origin)?;
    Ok(FundamentalSolution { order, generic, origin })
}

/// Residual d/dt Y - G Y of the assembled origin solution; must vanish on
/// the window where both sides are exact.
fn check_origin_solution(sys: &DiffSystem, origin: &[Mat]) -> Result<()> {
    let order = origin.len() as i64 - 1;
    let spec_y = SeriesSpec::new(
        sys.spec().prime(),
        sys.spec().vars().to_vec(),
        vec![Window::power(order)],
    )?;
    let dim = sys.dim();
    let mut rows = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for j in 0..dim {
            let coeffs = origin
                .iter()
                .enumerate()
                .map(|(m, t)| (vec![m as i64], t.get(i, j).clone()));
            row.push(GrowthSeries::from_coeffs(spec_y.clone(), coeffs)?);
        }
        rows.push(row);
    }
    let y = SeriesMatrix::from_rows(rows)?;
    let residual = y.derivative(sys.var())?.sub_matrix(&sys.matrix().mul(&y)?)?;
    if residual.is_zero() {
        Ok(())
    } else {
        Err(Error::CertificateViolation(
            "origin solution fails its system inside the window".into(),
        ))
    }
}

impl SeriesMatrix {
    fn sub_matrix(&self, rhs: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.add(&SeriesMatrix {
            dim: rhs.dim,
            entries: rhs.entries.iter().map(|e| e.neg()).collect(),
        })
    }
}

/// Development at the generic point: f(t+w) as a series in (t, w), with
/// the coefficient of w^i the i-th divided derivative of f. The output
/// box window is [0, W-order] in t and [0, order] in w.
pub fn taylor_generic(f: &GrowthSeries, order: i64) -> Result<GrowthSeries> {
    if f.spec().arity() != 1 {
        return Err(Error::SpecMismatch("development takes a one-variable series".into()));
    }
    let w = f.spec().windows()[0];
    if !w.is_power() {
        return Err(Error::LaurentUnsupported("generic-point development"));
    }
    if order < 0 || order > w.hi {
        return Err(Error::WindowExhausted(format!(
            "development order {order} outside window {w}"
        )));
    }
    let t_name = f.spec().vars()[0].clone();
    if t_name == "w" {
        return Err(Error::SpecMismatch(
            "rename the series variable: `w` is reserved for the development".into(),
        ));
    }
    let out_spec = SeriesSpec::new(
        f.spec().prime(),
        vec![t_name.clone(), "w".to_string()],
        vec![Window::power(w.hi - order), Window::power(order)],
    )?;
    let mut items = Vec::new();
    let mut d = f.clone();
    let mut fact = Scalar::one();
    for i in 0..=order {
        if i > 0 {
            d = d.derivative(&t_name)?;
            fact *= Scalar::from_integer(BigInt::from(i));
        }
        for (idx, a) in d.support() {
            if idx[0] <= w.hi - order {
                items.push((vec![idx[0], i], a / &fact));
            }
        }
    }
    GrowthSeries::from_coeffs(out_spec, items)
}

/// Estimated log-growth order of a coefficient sequence. `profiles`
/// keeps the doubling band profile of every weight tried, in order, so a
/// verdict can be audited; `order` is `None` when every weight up to the
/// bound failed to stabilize.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub order: Option<i64>,
    pub truncations: Vec<i64>,
    pub profiles: Vec<(i64, Vec<NormValue>)>,
}

impl fmt::Display for GrowthReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            Some(n) => writeln!(out, "order: {n}")?,
            None => writeln!(out, "order: exceeds the weight bound")?,
        }
        for (n, bands) in &self.profiles {
            write!(out, "weight {n}:")?;
            for (t, v) in self.truncations.iter().zip(bands) {
                write!(out, " {t} -> {v};")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn norm_bands(norms: &[NormValue], truncs: &[i64], n: i64) -> Vec<NormValue> {
    let mut bands = vec![NormValue::zero(); truncs.len()];
    for (i, a) in norms.iter().enumerate() {
        if let Some(k) = truncs.iter().position(|t| (i as i64) <= *t) {
            let v = a * &NormValue::new(index_weight(i as i64, n));
            if v > bands[k] {
                bands[k] = v;
            }
        }
    }
    bands
}

/// Least weight `n <= n_max` whose banded profile of `norms[i](i+1)^(-n)`
/// stabilizes across the last two doublings.
pub fn log_growth_norms(norms: &[NormValue], n_max: i64) -> Result<GrowthReport> {
    if norms.len() < 8 {
        return Err(Error::SequenceTooShort(format!(
            "growth estimation needs at least 8 terms, got {}",
            norms.len()
        )));
    }
    if n_max < 0 {
        return Err(Error::ClassMismatch("weight bound must be nonnegative".into()));
    }
    let truncs = doubling_truncations(norms.len() as i64 - 1)?;
    let mut profiles = Vec::new();
    for n in 0..=n_max {
        let bands = norm_bands(norms, &truncs, n);
        let ok = stabilization_failure(&bands).is_none();
        profiles.push((n, bands));
        if ok {
            return Ok(GrowthReport { order: Some(n), truncations: truncs, profiles });
        }
    }
    Ok(GrowthReport { order: None, truncations: truncs, profiles })
}

/// Growth order of a scalar sequence under |.|_p.
pub fn log_growth_estimate(seq: &[Scalar], p: Prime, n_max: i64) -> Result<GrowthReport> {
    let norms: Vec<NormValue> = seq.iter().map(|a| abs_value(a, p)).collect();
    log_growth_norms(&norms, n_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferVerdict {
    /// Growth at the origin is no worse than at the generic point.
    Consistent,
    /// The generic solution already exceeds the weight bound, so the
    /// comparison has nothing to certify.
    HypothesisNotMet,
    /// Origin growth strictly exceeds generic growth (a defect: the
    /// evaluation bound makes this impossible for honest data).
    Inconsistent,
}

impl fmt::Display for TransferVerdict {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str(match self {
            TransferVerdict::Consistent => "transfer consistent",
            TransferVerdict::HypothesisNotMet => "hypothesis not met",
            TransferVerdict::Inconsistent => "transfer violated",
        })
    }
}

/// Side-by-side growth data for a solved system: Gauss norms of the
/// generic divided derivatives against absolute values at the origin.
#[derive(Clone, Debug)]
pub struct TransferReport {
    pub order: usize,
    pub generic_norms: Vec<NormValue>,
    pub origin_norms: Vec<NormValue>,
    pub generic: GrowthReport,
    pub origin: GrowthReport,
    pub verdict: TransferVerdict,
}

fn mat_norm(m: &Mat, p: Prime) -> NormValue {
    let mut best = NormValue::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            best = best.max(abs_value(m.get(i, j), p));
        }
    }
    best
}

/// Solve to the given order and compare growth. Checks the evaluation
/// bound |T_m(0)| <= ||T_m||_Gauss for every step (its failure would be
/// an arithmetic defect), then grades both norm sequences. Consistency
/// means the origin order is at most the generic order.
pub fn transfer_experiment(
    sys: &DiffSystem,
    order: usize,
    n_max: i64,
) -> Result<TransferReport> {
    let sol = cauchy_solve(sys, order)?;
    let p = sys.prime();
    let generic_norms: Vec<NormValue> =
        sol.generic.iter().map(SeriesMatrix::gauss_norm).collect();
    let origin_norms: Vec<NormValue> = sol.origin.iter().map(|m| mat_norm(m, p)).collect();
    for (m, (o, g)) in origin_norms.iter().zip(&generic_norms).enumerate() {
        if o > g {
            return Err(Error::CertificateViolation(format!(
                "evaluation bound failed at step {m}: {o} > {g}"
            )));
        }
    }
    let generic = log_growth_norms(&generic_norms, n_max)?;
    let origin = log_growth_norms(&origin_norms, n_max)?;
    let verdict = match (generic.order, origin.order) {
        (Some(g), Some(o)) if o <= g => TransferVerdict::Consistent,
        (Some(_), _) => TransferVerdict::Inconsistent,
        (None, _) => TransferVerdict::HypothesisNotMet,
    };
    Ok(TransferReport { order, generic_norms, origin_norms, generic, origin, verdict })
}
