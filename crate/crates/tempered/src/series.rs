//! Truncated multivariate power/Laurent series with weighted sup norms.
//!
//! A series value is the truncation of an ideal (possibly infinite) series to
//! a per-variable index window: inside the window the stored coefficients are
//! exact (absent means zero), outside it nothing is claimed. Every operation
//! computes the largest window on which its output is exact and truncates to
//! it; consumers must not read beyond the recorded window. Silent window
//! violations are the main correctness hazard in this kernel, so the rules
//! are spelled out on each operation.
//!
//! The weight of index j at weight parameter n is (|j|+1)^(-n), multiplied
//! over variables. Nonnegative exponents give the log-growth scale of weights
//! on power series; the |j| makes the same formula serve Laurent tails, where
//! the weight of t^(-i) matches the weight of the i-th coefficient of the
//! series at infinity. Negative n is the fast scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{abs_value, is_unit, NormValue, Prime, Scalar};

/// Closed index range. `lo > hi` encodes the empty window (an operation that
/// exhausted its truncation budget).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn power(hi: i64) -> Window {
        Window { lo: 0, hi }
    }

    pub fn new(lo: i64, hi: i64) -> Window {
        Window { lo, hi }
    }

    pub fn contains(&self, j: i64) -> bool {
        self.lo <= j && j <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn is_power(&self) -> bool {
        self.lo == 0
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn shift(&self, d: i64) -> Window {
        Window { lo: self.lo + d, hi: self.hi + d }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Shared shape of a series: prime, ordered variable names, and one window
/// per variable. Two series are arithmetic-compatible when prime and
/// variables agree; windows are combined per operation.
///
/// Declared (parsed) specs always have `lo <= 0 <= hi`; computed windows may
/// leave that range (e.g. a pulled-back form on an annulus).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesSpec {
    prime: Prime,
    vars: Vec<String>,
    windows: Vec<Window>,
}

impl SeriesSpec {
    pub fn new(prime: Prime, vars: Vec<String>, windows: Vec<Window>) -> Result<SeriesSpec> {
        if vars.is_empty() {
            return Err(Error::SpecMismatch("a series needs at least one variable".into()));
        }
        if vars.len() != windows.len() {
            return Err(Error::SpecMismatch(format!(
                "{} variables but {} windows",
                vars.len(),
                windows.len()
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::SpecMismatch(format!("bad variable name `{v}`")));
            }
            if vars[..i].contains(v) {
                return Err(Error::SpecMismatch(format!("duplicate variable `{v}`")));
            }
        }
        for (v, w) in vars.iter().zip(&windows) {
            if w.is_empty() {
                return Err(Error::SpecMismatch(format!("empty window {w} for `{v}`")));
            }
        }
        Ok(SeriesSpec { prime, vars, windows })
    }

    /// Uniform power windows [0, hi] on every variable.
    pub fn power(prime: Prime, vars: &[&str], hi: i64) -> Result<SeriesSpec> {
        SeriesSpec::new(
            prime,
            vars.iter().map(|s| s.to_string()).collect(),
            vec![Window::power(hi); vars.len()],
        )
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Same prime and variable list; windows may differ.
    pub fn compatible(&self, other: &SeriesSpec) -> bool {
        self.prime == other.prime && self.vars == other.vars
    }

    pub fn is_power(&self) -> bool {
        self.windows.iter().all(Window::is_power)
    }

    fn with_windows(&self, windows: Vec<Window>) -> SeriesSpec {
        SeriesSpec { prime: self.prime, vars: self.vars.clone(), windows }
    }

    fn check_compatible(&self, other: &SeriesSpec, what: &str) -> Result<()> {
        if !self.compatible(other) {
            return Err(Error::SpecMismatch(format!(
                "{what}: ({}; {}) vs ({}; {})",
                self.prime,
                self.vars.join(","),
                other.prime,
                other.vars.join(",")
            )));
        }
        Ok(())
    }
}

/// (|j|+1)^(-n) as an exact rational.
pub fn index_weight(j: i64, n: i64) -> BigRational {
    let base = BigInt::from(j.unsigned_abs() + 1);
    if n >= 0 {
        BigRational::new(BigInt::one(), base.pow(n as u32))
    } else {
        BigRational::from_integer(base.pow((-n) as u32))
    }
}

/// Truncated series: exact coefficient data on the spec's windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthSeries {
    spec: SeriesSpec,
    coeffs: BTreeMap<Vec<i64>, Scalar>,
}

impl GrowthSeries {
    pub fn zero(spec: SeriesSpec) -> GrowthSeries {
        GrowthSeries { spec, coeffs: BTreeMap::new() }
    }

    pub fn constant(spec: SeriesSpec, c: Scalar) -> GrowthSeries {
        let idx = vec![0; spec.arity()];
        let mut s = GrowthSeries::zero(spec);
        if !c.is_zero() {
            assert!(
                s.index_in_window(&idx),
                "constant term outside window {:?}",
                s.spec.windows
            );
            s.coeffs.insert(idx, c);
        }
        s
    }

    pub fn monomial(spec: SeriesSpec, index: &[i64], c: Scalar) -> Result<GrowthSeries> {
        let mut s = GrowthSeries::zero(spec);
        s.insert_checked(index.to_vec(), c)?;
        Ok(s)
    }

    pub fn var(spec: SeriesSpec, name: &str) -> Result<GrowthSeries> {
        let i = spec.var_index(name)?;
        let mut idx = vec![0; spec.arity()];
        idx[i] = 1;
        GrowthSeries::monomial(spec, &idx, Scalar::one())
    }

    pub fn from_coeffs<I>(spec: SeriesSpec, coeffs: I) -> Result<GrowthSeries>
    where
        I: IntoIterator<Item = (Vec<i64>, Scalar)>,
    {
        let mut s = GrowthSeries::zero(spec);
        for (idx, c) in coeffs {
            if s.coeffs.contains_key(&idx) {
                return Err(Error::SpecMismatch(format!("duplicate index {idx:?}")));
            }
            s.insert_checked(idx, c)?;
        }
        Ok(s)
    }

    fn insert_checked(&mut self, idx: Vec<i64>, c: Scalar) -> Result<()> {
        if idx.len() != self.spec.arity() {
            return Err(Error::SpecMismatch(format!(
                "index {idx:?} has arity {} but spec has {} variables",
                idx.len(),
                self.spec.arity()
            )));
        }
        if !self.index_in_window(&idx) {
            return Err(Error::WindowViolation(format!(
                "index {idx:?} outside window {}",
                self.spec
                    .windows
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )));
        }
        if !c.is_zero() {
            self.coeffs.insert(idx, c);
        }
        Ok(())
    }

    fn index_in_window(&self, idx: &[i64]) -> bool {
        idx.iter().zip(&self.spec.windows).all(|(j, w)| w.contains(*j))
    }

    pub fn spec(&self) -> &SeriesSpec {
        &self.spec
    }

    pub fn prime(&self) -> Prime {
        self.spec.prime
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterate stored (index, coefficient) pairs in lexicographic index order.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<i64>, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Exact coefficient at an in-window index. Reading outside the window is
    /// a caller bug: the value there is not known, so this panics rather than
    /// inventing a zero.
    pub fn coeff(&self, idx: &[i64]) -> Scalar {
        assert!(
            idx.len() == self.spec.arity() && self.index_in_window(idx),
            "coefficient read outside exactness window: {:?} not in {:?}",
            idx,
            self.spec.windows
        );
        self.coeffs.get(idx).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.spec.arity()])
    }

    /// Keep only stored indices satisfying the predicate; window unchanged.
    /// This models passing to a sharper truncation of the same object.
    pub fn restrict(&self, keep: impl Fn(&[i64]) -> bool) -> GrowthSeries {
        GrowthSeries {
            spec: self.spec.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(idx, _)| keep(idx))
                .map(|(idx, c)| (idx.clone(), c.clone()))
                .collect(),
        }
    }

    /// Shrink the windows (same variables). Data outside the new windows is
    /// dropped; widening is refused because it would claim unknown
    /// coefficients.
    pub fn truncate_to(&self, windows: &[Window]) -> Result<GrowthSeries> {
        if windows.len() != self.spec.arity() {
            return Err(Error::SpecMismatch(format!(
                "expected {} windows, got {}",
                self.spec.arity(),
                windows.len()
            )));
        }
        self.embed_into(&self.spec.with_windows(windows.to_vec()))
    }

    /// Cast into a spec with a superset of variables. Shared variables must
    /// not widen their windows (that would claim unknown coefficients); data
    /// is truncated where the target window is smaller. Fresh variables are
    /// exact at every exponent because the embedded series does not involve
    /// them.
    pub fn embed_into(&self, target: &SeriesSpec) -> Result<GrowthSeries> {
        if target.prime != self.spec.prime {
            return Err(Error::SpecMismatch("prime mismatch in embedding".into()));
        }
        let mut positions = Vec::with_capacity(self.spec.arity());
        for (v, w) in self.spec.vars.iter().zip(&self.spec.windows) {
            let ti = target.var_index(v)?;
            let tw = &target.windows[ti];
            if tw.lo < w.lo || tw.hi > w.hi {
                return Err(Error::IncompatibleWindows(format!(
                    "embedding would widen window of `{v}` from {w} to {tw}"
                )));
            }
            positions.push(ti);
        }
        let mut out = GrowthSeries::zero(target.clone());
        for (idx, c) in &self.coeffs {
            let mut nidx = vec![0i64; target.arity()];
            for (k, &j) in idx.iter().enumerate() {
                nidx[positions[k]] = j;
            }
            if out.index_in_window(&nidx) {
                out.coeffs.insert(nidx, c.clone());
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> GrowthSeries {
        GrowthSeries {
            spec: self.spec.clone(),
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Scalar) -> GrowthSeries {
        if k.is_zero() {
            return GrowthSeries::zero(self.spec.clone());
        }
        GrowthSeries {
            spec: self.spec.clone(),
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), c * k)).collect(),
        }
    }

    /// Sum, exact on the intersection of the two windows.
    pub fn add(&self, rhs: &GrowthSeries) -> Result<GrowthSeries> {
        self.spec.check_compatible(&rhs.spec, "add")?;
        let windows: Vec<Window> = self
            .spec
            .windows
            .iter()
            .zip(&rhs.spec.windows)
            .map(|(a, b)| a.intersect(b))
            .collect();
        let mut out = GrowthSeries::zero(self.spec.with_windows(windows));
        for (idx, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            if !out.index_in_window(idx) {
                continue;
            }
            let entry = out.coeffs.entry(idx.clone()).or_insert_with(Scalar::zero);
            *entry += c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn sub(&self, rhs: &GrowthSeries) -> Result<GrowthSeries> {
        self.add(&rhs.neg())
    }

    /// Product. Supported on power windows, where the output is exact up to
    /// the elementwise minimum of the factor windows: any coefficient beyond
    /// that could be contaminated by unknown tails of a factor. Laurent
    /// windows have unknown tails on both sides, so no product coefficient
    /// would be exact; the operation refuses instead of guessing.
    pub fn mul(&self, rhs: &GrowthSeries) -> Result<GrowthSeries> {
        self.spec.check_compatible(&rhs.spec, "mul")?;
        if !self.spec.is_power() || !rhs.spec.is_power() {
            return Err(Error::LaurentUnsupported("multiplication"));
        }
        let windows: Vec<Window> = self
            .spec
            .windows
            .iter()
            .zip(&rhs.spec.windows)
            .map(|(a, b)| a.intersect(b))
            .collect();
        let mut out = GrowthSeries::zero(self.spec.with_windows(windows));
        for (ia, ca) in &self.coeffs {
            for (ib, cb) in &rhs.coeffs {
                let idx: Vec<i64> = ia.iter().zip(ib).map(|(a, b)| a + b).collect();
                if !out.index_in_window(&idx) {
                    continue;
                }
                let entry = out.coeffs.entry(idx).or_insert_with(Scalar::zero);
                *entry += ca * cb;
            }
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Multiply by the exact monomial c * var_0^e_0 * ... . This is a
    /// reindexing, so it is exact on any window kind; the window shifts along.
    pub fn mul_monomial(&self, exps: &[i64], c: &Scalar) -> GrowthSeries {
        assert_eq!(exps.len(), self.spec.arity(), "monomial arity mismatch");
        let windows: Vec<Window> = self
            .spec
            .windows
            .iter()
            .zip(exps)
            .map(|(w, e)| w.shift(*e))
            .collect();
        let mut out = GrowthSeries::zero(self.spec.with_windows(windows));
        if c.is_zero() {
            return out;
        }
        for (idx, v) in &self.coeffs {
            let nidx: Vec<i64> = idx.iter().zip(exps).map(|(a, b)| a + b).collect();
            out.coeffs.insert(nidx, v * c);
        }
        out
    }

    /// d/d(var). Coefficient j receives (j+1) * a_{j+1}; the window shifts
    /// down by one in that variable (for a power window the floor stays at 0:
    /// a derivative of a power series has no negative exponents).
    pub fn derivative(&self, var: &str) -> Result<GrowthSeries> {
        let vi = self.spec.var_index(var)?;
        let w = self.spec.windows[vi];
        let nw = if w.is_power() {
            Window::new(0, w.hi - 1)
        } else {
            Window::new(w.lo - 1, w.hi - 1)
        };
        let mut windows = self.spec.windows.clone();
        windows[vi] = nw;
        let mut out = GrowthSeries::zero(self.spec.with_windows(windows));
        for (idx, c) in &self.coeffs {
            let j = idx[vi];
            if j == 0 {
                continue;
            }
            let mut nidx = idx.clone();
            nidx[vi] = j - 1;
            if out.index_in_window(&nidx) {
                out.coeffs.insert(nidx, c * BigRational::from_integer(BigInt::from(j)));
            }
        }
        Ok(out)
    }

    /// Antiderivative in `var` with constant term zero. Exponent -1 has no
    /// primitive inside a Laurent window, so a coefficient there is an error.
    /// The window shifts up by one (a power window keeps its floor; exactness
    /// at the new top comes from the old top coefficient).
    pub fn integrate(&self, var: &str) -> Result<GrowthSeries> {
        let vi = self.spec.var_index(var)?;
        let w = self.spec.windows[vi];
        let nw = if w.is_power() {
            Window::new(0, w.hi + 1)
        } else {
            Window::new(w.lo + 1, w.hi + 1)
        };
        let mut windows = self.spec.windows.clone();
        windows[vi] = nw;
        let mut out = GrowthSeries::zero(self.spec.with_windows(windows));
        for (idx, c) in &self.coeffs {
            let j = idx[vi];
            if j == -1 {
                return Err(Error::NotDivisible(format!(
                    "exponent -1 of `{var}` has no primitive in a Laurent window"
                )));
            }
            let mut nidx = idx.clone();
            nidx[vi] = j + 1;
            if out.index_in_window(&nidx) {
                out.coeffs
                    .insert(nidx, c / BigRational::from_integer(BigInt::from(j + 1)));
            }
        }
        Ok(out)
    }

    /// Weighted sup norm with one weight per variable:
    /// max over stored J of |a_J|_p * prod_l (|j_l|+1)^(-n_l).
    pub fn norm_weighted_per_var(&self, weights: &[i64]) -> NormValue {
        assert_eq!(weights.len(), self.spec.arity(), "one weight per variable");
        let p = self.spec.prime;
        let mut best = NormValue::zero();
        for (idx, c) in &self.coeffs {
            let mut v = abs_value(c, p).value().clone();
            for (j, n) in idx.iter().zip(weights) {
                v *= index_weight(*j, *n);
            }
            let v = NormValue::new(v);
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Weighted sup norm at a single weight n applied to every variable.
    /// n = 0 is the Gauss (sup) norm, negative n the fast norm.
    pub fn norm_weighted(&self, n: i64) -> NormValue {
        self.norm_weighted_per_var(&vec![n; self.spec.arity()])
    }

    pub fn gauss_norm(&self) -> NormValue {
        self.norm_weighted(0)
    }

    /// Reciprocal of a series with invertible constant term, to the same
    /// window. Power windows only.
    pub fn recip(&self) -> Result<GrowthSeries> {
        if !self.spec.is_power() {
            return Err(Error::LaurentUnsupported("reciprocal"));
        }
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotDivisible("reciprocal of a series with zero constant term".into()));
        }
        // c_M solves sum_{K <= M} a_K c_{M-K} = [M = 0], filled in lex order;
        // lex order refines the divisibility order on exponent vectors, so
        // every c_{M-K} needed is already present.
        let mut out = GrowthSeries::zero(self.spec.clone());
        let indices: Vec<Vec<i64>> = box_indices(&self.spec.windows);
        for m in indices {
            let mut acc = if m.iter().all(|&j| j == 0) { Scalar::one() } else { Scalar::zero() };
            for (k, a) in &self.coeffs {
                if k.iter().all(|&j| j == 0) {
                    continue;
                }
                if k.iter().zip(&m).all(|(kj, mj)| kj <= mj) {
                    let rest: Vec<i64> = m.iter().zip(k).map(|(mj, kj)| mj - kj).collect();
                    if let Some(c) = out.coeffs.get(&rest) {
                        acc -= a * c;
                    }
                }
            }
            let c = acc / &c0;
            if !c.is_zero() {
                out.coeffs.insert(m, c);
            }
        }
        Ok(out)
    }

    /// Replace `var` by the series `g` (classical composition). Requires
    /// ||g||_0 <= 1, the sup-norm condition under which substitution into a
    /// Tate-algebra element converges; otherwise the substitution is flagged
    /// divergent. Power windows only. The output lives on the remaining
    /// variables of `self` joined with the variables of `g`; shared variables
    /// take the smaller window.
    pub fn substitute(&self, var: &str, g: &GrowthSeries) -> Result<GrowthSeries> {
        let vi = self.spec.var_index(var)?;
        if self.spec.prime != g.spec.prime {
            return Err(Error::SpecMismatch("prime mismatch in substitution".into()));
        }
        if !self.spec.is_power() || !g.spec.is_power() {
            return Err(Error::LaurentUnsupported("substitution"));
        }
        if g.gauss_norm() > NormValue::one() {
            return Err(Error::DivergentSubstitution(format!(
                "||{}||_0 = {} > 1",
                g, g.gauss_norm()
            )));
        }

        // output spec: self's vars minus `var`, then g's vars not yet present
        let mut vars: Vec<String> = Vec::new();
        let mut windows: Vec<Window> = Vec::new();
        for (i, (v, w)) in self.spec.vars.iter().zip(&self.spec.windows).enumerate() {
            if i != vi {
                vars.push(v.clone());
                windows.push(*w);
            }
        }
        for (v, w) in g.spec.vars.iter().zip(&g.spec.windows) {
            if let Some(pos) = vars.iter().position(|x| x == v) {
                windows[pos] = windows[pos].intersect(w);
            } else {
                vars.push(v.clone());
                windows.push(*w);
            }
        }
        let out_spec = SeriesSpec::new(self.spec.prime, vars, windows)?;

        // slices of self by the exponent of `var`, embedded into the output
        let mut slices: BTreeMap<i64, GrowthSeries> = BTreeMap::new();
        for (idx, c) in &self.coeffs {
            let j = idx[vi];
            let mut rest: Vec<i64> = idx.clone();
            rest.remove(vi);
            let slice = slices.entry(j).or_insert_with(|| {
                // spec of the remaining variables of self
                let mut vs: Vec<String> = self.spec.vars.clone();
                vs.remove(vi);
                let mut ws = self.spec.windows.clone();
                ws.remove(vi);
                GrowthSeries::zero(SeriesSpec { prime: self.spec.prime, vars: vs, windows: ws })
            });
            slice.coeffs.insert(std::mem::take(&mut rest), c.clone());
        }

        let g_emb = g.embed_into(&out_spec)?;
        let top = slices.keys().next_back().copied().unwrap_or(0);
        let mut acc = GrowthSeries::zero(out_spec.clone());
        for j in (0..=top).rev() {
            acc = acc.mul(&g_emb)?;
            if let Some(slice) = slices.get(&j) {
                acc = acc.add(&slice.embed_into(&out_spec)?)?;
            }
        }
        Ok(acc)
    }

    /// Replace `var` by the exact monomial c * target^e. A reindexing, exact
    /// on any window kind (this is the restriction-map workhorse: e.g.
    /// s -> t^-1 on an annulus). `target` may be a fresh variable or one of
    /// the remaining variables of `self`.
    pub fn substitute_monomial(
        &self,
        var: &str,
        c: &Scalar,
        target: &str,
        e: i64,
    ) -> Result<GrowthSeries> {
        let vi = self.spec.var_index(var)?;
        if c.is_zero() {
            return Err(Error::DivergentSubstitution("zero monomial image".into()));
        }
        let mut vars: Vec<String> = self.spec.vars.clone();
        vars.remove(vi);
        let mut windows: Vec<Window> = self.spec.windows.clone();
        let wv = windows.remove(vi);
        // image of the var window under j -> e*j
        let (ilo, ihi) = if e >= 0 { (e * wv.lo, e * wv.hi) } else { (e * wv.hi, e * wv.lo) };
        let tpos = match vars.iter().position(|x| x == target) {
            Some(pos) => {
                windows[pos] = Window::new(windows[pos].lo + ilo, windows[pos].hi + ihi);
                pos
            }
            None => {
                vars.push(target.to_string());
                windows.push(Window::new(ilo, ihi));
                vars.len() - 1
            }
        };
        let spec = SeriesSpec { prime: self.spec.prime, vars, windows };
        let mut out = GrowthSeries::zero(spec);
        for (idx, a) in &self.coeffs {
            let j = idx[vi];
            let mut nidx = idx.clone();
            nidx.remove(vi);
            if nidx.len() == tpos {
                nidx.push(0);
            }
            nidx[tpos] += e * j;
            let coeff = a * pow_scalar(c, j);
            let entry = out.coeffs.entry(nidx).or_insert_with(Scalar::zero);
            *entry += coeff;
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        Ok(out)
    }
}

/// c^j for any integer j (c nonzero when j < 0).
pub fn pow_scalar(c: &Scalar, j: i64) -> Scalar {
    if j == 0 {
        return Scalar::one();
    }
    let base = if j > 0 { c.clone() } else { Scalar::one() / c };
    let mut acc = Scalar::one();
    for _ in 0..j.unsigned_abs() {
        acc = acc * &base;
    }
    acc
}

/// All indices of the window box in lexicographic order.
pub(crate) fn box_indices(windows: &[Window]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for w in windows {
        let mut next = Vec::new();
        for prefix in &out {
            for j in w.lo..=w.hi {
                let mut idx = prefix.clone();
                idx.push(j);
                next.push(idx);
            }
        }
        out = next;
    }
    out
}

impl fmt::Display for GrowthSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = idx
                .iter()
                .zip(self.spec.vars())
                .filter(|(j, _)| **j != 0)
                .map(|(j, v)| if *j == 1 { v.clone() } else { format!("{v}^{j}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Result of dividing f(t,x) - f(x,x) by (t - x) on the diagonal, with the
/// log-growth norm certificate.
///
/// The quotient formula q_{h,s} = sum_{l=0..s} a_{h+1+l, s-l} reads input
/// coefficients of total degree h+s+1, so with the input exact to total
/// degree D the quotient is exact on the simplex h+s <= D-1 only. The
/// quotient's box window records [0, D-1] per variable; `exact_total_degree`
/// is the honest cap and the stored support respects it.
#[derive(Debug, Clone)]
pub struct DiagonalDivision {
    pub quotient: GrowthSeries,
    pub exact_total_degree: i64,
    pub weight: i64,
    /// ||f||_n
    pub input_norm: NormValue,
    /// ||q||_{2n} over the exact support
    pub quotient_norm: NormValue,
    /// 2^n * ||f||_n
    pub bound: NormValue,
}

/// Divide f(t,x) - f(x,x) by (t - x), where the first variable of the spec is
/// the diagonal direction t. Certifies ||q||_{2n} <= 2^n ||f||_n.
pub fn divide_diagonal(f: &GrowthSeries, n: i64) -> Result<DiagonalDivision> {
    let spec = f.spec();
    if spec.arity() != 2 {
        return Err(Error::SpecMismatch(format!(
            "diagonal division needs exactly two variables, got {}",
            spec.arity()
        )));
    }
    if !spec.is_power() {
        return Err(Error::LaurentUnsupported("diagonal division"));
    }
    if n < 0 {
        return Err(Error::SpecMismatch("diagonal division weight must be nonnegative".into()));
    }
    let d = spec.windows()[0].hi.min(spec.windows()[1].hi);
    if d < 1 {
        return Err(Error::WindowExhausted(
            "diagonal division needs total degree at least 1".into(),
        ));
    }
    let out_spec = spec.with_windows(vec![Window::power(d - 1), Window::power(d - 1)]);
    let mut q = GrowthSeries::zero(out_spec);
    for h in 0..=d - 1 {
        for s in 0..=d - 1 - h {
            let mut acc = Scalar::zero();
            for l in 0..=s {
                acc += f.coeff(&[h + 1 + l, s - l]);
            }
            if !acc.is_zero() {
                q.coeffs.insert(vec![h, s], acc);
            }
        }
    }
    let input_norm = f.norm_weighted(n);
    let quotient_norm = q.norm_weighted(2 * n);
    let two_n = BigRational::from_integer(BigInt::from(2).pow(n as u32));
    let bound = NormValue::new(two_n * input_norm.value());
    if quotient_norm > bound {
        return Err(Error::CertificateViolation(format!(
            "||q||_{} = {} exceeds 2^{} * ||f||_{} = {}",
            2 * n,
            quotient_norm,
            n,
            n,
            bound
        )));
    }
    Ok(DiagonalDivision {
        quotient: q,
        exact_total_degree: d - 1,
        weight: n,
        input_norm,
        quotient_norm,
        bound,
    })
}

/// One weight's worth of norm certificate for a linear division.
#[derive(Debug, Clone)]
pub struct WeightCertificate {
    pub weight: i64,
    /// ||h||_n for the recovered cofactor
    pub quotient_norm: NormValue,
    /// ||h'||_n for the input
    pub input_norm: NormValue,
}

/// Result of dividing by the linear unit polynomial g*t - g'.
#[derive(Debug, Clone)]
pub struct LinearDivision {
    pub quotient: GrowthSeries,
    pub certificates: Vec<WeightCertificate>,
}

/// Divide h' by (g*t - g') where |g| = |g'| = 1. The coefficients of the
/// cofactor satisfy a_i = (g*a_{i-1} - b_i) / g' with a_{-1} = 0; the
/// recursion closes only if the computed coefficient at the window top
/// vanishes, otherwise the input was not divisible at this truncation.
/// For every requested weight n the certificate ||h||_n <= ||h'||_n is
/// checked exactly.
pub fn divide_linear(
    h_prime: &GrowthSeries,
    g: &Scalar,
    g_prime: &Scalar,
    weights: &[i64],
) -> Result<LinearDivision> {
    let spec = h_prime.spec();
    if spec.arity() != 1 {
        return Err(Error::SpecMismatch("linear division is univariate".into()));
    }
    if !spec.is_power() {
        return Err(Error::LaurentUnsupported("linear division"));
    }
    let p = spec.prime();
    if !is_unit(g, p) || !is_unit(g_prime, p) {
        return Err(Error::NonUnit(format!(
            "need |g| = |g'| = 1 at p = {p}, got |{g}|, |{g_prime}|"
        )));
    }
    let n_top = spec.windows()[0].hi;
    let mut out = GrowthSeries::zero(spec.clone());
    let mut prev = Scalar::zero();
    for i in 0..=n_top {
        let b = h_prime.coeff(&[i]);
        let a = (g * &prev - b) / g_prime;
        if i == n_top {
            if !a.is_zero() {
                return Err(Error::NotDivisible(format!(
                    "remainder {} at top degree {}",
                    -(g_prime * &a),
                    n_top
                )));
            }
        } else if !a.is_zero() {
            out.coeffs.insert(vec![i], a.clone());
        }
        prev = a;
    }
    let mut certificates = Vec::new();
    for &n in weights {
        let quotient_norm = out.norm_weighted(n);
        let input_norm = h_prime.norm_weighted(n);
        if quotient_norm > input_norm {
            return Err(Error::CertificateViolation(format!(
                "||h||_{n} = {quotient_norm} exceeds ||h'||_{n} = {input_norm}"
            )));
        }
        certificates.push(WeightCertificate { weight: n, quotient_norm, input_norm });
    }
    Ok(LinearDivision { quotient: out, certificates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn int(n: i64) -> Scalar {
        BigRational::from_integer(BigInt::from(n))
    }

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    /// sum_{i=1..hi} t^i / i
    fn log_series(prime: u64, hi: i64) -> GrowthSeries {
        let spec = SeriesSpec::power(p(prime), &["t"], hi).unwrap();
        GrowthSeries::from_coeffs(spec, (1..=hi).map(|i| (vec![i], q(1, i)))).unwrap()
    }

    #[test]
    fn weighted_norm_log_series() {
        // independent enumeration oracle
        let f = log_series(2, 8);
        let mut best = BigRational::zero();
        for i in 1..=8i64 {
            let v = abs_value(&q(1, i), p(2)).value() * index_weight(i, 1);
            if v > best {
                best = v.clone();
            }
        }
        assert_eq!(best, q(8, 9));
        assert_eq!(f.norm_weighted(1), NormValue::new(q(8, 9)));
        // fast norm at n = -1: max |1/i| * (i+1) = 8 * 9 = 72 at i = 8
        assert_eq!(f.norm_weighted(-1), NormValue::new(int(72)));
        // Gauss norm: max |1/i|_2 = 8
        assert_eq!(f.gauss_norm(), NormValue::new(int(8)));
    }

    #[test]
    fn mul_polynomial_identity() {
        let spec = SeriesSpec::power(p(5), &["t"], 2).unwrap();
        let one_plus =
            GrowthSeries::from_coeffs(spec.clone(), vec![(vec![0], int(1)), (vec![1], int(1))])
                .unwrap();
        let one_minus =
            GrowthSeries::from_coeffs(spec.clone(), vec![(vec![0], int(1)), (vec![1], int(-1))])
                .unwrap();
        let prod = one_plus.mul(&one_minus).unwrap();
        let expect =
            GrowthSeries::from_coeffs(spec, vec![(vec![0], int(1)), (vec![2], int(-1))]).unwrap();
        assert_eq!(prod, expect);
    }

    #[test]
    fn mul_truncates_to_window_minimum() {
        let s1 = SeriesSpec::power(p(5), &["t"], 1).unwrap();
        let s4 = SeriesSpec::power(p(5), &["t"], 4).unwrap();
        let f = GrowthSeries::from_coeffs(s1, vec![(vec![0], int(1)), (vec![1], int(1))]).unwrap();
        let g = GrowthSeries::from_coeffs(s4, vec![(vec![0], int(1)), (vec![1], int(-1))]).unwrap();
        let prod = f.mul(&g).unwrap();
        assert_eq!(prod.spec().windows()[0], Window::power(1));
        // the t^2 term is beyond the honest window and must be dropped
        assert_eq!(prod.term_count(), 1);
        assert_eq!(prod.coeff(&[0]), int(1));
    }

    #[test]
    fn mul_norm_bound_example() {
        // p = 3, f = g = sum_{i<=4} t^i: ||fg||_2 <= ||f||_1 * ||g||_1
        let spec = SeriesSpec::power(p(3), &["t"], 4).unwrap();
        let f =
            GrowthSeries::from_coeffs(spec, (0..=4).map(|i| (vec![i], int(1)))).unwrap();
        let fg = f.mul(&f).unwrap();
        let lhs = fg.norm_weighted(2);
        let rhs = f.norm_weighted(1) * f.norm_weighted(1);
        assert!(lhs <= rhs);
    }

    #[test]
    fn derivative_and_integrate_examples() {
        // d/dt sum_{i=1..6} t^i/i = sum_{i=0..5} t^i
        let f = log_series(5, 6);
        let df = f.derivative("t").unwrap();
        let expect = GrowthSeries::from_coeffs(
            SeriesSpec::power(p(5), &["t"], 5).unwrap(),
            (0..=5).map(|i| (vec![i], int(1))),
        )
        .unwrap();
        assert_eq!(df, expect);
        // integration inverts it up to the constant and returns the log series
        let back = expect.integrate("t").unwrap();
        assert_eq!(back, log_series(5, 6));
    }

    #[test]
    fn integration_norm_bound() {
        // ||integral f||_{n+1} <= ||f||_n on a sample with real denominators
        let f = log_series(2, 12);
        let int_f = f.integrate("t").unwrap();
        for n in -2..=3 {
            assert!(int_f.norm_weighted(n + 1) <= f.norm_weighted(n), "n = {n}");
        }
    }

    #[test]
    fn integrate_laurent_obstruction() {
        let spec = SeriesSpec::new(
            p(3),
            vec!["t".into()],
            vec![Window::new(-4, 4)],
        )
        .unwrap();
        let f = GrowthSeries::monomial(spec.clone(), &[-1], int(1)).unwrap();
        assert!(f.integrate("t").is_err());
        let g = GrowthSeries::monomial(spec, &[-3], int(7)).unwrap();
        let gi = g.integrate("t").unwrap();
        assert_eq!(gi.coeff(&[-2]), q(-7, 2));
    }

    #[test]
    fn monotone_in_weight() {
        let f = log_series(2, 16);
        for n in -3..3 {
            assert!(f.norm_weighted(n + 1) <= f.norm_weighted(n));
        }
    }

    /// Independent long-division oracle for the diagonal: divide
    /// f(t,x) - f(x,x) by (t - x) as polynomials in t over Q[x], top down.
    /// Dense representation, no GrowthSeries involvement.
    fn diagonal_oracle(coeffs: &BTreeMap<Vec<i64>, Scalar>, tdeg: i64, xdeg: i64) -> BTreeMap<(i64, i64), Scalar> {
        let t_max = (tdeg + xdeg) as usize;
        // numerator n(t,x) = f(t,x) - f(x,x) as dense [t][x]
        let mut num = vec![vec![Scalar::zero(); t_max + 1]; t_max + 1];
        for (idx, c) in coeffs {
            let (i, j) = (idx[0] as usize, idx[1] as usize);
            num[i][j] += c;
            num[0][i + j] -= c; // -f(x,x)
        }
        // divide by (t - x): walk t-degree downward
        let mut quot = vec![vec![Scalar::zero(); t_max + 1]; t_max + 1];
        for ti in (1..=t_max).rev() {
            for xi in 0..=t_max {
                let c = num[ti][xi].clone();
                if c.is_zero() {
                    continue;
                }
                quot[ti - 1][xi] += &c;
                // subtract c * t^{ti-1} x^{xi} * (t - x)
                num[ti][xi] -= &c;
                if xi + 1 <= t_max {
                    num[ti - 1][xi + 1] += &c;
                }
            }
        }
        assert!(num.iter().flatten().all(|c| c.is_zero()), "oracle remainder nonzero");
        let mut out = BTreeMap::new();
        for (i, row) in quot.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.insert((i as i64, j as i64), c.clone());
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_division_polynomial_identities() {
        // f = t^2 - x^2 -> q = t + x, f = t - x -> q = 1
        let spec = SeriesSpec::power(p(5), &["t", "x"], 2).unwrap();
        let f = GrowthSeries::from_coeffs(
            spec.clone(),
            vec![(vec![2, 0], int(1)), (vec![0, 2], int(-1))],
        )
        .unwrap();
        let div = divide_diagonal(&f, 0).unwrap();
        assert_eq!(div.quotient.coeff(&[1, 0]), int(1));
        assert_eq!(div.quotient.coeff(&[0, 1]), int(1));
        assert_eq!(div.quotient.term_count(), 2);

        let g = GrowthSeries::from_coeffs(
            spec,
            vec![(vec![1, 0], int(1)), (vec![0, 1], int(-1))],
        )
        .unwrap();
        let div = divide_diagonal(&g, 0).unwrap();
        assert_eq!(div.quotient.term_count(), 1);
        assert_eq!(div.quotient.coeff(&[0, 0]), int(1));
    }

    #[test]
    fn diagonal_division_against_oracle_with_certificate() {
        // f = sum_{i+j<=6} t^i x^j / (i+j+1) at p = 5, n = 1
        let spec = SeriesSpec::power(p(5), &["t", "x"], 6).unwrap();
        let mut entries = Vec::new();
        for i in 0..=6i64 {
            for j in 0..=6 - i {
                entries.push((vec![i, j], q(1, i + j + 1)));
            }
        }
        let f = GrowthSeries::from_coeffs(spec, entries.clone()).unwrap();
        let div = divide_diagonal(&f, 1).unwrap();
        assert!(div.quotient_norm <= div.bound);

        let oracle = diagonal_oracle(
            &entries.into_iter().collect(),
            6,
            6,
        );
        // implementation must match the oracle on its exact simplex
        for (idx, c) in div.quotient.support() {
            assert_eq!(oracle.get(&(idx[0], idx[1])).cloned().unwrap_or_else(Scalar::zero), *c);
        }
        for ((i, j), c) in &oracle {
            if i + j <= div.exact_total_degree {
                assert_eq!(div.quotient.coeff(&[*i, *j]), c.clone());
            }
        }
    }

    #[test]
    fn linear_division_examples() {
        // (t - c) divides t^2 - c^2 with quotient t + c, p = 3, c = 2
        let spec = SeriesSpec::power(p(3), &["t"], 2).unwrap();
        let h_prime = GrowthSeries::from_coeffs(
            spec.clone(),
            vec![(vec![0], int(-4)), (vec![2], int(1))],
        )
        .unwrap();
        let div = divide_linear(&h_prime, &int(1), &int(2), &[0, 1]).unwrap();
        assert_eq!(div.quotient.coeff(&[0]), int(2));
        assert_eq!(div.quotient.coeff(&[1]), int(1));

        // t - 2 divided by (t - 2) is 1
        let lin = GrowthSeries::from_coeffs(
            SeriesSpec::power(p(3), &["t"], 1).unwrap(),
            vec![(vec![0], int(-2)), (vec![1], int(1))],
        )
        .unwrap();
        let div = divide_linear(&lin, &int(1), &int(2), &[]).unwrap();
        assert_eq!(div.quotient.term_count(), 1);
        assert_eq!(div.quotient.coeff(&[0]), int(1));

        // non-multiple: t^2 - c^2 + 1 leaves a remainder
        let bad = GrowthSeries::from_coeffs(
            SeriesSpec::power(p(3), &["t"], 2).unwrap(),
            vec![(vec![0], int(-3)), (vec![2], int(1))],
        )
        .unwrap();
        assert!(matches!(divide_linear(&bad, &int(1), &int(2), &[]), Err(Error::NotDivisible(_))));

        // non-unit divisor is rejected
        assert!(matches!(
            divide_linear(&lin, &int(3), &int(2), &[]),
            Err(Error::NonUnit(_))
        ));
    }

    #[test]
    fn linear_division_round_trip() {
        // h = sum_{i=0..6} i! t^i, h' = (t - 2) h computed with padded windows
        let p3 = p(3);
        let spec7 = SeriesSpec::power(p3, &["t"], 7).unwrap();
        let mut fact = int(1);
        let mut entries = vec![(vec![0i64], int(1))];
        for i in 1..=6i64 {
            fact = fact * int(i);
            entries.push((vec![i], fact.clone()));
        }
        let h = GrowthSeries::from_coeffs(spec7.clone(), entries).unwrap();
        let lin = GrowthSeries::from_coeffs(
            spec7,
            vec![(vec![0], int(-2)), (vec![1], int(1))],
        )
        .unwrap();
        let h_prime = lin.mul(&h).unwrap();
        let div = divide_linear(&h_prime, &int(1), &int(2), &[1]).unwrap();
        assert_eq!(div.quotient, h);
        assert!(div.certificates[0].quotient_norm <= div.certificates[0].input_norm);
    }

    #[test]
    fn substitution_matches_expansion() {
        // substitute y -> t + 5 in sum_{i=0..5} y^i at p = 5
        let yspec = SeriesSpec::power(p(5), &["y"], 5).unwrap();
        let f = GrowthSeries::from_coeffs(yspec, (0..=5).map(|i| (vec![i], int(1)))).unwrap();
        let tspec = SeriesSpec::power(p(5), &["t"], 5).unwrap();
        let g = GrowthSeries::from_coeffs(
            tspec.clone(),
            vec![(vec![0], int(5)), (vec![1], int(1))],
        )
        .unwrap();
        let sub = f.substitute("y", &g).unwrap();

        // dense oracle: expand sum (t+5)^j by repeated convolution
        let mut expect = vec![Scalar::zero(); 6];
        let mut power = vec![Scalar::zero(); 6];
        power[0] = Scalar::one();
        for j in 0..=5usize {
            if j > 0 {
                let mut next = vec![Scalar::zero(); 6];
                for (k, c) in power.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    next[k] += c * int(5);
                    if k + 1 < 6 {
                        next[k + 1] += c;
                    }
                }
                power = next;
            }
            for k in 0..6 {
                expect[k] += &power[k];
            }
        }
        for (k, c) in expect.iter().enumerate() {
            assert_eq!(&sub.coeff(&[k as i64]), c, "degree {k}");
        }
    }

    #[test]
    fn substitution_constant_root() {
        // y - c at y -> c collapses to zero
        let spec = SeriesSpec::power(p(5), &["y"], 3).unwrap();
        let f = GrowthSeries::from_coeffs(
            spec,
            vec![(vec![0], int(-2)), (vec![1], int(1))],
        )
        .unwrap();
        let c = GrowthSeries::constant(SeriesSpec::power(p(5), &["t"], 3).unwrap(), int(2));
        let sub = f.substitute("y", &c).unwrap();
        assert!(sub.is_zero());
    }

    #[test]
    fn substitution_rejects_unbounded_image() {
        let spec = SeriesSpec::power(p(5), &["y"], 3).unwrap();
        let f = GrowthSeries::var(spec, "y").unwrap();
        let g = GrowthSeries::constant(
            SeriesSpec::power(p(5), &["t"], 3).unwrap(),
            q(1, 5), // |1/5|_5 = 5 > 1
        );
        assert!(matches!(
            f.substitute("y", &g),
            Err(Error::DivergentSubstitution(_))
        ));
    }

    #[test]
    fn monomial_substitution_inverts_the_line() {
        // s -> t^-1 maps a power window into a Laurent one, exactly
        let spec = SeriesSpec::power(p(5), &["s"], 4).unwrap();
        let f = GrowthSeries::from_coeffs(
            spec,
            vec![(vec![0], int(3)), (vec![2], int(7)), (vec![4], int(-1))],
        )
        .unwrap();
        let g = f.substitute_monomial("s", &int(1), "t", -1).unwrap();
        assert_eq!(g.spec().windows()[0], Window::new(-4, 0));
        assert_eq!(g.coeff(&[0]), int(3));
        assert_eq!(g.coeff(&[-2]), int(7));
        assert_eq!(g.coeff(&[-4]), int(-1));
    }

    #[test]
    fn recip_geometric() {
        let spec = SeriesSpec::power(p(5), &["t"], 6).unwrap();
        let f = GrowthSeries::from_coeffs(
            spec.clone(),
            vec![(vec![0], int(1)), (vec![1], int(-1))],
        )
        .unwrap();
        let r = f.recip().unwrap();
        for i in 0..=6i64 {
            assert_eq!(r.coeff(&[i]), int(1));
        }
        let check = f.mul(&r).unwrap();
        assert_eq!(check, GrowthSeries::constant(spec, int(1)));
    }

    proptest! {
        #[test]
        fn norm_monotone_random(terms in proptest::collection::vec((0i64..32, -40i64..40, 1i64..40, -4i32..4), 1..12)) {
            let spec = SeriesSpec::power(Prime::new(2).unwrap(), &["t"], 32).unwrap();
            let mut m: BTreeMap<Vec<i64>, Scalar> = BTreeMap::new();
            for (i, n, d, e) in terms {
                let mut c = q(n, d);
                if e >= 0 {
                    c *= BigRational::from_integer(BigInt::from(2).pow(e as u32));
                } else {
                    c /= BigRational::from_integer(BigInt::from(2).pow((-e) as u32));
                }
                *m.entry(vec![i]).or_insert_with(Scalar::zero) += c;
            }
            m.retain(|_, c| !c.is_zero());
            let f = GrowthSeries { spec, coeffs: m };
            for n in -2..=2i64 {
                prop_assert!(f.norm_weighted(n + 1) <= f.norm_weighted(n));
            }
        }

        #[test]
        fn mul_bound_random(a in proptest::collection::vec((-60i64..60, 1i64..30), 5), b in proptest::collection::vec((-60i64..60, 1i64..30), 5)) {
            let spec = SeriesSpec::power(Prime::new(3).unwrap(), &["t"], 10).unwrap();
            let f = GrowthSeries::from_coeffs(spec.clone(), a.iter().enumerate().map(|(i, (n, d))| (vec![i as i64], q(*n, *d)))).unwrap();
            let g = GrowthSeries::from_coeffs(spec, b.iter().enumerate().map(|(i, (n, d))| (vec![i as i64], q(*n, *d)))).unwrap();
            let fg = f.mul(&g).unwrap();
            for n in 0..=2i64 {
                prop_assert!(fg.norm_weighted(2 * n) <= f.norm_weighted(n) * g.norm_weighted(n));
            }
        }
    }
}
