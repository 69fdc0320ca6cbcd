//! Truncated de Rham and Cech-de Rham complexes over the model algebras,
//! with exact rational differentials and fraction-free rank computation.
//!
//! Every algebra here is a finite monomial model: functions keep exponents
//! inside the window, and a k-form keeps each involved variable one step
//! lower so the exterior derivative is total on its domain. That staircase
//! makes d exact (no truncation at the edge, hence no spurious cokernel),
//! and d.d = 0 is verified by matrix multiplication whenever a complex is
//! assembled. Ranks are taken over the rationals: every desk example has
//! rational coefficients and rank over Q equals rank over Q_p.
//!
//! Covers are two-level: at most three named charts, pairwise overlaps with
//! their own models, and restriction maps sending each chart coordinate to
//! an exact monomial in the overlap coordinates. The total complex carries
//! the de Rham differential on each leg and the alternating restriction
//! difference on the other, with sign (-1)^(form degree) on the second.
//!
//! Two modelling notes. First, the tube of a presentation is modelled as the
//! polydisk in its ambient coordinates; tubes with several centers are
//! expressed as covers with one chart per center, whose block-diagonal total
//! complex adds dimensions. Second, at finite truncation the Tate disk has
//! vanishing first cohomology, because the integrability obstruction (the
//! unbounded denominators of formal integration) only appears asymptotically;
//! the projective-line cover therefore computes the proper answer at every
//! window. The tempered disk earns the same vanishing honestly, since its
//! integration bound holds at the norm level.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::padic::{Prime, Scalar};
use crate::series::{box_indices, pow_scalar, SeriesSpec, Window};
use crate::tube::{weak_fibration_data, TubePresentation};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Which completion a finite model stands in for. Tempered and Tate
/// polydisks share the same monomial basis at a fixed window; the kind
/// records the intended algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    TemperedPolydisk,
    TatePolydisk,
    LaurentAnnulus,
    Tube,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::TemperedPolydisk => "tempered-polydisk",
            ModelKind::TatePolydisk => "tate-polydisk",
            ModelKind::LaurentAnnulus => "laurent-annulus",
            ModelKind::Tube => "tube",
        };
        write!(f, "{name}")
    }
}

/// A finite monomial model of one of the catalog algebras: named variables
/// with per-variable exponent windows.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraModel {
    kind: ModelKind,
    spec: SeriesSpec,
}

impl AlgebraModel {
    pub fn tempered_polydisk(prime: Prime, dim: usize, trunc: i64) -> Result<AlgebraModel> {
        AlgebraModel::polydisk(ModelKind::TemperedPolydisk, prime, dim, trunc)
    }

    pub fn tate_polydisk(prime: Prime, dim: usize, trunc: i64) -> Result<AlgebraModel> {
        AlgebraModel::polydisk(ModelKind::TatePolydisk, prime, dim, trunc)
    }

    fn polydisk(kind: ModelKind, prime: Prime, dim: usize, trunc: i64) -> Result<AlgebraModel> {
        if dim == 0 {
            return Err(Error::SpecMismatch("a polydisk needs at least one variable".into()));
        }
        check_trunc(trunc)?;
        let vars: Vec<String> = if dim == 1 {
            vec!["t".to_string()]
        } else {
            (1..=dim).map(|i| format!("x{i}")).collect()
        };
        let windows = vec![Window::power(trunc); dim];
        Ok(AlgebraModel { kind, spec: SeriesSpec::new(prime, vars, windows)? })
    }

    /// One-variable Laurent model with window [-trunc, trunc].
    pub fn laurent_annulus(prime: Prime, trunc: i64) -> Result<AlgebraModel> {
        check_trunc(trunc)?;
        let spec =
            SeriesSpec::new(prime, vec!["t".to_string()], vec![Window::new(-trunc, trunc)])?;
        Ok(AlgebraModel { kind: ModelKind::LaurentAnnulus, spec })
    }

    /// The finite model of the tube of a presentation: a polydisk in the
    /// ambient coordinates at the presentation's window. Presentations with
    /// several centers are modelled as covers, one chart per center.
    pub fn tube(pres: &TubePresentation) -> Result<AlgebraModel> {
        check_trunc(pres.trunc())?;
        let windows = vec![Window::power(pres.trunc()); pres.ambient_dim()];
        let spec = SeriesSpec::new(pres.prime(), pres.ambient_vars().to_vec(), windows)?;
        Ok(AlgebraModel { kind: ModelKind::Tube, spec })
    }

    /// Rename the coordinates (covers name their own charts).
    pub fn with_vars(self, names: &[&str]) -> Result<AlgebraModel> {
        let vars: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let spec = SeriesSpec::new(self.spec.prime(), vars, self.spec.windows().to_vec())?;
        Ok(AlgebraModel { kind: self.kind, spec })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn prime(&self) -> Prime {
        self.spec.prime()
    }

    pub fn dim(&self) -> usize {
        self.spec.arity()
    }

    pub fn vars(&self) -> &[String] {
        self.spec.vars()
    }

    pub fn trunc(&self) -> i64 {
        self.spec.windows()[0].hi
    }

    pub fn function_spec(&self) -> &SeriesSpec {
        &self.spec
    }

    /// Exponent window of variable `v` inside a form that involves d`v`:
    /// one step below the function window, so differentiation is total.
    fn form_window(&self, v: usize) -> Window {
        let w = self.spec.windows()[v];
        if w.is_power() {
            Window::new(0, w.hi - 1)
        } else {
            Window::new(w.lo - 1, w.hi - 1)
        }
    }

    fn window_for(&self, v: usize, wedge: &[usize]) -> Window {
        if wedge.contains(&v) {
            self.form_window(v)
        } else {
            self.spec.windows()[v]
        }
    }
}

fn check_trunc(trunc: i64) -> Result<()> {
    if trunc < 1 {
        return Err(Error::SpecMismatch(format!("truncation {trunc} is below 1")));
    }
    Ok(())
}

/// One basis element of a cochain space: a monomial times a wedge of
/// coordinate differentials, tagged with the chart it lives on (empty chart
/// name for a complex over a single algebra).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub chart: String,
    /// Nonzero exponents only, in variable order.
    pub monomial: Vec<(String, i64)>,
    /// Differentials wedged together, ascending variable order.
    pub wedge: Vec<String>,
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.chart.is_empty() {
            write!(f, "{}: ", self.chart)?;
        }
        if self.monomial.is_empty() {
            write!(f, "1")?;
        } else {
            for (i, (v, e)) in self.monomial.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                if *e == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{e}")?;
                }
            }
        }
        for v in &self.wedge {
            write!(f, " d{v}")?;
        }
        Ok(())
    }
}

/// A bounded complex of finite-dimensional spaces over the exact rationals.
/// The differential d_k: C^k -> C^{k+1} is stored as a
/// (dim C^{k+1}) x (dim C^k) matrix acting on coordinate columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex {
    bases: Vec<Vec<BasisElement>>,
    diffs: Vec<Mat>,
}

impl CochainComplex {
    /// Assemble a complex, checking shapes and that d.d = 0 exactly.
    pub fn new(bases: Vec<Vec<BasisElement>>, diffs: Vec<Mat>) -> Result<CochainComplex> {
        if bases.is_empty() {
            return Err(Error::SpecMismatch("a complex needs at least one degree".into()));
        }
        if diffs.len() + 1 != bases.len() {
            return Err(Error::SpecMismatch(format!(
                "{} degrees need {} differentials, got {}",
                bases.len(),
                bases.len() - 1,
                diffs.len()
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.nrows() != bases[k + 1].len() || d.ncols() != bases[k].len() {
                return Err(Error::SpecMismatch(format!(
                    "differential {k} is {}x{}, expected {}x{}",
                    d.nrows(),
                    d.ncols(),
                    bases[k + 1].len(),
                    bases[k].len()
                )));
            }
        }
        for k in 0..diffs.len().saturating_sub(1) {
            if !diffs[k + 1].mul(&diffs[k]).is_zero() {
                return Err(Error::CertificateViolation(format!(
                    "differential does not square to zero at degree {k}"
                )));
            }
        }
        Ok(CochainComplex { bases, diffs })
    }

    pub fn degree_count(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, k: usize) -> &[BasisElement] {
        &self.bases[k]
    }

    pub fn differential(&self, k: usize) -> &Mat {
        &self.diffs[k]
    }

    /// Space dimensions per degree.
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    /// dim ker(d_k) - rank(d_{k-1}) per degree, via exact fraction-free
    /// elimination.
    pub fn cohomology_dims(&self) -> Vec<i64> {
        let ranks: Vec<usize> = self.diffs.iter().map(Mat::rank).collect();
        (0..self.bases.len())
            .map(|k| {
                let dim = self.bases[k].len() as i64;
                let out = if k < ranks.len() { ranks[k] as i64 } else { 0 };
                let inc = if k > 0 { ranks[k - 1] as i64 } else { 0 };
                dim - out - inc
            })
            .collect()
    }
}

/// Cohomology dimensions of a complex.
pub fn cohomology_dims(cx: &CochainComplex) -> Vec<i64> {
    cx.cohomology_dims()
}

/// Basis bookkeeping for one algebra: per degree, the (wedge, exponents)
/// pairs in enumeration order plus the reverse lookup.
struct RawBasis {
    elems: Vec<Vec<(Vec<usize>, Vec<i64>)>>,
    index: Vec<BTreeMap<(Vec<usize>, Vec<i64>), usize>>,
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..d {
            cur.push(v);
            rec(v + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

fn enumerate_basis(alg: &AlgebraModel) -> RawBasis {
    let d = alg.dim();
    let mut elems = Vec::new();
    let mut index = Vec::new();
    for k in 0..=d {
        let mut list: Vec<(Vec<usize>, Vec<i64>)> = Vec::new();
        for wedge in combinations(d, k) {
            let windows: Vec<Window> = (0..d).map(|v| alg.window_for(v, &wedge)).collect();
            for exps in box_indices(&windows) {
                list.push((wedge.clone(), exps));
            }
        }
        let map = list.iter().cloned().enumerate().map(|(i, key)| (key, i)).collect();
        elems.push(list);
        index.push(map);
    }
    RawBasis { elems, index }
}

fn de_rham_matrices(alg: &AlgebraModel, basis: &RawBasis) -> Vec<Mat> {
    let d = alg.dim();
    (0..d)
        .map(|k| {
            let mut m = Mat::zeros(basis.elems[k + 1].len(), basis.elems[k].len());
            for (col, (wedge, exps)) in basis.elems[k].iter().enumerate() {
                for v in 0..d {
                    if wedge.contains(&v) {
                        continue;
                    }
                    let a = exps[v];
                    if a == 0 {
                        continue;
                    }
                    let pos = wedge.iter().position(|&i| i > v).unwrap_or(wedge.len());
                    let mut nw = wedge.clone();
                    nw.insert(pos, v);
                    let mut ne = exps.clone();
                    ne[v] -= 1;
                    let row = basis.index[k + 1][&(nw, ne)];
                    let sign = if pos % 2 == 0 { 1 } else { -1 };
                    m.set(row, col, BigRational::from_integer(BigInt::from(a * sign)));
                }
            }
            m
        })
        .collect()
}

fn label_basis(alg: &AlgebraModel, raw: &RawBasis, chart: &str) -> Vec<Vec<BasisElement>> {
    raw.elems
        .iter()
        .map(|list| {
            list.iter()
                .map(|(wedge, exps)| BasisElement {
                    chart: chart.to_string(),
                    monomial: alg
                        .vars()
                        .iter()
                        .zip(exps)
                        .filter(|(_, &e)| e != 0)
                        .map(|(v, &e)| (v.clone(), e))
                        .collect(),
                    wedge: wedge.iter().map(|&v| alg.vars()[v].clone()).collect(),
                })
                .collect()
        })
        .collect()
}

/// The truncated de Rham complex of a model algebra: degree-k spaces spanned
/// by windowed monomials times k-fold wedges, with the exterior derivative
/// as exact matrices.
pub fn de_rham_complex(alg: &AlgebraModel) -> Result<CochainComplex> {
    let raw = enumerate_basis(alg);
    let diffs = de_rham_matrices(alg, &raw);
    CochainComplex::new(label_basis(alg, &raw, ""), diffs)
}

/// One variable's image under a restriction map: var -> coeff * target^exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMap {
    pub coeff: Scalar,
    pub target: String,
    pub exponent: i64,
}

/// A named chart of a cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub model: AlgebraModel,
}

/// A pairwise overlap: its own model plus the restriction maps from the two
/// charts, one monomial image per chart variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlap {
    pub left: String,
    pub right: String,
    pub model: AlgebraModel,
    pub left_map: Vec<MonomialMap>,
    pub right_map: Vec<MonomialMap>,
}

/// A two-level cover: at most three named charts with pairwise overlaps.
/// Restriction maps are checked on the coordinate generators here; full
/// basis images are checked when the total complex is built.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverSpec {
    charts: Vec<Chart>,
    overlaps: Vec<Overlap>,
}

impl CoverSpec {
    pub fn new(charts: Vec<Chart>, overlaps: Vec<Overlap>) -> Result<CoverSpec> {
        if charts.is_empty() || charts.len() > 3 {
            return Err(Error::SpecMismatch(format!(
                "a cover needs one to three charts, got {}",
                charts.len()
            )));
        }
        for (i, c) in charts.iter().enumerate() {
            if charts[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::SpecMismatch(format!("duplicate chart name `{}`", c.name)));
            }
            if c.model.prime() != charts[0].model.prime() {
                return Err(Error::SpecMismatch("charts disagree on the prime".into()));
            }
        }
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for ov in &overlaps {
            let li = chart_position(&charts, &ov.left)?;
            let ri = chart_position(&charts, &ov.right)?;
            if li == ri {
                return Err(Error::SpecMismatch(format!(
                    "overlap joins chart `{}` with itself",
                    ov.left
                )));
            }
            let key = (li.min(ri), li.max(ri));
            if seen.contains(&key) {
                return Err(Error::SpecMismatch(format!(
                    "duplicate overlap between `{}` and `{}`",
                    ov.left, ov.right
                )));
            }
            seen.push(key);
            if ov.model.prime() != charts[0].model.prime() {
                return Err(Error::SpecMismatch("overlap disagrees on the prime".into()));
            }
            check_restriction(&charts[li].model, &ov.left_map, &ov.model)?;
            check_restriction(&charts[ri].model, &ov.right_map, &ov.model)?;
        }
        Ok(CoverSpec { charts, overlaps })
    }

    /// Convenience: a cover with a single chart and no overlaps.
    pub fn single(name: &str, model: AlgebraModel) -> Result<CoverSpec> {
        CoverSpec::new(vec![Chart { name: name.to_string(), model }], Vec::new())
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn overlaps(&self) -> &[Overlap] {
        &self.overlaps
    }
}

fn chart_position(charts: &[Chart], name: &str) -> Result<usize> {
    charts
        .iter()
        .position(|c| c.name == name)
        .ok_or_else(|| Error::SpecMismatch(format!("overlap references unknown chart `{name}`")))
}

fn check_restriction(chart: &AlgebraModel, map: &[MonomialMap], ov: &AlgebraModel) -> Result<()> {
    if map.len() != chart.dim() {
        return Err(Error::SpecMismatch(format!(
            "restriction map has {} images for {} chart variables",
            map.len(),
            chart.dim()
        )));
    }
    for (v, m) in map.iter().enumerate() {
        if m.coeff.is_zero() {
            return Err(Error::SpecMismatch(format!(
                "restriction of `{}` has zero coefficient",
                chart.vars()[v]
            )));
        }
        let t = ov.function_spec().var_index(&m.target)?;
        if !ov.function_spec().windows()[t].contains(m.exponent) {
            return Err(Error::IncompatibleWindows(format!(
                "generator `{}` restricts to {}^{} outside the overlap window",
                chart.vars()[v],
                m.target,
                m.exponent
            )));
        }
    }
    Ok(())
}

/// Pull a chart basis element back along a restriction map. Returns the
/// overlap basis position and the exact coefficient, None when the pullback
/// vanishes (a constant image under d, or a repeated wedge target), and an
/// error when the image leaves the overlap window.
fn restrict_element(
    wedge: &[usize],
    exps: &[i64],
    maps: &[MonomialMap],
    ov: &AlgebraModel,
    ov_raw: &RawBasis,
) -> Result<Option<(usize, Scalar)>> {
    let mut coeff = Scalar::one();
    let mut acc = vec![0i64; ov.dim()];
    let mut tpos = Vec::with_capacity(maps.len());
    for m in maps {
        tpos.push(ov.function_spec().var_index(&m.target)?);
    }
    for (v, m) in maps.iter().enumerate() {
        let a = exps[v];
        if a != 0 {
            coeff = coeff * pow_scalar(&m.coeff, a);
        }
        acc[tpos[v]] += m.exponent * a;
    }
    let mut targets: Vec<usize> = Vec::with_capacity(wedge.len());
    let mut sign = 1i64;
    for &v in wedge {
        let e = maps[v].exponent;
        if e == 0 {
            return Ok(None);
        }
        coeff = coeff * &maps[v].coeff * BigRational::from_integer(BigInt::from(e));
        acc[tpos[v]] += e - 1;
        targets.push(tpos[v]);
    }
    for i in 1..targets.len() {
        let mut j = i;
        while j > 0 && targets[j - 1] > targets[j] {
            targets.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if targets.windows(2).any(|w| w[0] == w[1]) {
        return Ok(None);
    }
    for v in 0..ov.dim() {
        if !ov.window_for(v, &targets).contains(acc[v]) {
            return Err(Error::IncompatibleWindows(format!(
                "restriction leaves the overlap window at {}^{}",
                ov.vars()[v],
                acc[v]
            )));
        }
    }
    let row = ov_raw.index[targets.len()][&(targets, acc)];
    if sign < 0 {
        coeff = -coeff;
    }
    Ok(Some((row, coeff)))
}

fn paste(dst: &mut Mat, src: &Mat, row0: usize, col0: usize) {
    for i in 0..src.nrows() {
        for j in 0..src.ncols() {
            let v = src.get(i, j);
            if !v.is_zero() {
                dst.set(row0 + i, col0 + j, v.clone());
            }
        }
    }
}

/// The total complex of a two-level cover: chart de Rham complexes in Cech
/// level zero, overlap complexes shifted to level one, the restriction
/// difference (right minus left) with sign (-1)^(form degree) between them.
pub fn cech_de_rham(cover: &CoverSpec) -> Result<CochainComplex> {
    let charts = cover.charts();
    let overlaps = cover.overlaps();
    let chart_raw: Vec<RawBasis> = charts.iter().map(|c| enumerate_basis(&c.model)).collect();
    let chart_diff: Vec<Vec<Mat>> = charts
        .iter()
        .zip(&chart_raw)
        .map(|(c, raw)| de_rham_matrices(&c.model, raw))
        .collect();
    let ov_raw: Vec<RawBasis> = overlaps.iter().map(|o| enumerate_basis(&o.model)).collect();
    let ov_diff: Vec<Vec<Mat>> = overlaps
        .iter()
        .zip(&ov_raw)
        .map(|(o, raw)| de_rham_matrices(&o.model, raw))
        .collect();

    let top_chart = charts.iter().map(|c| c.model.dim()).max().unwrap_or(0);
    let top_ov = overlaps.iter().map(|o| o.model.dim() + 1).max().unwrap_or(0);
    let top = top_chart.max(top_ov);

    // Block offsets per total degree; usize::MAX marks an absent block.
    let absent = usize::MAX;
    let mut chart_off = vec![vec![absent; top + 1]; charts.len()];
    let mut ov_off = vec![vec![absent; top + 1]; overlaps.len()];
    let mut bases: Vec<Vec<BasisElement>> = Vec::new();
    for n in 0..=top {
        let mut cur: Vec<BasisElement> = Vec::new();
        for (c, chart) in charts.iter().enumerate() {
            if n <= chart.model.dim() {
                chart_off[c][n] = cur.len();
                cur.extend(label_one_degree(&chart.model, &chart_raw[c], n, &chart.name));
            }
        }
        for (o, ov) in overlaps.iter().enumerate() {
            if n >= 1 && n - 1 <= ov.model.dim() {
                ov_off[o][n] = cur.len();
                let name = format!("{}&{}", ov.left, ov.right);
                cur.extend(label_one_degree(&ov.model, &ov_raw[o], n - 1, &name));
            }
        }
        bases.push(cur);
    }

    let mut diffs: Vec<Mat> = Vec::new();
    for n in 0..top {
        let mut m = Mat::zeros(bases[n + 1].len(), bases[n].len());
        for (c, chart) in charts.iter().enumerate() {
            if n < chart.model.dim() {
                paste(&mut m, &chart_diff[c][n], chart_off[c][n + 1], chart_off[c][n]);
            }
        }
        for (o, ov) in overlaps.iter().enumerate() {
            if ov_off[o][n + 1] != absent {
                // restriction difference from the charts, form degree n
                let cech_sign = if n % 2 == 0 { 1i64 } else { -1 };
                for (side, chart_name) in [(-1i64, &ov.left), (1, &ov.right)] {
                    let ci = chart_position(charts, chart_name)?;
                    let maps = if side < 0 { &ov.left_map } else { &ov.right_map };
                    if chart_off[ci][n] == absent || n > charts[ci].model.dim() {
                        continue;
                    }
                    for (col, (wedge, exps)) in chart_raw[ci].elems[n].iter().enumerate() {
                        let Some((row, coeff)) =
                            restrict_element(wedge, exps, maps, &ov.model, &ov_raw[o])?
                        else {
                            continue;
                        };
                        let total = coeff
                            * BigRational::from_integer(BigInt::from(side * cech_sign));
                        let r = ov_off[o][n + 1] + row;
                        let c2 = chart_off[ci][n] + col;
                        m.set(r, c2, m.get(r, c2) + total);
                    }
                }
                // de Rham differential inside the overlap, form degree n-1
                if n >= 1 && ov_off[o][n] != absent && n - 1 < ov.model.dim() {
                    paste(&mut m, &ov_diff[o][n - 1], ov_off[o][n + 1], ov_off[o][n]);
                }
            }
        }
        diffs.push(m);
    }
    CochainComplex::new(bases, diffs)
}

fn label_one_degree(
    alg: &AlgebraModel,
    raw: &RawBasis,
    k: usize,
    chart: &str,
) -> Vec<BasisElement> {
    raw.elems[k]
        .iter()
        .map(|(wedge, exps)| BasisElement {
            chart: chart.to_string(),
            monomial: alg
                .vars()
                .iter()
                .zip(exps)
                .filter(|(_, &e)| e != 0)
                .map(|(v, &e)| (v.clone(), e))
                .collect(),
            wedge: wedge.iter().map(|&v| alg.vars()[v].clone()).collect(),
        })
        .collect()
}

/// Tube cohomology before and after extending the ambient space: the finite
/// shadow of embedding independence.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrationReport {
    pub base: Vec<i64>,
    pub extended: Vec<i64>,
    pub consistent: bool,
}

impl FibrationReport {
    pub fn from_dims(base: Vec<i64>, extended: Vec<i64>) -> FibrationReport {
        let consistent = dims_consistent(&base, &extended);
        FibrationReport { base, extended, consistent }
    }
}

impl fmt::Display for FibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |d: &[i64]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        writeln!(f, "base:     {}", show(&self.base))?;
        writeln!(f, "extended: {}", show(&self.extended))?;
        write!(f, "verdict: {}", if self.consistent { "consistent" } else { "inconsistent" })
    }
}

/// Shared degrees agree and the extra degrees vanish.
pub fn dims_consistent(base: &[i64], extended: &[i64]) -> bool {
    let shared = base.len().min(extended.len());
    base[..shared] == extended[..shared]
        && base[shared..].iter().all(|&d| d == 0)
        && extended[shared..].iter().all(|&d| d == 0)
}

/// Compare tube cohomology dims of a presentation against the same
/// presentation pushed into a larger ambient space, at matching windows.
pub fn compare_weak_fibration(pres: &TubePresentation, d: i64) -> Result<FibrationReport> {
    let ext = weak_fibration_data(pres, d)?;
    let base = de_rham_complex(&AlgebraModel::tube(pres)?)?.cohomology_dims();
    let extended = de_rham_complex(&AlgebraModel::tube(&ext)?)?.cohomology_dims();
    Ok(FibrationReport::from_dims(base, extended))
}
