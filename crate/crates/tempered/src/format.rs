//! Line-oriented text formats for series, differential systems, tube
//! presentations, generator relations, and covers, plus the CSV emitter for
//! cohomology dimensions.
//!
//! Every format is bit-exact: emit produces a canonical rendering, parse
//! accepts it back to an identical value, and rationals are always reduced
//! with the denominator omitted when it is 1. "#" starts a comment anywhere
//! on a line; blank lines are skipped; header keys are fixed and ordered, and
//! unknown keys are errors. Parse failures carry 1-based line numbers and map
//! to the parse exit code; mathematically invalid but well-formed content
//! (for example a lift with sup norm above 1) surfaces as the owning
//! module's domain error instead.

use crate::derham::{AlgebraModel, Chart, CoverSpec, ModelKind, MonomialMap, Overlap};
use crate::error::{Error, Result};
use crate::ode::DiffSystem;
use crate::padic::{Prime, Scalar};
use crate::series::{GrowthSeries, SeriesSpec, Window};
use crate::tube::{GeneratorRelation, TubePresentation};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

/// Cursor over the meaningful lines of a file: comments stripped, blanks
/// skipped, 1-based numbering preserved for errors.
struct Lines<'a> {
    rest: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Lines<'a> {
        let rest = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    None
                } else {
                    Some((i + 1, line))
                }
            })
            .collect();
        Lines { rest, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.rest.get(self.pos).copied();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.rest.get(self.pos).copied()
    }
}

fn expect_key<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str)> {
    match lines.next() {
        Some((n, line)) => match line.strip_prefix(key).and_then(|r| r.strip_prefix(':')) {
            Some(value) => Ok((n, value.trim())),
            None => Err(Error::parse(n, format!("expected `{key}:`, found `{line}`"))),
        },
        None => Err(Error::parse(0, format!("missing `{key}:` line"))),
    }
}

/// Parse "a/b" or "a" into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Scalar> {
    rational(s).ok_or_else(|| Error::parse(0, format!("malformed rational `{s}`")))
}

fn rational(s: &str) -> Option<Scalar> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).ok()?;
    let d = BigInt::from_str(den).ok()?;
    if d <= BigInt::zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Canonical rendering: reduced, denominator omitted when 1.
pub fn show_rational(x: &Scalar) -> String {
    x.to_string()
}

fn parse_i64(n: usize, s: &str, what: &str) -> Result<i64> {
    s.trim().parse::<i64>().map_err(|_| Error::parse(n, format!("malformed {what} `{s}`")))
}

fn parse_window(n: usize, s: &str) -> Result<Window> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Error::parse(n, format!("malformed window `{s}` (want lo..hi)")))?;
    Ok(Window::new(parse_i64(n, lo, "window bound")?, parse_i64(n, hi, "window bound")?))
}

fn show_window(w: &Window) -> String {
    format!("{}..{}", w.lo, w.hi)
}

fn parse_prime_line(lines: &mut Lines<'_>) -> Result<Prime> {
    let (n, value) = expect_key(lines, "prime")?;
    let p = value
        .parse::<u64>()
        .map_err(|_| Error::parse(n, format!("malformed prime `{value}`")))?;
    Prime::new(p).map_err(|_| Error::parse(n, format!("{p} is not prime")))
}

fn parse_names(n: usize, value: &str) -> Result<Vec<String>> {
    let names: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(Error::parse(n, "empty variable name"));
    }
    Ok(names)
}

fn parse_spec_header(lines: &mut Lines<'_>) -> Result<SeriesSpec> {
    let prime = parse_prime_line(lines)?;
    let (vn, vval) = expect_key(lines, "vars")?;
    let vars = parse_names(vn, vval)?;
    let (wn, wval) = expect_key(lines, "window")?;
    let windows = wval
        .split(',')
        .map(|w| parse_window(wn, w))
        .collect::<Result<Vec<Window>>>()?;
    if windows.len() != vars.len() {
        return Err(Error::parse(
            wn,
            format!("{} windows for {} variables", windows.len(), vars.len()),
        ));
    }
    SeriesSpec::new(prime, vars, windows).map_err(|e| Error::parse(wn, e.to_string()))
}

fn emit_spec_header(out: &mut String, spec: &SeriesSpec) {
    let _ = writeln!(out, "prime: {}", spec.prime().get());
    let _ = writeln!(out, "vars: {}", spec.vars().join(","));
    let windows: Vec<String> = spec.windows().iter().map(show_window).collect();
    let _ = writeln!(out, "window: {}", windows.join(","));
}

/// One "<j1>,…,<jm> : <rational>" line, checked against the spec.
fn parse_body_line(
    n: usize,
    line: &str,
    spec: &SeriesSpec,
    seen: &mut BTreeSet<Vec<i64>>,
) -> Result<(Vec<i64>, Scalar)> {
    let (idx_part, coeff_part) = line
        .split_once(':')
        .ok_or_else(|| Error::parse(n, format!("expected `indices : rational`, found `{line}`")))?;
    let idx = idx_part
        .split(',')
        .map(|j| parse_i64(n, j, "exponent"))
        .collect::<Result<Vec<i64>>>()?;
    if idx.len() != spec.arity() {
        return Err(Error::parse(
            n,
            format!("{} exponents for {} variables", idx.len(), spec.arity()),
        ));
    }
    for (j, w) in idx.iter().zip(spec.windows()) {
        if !w.contains(*j) {
            return Err(Error::parse(n, format!("exponent {j} outside window {w}")));
        }
    }
    if !seen.insert(idx.clone()) {
        return Err(Error::parse(n, format!("duplicate index {}", idx_part.trim())));
    }
    let coeff = rational(coeff_part)
        .ok_or_else(|| Error::parse(n, format!("malformed rational `{}`", coeff_part.trim())))?;
    Ok((idx, coeff))
}

fn emit_body(out: &mut String, f: &GrowthSeries) {
    for (idx, c) in f.support() {
        let idx_s: Vec<String> = idx.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(out, "{} : {}", idx_s.join(","), show_rational(c));
    }
}

/// Parse a full series file: header plus body lines until end of input.
pub fn parse_series(text: &str) -> Result<GrowthSeries> {
    let mut lines = Lines::new(text);
    let spec = parse_spec_header(&mut lines)?;
    let mut seen = BTreeSet::new();
    let mut coeffs = Vec::new();
    while let Some((n, line)) = lines.next() {
        let (idx, c) = parse_body_line(n, line, &spec, &mut seen)?;
        if !c.is_zero() {
            coeffs.push((idx, c));
        }
    }
    GrowthSeries::from_coeffs(spec, coeffs).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn emit_series(f: &GrowthSeries) -> String {
    let mut out = String::new();
    emit_spec_header(&mut out, f.spec());
    emit_body(&mut out, f);
    out
}

/// Parse a differential system: series header (one variable), "dim: m", and
/// "entry i j:" blocks with series body lines. Missing entries are zero.
pub fn parse_system(text: &str) -> Result<DiffSystem> {
    let mut lines = Lines::new(text);
    let spec = parse_spec_header(&mut lines)?;
    if spec.arity() != 1 {
        return Err(Error::parse(0, "a differential system needs exactly one variable"));
    }
    let (dn, dval) = expect_key(&mut lines, "dim")?;
    let m = dval
        .parse::<usize>()
        .map_err(|_| Error::parse(dn, format!("malformed dimension `{dval}`")))?;
    if m == 0 {
        return Err(Error::parse(dn, "dimension must be positive"));
    }
    let mut rows = vec![vec![GrowthSeries::zero(spec.clone()); m]; m];
    let mut filled = BTreeSet::new();
    while let Some((n, line)) = lines.next() {
        let header = line
            .strip_prefix("entry")
            .and_then(|r| r.strip_suffix(':'))
            .ok_or_else(|| Error::parse(n, format!("expected `entry i j:`, found `{line}`")))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::parse(n, format!("expected `entry i j:`, found `{line}`")));
        }
        let i = parse_i64(n, parts[0], "entry row")? as usize;
        let j = parse_i64(n, parts[1], "entry column")? as usize;
        if i == 0 || i > m || j == 0 || j > m {
            return Err(Error::parse(n, format!("entry {i} {j} outside a {m}x{m} system")));
        }
        if !filled.insert((i, j)) {
            return Err(Error::parse(n, format!("entry {i} {j} given twice")));
        }
        let mut seen = BTreeSet::new();
        let mut coeffs = Vec::new();
        while let Some((bn, body)) = lines.peek() {
            if body.starts_with("entry") {
                break;
            }
            lines.next();
            let (idx, c) = parse_body_line(bn, body, &spec, &mut seen)?;
            if !c.is_zero() {
                coeffs.push((idx, c));
            }
        }
        rows[i - 1][j - 1] = GrowthSeries::from_coeffs(spec.clone(), coeffs)
            .map_err(|e| Error::parse(n, e.to_string()))?;
    }
    DiffSystem::new(rows)
}

pub fn emit_system(sys: &DiffSystem) -> String {
    let mut out = String::new();
    emit_spec_header(&mut out, sys.spec());
    let _ = writeln!(out, "dim: {}", sys.dim());
    for i in 1..=sys.dim() {
        for j in 1..=sys.dim() {
            let _ = writeln!(out, "entry {i} {j}:");
            emit_body(&mut out, sys.matrix().entry(i - 1, j - 1));
        }
    }
    out
}

/// Parse a tube presentation: ambient series header (equal power windows),
/// "tube-vars:" line, and "lift i:" blocks numbered 1..s in order.
pub fn parse_presentation(text: &str) -> Result<TubePresentation> {
    let mut lines = Lines::new(text);
    let spec = parse_spec_header(&mut lines)?;
    let trunc = spec.windows()[0].hi;
    if spec.windows().iter().any(|w| !w.is_power() || w.hi != trunc) {
        return Err(Error::parse(0, "presentation windows must agree and start at 0"));
    }
    let (tn, tval) = expect_key(&mut lines, "tube-vars")?;
    let tube_vars = parse_names(tn, tval)?;
    let mut lifts: Vec<GrowthSeries> = Vec::new();
    while let Some((n, line)) = lines.next() {
        let header = line
            .strip_prefix("lift")
            .and_then(|r| r.strip_suffix(':'))
            .ok_or_else(|| Error::parse(n, format!("expected `lift i:`, found `{line}`")))?;
        let i = parse_i64(n, header, "lift number")? as usize;
        if i != lifts.len() + 1 {
            return Err(Error::parse(n, format!("expected lift {}, found lift {i}", lifts.len() + 1)));
        }
        let mut seen = BTreeSet::new();
        let mut coeffs = Vec::new();
        while let Some((bn, body)) = lines.peek() {
            if body.starts_with("lift") {
                break;
            }
            lines.next();
            let (idx, c) = parse_body_line(bn, body, &spec, &mut seen)?;
            if !c.is_zero() {
                coeffs.push((idx, c));
            }
        }
        lifts.push(
            GrowthSeries::from_coeffs(spec.clone(), coeffs)
                .map_err(|e| Error::parse(n, e.to_string()))?,
        );
    }
    TubePresentation::from_names(
        spec.prime(),
        spec.vars().to_vec(),
        tube_vars,
        lifts,
        trunc,
    )
}

pub fn emit_presentation(pres: &TubePresentation) -> String {
    let mut out = String::new();
    emit_spec_header(&mut out, pres.ambient_spec());
    let _ = writeln!(out, "tube-vars: {}", pres.tube_vars().join(","));
    for i in 0..pres.tube_dim() {
        let _ = writeln!(out, "lift {}:", i + 1);
        emit_body(&mut out, pres.lift(i));
    }
    out
}

/// Parse a generator relation: "source:"/"target:" counts, then sparse
/// "entry i j: <rational>" and "offset i: <rational>" lines (defaults zero).
pub fn parse_relation(text: &str) -> Result<GeneratorRelation> {
    let mut lines = Lines::new(text);
    let (sn, sval) = expect_key(&mut lines, "source")?;
    let s = sval
        .parse::<usize>()
        .map_err(|_| Error::parse(sn, format!("malformed count `{sval}`")))?;
    let (tn, tval) = expect_key(&mut lines, "target")?;
    let t = tval
        .parse::<usize>()
        .map_err(|_| Error::parse(tn, format!("malformed count `{tval}`")))?;
    if s == 0 || t == 0 {
        return Err(Error::parse(sn.max(tn), "relation dimensions must be positive"));
    }
    let mut h = vec![vec![Scalar::zero(); t]; s];
    let mut alpha = vec![Scalar::zero(); s];
    let mut seen_entry = BTreeSet::new();
    let mut seen_offset = BTreeSet::new();
    while let Some((n, line)) = lines.next() {
        if let Some(rest) = line.strip_prefix("entry") {
            let (head, value) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(n, format!("expected `entry i j: rational`, found `{line}`")))?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(n, format!("expected `entry i j: rational`, found `{line}`")));
            }
            let i = parse_i64(n, parts[0], "entry row")? as usize;
            let j = parse_i64(n, parts[1], "entry column")? as usize;
            if i == 0 || i > s || j == 0 || j > t {
                return Err(Error::parse(n, format!("entry {i} {j} outside a {s}x{t} relation")));
            }
            if !seen_entry.insert((i, j)) {
                return Err(Error::parse(n, format!("entry {i} {j} given twice")));
            }
            h[i - 1][j - 1] = rational(value)
                .ok_or_else(|| Error::parse(n, format!("malformed rational `{}`", value.trim())))?;
        } else if let Some(rest) = line.strip_prefix("offset") {
            let (head, value) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(n, format!("expected `offset i: rational`, found `{line}`")))?;
            let i = parse_i64(n, head, "offset row")? as usize;
            if i == 0 || i > s {
                return Err(Error::parse(n, format!("offset {i} outside {s} rows")));
            }
            if !seen_offset.insert(i) {
                return Err(Error::parse(n, format!("offset {i} given twice")));
            }
            alpha[i - 1] = rational(value)
                .ok_or_else(|| Error::parse(n, format!("malformed rational `{}`", value.trim())))?;
        } else {
            return Err(Error::parse(n, format!("expected `entry` or `offset`, found `{line}`")));
        }
    }
    GeneratorRelation::new(h, alpha)
}

pub fn emit_relation(rel: &GeneratorRelation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "source: {}", rel.source_dim());
    let _ = writeln!(out, "target: {}", rel.target_dim());
    for i in 1..=rel.source_dim() {
        for j in 1..=rel.target_dim() {
            let c = rel.coefficient(i - 1, j - 1);
            if !c.is_zero() {
                let _ = writeln!(out, "entry {i} {j}: {}", show_rational(c));
            }
        }
    }
    for i in 1..=rel.source_dim() {
        let a = rel.offset(i - 1);
        if !a.is_zero() {
            let _ = writeln!(out, "offset {i}: {}", show_rational(a));
        }
    }
    out
}

fn model_kind_name(kind: ModelKind) -> &'static str {
    match kind {
        // tube models serialize as their finite polydisk shadow
        ModelKind::TemperedPolydisk | ModelKind::Tube => "tempered-polydisk",
        ModelKind::TatePolydisk => "tate-polydisk",
        ModelKind::LaurentAnnulus => "laurent-annulus",
    }
}

/// model/vars/window block shared by charts and overlaps.
fn parse_model_block(lines: &mut Lines<'_>, prime: Prime) -> Result<AlgebraModel> {
    let (mn, mval) = expect_key(lines, "model")?;
    let (vn, vval) = expect_key(lines, "vars")?;
    let vars = parse_names(vn, vval)?;
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let (wn, wval) = expect_key(lines, "window")?;
    let windows = wval
        .split(',')
        .map(|w| parse_window(wn, w))
        .collect::<Result<Vec<Window>>>()?;
    if windows.len() != vars.len() {
        return Err(Error::parse(
            wn,
            format!("{} windows for {} variables", windows.len(), vars.len()),
        ));
    }
    let model = match mval {
        "tempered-polydisk" | "tate-polydisk" => {
            let hi = windows[0].hi;
            if windows.iter().any(|w| !w.is_power() || w.hi != hi) {
                return Err(Error::parse(wn, "polydisk windows must agree and start at 0"));
            }
            let base = if mval == "tempered-polydisk" {
                AlgebraModel::tempered_polydisk(prime, vars.len(), hi)
            } else {
                AlgebraModel::tate_polydisk(prime, vars.len(), hi)
            };
            base.map_err(|e| Error::parse(wn, e.to_string()))?
        }
        "laurent-annulus" => {
            if windows.len() != 1 || windows[0].lo != -windows[0].hi {
                return Err(Error::parse(wn, "an annulus needs one symmetric window"));
            }
            AlgebraModel::laurent_annulus(prime, windows[0].hi)
                .map_err(|e| Error::parse(wn, e.to_string()))?
        }
        other => return Err(Error::parse(mn, format!("unknown model `{other}`"))),
    };
    model.with_vars(&names).map_err(|e| Error::parse(vn, e.to_string()))
}

fn emit_model_block(out: &mut String, model: &AlgebraModel) {
    let _ = writeln!(out, "model: {}", model_kind_name(model.kind()));
    let _ = writeln!(out, "vars: {}", model.vars().join(","));
    let windows: Vec<String> =
        model.function_spec().windows().iter().map(show_window).collect();
    let _ = writeln!(out, "window: {}", windows.join(","));
}

/// Parse a cover: "prime:", then "chart <name>:" blocks and
/// "overlap <a> <b>:" blocks. Overlap restriction lines read
/// "<chart>.<var> -> <rational> * <target>^<exponent>".
pub fn parse_cover(text: &str) -> Result<CoverSpec> {
    let mut lines = Lines::new(text);
    let prime = parse_prime_line(&mut lines)?;
    let mut charts: Vec<Chart> = Vec::new();
    let mut overlaps: Vec<Overlap> = Vec::new();
    while let Some((n, line)) = lines.next() {
        if let Some(name) = line.strip_prefix("chart").and_then(|r| r.strip_suffix(':')) {
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::parse(n, format!("malformed chart name `{name}`")));
            }
            if !overlaps.is_empty() {
                return Err(Error::parse(n, "charts must come before overlaps"));
            }
            let model = parse_model_block(&mut lines, prime)?;
            charts.push(Chart { name: name.to_string(), model });
        } else if let Some(pair) = line.strip_prefix("overlap").and_then(|r| r.strip_suffix(':')) {
            let parts: Vec<&str> = pair.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(n, format!("expected `overlap a b:`, found `{line}`")));
            }
            let (left, right) = (parts[0].to_string(), parts[1].to_string());
            let model = parse_model_block(&mut lines, prime)?;
            let mut raw: Vec<(String, String, MonomialMap)> = Vec::new();
            let mut map_end = n;
            while let Some((bn, body)) = lines.peek() {
                if !body.contains("->") {
                    break;
                }
                lines.next();
                raw.push(parse_map_line(bn, body, &charts, &left, &right)?);
                map_end = bn;
            }
            let left_map = order_side(&raw, &charts, &left, map_end)?;
            let right_map = order_side(&raw, &charts, &right, map_end)?;
            overlaps.push(Overlap { left, right, model, left_map, right_map });
        } else {
            return Err(Error::parse(n, format!("expected `chart` or `overlap`, found `{line}`")));
        }
    }
    CoverSpec::new(charts, overlaps)
}

/// One restriction line: "<chart>.<var> -> <rational> * <target>^<exp>".
fn parse_map_line(
    n: usize,
    line: &str,
    charts: &[Chart],
    left: &str,
    right: &str,
) -> Result<(String, String, MonomialMap)> {
    let (lhs, rhs) = line.split_once("->").expect("checked by caller");
    let (chart_name, var) = lhs
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::parse(n, format!("expected `chart.var ->`, found `{line}`")))?;
    if chart_name != left && chart_name != right {
        return Err(Error::parse(n, format!("`{chart_name}` is not a chart of this overlap")));
    }
    let chart = charts
        .iter()
        .find(|c| c.name == chart_name)
        .ok_or_else(|| Error::parse(n, format!("unknown chart `{chart_name}`")))?;
    let var = var.trim();
    if !chart.model.vars().iter().any(|v| v == var) {
        return Err(Error::parse(n, format!("chart `{chart_name}` has no variable `{var}`")));
    }
    let (coeff_s, mono) = rhs
        .trim()
        .split_once('*')
        .ok_or_else(|| Error::parse(n, format!("expected `rational * var^exp`, found `{line}`")))?;
    let coeff = rational(coeff_s)
        .ok_or_else(|| Error::parse(n, format!("malformed rational `{}`", coeff_s.trim())))?;
    let (target, exp_s) = mono
        .trim()
        .split_once('^')
        .ok_or_else(|| Error::parse(n, format!("expected `var^exp`, found `{}`", mono.trim())))?;
    let exponent = parse_i64(n, exp_s, "exponent")?;
    Ok((
        chart_name.to_string(),
        var.to_string(),
        MonomialMap { coeff, target: target.trim().to_string(), exponent },
    ))
}

/// Collect one side's restriction lines into the chart's variable order,
/// requiring exactly one line per variable.
fn order_side(
    raw: &[(String, String, MonomialMap)],
    charts: &[Chart],
    name: &str,
    line: usize,
) -> Result<Vec<MonomialMap>> {
    let chart = charts
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::parse(line, format!("unknown chart `{name}`")))?;
    let mut ordered = Vec::with_capacity(chart.model.dim());
    for v in chart.model.vars() {
        let hits: Vec<&MonomialMap> = raw
            .iter()
            .filter(|(c, var, _)| c == name && var == v)
            .map(|(_, _, m)| m)
            .collect();
        match hits.len() {
            1 => ordered.push(hits[0].clone()),
            0 => {
                return Err(Error::parse(
                    line,
                    format!("missing a restriction for `{name}.{v}`"),
                ))
            }
            _ => return Err(Error::parse(line, format!("`{name}.{v}` restricted twice"))),
        }
    }
    Ok(ordered)
}

pub fn emit_cover(cover: &CoverSpec) -> String {
    let mut out = String::new();
    let prime = cover.charts()[0].model.prime();
    let _ = writeln!(out, "prime: {}", prime.get());
    for chart in cover.charts() {
        let _ = writeln!(out, "chart {}:", chart.name);
        emit_model_block(&mut out, &chart.model);
    }
    for ov in cover.overlaps() {
        let _ = writeln!(out, "overlap {} {}:", ov.left, ov.right);
        emit_model_block(&mut out, &ov.model);
        for (name, maps) in [(&ov.left, &ov.left_map), (&ov.right, &ov.right_map)] {
            let chart = cover
                .charts()
                .iter()
                .find(|c| &c.name == name)
                .expect("cover invariant: overlap charts exist");
            for (v, m) in chart.model.vars().iter().zip(maps) {
                let _ = writeln!(
                    out,
                    "{name}.{v} -> {} * {}^{}",
                    show_rational(&m.coeff),
                    m.target,
                    m.exponent
                );
            }
        }
    }
    out
}

/// CSV rendering of cohomology dimensions: header plus one row per degree.
pub fn emit_dims_csv(dims: &[i64]) -> String {
    let mut out = String::from("degree,dim\n");
    for (k, d) in dims.iter().enumerate() {
        let _ = writeln!(out, "{k},{d}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::GrowthSeries;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn int(n: i64) -> Scalar {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(n: i64, d: i64) -> Scalar {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn log_series(trunc: i64) -> GrowthSeries {
        let spec = SeriesSpec::power(prime(2), &["t"], trunc).unwrap();
        let coeffs = (1..=trunc).map(|m| (vec![m], ratio(1, m))).collect::<Vec<_>>();
        GrowthSeries::from_coeffs(spec, coeffs).unwrap()
    }

    #[test]
    fn rationals_round_trip() {
        for s in ["3", "-7/2", "0", "22/7", "-1"] {
            let x = parse_rational(s).unwrap();
            assert_eq!(show_rational(&x), s);
        }
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
        assert_eq!(show_rational(&ratio(4, 6)), "2/3");
        for bad in ["1/0", "1/-2", "x", "1.5", "", "1/2/3"] {
            assert!(parse_rational(bad).is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn series_round_trip_is_bit_exact() {
        let f = log_series(8);
        let text = emit_series(&f);
        let g = parse_series(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(emit_series(&g), text);
        assert!(text.starts_with("prime: 2\nvars: t\nwindow: 0..8\n"));
        assert!(text.contains("3 : 1/3\n"));
    }

    #[test]
    fn series_parser_reports_line_numbers() {
        let bad_key = "primes: 5\nvars: t\nwindow: 0..4\n";
        match parse_series(bad_key).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("wanted a parse error, got {other}"),
        }
        let cases = [
            ("prime: 4\nvars: t\nwindow: 0..4\n", 1),          // composite
            ("prime: 5\nvars: t\nwindow: 0..4,0..4\n", 3),     // window count
            ("prime: 5\nvars: t\nwindow: 0..4\n1,2 : 1\n", 4), // arity
            ("prime: 5\nvars: t\nwindow: 0..4\n9 : 1\n", 4),   // out of window
            ("prime: 5\nvars: t\nwindow: 0..4\n1 : 1\n1 : 2\n", 5), // duplicate
            ("prime: 5\nvars: t\nwindow: 0..4\n1 : 1/0\n", 4), // bad rational
            ("prime: 5\nvars: t\nwindow: 0..4\nnoise\n", 4),   // junk body
        ];
        for (text, want) in cases {
            match parse_series(text).unwrap_err() {
                Error::Parse { line, .. } => assert_eq!(line, want, "{text:?}"),
                other => panic!("wanted a parse error for {text:?}, got {other}"),
            }
        }
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# a log-type series\nprime: 2\n\nvars: t  # one variable\nwindow: 0..4\n1 : 1 # unit\n\n# done\n";
        let f = parse_series(text).unwrap();
        assert_eq!(f.coeff(&[1]), int(1));
        assert_eq!(f.term_count(), 1);
    }

    #[test]
    fn zero_coefficients_vanish_on_parse() {
        let text = "prime: 5\nvars: t\nwindow: 0..4\n1 : 0\n2 : 3\n";
        let f = parse_series(text).unwrap();
        assert_eq!(f.term_count(), 1);
        assert_eq!(f.coeff(&[2]), int(3));
    }

    #[test]
    fn system_round_trip_is_bit_exact() {
        let spec = SeriesSpec::power(prime(5), &["t"], 6).unwrap();
        let geometric = GrowthSeries::from_coeffs(
            spec.clone(),
            (0..=6).map(|j| (vec![j], int(1))).collect::<Vec<_>>(),
        )
        .unwrap();
        let zero = GrowthSeries::zero(spec.clone());
        let one = GrowthSeries::constant(spec.clone(), int(1));
        let sys = DiffSystem::new(vec![vec![geometric, one], vec![zero.clone(), zero]]).unwrap();
        let text = emit_system(&sys);
        let back = parse_system(&text).unwrap();
        assert_eq!(emit_system(&back), text);
        assert_eq!(back.matrix().entry(0, 0), sys.matrix().entry(0, 0));
        assert_eq!(back.matrix().entry(1, 1), sys.matrix().entry(1, 1));
        assert!(text.contains("dim: 2\nentry 1 1:\n"));
    }

    #[test]
    fn system_parser_rejects_bad_blocks() {
        let head = "prime: 5\nvars: t\nwindow: 0..4\ndim: 2\n";
        for (tail, what) in [
            ("entry 3 1:\n", "row out of range"),
            ("entry 1 1:\n0 : 1\nentry 1 1:\n", "repeated entry"),
            ("entry 1:\n", "missing column"),
            ("lift 1:\n", "foreign block"),
        ] {
            let err = parse_system(&format!("{head}{tail}")).unwrap_err();
            assert!(err.is_parse(), "{what}: {err}");
        }
        let err = parse_system("prime: 5\nvars: t,u\nwindow: 0..4,0..4\ndim: 1\n").unwrap_err();
        assert!(err.is_parse());
        let err = parse_system("prime: 5\nvars: t\nwindow: 0..4\n").unwrap_err();
        assert!(err.is_parse(), "missing dim line");
    }

    #[test]
    fn presentation_round_trip_is_bit_exact() {
        let spec = SeriesSpec::power(prime(3), &["x1", "x2"], 2).unwrap();
        let l1 = GrowthSeries::from_coeffs(
            spec.clone(),
            vec![(vec![1, 0], int(1)), (vec![0, 0], int(-1))],
        )
        .unwrap();
        let l2 = GrowthSeries::from_coeffs(
            spec.clone(),
            vec![(vec![0, 1], int(1)), (vec![2, 0], ratio(1, 2))],
        )
        .unwrap();
        let pres =
            TubePresentation::new(prime(3), &["x1", "x2"], &["y1", "y2"], vec![l1, l2], 2)
                .unwrap();
        let text = emit_presentation(&pres);
        let back = parse_presentation(&text).unwrap();
        assert_eq!(back, pres);
        assert_eq!(emit_presentation(&back), text);
        assert!(text.contains("tube-vars: y1,y2\nlift 1:\n"));
    }

    #[test]
    fn presentation_parser_rejects_bad_shape() {
        let err = parse_presentation(
            "prime: 3\nvars: x\nwindow: 0..2,0..3\ntube-vars: y\nlift 1:\n",
        )
        .unwrap_err();
        assert!(err.is_parse(), "window count mismatch: {err}");
        let err = parse_presentation(
            "prime: 3\nvars: x1,x2\nwindow: 0..2,0..3\ntube-vars: y\nlift 1:\n",
        )
        .unwrap_err();
        assert!(err.is_parse(), "unequal windows: {err}");
        let err = parse_presentation(
            "prime: 3\nvars: x\nwindow: 0..2\ntube-vars: y\nlift 2:\n",
        )
        .unwrap_err();
        assert!(err.is_parse(), "lift numbering: {err}");
        // well-formed file, mathematically bad lift: domain error, not parse
        let err = parse_presentation(
            "prime: 3\nvars: x\nwindow: 0..2\ntube-vars: y\nlift 1:\n0 : 1/3\n",
        )
        .unwrap_err();
        assert!(!err.is_parse(), "lift norm is a domain error: {err}");
        assert!(matches!(err, Error::RelationNorm(_)));
    }

    #[test]
    fn relation_round_trip_is_bit_exact() {
        let rel = GeneratorRelation::new(
            vec![vec![int(1), ratio(1, 5)], vec![int(0), int(1)]],
            vec![int(3), int(-3)],
        )
        .unwrap();
        let text = emit_relation(&rel);
        let back = parse_relation(&text).unwrap();
        assert_eq!(emit_relation(&back), text);
        assert_eq!(back.coefficient(0, 1), &ratio(1, 5));
        assert_eq!(back.offset(1), &int(-3));
        // sparse file: unlisted entries default to zero
        let sparse = parse_relation("source: 2\ntarget: 2\nentry 1 1: 1\n").unwrap();
        assert_eq!(sparse.coefficient(1, 0), &int(0));
        assert_eq!(sparse.offset(0), &int(0));
        let err = parse_relation("source: 1\ntarget: 1\nentry 2 1: 1\n").unwrap_err();
        assert!(err.is_parse());
    }

    fn p1_cover_text() -> String {
        [
            "prime: 5",
            "chart U:",
            "model: tate-polydisk",
            "vars: t",
            "window: 0..8",
            "chart V:",
            "model: tate-polydisk",
            "vars: s",
            "window: 0..8",
            "overlap U V:",
            "model: laurent-annulus",
            "vars: t",
            "window: -8..8",
            "U.t -> 1 * t^1",
            "V.s -> 1 * t^-1",
            "",
        ]
        .join("\n")
    }

    #[test]
    fn cover_round_trip_is_bit_exact() {
        let cover = parse_cover(&p1_cover_text()).unwrap();
        assert_eq!(cover.charts().len(), 2);
        assert_eq!(cover.overlaps().len(), 1);
        assert_eq!(cover.overlaps()[0].right_map[0].exponent, -1);
        let text = emit_cover(&cover);
        let back = parse_cover(&text).unwrap();
        assert_eq!(back, cover);
        assert_eq!(emit_cover(&back), text);
        assert_eq!(text, p1_cover_text());
    }

    #[test]
    fn cover_parser_rejects_bad_sections() {
        let cases = [
            ("prime: 5\nchart U:\nmodel: moebius\nvars: t\nwindow: 0..4\n", "unknown model"),
            ("prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: -2..4\n", "polydisk window"),
            (
                "prime: 5\nchart U:\nmodel: laurent-annulus\nvars: t\nwindow: -2..4\n",
                "asymmetric annulus",
            ),
            ("prime: 5\nslab U:\n", "unknown section"),
            (
                "prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: 0..4\nchart V:\nmodel: tate-polydisk\nvars: s\nwindow: 0..4\noverlap U V:\nmodel: laurent-annulus\nvars: t\nwindow: -4..4\nU.t -> 1 * t^1\n",
                "missing restriction",
            ),
            (
                "prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: 0..4\nchart V:\nmodel: tate-polydisk\nvars: s\nwindow: 0..4\noverlap U V:\nmodel: laurent-annulus\nvars: t\nwindow: -4..4\nU.t -> 1 * t^1\nU.t -> 1 * t^1\nV.s -> 1 * t^-1\n",
                "doubled restriction",
            ),
            (
                "prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: 0..4\nchart V:\nmodel: tate-polydisk\nvars: s\nwindow: 0..4\noverlap U V:\nmodel: laurent-annulus\nvars: t\nwindow: -4..4\nW.t -> 1 * t^1\nV.s -> 1 * t^-1\n",
                "foreign chart in map",
            ),
            (
                "prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: 0..4\nchart V:\nmodel: tate-polydisk\nvars: s\nwindow: 0..4\noverlap U V:\nmodel: laurent-annulus\nvars: t\nwindow: -4..4\nU.z -> 1 * t^1\nV.s -> 1 * t^-1\n",
                "foreign variable in map",
            ),
            (
                "prime: 5\nchart U:\nmodel: tate-polydisk\nvars: t\nwindow: 0..4\nchart V:\nmodel: tate-polydisk\nvars: s\nwindow: 0..4\noverlap U V:\nmodel: laurent-annulus\nvars: t\nwindow: -4..4\nU.t -> t^1\nV.s -> 1 * t^-1\n",
                "missing coefficient",
            ),
        ];
        for (text, what) in cases {
            let err = parse_cover(text).unwrap_err();
            assert!(err.is_parse(), "{what}: {err}");
        }
    }

    #[test]
    fn single_chart_cover_parses() {
        let text = "prime: 3\nchart D:\nmodel: tempered-polydisk\nvars: u,v\nwindow: 0..4,0..4\n";
        let cover = parse_cover(text).unwrap();
        assert_eq!(cover.charts().len(), 1);
        assert_eq!(cover.charts()[0].model.vars(), ["u", "v"]);
        assert!(cover.overlaps().is_empty());
        let text2 = emit_cover(&cover);
        assert_eq!(parse_cover(&text2).unwrap(), cover);
    }

    #[test]
    fn dims_csv_matches_the_advertised_shape() {
        assert_eq!(emit_dims_csv(&[1, 0]), "degree,dim\n0,1\n1,0\n");
        assert_eq!(emit_dims_csv(&[1, 0, 1]), "degree,dim\n0,1\n1,0\n2,1\n");
    }
}
