//! JSON system documents, report documents, trajectory CSV export and the
//! small text formats used on the command line.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::{Classification, ValidationReport};
use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly, ObservableMap};
use crate::transform::ReductionReport;
use crate::verify::{ControlSignal, CosimReport, Trajectory};
use crate::Embedding;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exps: Vec<u32>,
    pub coef: f64,
}

/// On-disk form of a super-linearization. `C`, `D` and `E` default to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub format_version: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m_block: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "C", default)]
    pub c: Option<Vec<f64>>,
    #[serde(rename = "D", default)]
    pub d: Option<Vec<f64>>,
    #[serde(rename = "E", default)]
    pub e: Option<Vec<f64>>,
    pub observables: Vec<Vec<TermDoc>>,
}

fn syntax(err: serde_json::Error) -> Error {
    Error::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

fn matrix(field: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::shape(
            field,
            format!("expected {nrows} rows, found {}", rows.len()),
        ));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::shape(
            field,
            format!("row {i} has {} entries, expected {ncols}", r.len()),
        ));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn vector(field: &str, v: Option<&[f64]>, len: usize) -> Result<DVector<f64>> {
    match v {
        None => Ok(DVector::zeros(len)),
        Some(v) if v.len() == len => Ok(DVector::from_column_slice(v)),
        Some(v) => Err(Error::shape(
            field,
            format!("expected {len} entries, found {}", v.len()),
        )),
    }
}

pub fn poly_from_terms(field: &str, n: usize, terms: &[TermDoc]) -> Result<MultiPoly<f64>> {
    for (k, t) in terms.iter().enumerate() {
        if t.exps.len() != n {
            return Err(Error::shape(
                format!("{field}[{k}].exps"),
                format!("expected {n} exponents, found {}", t.exps.len()),
            ));
        }
    }
    Ok(MultiPoly::from_terms(
        n,
        terms.iter().map(|t| (Monomial::new(t.exps.clone()), t.coef)),
    ))
}

impl SystemDocument {
    pub fn into_embedding(self) -> Result<Embedding> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnknownVersion(self.format_version));
        }
        let (n, m) = (self.n, self.m);
        if self.observables.len() != m {
            return Err(Error::shape(
                "observables",
                format!("expected {m} observables, found {}", self.observables.len()),
            ));
        }
        let entries = self
            .observables
            .iter()
            .enumerate()
            .map(|(j, terms)| poly_from_terms(&format!("observables[{j}]"), n, terms))
            .collect::<Result<Vec<_>>>()?;
        Embedding::new(
            matrix("A", &self.a, n, n)?,
            matrix("G", &self.g, n, m)?,
            matrix("H", &self.h, m, n)?,
            matrix("M", &self.m_block, m, m)?,
            vector("B", Some(&self.b), n)?,
            vector("C", self.c.as_deref(), m)?,
            vector("D", self.d.as_deref(), n)?,
            vector("E", self.e.as_deref(), m)?,
            ObservableMap::new(n, entries)?,
        )
    }

    pub fn from_embedding(l: &Embedding) -> Self {
        let rows = |x: &DMatrix<f64>| (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect();
        let vals = |x: &DVector<f64>| x.iter().copied().collect::<Vec<_>>();
        SystemDocument {
            format_version: FORMAT_VERSION.to_string(),
            n: l.n(),
            m: l.m_obs(),
            a: rows(&l.a),
            g: rows(&l.g),
            h: rows(&l.h),
            m_block: rows(&l.m),
            b: vals(&l.b),
            c: Some(vals(&l.c)),
            d: Some(vals(&l.d)),
            e: Some(vals(&l.e)),
            observables: l
                .p
                .entries()
                .iter()
                .map(|p| {
                    p.terms()
                        .map(|(mono, c)| TermDoc {
                            exps: mono.exps().to_vec(),
                            coef: c,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

pub fn parse_system(text: &str) -> Result<Embedding> {
    let doc: SystemDocument = serde_json::from_str(text).map_err(syntax)?;
    doc.into_embedding()
}

/// Shortest round-trip decimal form; negative zero prints as zero.
pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::to_string(&x).unwrap_or_else(|_| "null".to_string())
}

fn fmt_row(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_matrix(rows: &[Vec<f64>]) -> String {
    let items: Vec<String> = rows.iter().map(|r| fmt_row(r)).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical text of a system: fixed field order, one matrix per line,
/// terms in ascending graded-lex order, one observable per line.
pub fn emit_system(l: &Embedding) -> String {
    let doc = SystemDocument::from_embedding(l);
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"format_version\": \"{}\",", doc.format_version);
    let _ = writeln!(out, "  \"n\": {},", doc.n);
    let _ = writeln!(out, "  \"m\": {},", doc.m);
    for (key, rows) in [("A", &doc.a), ("G", &doc.g), ("H", &doc.h), ("M", &doc.m_block)] {
        let _ = writeln!(out, "  \"{key}\": {},", fmt_matrix(rows));
    }
    let vecs = [
        ("B", Some(&doc.b)),
        ("C", doc.c.as_ref()),
        ("D", doc.d.as_ref()),
        ("E", doc.e.as_ref()),
    ];
    for (key, v) in vecs {
        let _ = writeln!(out, "  \"{key}\": {},", fmt_row(v.expect("always emitted")));
    }
    if doc.observables.is_empty() {
        let _ = writeln!(out, "  \"observables\": []");
    } else {
        let _ = writeln!(out, "  \"observables\": [");
        let last = doc.observables.len() - 1;
        for (j, terms) in doc.observables.iter().enumerate() {
            let items: Vec<String> = terms
                .iter()
                .map(|t| {
                    let exps: Vec<String> = t.exps.iter().map(u32::to_string).collect();
                    format!("{{\"exps\": [{}], \"coef\": {}}}", exps.join(", "), fmt_num(t.coef))
                })
                .collect();
            let sep = if j == last { "" } else { "," };
            let _ = writeln!(out, "    [{}]{sep}", items.join(", "));
        }
        let _ = writeln!(out, "  ]");
    }
    out.push_str("}\n");
    out
}

/// A square matrix file for `transform --conjugate`: `[[...], ...]`.
pub fn parse_matrix(text: &str, field: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(syntax)?;
    let ncols = rows.first().map_or(0, Vec::len);
    matrix(field, &rows, rows.len(), ncols)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftDocument {
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    s: Vec<f64>,
}

/// Shift file for `transform --shift`: `{"R": [[...]], "S": [...]}` with
/// `R: m x n`, `S: m`.
pub fn parse_shift(text: &str, n: usize, m: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let doc: ShiftDocument = serde_json::from_str(text).map_err(syntax)?;
    Ok((matrix("R", &doc.r, m, n)?, vector("S", Some(&doc.s), m)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub name: String,
    pub passed: bool,
    /// `None` when the check could not run.
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub name: String,
    pub dims_in: (usize, usize),
    pub dims_out: (usize, usize),
    pub rank_before: usize,
    pub rank_after: usize,
    pub m_v_before: usize,
    pub m_h_before: usize,
    pub m_v_after: usize,
    pub m_h_after: usize,
}

/// Machine-readable reports written by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportDocument {
    Validation {
        valid: bool,
        checks: Vec<CheckDoc>,
    },
    Classification {
        visible: Vec<usize>,
        hidden: Vec<usize>,
        m_v: usize,
        m_h: usize,
        rank_g: usize,
    },
    Reduction {
        steps: Vec<StepDoc>,
        m_v_star: usize,
    },
    Cosimulation {
        max_state_gap: f64,
        max_gp_gap: f64,
        step: f64,
        horizon: f64,
        truncated_at: Option<f64>,
    },
}

impl ReportDocument {
    pub fn validation(report: &ValidationReport<f64>) -> Self {
        ReportDocument::Validation {
            valid: report.passed(),
            checks: report
                .checks
                .iter()
                .map(|c| CheckDoc {
                    name: c.name.clone(),
                    passed: c.passed,
                    residual: c.residual.is_finite().then_some(c.residual),
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }

    pub fn classification(c: &Classification, rank_g: usize) -> Self {
        ReportDocument::Classification {
            visible: c.visible.clone(),
            hidden: c.hidden.clone(),
            m_v: c.m_v(),
            m_h: c.m_h(),
            rank_g,
        }
    }

    pub fn reduction(r: &ReductionReport) -> Self {
        ReportDocument::Reduction {
            steps: r
                .steps
                .iter()
                .map(|s| StepDoc {
                    name: s.name.clone(),
                    dims_in: s.dims_in,
                    dims_out: s.dims_out,
                    rank_before: s.rank_before,
                    rank_after: s.rank_after,
                    m_v_before: s.counts_before.0,
                    m_h_before: s.counts_before.1,
                    m_v_after: s.counts_after.0,
                    m_h_after: s.counts_after.1,
                })
                .collect(),
            m_v_star: r.m_v_star,
        }
    }

    pub fn cosimulation(r: &CosimReport<f64>) -> Self {
        ReportDocument::Cosimulation {
            max_state_gap: r.max_state_gap,
            max_gp_gap: r.max_gp_gap,
            step: r.step,
            horizon: r.horizon,
            truncated_at: r.truncated_at,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(syntax)
    }
}

/// CSV with header `t,x1..xn[,z1..z{n+m}]`, one row per grid point.
/// Rows stop at the shorter trajectory.
pub fn trajectory_csv(nonlinear: &Trajectory<f64>, lifted: Option<&Trajectory<f64>>) -> String {
    let n = nonlinear.states.first().map_or(0, |x| x.len());
    let nz = lifted.and_then(|z| z.states.first()).map_or(0, |z| z.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    if lifted.is_some() {
        header.extend((1..=nz).map(|i| format!("z{i}")));
    }
    let mut out = header.join(",");
    out.push('\n');
    let rows = lifted.map_or(nonlinear.len(), |z| z.len().min(nonlinear.len()));
    for k in 0..rows {
        let mut cells = vec![nonlinear.times[k].to_string()];
        cells.extend(nonlinear.states[k].iter().map(f64::to_string));
        if let Some(z) = lifted {
            cells.extend(z.states[k].iter().map(f64::to_string));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `const:<v>` or `pwc:t0,v0;t1,v1;...`.
pub fn parse_control(spec: &str) -> Result<ControlSignal<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Signal(format!("not a number: \"{s}\"")))
    };
    if let Some(v) = spec.strip_prefix("const:") {
        return ControlSignal::new(vec![0.0], vec![num(v)?]);
    }
    if let Some(body) = spec.strip_prefix("pwc:") {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for piece in body.split(';').filter(|s| !s.trim().is_empty()) {
            let (t, v) = piece
                .split_once(',')
                .ok_or_else(|| Error::Signal(format!("expected \"t,v\", found \"{piece}\"")))?;
            ts.push(num(t)?);
            vs.push(num(v)?);
        }
        return ControlSignal::new(ts, vs);
    }
    Err(Error::Signal(format!(
        "unknown control spec \"{spec}\" (use const:<v> or pwc:t0,v0;t1,v1;...)"
    )))
}

/// Comma-separated reals, e.g. `1,-0.5`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Signal(format!("not a number: \"{s}\"")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const EX1_DOC: &str = r#"{
  "format_version": "1",
  "n": 2,
  "m": 1,
  "A": [[-1.0, 0.0], [0.0, -1.0]],
  "G": [[1.0], [0.0]],
  "H": [[0.0, 0.0]],
  "M": [[-2.0]],
  "B": [1.0, 0.0],
  "C": [0.0],
  "D": [0.0, 0.0],
  "E": [0.0],
  "observables": [
    [{"exps": [0, 2], "coef": 1.0}]
  ]
}
"#;

    #[test]
    fn ex1_document() {
        assert_eq!(parse_system(EX1_DOC).unwrap(), fixtures::ex1());
        assert_eq!(emit_system(&fixtures::ex1()), EX1_DOC);
    }

    #[test]
    fn fixtures_round_trip() {
        for (name, l) in fixtures::all() {
            let text = emit_system(&l);
            assert_eq!(parse_system(&text).unwrap(), l, "{name}");
            assert_eq!(emit_system(&parse_system(&text).unwrap()), text, "{name}");
        }
    }

    #[test]
    fn empty_observables_keep_key() {
        let text = emit_system(&fixtures::linear_only());
        assert!(text.contains("\"observables\": []"));
        assert!(text.contains("\"G\": [[], []]"));
    }

    #[test]
    fn optional_blocks_default_to_zero() {
        let doc = EX1_DOC
            .replace("  \"C\": [0.0],\n", "")
            .replace("  \"D\": [0.0, 0.0],\n", "")
            .replace("  \"E\": [0.0],\n", "");
        assert_eq!(parse_system(&doc).unwrap(), fixtures::ex1());
    }

    #[test]
    fn diagnostics() {
        let bad_g = EX1_DOC.replace("\"G\": [[1.0], [0.0]]", "\"G\": [[1.0, 2.0], [0.0, 1.0]]");
        match parse_system(&bad_g) {
            Err(Error::Shape { field, .. }) => assert_eq!(field, "G"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_version = EX1_DOC.replace("\"format_version\": \"1\"", "\"format_version\": \"2\"");
        assert!(matches!(parse_system(&bad_version), Err(Error::UnknownVersion(v)) if v == "2"));
        match parse_system("{\n  \"n\": 2,\n  oops\n}") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_exps = EX1_DOC.replace("[0, 2]", "[2]");
        match parse_system(&bad_exps) {
            Err(Error::Shape { field, .. }) => assert_eq!(field, "observables[0][0].exps"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_round_trip() {
        let docs = vec![
            ReportDocument::validation(&crate::validate(&fixtures::ex1_broken(), &Default::default())),
            ReportDocument::classification(&crate::classify(&fixtures::ex2b(), &Default::default()), 1),
            ReportDocument::reduction(
                &crate::to_reduced_visible_form(&fixtures::ex2a(), &Default::default())
                    .unwrap()
                    .1,
            ),
            ReportDocument::Cosimulation {
                max_state_gap: 1.5e-13,
                max_gp_gap: 0.0,
                step: 1e-3,
                horizon: 2.0,
                truncated_at: None,
            },
        ];
        for d in docs {
            assert_eq!(ReportDocument::from_json(&d.to_json()).unwrap(), d);
        }
    }

    #[test]
    fn control_and_vector_specs() {
        let u = parse_control("const:0.5").unwrap();
        assert_eq!(u.value_at(3.0), 0.5);
        let u = parse_control("pwc:0,1;0.5,-1").unwrap();
        assert_eq!(u.value_at(0.25), 1.0);
        assert_eq!(u.value_at(0.75), -1.0);
        assert!(parse_control("ramp:1").is_err());
        assert!(parse_control("pwc:0,1;0,2").is_err());
        assert_eq!(parse_vector("1, -0.5").unwrap(), vec![1.0, -0.5]);
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn csv_layout() {
        let sim = crate::verify::integrate::cosimulate_full(
            &fixtures::ex1(),
            &[1.0, 1.0],
            &ControlSignal::constant(0.0),
            0.5,
            0.25,
        )
        .unwrap();
        let csv = trajectory_csv(&sim.nonlinear, Some(&sim.lifted));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,z1,z2,z3");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,1,1,1,1,1");
        let only = trajectory_csv(&sim.nonlinear, None);
        assert_eq!(only.lines().next().unwrap(), "t,x1,x2");
    }
}
