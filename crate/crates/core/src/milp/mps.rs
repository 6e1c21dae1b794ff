//! Fixed-format MPS reading and writing.
//!
//! Layout of every data line written here (1-based columns):
//!
//! | field | columns | content                      |
//! |-------|---------|------------------------------|
//! | 1     | 2-3     | row type / bound type        |
//! | 2     | 5-12    | column, set or row name      |
//! | 3     | 15-22   | row or column name           |
//! | 4     | 25-36   | value                        |
//! | 5     | 40-47   | row name (second pair)       |
//! | 6     | 50-61   | value (second pair)          |
//!
//! Names must have at most 8 characters and no blanks. Numbers use the
//! shortest decimal text that parses back to the same `f64`; a number that
//! needs more than 12 characters overflows its field, which keeps the line
//! readable by whitespace-splitting (free-format) readers, including the one
//! below.
//!
//! Two-sided rows `l <= a x <= u` are written as `G` rows with `rhs = l` and a
//! `RANGES` entry `u - l` (or as `L` rows with `rhs = u`, whichever
//! reconstructs both bounds exactly). Model metadata travels in comment lines
//! of the form `* @meta <key> <value>`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::milp::model::MilpModel;

const OBJ_ROW: &str = "OBJ";
const MAX_NAME: usize = 8;

/// Shortest text that parses back to exactly `v`.
pub(crate) fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.len() > MAX_NAME || name.chars().any(char::is_whitespace) {
        return Err(Error::Export(format!(
            "name '{name}' does not fit a fixed-format MPS field (1-8 chars, no blanks)"
        )));
    }
    Ok(())
}

fn line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    let mut s = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}");
    if !f5.is_empty() {
        let _ = write!(s, "   {f5:<8}  {f6:<12}");
    }
    out.push_str(s.trim_end());
    out.push('\n');
}

enum RowKind {
    Free,
    G(f64),
    L(f64),
    E(f64),
    Ranged { kind: char, rhs: f64, range: f64 },
}

fn row_kind(name: &str, l: f64, u: f64) -> Result<RowKind> {
    Ok(match (l.is_finite(), u.is_finite()) {
        (false, false) => RowKind::Free,
        (true, false) => RowKind::G(l),
        (false, true) => RowKind::L(u),
        (true, true) if l == u => RowKind::E(l),
        (true, true) => {
            let r = u - l;
            if l + r == u {
                RowKind::Ranged { kind: 'G', rhs: l, range: r }
            } else if u - r == l {
                RowKind::Ranged { kind: 'L', rhs: u, range: r }
            } else {
                return Err(Error::Export(format!(
                    "row {name}: range [{l}, {u}] cannot be reconstructed exactly"
                )));
            }
        }
    })
}

/// Renders `model` as fixed-format MPS text.
pub fn write_mps(model: &MilpModel) -> Result<String> {
    let model_name = if model.name.is_empty() { "MODEL" } else { &model.name };
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {model_name}");
    for (k, v) in &model.metadata {
        if k.chars().any(char::is_whitespace) || v.contains('\n') {
            return Err(Error::Export(format!("metadata entry '{k}' cannot be written")));
        }
        let _ = writeln!(out, "* @meta {k} {v}");
    }

    let rows = model.constraints();
    let kinds: Vec<RowKind> = rows
        .iter()
        .map(|c| {
            check_name(&c.name)?;
            if c.name == OBJ_ROW {
                return Err(Error::Export(format!("row name '{OBJ_ROW}' is reserved")));
            }
            row_kind(&c.name, c.lower, c.upper)
        })
        .collect::<Result<_>>()?;
    for v in model.variables() {
        check_name(&v.name)?;
    }

    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ_ROW, "", "", "", "");
    for (c, k) in rows.iter().zip(&kinds) {
        let t = match k {
            RowKind::Free => "N",
            RowKind::G(_) => "G",
            RowKind::L(_) => "L",
            RowKind::E(_) => "E",
            RowKind::Ranged { kind: 'G', .. } => "G",
            RowKind::Ranged { .. } => "L",
        };
        line(&mut out, t, &c.name, "", "", "", "");
    }

    // column-major view
    let n = model.num_vars();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in rows.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_col[j].push((i, a));
        }
    }
    let mut obj = vec![0.0; n];
    for &(j, c) in model.objective() {
        obj[j] = c;
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.variables().iter().enumerate() {
        if v.integer != in_int {
            let tag = if v.integer { "'INTORG'" } else { "'INTEND'" };
            line(&mut out, "", &format!("MARKER{marker:02}"), "'MARKER'", "", tag, "");
            marker += 1;
            in_int = v.integer;
        }
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if obj[j] != 0.0 {
            entries.push((OBJ_ROW, obj[j]));
        }
        entries.extend(by_col[j].iter().map(|&(i, a)| (rows[i].name.as_str(), a)));
        if entries.is_empty() {
            entries.push((OBJ_ROW, 0.0));
        }
        for pair in entries.chunks(2) {
            let (r1, a1) = pair[0];
            match pair.get(1) {
                Some(&(r2, a2)) => line(&mut out, "", &v.name, r1, &fmt_num(a1), r2, &fmt_num(a2)),
                None => line(&mut out, "", &v.name, r1, &fmt_num(a1), "", ""),
            }
        }
    }
    if in_int {
        line(&mut out, "", &format!("MARKER{marker:02}"), "'MARKER'", "", "'INTEND'", "");
    }

    out.push_str("RHS\n");
    for (c, k) in rows.iter().zip(&kinds) {
        let rhs = match *k {
            RowKind::Free => 0.0,
            RowKind::G(b) | RowKind::L(b) | RowKind::E(b) => b,
            RowKind::Ranged { rhs, .. } => rhs,
        };
        if rhs != 0.0 {
            line(&mut out, "", "RHS", &c.name, &fmt_num(rhs), "", "");
        }
    }

    if kinds.iter().any(|k| matches!(k, RowKind::Ranged { .. })) {
        out.push_str("RANGES\n");
        for (c, k) in rows.iter().zip(&kinds) {
            if let RowKind::Ranged { range, .. } = *k {
                line(&mut out, "", "RNG", &c.name, &fmt_num(range), "", "");
            }
        }
    }

    out.push_str("BOUNDS\n");
    for v in model.variables() {
        let (l, u) = (v.lower, v.upper);
        if l == u {
            line(&mut out, "FX", "BND", &v.name, &fmt_num(l), "", "");
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            line(&mut out, "FR", "BND", &v.name, "", "", "");
            continue;
        }
        if l == f64::NEG_INFINITY {
            line(&mut out, "MI", "BND", &v.name, "", "", "");
        } else if l != 0.0 || v.integer {
            line(&mut out, "LO", "BND", &v.name, &fmt_num(l), "", "");
        }
        if u.is_finite() {
            line(&mut out, "UP", "BND", &v.name, &fmt_num(u), "", "");
        } else if v.integer {
            line(&mut out, "PL", "BND", &v.name, "", "", "");
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_mps(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = write_mps(model)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn import_mps(path: impl AsRef<Path>) -> Result<MilpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mps(&text)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    ObjSense,
    End,
}

struct RowDef {
    name: String,
    kind: char,
    rhs: f64,
    range: Option<f64>,
    coeffs: Vec<(usize, f64)>,
}

/// Parses MPS text. Files produced by [`write_mps`] round-trip exactly;
/// other files are read on a best-effort basis (whitespace-separated fields,
/// no blanks inside names).
pub fn parse_mps(text: &str) -> Result<MilpModel> {
    let mut name = String::new();
    let mut metadata = Vec::new();
    let mut section = Section::None;
    let mut obj_name: Option<String> = None;
    let mut rows: Vec<RowDef> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<(String, bool)> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut bounds: Vec<(Option<f64>, Option<f64>)> = Vec::new();
    let mut in_int = false;
    let mut maximize = false;

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let err = |msg: String| Error::MpsParse { line: lineno, msg };
        if let Some(rest) = raw.strip_prefix('*') {
            if let Some(meta) = rest.trim_start().strip_prefix("@meta ") {
                let mut it = meta.splitn(2, ' ');
                let key = it.next().unwrap_or_default().to_string();
                let value = it.next().unwrap_or_default().to_string();
                metadata.push((key, value));
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::MpsParse { line: lineno, msg: format!("bad number '{s}'") })
        };
        if !raw.starts_with(char::is_whitespace) {
            section = match tokens[0] {
                "NAME" => {
                    name = tokens.get(1..).map(|t| t.join(" ")).unwrap_or_default();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        maximize = s.starts_with("MAX");
                    }
                    Section::ObjSense
                }
                "ENDATA" => Section::End,
                other => return Err(err(format!("unknown section '{other}'"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => maximize = tokens[0].starts_with("MAX"),
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err("expected '<type> <name>'".into()));
                }
                let kind = tokens[0].chars().next().unwrap_or(' ').to_ascii_uppercase();
                if !matches!(kind, 'N' | 'G' | 'L' | 'E') {
                    return Err(err(format!("unknown row type '{}'", tokens[0])));
                }
                if kind == 'N' && obj_name.is_none() {
                    obj_name = Some(tokens[1].to_string());
                    continue;
                }
                if row_index.insert(tokens[1].to_string(), rows.len()).is_some() {
                    return Err(err(format!("duplicate row '{}'", tokens[1])));
                }
                rows.push(RowDef {
                    name: tokens[1].to_string(),
                    kind,
                    rhs: 0.0,
                    range: None,
                    coeffs: Vec::new(),
                });
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => return Err(err(format!("unknown marker {other}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("expected '<column> <row> <value> [<row> <value>]'".into()));
                }
                let j = match col_index.get(tokens[0]) {
                    Some(&j) => j,
                    None => {
                        cols.push((tokens[0].to_string(), in_int));
                        bounds.push((None, None));
                        col_index.insert(tokens[0].to_string(), cols.len() - 1);
                        cols.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let a = num(pair[1])?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        if a != 0.0 {
                            objective.push((j, a));
                        }
                    } else {
                        let &i = row_index
                            .get(pair[0])
                            .ok_or_else(|| err(format!("unknown row '{}'", pair[0])))?;
                        if a != 0.0 {
                            rows[i].coeffs.push((j, a));
                        }
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let body = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                if body.is_empty() {
                    return Err(err("missing entries".into()));
                }
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("unpaired entry".into()));
                    }
                    let v = num(pair[1])?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        // objective constants are not represented
                        continue;
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(format!("unknown row '{}'", pair[0])))?;
                    if section == Section::Rhs {
                        rows[i].rhs = v;
                    } else {
                        rows[i].range = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = tokens[0].to_ascii_uppercase();
                let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
                let (col, value) = match (needs_value, tokens.len()) {
                    (true, 4) => (tokens[2], Some(num(tokens[3])?)),
                    (true, 3) => (tokens[1], Some(num(tokens[2])?)),
                    (false, 3) | (false, 4) => (tokens[2], None),
                    (false, 2) => (tokens[1], None),
                    _ => return Err(err("malformed bound".into())),
                };
                let &j = col_index
                    .get(col)
                    .ok_or_else(|| err(format!("unknown column '{col}'")))?;
                let b = &mut bounds[j];
                match kind.as_str() {
                    "UP" | "UI" => {
                        let u = value.unwrap_or_default();
                        if u < 0.0 && b.0.is_none() {
                            b.0 = Some(f64::NEG_INFINITY);
                        }
                        b.1 = Some(u);
                    }
                    "LO" | "LI" => b.0 = value,
                    "FX" => {
                        b.0 = value;
                        b.1 = value;
                    }
                    "FR" => {
                        b.0 = Some(f64::NEG_INFINITY);
                        b.1 = Some(f64::INFINITY);
                    }
                    "MI" => b.0 = Some(f64::NEG_INFINITY),
                    "PL" => b.1 = Some(f64::INFINITY),
                    "BV" => {
                        b.0 = Some(0.0);
                        b.1 = Some(1.0);
                        cols[j].1 = true;
                    }
                    other => return Err(err(format!("unsupported bound type '{other}'"))),
                }
                if matches!(kind.as_str(), "LI" | "UI") {
                    cols[j].1 = true;
                }
            }
            Section::None => return Err(err("data line outside a section".into())),
            Section::End => return Err(err("data after ENDATA".into())),
        }
    }

    let mut model = MilpModel::new(name);
    for (k, v) in metadata {
        model.metadata.insert(k, v);
    }
    for ((cname, integer), (l, u)) in cols.into_iter().zip(bounds) {
        model.add_var(cname, l.unwrap_or(0.0), u.unwrap_or(f64::INFINITY), integer);
    }
    for r in rows {
        let (lo, hi) = match (r.kind, r.range) {
            ('N', _) => (f64::NEG_INFINITY, f64::INFINITY),
            ('G', None) => (r.rhs, f64::INFINITY),
            ('L', None) => (f64::NEG_INFINITY, r.rhs),
            ('E', None) => (r.rhs, r.rhs),
            ('G', Some(rg)) => (r.rhs, r.rhs + rg.abs()),
            ('L', Some(rg)) => (r.rhs - rg.abs(), r.rhs),
            ('E', Some(rg)) if rg >= 0.0 => (r.rhs, r.rhs + rg),
            ('E', Some(rg)) => (r.rhs + rg, r.rhs),
            _ => unreachable!("row kinds are validated while parsing"),
        };
        model.add_row(r.name, r.coeffs, lo, hi);
    }
    if maximize {
        objective.iter_mut().for_each(|(_, c)| *c = -*c);
        model.metadata.insert("objsense".into(), "negated-max".into());
    }
    model.set_objective(objective);
    Ok(model)
}
