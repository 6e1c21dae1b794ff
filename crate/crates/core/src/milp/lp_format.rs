//! CPLEX LP text output, mainly for eyeballing models.

use std::fmt::Write as _;

use crate::milp::model::MilpModel;
use crate::milp::mps::fmt_num;

fn terms(out: &mut String, model: &MilpModel, coeffs: &[(usize, f64)]) {
    if coeffs.is_empty() {
        out.push_str(" 0");
    }
    for &(j, a) in coeffs {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", fmt_num(a.abs()), model.variables()[j].name);
    }
}

/// Ranged rows become two rows suffixed `_lo` and `_hi`.
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str("Minimize\n obj:");
    terms(&mut out, model, model.objective());
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let mut row = |name: &str, op: &str, rhs: f64| {
            let _ = write!(out, " {name}:");
            terms(&mut out, model, &c.coeffs);
            let _ = writeln!(out, " {op} {}", fmt_num(rhs));
        };
        match (c.lower.is_finite(), c.upper.is_finite()) {
            (true, true) if c.lower == c.upper => row(&c.name, "=", c.lower),
            (true, true) => {
                row(&format!("{}_lo", c.name), ">=", c.lower);
                row(&format!("{}_hi", c.name), "<=", c.upper);
            }
            (true, false) => row(&c.name, ">=", c.lower),
            (false, true) => row(&c.name, "<=", c.upper),
            (false, false) => {}
        }
    }
    out.push_str("Bounds\n");
    let bound = |v: f64| {
        if v == f64::INFINITY {
            "+inf".to_string()
        } else if v == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            fmt_num(v)
        }
    };
    for v in model.variables() {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, bound(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", bound(v.lower), v.name, bound(v.upper));
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.integer && v.lower == 0.0 && v.upper == 1.0)
        .map(|v| v.name.as_str())
        .collect();
    let generals: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.integer && !(v.lower == 0.0 && v.upper == 1.0))
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        let _ = writeln!(out, "Generals\n {}", generals.join(" "));
    }
    if !binaries.is_empty() {
        let _ = writeln!(out, "Binaries\n {}", binaries.join(" "));
    }
    out.push_str("End\n");
    out
}
