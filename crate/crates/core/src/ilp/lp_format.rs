//! CPLEX LP text export and solution import.
//!
//! Variables are written as `x0, x1, ...` in declaration order; the original
//! labels are kept in comment lines so dumps stay readable.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::program::{BinaryProgram, SolverError, Verification};

fn term(out: &mut String, first: bool, coef: f64, var: usize) {
    if coef < 0.0 {
        let _ = write!(out, " - {} x{var}", -coef);
    } else if first {
        let _ = write!(out, " {coef} x{var}");
    } else {
        let _ = write!(out, " + {coef} x{var}");
    }
}

pub fn to_lp(program: &BinaryProgram) -> String {
    let mut out = String::new();
    for (i, label) in program.labels().iter().enumerate() {
        let _ = writeln!(out, "\\ x{i} = {label}");
    }
    out.push_str("Maximize\n obj:");
    let mut first = true;
    for (v, &c) in program.objective().iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, v);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (k, c) in program.constraints().iter().enumerate() {
        let _ = write!(out, " c{k}:");
        if c.terms.is_empty() {
            out.push_str(" 0 x0");
        }
        for (n, &(v, a)) in c.terms.iter().enumerate() {
            term(&mut out, n == 0, a, v);
        }
        let _ = writeln!(out, " {} {}", c.cmp.symbol(), c.rhs);
    }
    out.push_str("Binaries\n");
    for v in 0..program.num_vars() {
        let _ = writeln!(out, " x{v}");
    }
    out.push_str("End\n");
    out
}

/// Reads a solution listing with one `name value` pair per line. Names may
/// be the exported `x<i>` form or the original labels; unlisted variables
/// are zero. Lines that are not a known name followed by a number are
/// ignored, so solver banners can be passed through unchanged.
pub fn parse_solution(program: &BinaryProgram, text: &str) -> Result<Vec<bool>, SolverError> {
    let by_label: HashMap<&str, usize> = program.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut assignment = vec![false; program.num_vars()];
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        let Ok(value) = value.parse::<f64>() else { continue };
        let index = name
            .strip_prefix('x')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&i| i < program.num_vars())
            .or_else(|| by_label.get(name).copied());
        let Some(index) = index else { continue };
        assignment[index] = if (value - 1.0).abs() < 1e-6 {
            true
        } else if value.abs() < 1e-6 {
            false
        } else {
            return Err(SolverError::Parse(format!("non-binary value {value} for `{name}`")));
        };
    }
    Ok(assignment)
}

/// Parses an external solution and checks it against the program.
pub fn import_solution(program: &BinaryProgram, text: &str) -> Result<(Vec<bool>, Verification), SolverError> {
    let assignment = parse_solution(program, text)?;
    let verification = program.verify(&assignment)?;
    Ok((assignment, verification))
}
