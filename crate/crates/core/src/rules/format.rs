use std::fmt::Write as _;

use super::ast::{ClassDecl, NumExpr, RuleExpr};
use super::RuleSet;

/// Renders a rule set in canonical text form. Parsing the output yields a
/// structurally equal rule set.
pub fn format_rules(rs: &RuleSet) -> String {
    let mut out = String::new();
    let bands: Vec<String> = rs
        .bands
        .iter()
        .map(|b| format!("{}@{}", b.symbol, b.wavelength))
        .collect();
    let _ = writeln!(out, "bands: {}", bands.join(", "));
    let _ = writeln!(out, "policy {}", rs.policy.name());

    enum Item<'a> {
        Rule(&'a super::Rule),
        Class(&'a ClassDecl, &'static str),
    }
    let mut items: Vec<(u16, Item)> = rs.rules.iter().map(|r| (r.index, Item::Rule(r))).collect();
    items.extend(
        rs.classes
            .iter()
            .map(|c| (c.index, Item::Class(c, "class"))),
    );
    items.push((rs.fallback.index, Item::Class(&rs.fallback, "fallback")));
    items.sort_by_key(|(i, _)| *i);

    for (_, item) in items {
        out.push('\n');
        match item {
            Item::Rule(r) => {
                let _ = writeln!(
                    out,
                    "rule {} \"{}\" color {} {{",
                    r.index,
                    r.name,
                    hex(r.color)
                );
                let _ = writeln!(out, "    {}", format_expr(&r.expr, rs));
                out.push_str("}\n");
            }
            Item::Class(c, kw) => {
                let _ = writeln!(
                    out,
                    "{kw} {} \"{}\" color {}",
                    c.index,
                    c.name,
                    hex(c.color)
                );
            }
        }
    }
    out
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02X}{g:02X}{b:02X}")
}

/// Renders one boolean expression using the rule set's band symbols.
pub fn format_expr(e: &RuleExpr, rs: &RuleSet) -> String {
    let mut s = String::new();
    write_bool(&mut s, e, rs, 0);
    s
}

// precedence: Or = 1, And = 2, atoms = 3
fn bool_prec(e: &RuleExpr) -> u8 {
    match e {
        RuleExpr::Or(_) => 1,
        RuleExpr::And(xs) if chain_parts(xs).is_none() => 2,
        _ => 3,
    }
}

/// A two-element conjunction `a op x AND x op b` prints as `a op x op b`.
fn chain_parts(xs: &[RuleExpr]) -> Option<(&RuleExpr, &RuleExpr)> {
    match xs {
        [a @ RuleExpr::Cmp { rhs: mid, .. }, b @ RuleExpr::Cmp { lhs: mid2, .. }]
            if mid == mid2 =>
        {
            Some((a, b))
        }
        _ => None,
    }
}

fn write_bool(out: &mut String, e: &RuleExpr, rs: &RuleSet, parent: u8) {
    let prec = bool_prec(e);
    // Nested connectives of equal precedence keep their parentheses so the
    // tree shape survives a reparse.
    let paren = prec < 3 && prec <= parent;
    if paren {
        out.push('(');
    }
    match e {
        RuleExpr::Cmp { lhs, op, rhs } => {
            write_num(out, lhs, rs, 0);
            let _ = write!(out, " {} ", op.symbol());
            write_num(out, rhs, rs, 0);
        }
        RuleExpr::And(xs) => {
            if let Some((
                RuleExpr::Cmp { lhs, op, rhs },
                RuleExpr::Cmp {
                    op: op2, rhs: hi, ..
                },
            )) = chain_parts(xs)
            {
                write_num(out, lhs, rs, 0);
                let _ = write!(out, " {} ", op.symbol());
                write_num(out, rhs, rs, 0);
                let _ = write!(out, " {} ", op2.symbol());
                write_num(out, hi, rs, 0);
            } else {
                join(out, xs, " AND ", rs, 2);
            }
        }
        RuleExpr::Or(xs) => join(out, xs, " OR ", rs, 1),
        RuleExpr::Requires { band, expr } => {
            let _ = write!(out, "requires({}, ", rs.bands[band.0].symbol);
            write_bool(out, expr, rs, 0);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn join(out: &mut String, xs: &[RuleExpr], sep: &str, rs: &RuleSet, prec: u8) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write_bool(out, x, rs, prec);
    }
}

// precedence: Sum/Diff = 1, Ratio = 2, atoms = 3
fn num_prec(e: &NumExpr) -> u8 {
    match e {
        NumExpr::Sum(..) | NumExpr::Diff(..) => 1,
        NumExpr::Ratio(..) => 2,
        _ => 3,
    }
}

fn write_num(out: &mut String, e: &NumExpr, rs: &RuleSet, min_prec: u8) {
    let paren = num_prec(e) < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        NumExpr::Band(b) => out.push_str(&rs.bands[b.0].symbol),
        NumExpr::Const(v) => {
            let _ = write!(out, "{v}");
        }
        NumExpr::Ratio(a, b) => binary(out, a, "/", b, 2, rs),
        NumExpr::Sum(a, b) => binary(out, a, " + ", b, 1, rs),
        NumExpr::Diff(a, b) => binary(out, a, " - ", b, 1, rs),
    }
    if paren {
        out.push(')');
    }
}

// left-associative: the right operand needs parentheses at equal precedence
fn binary(out: &mut String, a: &NumExpr, op: &str, b: &NumExpr, prec: u8, rs: &RuleSet) {
    write_num(out, a, rs, prec);
    out.push_str(op);
    write_num(out, b, rs, prec + 1);
}
