use super::ast::{CmpOp, NumExpr, RuleExpr};
use super::{parse_rules, RuleSet};

/// The 19-class SPECL rule file shipped with the crate.
pub const SPECL_TEXT: &str = include_str!("../../data/specl.rules");

/// Parsed SPECL rule set (last-match policy).
pub fn specl() -> RuleSet {
    parse_rules(SPECL_TEXT).expect("shipped SPECL rule file parses")
}

/// SPECL with the yellow-vegetation threshold `b3 >= 8.0` as originally
/// printed, which no reflectance in `[0, 1]` can satisfy.
pub fn specl_printed_row8() -> RuleSet {
    let mut rs = specl();
    let b3 = rs
        .bands
        .iter()
        .position(|b| b.symbol == "b3")
        .expect("SPECL declares b3");
    let rule = rs
        .rules
        .iter_mut()
        .find(|r| r.index == 8)
        .expect("SPECL has rule 8");
    if let RuleExpr::And(clauses) = &mut rule.expr {
        for c in clauses {
            if let RuleExpr::Cmp {
                lhs: NumExpr::Band(b),
                op: CmpOp::Ge,
                rhs: NumExpr::Const(v),
            } = c
            {
                if b.0 == b3 && *v == 0.08 {
                    *v = 8.0;
                }
            }
        }
    }
    rs
}
