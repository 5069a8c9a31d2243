use super::ast::{NumExpr, RuleExpr};

/// Denominators smaller than this in magnitude make a ratio undefined.
pub const RATIO_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    True,
    False,
    /// Guarded by an absent band; the enclosing connective ignores it.
    Dropped,
}

/// Evaluates a rule on one pixel. `pixel[i]` is the value of declared band
/// `i`, or `None` if the image does not carry that band.
///
/// A comparison involving an undefined ratio or an absent band is false. A
/// `requires` clause whose band is absent is dropped from its enclosing
/// AND/OR; a rule whose every clause is dropped does not fire.
pub fn eval_rule(expr: &RuleExpr, pixel: &[Option<f64>]) -> bool {
    eval(expr, pixel) == Truth::True
}

fn eval(expr: &RuleExpr, pixel: &[Option<f64>]) -> Truth {
    match expr {
        RuleExpr::Cmp { lhs, op, rhs } => match (num(lhs, pixel), num(rhs, pixel)) {
            (Some(a), Some(b)) if op.apply(a, b) => Truth::True,
            _ => Truth::False,
        },
        RuleExpr::And(xs) => {
            let mut any = false;
            for x in xs {
                match eval(x, pixel) {
                    Truth::False => return Truth::False,
                    Truth::True => any = true,
                    Truth::Dropped => {}
                }
            }
            if any {
                Truth::True
            } else {
                Truth::Dropped
            }
        }
        RuleExpr::Or(xs) => {
            let mut any = false;
            for x in xs {
                match eval(x, pixel) {
                    Truth::True => return Truth::True,
                    Truth::False => any = true,
                    Truth::Dropped => {}
                }
            }
            if any {
                Truth::False
            } else {
                Truth::Dropped
            }
        }
        RuleExpr::Requires { band, expr } => match pixel.get(band.0) {
            Some(Some(_)) => eval(expr, pixel),
            _ => Truth::Dropped,
        },
    }
}

fn num(e: &NumExpr, pixel: &[Option<f64>]) -> Option<f64> {
    match e {
        NumExpr::Band(b) => pixel.get(b.0).copied().flatten(),
        NumExpr::Const(v) => Some(*v),
        NumExpr::Ratio(a, b) => {
            let d = num(b, pixel)?;
            if d.abs() < RATIO_EPSILON {
                return None;
            }
            Some(num(a, pixel)? / d)
        }
        NumExpr::Sum(a, b) => Some(num(a, pixel)? + num(b, pixel)?),
        NumExpr::Diff(a, b) => Some(num(a, pixel)? - num(b, pixel)?),
    }
}
