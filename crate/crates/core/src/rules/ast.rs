use std::collections::BTreeSet;

/// Position of a band in the rule file's `bands:` preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BandRef(pub usize);

/// Numeric-valued expression over band reflectances.
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Band(BandRef),
    Const(f64),
    Ratio(Box<NumExpr>, Box<NumExpr>),
    Sum(Box<NumExpr>, Box<NumExpr>),
    Diff(Box<NumExpr>, Box<NumExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Ge,
    Lt,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
        }
    }
}

/// Boolean-valued rule expression.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleExpr {
    Cmp {
        lhs: NumExpr,
        op: CmpOp,
        rhs: NumExpr,
    },
    And(Vec<RuleExpr>),
    Or(Vec<RuleExpr>),
    /// `expr` takes part in evaluation only when `band` is present.
    Requires {
        band: BandRef,
        expr: Box<RuleExpr>,
    },
}

impl NumExpr {
    pub(crate) fn visit_bands(&self, f: &mut impl FnMut(BandRef)) {
        match self {
            NumExpr::Band(b) => f(*b),
            NumExpr::Const(_) => {}
            NumExpr::Ratio(a, b) | NumExpr::Sum(a, b) | NumExpr::Diff(a, b) => {
                a.visit_bands(f);
                b.visit_bands(f);
            }
        }
    }
}

impl RuleExpr {
    /// Calls `f(band, guarded)` for every band reference.
    fn visit_bands(&self, guarded: bool, f: &mut impl FnMut(BandRef, bool)) {
        match self {
            RuleExpr::Cmp { lhs, rhs, .. } => {
                lhs.visit_bands(&mut |b| f(b, guarded));
                rhs.visit_bands(&mut |b| f(b, guarded));
            }
            RuleExpr::And(xs) | RuleExpr::Or(xs) => {
                xs.iter().for_each(|x| x.visit_bands(guarded, f));
            }
            RuleExpr::Requires { expr, .. } => expr.visit_bands(true, f),
        }
    }

    /// Bands referenced outside any `requires` guard.
    pub fn required_bands(&self) -> BTreeSet<BandRef> {
        let mut out = BTreeSet::new();
        self.visit_bands(false, &mut |b, guarded| {
            if !guarded {
                out.insert(b);
            }
        });
        out
    }

    /// Bands named by `requires` guards.
    pub fn optional_bands(&self) -> BTreeSet<BandRef> {
        let mut out = BTreeSet::new();
        self.collect_guards(&mut out);
        out
    }

    fn collect_guards(&self, out: &mut BTreeSet<BandRef>) {
        match self {
            RuleExpr::Cmp { .. } => {}
            RuleExpr::And(xs) | RuleExpr::Or(xs) => xs.iter().for_each(|x| x.collect_guards(out)),
            RuleExpr::Requires { band, expr } => {
                out.insert(*band);
                expr.collect_guards(out);
            }
        }
    }
}

/// Color name with an associated spectral rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub index: u16,
    pub name: String,
    pub color: [u8; 3],
    pub expr: RuleExpr,
}

impl Rule {
    pub fn optional_bands(&self) -> BTreeSet<BandRef> {
        self.expr.optional_bands()
    }
}

/// Legend entry without a rule (the fallback, or a class no rule assigns).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub index: u16,
    pub name: String,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeclaredBand {
    pub symbol: String,
    /// Center wavelength in micrometers.
    pub wavelength: f64,
}

/// Which satisfied rule wins when several fire on one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchPolicy {
    /// Highest-index satisfied rule.
    #[default]
    LastMatch,
    /// Lowest-index satisfied rule.
    FirstMatch,
}

impl MatchPolicy {
    pub fn name(self) -> &'static str {
        match self {
            MatchPolicy::LastMatch => "last-match",
            MatchPolicy::FirstMatch => "first-match",
        }
    }
}

impl std::str::FromStr for MatchPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "last-match" => Ok(MatchPolicy::LastMatch),
            "first-match" => Ok(MatchPolicy::FirstMatch),
            other => Err(format!("unknown match policy `{other}`")),
        }
    }
}
