//! Spectral decision rules: a small boolean-expression language over band
//! reflectances, its evaluator, and the shipped SPECL rule set.
//!
//! ```text
//! bands: b1@0.48, b2@0.56, b3@0.66, b4@0.83, b5@1.6, b7@2.2
//! policy last-match
//! rule 16 "Clear water" color #0000C8 { b4 <= 0.02 AND requires(b5, b5 <= 0.02) }
//! class 18 "Shadow" color #282828
//! fallback 19 "Not classified (outliers)" color #000000
//! ```
//!
//! Comparisons may be chained (`0.85 <= b1/b4 <= 1.15`); operands combine
//! bands and constants with `/`, `+` and `-`. `requires(band, expr)` marks a
//! clause that only takes part when the image carries `band`.

mod ast;
mod eval;
mod format;
mod lexer;
mod parser;
mod specl;

pub use ast::{BandRef, ClassDecl, CmpOp, DeclaredBand, MatchPolicy, NumExpr, Rule, RuleExpr};
pub use eval::{eval_rule, RATIO_EPSILON};
pub use format::{format_expr, format_rules};
pub use parser::parse_rules;
pub use specl::{specl, specl_printed_row8, SPECL_TEXT};

use std::collections::BTreeSet;

use crate::naming::LegendEntry;

/// An ordered list of named spectral rules plus the classes they can emit.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub bands: Vec<DeclaredBand>,
    /// Sorted by ascending index.
    pub rules: Vec<Rule>,
    /// Legend classes that no rule assigns.
    pub classes: Vec<ClassDecl>,
    pub fallback: ClassDecl,
    pub policy: MatchPolicy,
}

impl RuleSet {
    /// Declared bands referenced by some rule outside any `requires` guard.
    pub fn required_bands(&self) -> BTreeSet<BandRef> {
        self.rules
            .iter()
            .flat_map(|r| r.expr.required_bands())
            .collect()
    }

    pub fn band_symbol(&self, b: BandRef) -> &str {
        &self.bands[b.0].symbol
    }

    pub fn rule(&self, index: u16) -> Option<&Rule> {
        self.rules.iter().find(|r| r.index == index)
    }

    pub fn with_policy(mut self, policy: MatchPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Every class the rule set can emit, in index order.
    pub fn legend(&self) -> Vec<LegendEntry> {
        let mut out: Vec<LegendEntry> = self
            .rules
            .iter()
            .map(|r| LegendEntry::new(r.index, &r.name, r.color))
            .chain(
                self.classes
                    .iter()
                    .chain(std::iter::once(&self.fallback))
                    .map(|c| LegendEntry::new(c.index, &c.name, c.color)),
            )
            .collect();
        out.sort_by_key(|e| e.label);
        out
    }

    /// Label assigned to a pixel with declared-band values `pixel`.
    pub fn label_pixel(&self, pixel: &[Option<f64>]) -> u16 {
        let hit = match self.policy {
            MatchPolicy::LastMatch => self.rules.iter().rev().find(|r| eval_rule(&r.expr, pixel)),
            MatchPolicy::FirstMatch => self.rules.iter().find(|r| eval_rule(&r.expr, pixel)),
        };
        hit.map_or(self.fallback.index, |r| r.index)
    }
}
