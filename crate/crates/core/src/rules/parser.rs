use std::collections::BTreeMap;

use super::ast::{BandRef, ClassDecl, DeclaredBand, MatchPolicy, NumExpr, Rule, RuleExpr};
use super::lexer::{tokenize, Tok, Token};
use super::RuleSet;
use crate::error::{Error, Result};

/// Parses a rule file into a [`RuleSet`].
pub fn parse_rules(text: &str) -> Result<RuleSet> {
    let tokens = tokenize(text)?;
    Parser {
        tokens,
        pos: 0,
        bands: Vec::new(),
    }
    .file()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    bands: Vec<DeclaredBand>,
}

enum Entry {
    Rule(Rule),
    Class(ClassDecl),
    Fallback(ClassDecl),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        let t = &self.tokens[pos];
        Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        self.error_at(self.pos, msg)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Color(_) => "color".into(),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {what}, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn file(mut self) -> Result<RuleSet> {
        let mut policy = None;
        let mut entries: BTreeMap<u16, (usize, Entry)> = BTreeMap::new();
        let mut saw_bands = false;
        loop {
            let start = self.pos;
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "bands" => {
                        if saw_bands {
                            return Err(self.error("duplicate `bands:` preamble"));
                        }
                        self.bump();
                        self.preamble()?;
                        saw_bands = true;
                    }
                    "policy" => {
                        self.bump();
                        if policy.is_some() {
                            return Err(self.error_at(start, "duplicate `policy`"));
                        }
                        policy = Some(self.policy()?);
                    }
                    "rule" | "class" | "fallback" => {
                        if !saw_bands {
                            return Err(self.error("`bands:` preamble must precede rules"));
                        }
                        self.bump();
                        let entry = self.entry(&kw)?;
                        let index = match &entry {
                            Entry::Rule(r) => r.index,
                            Entry::Class(c) | Entry::Fallback(c) => c.index,
                        };
                        if entries.insert(index, (start, entry)).is_some() {
                            return Err(
                                self.error_at(start + 1, format!("duplicate class index {index}"))
                            );
                        }
                    }
                    _ => return Err(self.error(format!("unexpected `{kw}`"))),
                },
                other => {
                    return Err(self.error(format!(
                        "expected `bands`, `policy`, `rule`, `class` or `fallback`, found {}",
                        Self::describe(&other)
                    )))
                }
            }
        }

        let mut rules = Vec::new();
        let mut classes = Vec::new();
        let mut fallback = None;
        for (_, (pos, entry)) in entries {
            match entry {
                Entry::Rule(r) => rules.push(r),
                Entry::Class(c) => classes.push(c),
                Entry::Fallback(c) => {
                    if fallback.is_some() {
                        return Err(self.error_at(pos, "more than one `fallback`"));
                    }
                    fallback = Some(c);
                }
            }
        }
        if rules.is_empty() {
            return Err(self.error("expected at least one rule"));
        }
        let fallback = fallback.ok_or_else(|| self.error("missing `fallback` class"))?;
        Ok(RuleSet {
            bands: self.bands,
            rules,
            classes,
            fallback,
            policy: policy.unwrap_or_default(),
        })
    }

    fn preamble(&mut self) -> Result<()> {
        self.expect(Tok::Colon, "`:` after `bands`")?;
        loop {
            let at = self.pos;
            let symbol = match self.bump().tok.clone() {
                Tok::Ident(s) => s,
                other => {
                    return Err(self.error_at(
                        at,
                        format!("expected band symbol, found {}", Self::describe(&other)),
                    ))
                }
            };
            if ["and", "or", "requires"].contains(&symbol.to_ascii_lowercase().as_str()) {
                return Err(self.error_at(at, format!("`{symbol}` is reserved")));
            }
            if self.bands.iter().any(|b| b.symbol == symbol) {
                return Err(self.error_at(at, format!("band `{symbol}` declared twice")));
            }
            self.expect(Tok::At, "`@wavelength`")?;
            let wavelength = self.number()?;
            if wavelength <= 0.0 {
                return Err(self.error_at(self.pos - 1, "wavelength must be positive"));
            }
            self.bands.push(DeclaredBand { symbol, wavelength });
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn policy(&mut self) -> Result<MatchPolicy> {
        let at = self.pos;
        let mut word = String::new();
        // `last-match` lexes as ident, minus, ident
        for want_ident in [true, false, true] {
            match (self.peek().clone(), want_ident) {
                (Tok::Ident(s), true) => word.push_str(&s),
                (Tok::Minus, false) => word.push('-'),
                _ => return Err(self.error_at(at, "expected `last-match` or `first-match`")),
            }
            self.bump();
        }
        word.parse().map_err(|msg: String| self.error_at(at, msg))
    }

    fn number(&mut self) -> Result<f64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            other => Err(self.error(format!("expected number, found {}", Self::describe(&other)))),
        }
    }

    fn entry(&mut self, kind: &str) -> Result<Entry> {
        let index = match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && (1.0..=f64::from(u16::MAX)).contains(&v) => {
                self.bump();
                v as u16
            }
            other => {
                return Err(self.error(format!(
                    "expected class index (1..65535), found {}",
                    Self::describe(&other)
                )))
            }
        };
        let name = match self.peek().clone() {
            Tok::Str(s) if !s.trim().is_empty() => {
                self.bump();
                s
            }
            _ => return Err(self.error("expected quoted class name")),
        };
        let mut color = [0, 0, 0];
        if self.is_keyword("color") {
            self.bump();
            match self.peek().clone() {
                Tok::Color(c) => {
                    self.bump();
                    color = c;
                }
                _ => return Err(self.error("expected `#RRGGBB` after `color`")),
            }
        }
        if kind != "rule" {
            let decl = ClassDecl { index, name, color };
            return Ok(if kind == "fallback" {
                Entry::Fallback(decl)
            } else {
                Entry::Class(decl)
            });
        }
        self.expect(Tok::LBrace, "`{`")?;
        if *self.peek() == Tok::RBrace {
            return Err(self.error(format!("empty rule body for rule {index}")));
        }
        let expr = self.or_expr()?;
        self.expect(Tok::RBrace, "`}` or a boolean operator")?;
        Ok(Entry::Rule(Rule {
            index,
            name,
            color,
            expr,
        }))
    }

    fn or_expr(&mut self) -> Result<RuleExpr> {
        let mut items = vec![self.and_expr()?];
        while self.is_keyword("or") {
            self.bump();
            items.push(self.and_expr()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            RuleExpr::Or(items)
        })
    }

    fn and_expr(&mut self) -> Result<RuleExpr> {
        let mut items = vec![self.unary()?];
        while self.is_keyword("and") {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            RuleExpr::And(items)
        })
    }

    fn unary(&mut self) -> Result<RuleExpr> {
        if self.is_keyword("requires") {
            self.bump();
            self.expect(Tok::LParen, "`(` after `requires`")?;
            let band = self.band_symbol()?;
            self.expect(Tok::Comma, "`,` after guarded band")?;
            let expr = self.or_expr()?;
            self.expect(Tok::RParen, "`)` closing `requires`")?;
            return Ok(RuleExpr::Requires {
                band,
                expr: Box::new(expr),
            });
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesized boolean group or the start of an
            // arithmetic operand such as `(b1 + b2) / b3 > 1`.
            let save = self.pos;
            self.bump();
            let group = self.or_expr().and_then(|e| {
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            });
            let continues = matches!(
                self.peek(),
                Tok::Cmp(_) | Tok::Slash | Tok::Plus | Tok::Minus
            );
            match group {
                Ok(e) if !continues => return Ok(e),
                Ok(_) => self.pos = save,
                Err(group_err) => {
                    let group_pos = self.pos;
                    self.pos = save;
                    return self.comparison().map_err(|chain_err| {
                        if group_pos > self.pos {
                            group_err
                        } else {
                            chain_err
                        }
                    });
                }
            }
        }
        self.comparison()
    }

    /// `a op b (op c)*`; chains desugar to a conjunction of adjacent pairs.
    fn comparison(&mut self) -> Result<RuleExpr> {
        let first = self.arith()?;
        let mut operands = vec![first];
        let mut ops = Vec::new();
        while let Tok::Cmp(op) = *self.peek() {
            self.bump();
            ops.push(op);
            operands.push(self.arith()?);
        }
        if ops.is_empty() {
            return Err(self.error(format!(
                "expected comparison operator, found {}",
                Self::describe(self.peek())
            )));
        }
        let mut cmps: Vec<RuleExpr> = ops
            .iter()
            .enumerate()
            .map(|(i, &op)| RuleExpr::Cmp {
                lhs: operands[i].clone(),
                op,
                rhs: operands[i + 1].clone(),
            })
            .collect();
        Ok(if cmps.len() == 1 {
            cmps.pop().expect("one comparison")
        } else {
            RuleExpr::And(cmps)
        })
    }

    fn arith(&mut self) -> Result<NumExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = NumExpr::Sum(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = NumExpr::Diff(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<NumExpr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Slash {
            self.bump();
            lhs = NumExpr::Ratio(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<NumExpr> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(NumExpr::Const(self.number()?)),
            Tok::Minus if matches!(self.peek_at(1), Tok::Num(_)) => {
                Ok(NumExpr::Const(self.number()?))
            }
            Tok::Ident(_) => Ok(NumExpr::Band(self.band_symbol()?)),
            Tok::LParen => {
                self.bump();
                let e = self.arith()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => Err(self.error(format!(
                "expected operand, found {}",
                Self::describe(&other)
            ))),
        }
    }

    fn band_symbol(&mut self) -> Result<BandRef> {
        let t = self.tokens[self.pos].clone();
        match t.tok {
            Tok::Ident(s) => {
                if ["and", "or", "requires"].contains(&s.to_ascii_lowercase().as_str()) {
                    return Err(self.error(format!("expected band symbol, found `{s}`")));
                }
                let idx =
                    self.bands
                        .iter()
                        .position(|b| b.symbol == s)
                        .ok_or(Error::UndeclaredBand {
                            symbol: s,
                            line: t.line,
                            col: t.col,
                        })?;
                self.bump();
                Ok(BandRef(idx))
            }
            other => Err(self.error(format!(
                "expected band symbol, found {}",
                Self::describe(&other)
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::CmpOp;

    const PRE: &str = "bands: b1@0.48, b2@0.56, b3@0.66, b4@0.83, b5@1.6, b7@2.2\n";

    fn one(body: &str) -> RuleExpr {
        let text = format!("{PRE}rule 1 \"x\" color #010203 {{ {body} }}\nfallback 2 \"none\"");
        parse_rules(&text).unwrap().rules.remove(0).expr
    }

    fn band(i: usize) -> NumExpr {
        NumExpr::Band(BandRef(i))
    }

    fn ratio(a: usize, b: usize) -> NumExpr {
        NumExpr::Ratio(Box::new(band(a)), Box::new(band(b)))
    }

    fn cmp(lhs: NumExpr, op: CmpOp, rhs: NumExpr) -> RuleExpr {
        RuleExpr::Cmp { lhs, op, rhs }
    }

    #[test]
    fn snow_rule_parses_to_flat_conjunction() {
        let e = one("b4/b3 <= 1.3 AND b3 >= 0.2 AND b5 <= 0.12");
        assert_eq!(
            e,
            RuleExpr::And(vec![
                cmp(ratio(3, 2), CmpOp::Le, NumExpr::Const(1.3)),
                cmp(band(2), CmpOp::Ge, NumExpr::Const(0.2)),
                cmp(band(4), CmpOp::Le, NumExpr::Const(0.12)),
            ])
        );
    }

    #[test]
    fn chained_comparison_desugars() {
        let e = one("0.85 <= b1/b4 <= 1.15");
        assert_eq!(
            e,
            RuleExpr::And(vec![
                cmp(NumExpr::Const(0.85), CmpOp::Le, ratio(0, 3)),
                cmp(ratio(0, 3), CmpOp::Le, NumExpr::Const(1.15)),
            ])
        );
    }

    #[test]
    fn parenthesized_groups_and_arithmetic() {
        let e = one("b4/b3 >= 3.0 AND (b2/b3 >= 0.8 OR b3 <= 0.15)");
        match e {
            RuleExpr::And(xs) => assert!(matches!(xs[1], RuleExpr::Or(_))),
            other => panic!("{other:?}"),
        }
        let e = one("(b1 + b2) / b3 > 1");
        assert_eq!(
            e,
            cmp(
                NumExpr::Ratio(
                    Box::new(NumExpr::Sum(Box::new(band(0)), Box::new(band(1)))),
                    Box::new(band(2))
                ),
                CmpOp::Gt,
                NumExpr::Const(1.0)
            )
        );
        let e = one("b3 >= b4 + 0.005");
        assert_eq!(
            e,
            cmp(
                band(2),
                CmpOp::Ge,
                NumExpr::Sum(Box::new(band(3)), Box::new(NumExpr::Const(0.005)))
            )
        );
        let e = one("b3 - -0.5 > 0");
        assert!(matches!(
            e,
            RuleExpr::Cmp {
                lhs: NumExpr::Diff(_, _),
                ..
            }
        ));
    }

    #[test]
    fn requires_guard() {
        let e = one("b4 <= 0.02 AND requires(b5, b5 <= 0.02)");
        match &e {
            RuleExpr::And(xs) => assert!(matches!(
                &xs[1],
                RuleExpr::Requires {
                    band: BandRef(4),
                    ..
                }
            )),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            e.required_bands().into_iter().collect::<Vec<_>>(),
            vec![BandRef(3)]
        );
        assert_eq!(
            e.optional_bands().into_iter().collect::<Vec<_>>(),
            vec![BandRef(4)]
        );
    }

    #[test]
    fn empty_input_is_a_syntax_error() {
        assert!(matches!(
            parse_rules(""),
            Err(Error::Syntax {
                line: 1,
                col: 1,
                ..
            })
        ));
    }

    #[test]
    fn empty_body_is_rejected() {
        let text = format!("{PRE}rule 1 \"x\" {{ }}\nfallback 2 \"n\"");
        match parse_rules(&text) {
            Err(Error::Syntax { line: 2, msg, .. }) => assert!(msg.contains("empty rule body")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_band_is_rejected_with_position() {
        let text = format!("{PRE}rule 1 \"x\" {{ b6 > 0.1 }}\nfallback 2 \"n\"");
        match parse_rules(&text) {
            Err(Error::UndeclaredBand { symbol, line, col }) => {
                assert_eq!((symbol.as_str(), line, col), ("b6", 2, 14))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let text = format!("{PRE}rule 1 \"x\" {{ b1 > 0.1 AND }}\nfallback 2 \"n\"");
        match parse_rules(&text) {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 27)),
            other => panic!("{other:?}"),
        }
        let text = format!("{PRE}rule 1 \"x\" {{ b1 }}\nfallback 2 \"n\"");
        assert!(matches!(parse_rules(&text), Err(Error::Syntax { .. })));
    }

    #[test]
    fn structural_requirements() {
        assert!(parse_rules(&format!("{PRE}fallback 2 \"n\"")).is_err());
        assert!(parse_rules(&format!("{PRE}rule 1 \"x\" {{ b1 > 0 }}")).is_err());
        assert!(parse_rules(&format!(
            "{PRE}rule 1 \"x\" {{ b1 > 0 }}\nrule 1 \"y\" {{ b1 > 0 }}\nfallback 2 \"n\""
        ))
        .is_err());
        assert!(parse_rules("rule 1 \"x\" { b1 > 0 }\nfallback 2 \"n\"").is_err());
    }

    #[test]
    fn text_order_does_not_matter() {
        let a = parse_rules(&format!(
            "{PRE}rule 2 \"b\" {{ b2 > 0 }}\nrule 1 \"a\" {{ b1 > 0 }}\nfallback 3 \"n\""
        ))
        .unwrap();
        let b = parse_rules(&format!(
            "{PRE}fallback 3 \"n\"\nrule 1 \"a\" {{ b1 > 0 }}\nrule 2 \"b\" {{ b2 > 0 }}"
        ))
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rules[0].index, 1);
    }

    #[test]
    fn policy_is_parsed() {
        let rs = parse_rules(&format!(
            "{PRE}policy first-match\nrule 1 \"a\" {{ b1 > 0 }}\nfallback 3 \"n\""
        ))
        .unwrap();
        assert_eq!(rs.policy, MatchPolicy::FirstMatch);
        assert!(parse_rules(&format!(
            "{PRE}policy best-match\nrule 1 \"a\" {{ b1 > 0 }}\nfallback 3 \"n\""
        ))
        .is_err());
    }
}
