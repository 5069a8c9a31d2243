use super::ast::CmpOp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    Color([u8; 3]),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    At,
    Slash,
    Plus,
    Minus,
    Cmp(CmpOp),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| Error::Syntax { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '@' => Some(Tok::At),
            '/' => Some(Tok::Slash),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '≤' => Some(Tok::Cmp(CmpOp::Le)),
            '≥' => Some(Tok::Cmp(CmpOp::Ge)),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '<' || c == '>' {
            let eq = chars.get(i + 1) == Some(&'=');
            let op = match (c, eq) {
                ('<', true) => CmpOp::Le,
                ('<', false) => CmpOp::Lt,
                ('>', true) => CmpOp::Ge,
                _ => CmpOp::Gt,
            };
            out.push(Token {
                tok: Tok::Cmp(op),
                line: tl,
                col: tc,
            });
            advance(if eq { 2 } else { 1 }, &mut i, &mut col);
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if chars.get(j) != Some(&'"') {
                return Err(err(tl, tc, "unterminated string".into()));
            }
            let s: String = chars[start..j].iter().collect();
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                col: tc,
            });
            let n = j + 1 - i;
            advance(n, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            let hex: String = chars[i + 1..].iter().take(6).collect();
            if hex.len() != 6 || !hex.chars().all(|h| h.is_ascii_hexdigit()) {
                return Err(err(tl, tc, "expected color `#RRGGBB`".into()));
            }
            let byte = |k: usize| u8::from_str_radix(&hex[k..k + 2], 16).expect("validated hex");
            out.push(Token {
                tok: Tok::Color([byte(0), byte(2), byte(4)]),
                line: tl,
                col: tc,
            });
            advance(7, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    j = k;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
            }
            let s: String = chars[start..j].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(tl, tc, format!("malformed number `{s}`")))?;
            out.push(Token {
                tok: Tok::Num(v),
                line: tl,
                col: tc,
            });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
