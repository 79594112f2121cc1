use super::{ParseError, ParseErrorClass, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident(String),
    /// `$display` and friends.
    SystemIdent(String),
    /// `` `define `` and other compiler directives (except `timescale`).
    Directive(String),
    /// Unsized decimal literal.
    Number(u64),
    /// `<width>'<base><digits>`; digits keep `x`/`z` for diagnostics.
    Based {
        width: Option<u32>,
        base: char,
        digits: String,
    },
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub kind: TokKind,
    pub pos: Pos,
    pub text: String,
}

const SYMBOLS: &[&str] = &[
    "===", "!==", "<<<", ">>>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&", "~|", "~^",
    "^~", "**", "->", "+:", "-:", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "=", "~", "!",
    "&", "|", "^", "+", "-", "*", "/", "%", "?", "<", ">", "@", "#",
];

/// Operators whose presence anywhere in a net expression makes it behavioral.
pub(crate) fn is_operator(sym: &str) -> bool {
    !matches!(sym, "(" | ")" | "[" | "]" | "," | ";" | "." | "=" | ":" | "{" | "}")
}

pub(crate) fn lex(src: &str, errors: &mut Vec<ParseError>) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if i < chars.len() {
                    if chars[i] == '\n' {
                        line += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                    i += 1;
                }
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance!(2);
            let mut closed = false;
            while i < chars.len() {
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance!(2);
                    closed = true;
                    break;
                }
                advance!(1);
            }
            if !closed {
                errors.push(ParseError::new(
                    ParseErrorClass::Lex,
                    pos,
                    "unterminated block comment",
                    "/*",
                ));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' || c == '`' {
            let start = i;
            advance!(1);
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                advance!(1);
            }
            let word: String = chars[start..i].iter().collect();
            if let Some(rest) = word.strip_prefix('`') {
                if rest == "timescale" {
                    // Harmless simulator directive: drop the rest of the line.
                    while i < chars.len() && chars[i] != '\n' {
                        advance!(1);
                    }
                    continue;
                }
                toks.push(Token {
                    kind: TokKind::Directive(rest.to_owned()),
                    pos,
                    text: word,
                });
            } else if word.starts_with('$') {
                toks.push(Token {
                    kind: TokKind::SystemIdent(word.clone()),
                    pos,
                    text: word,
                });
            } else {
                toks.push(Token {
                    kind: TokKind::Ident(word.clone()),
                    pos,
                    text: word,
                });
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '\'' && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphabetic())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                advance!(1);
            }
            let width_text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            if chars.get(i) == Some(&'\'') {
                advance!(1);
                if matches!(chars.get(i), Some('s' | 'S')) {
                    advance!(1);
                }
                let base = chars.get(i).map(|c| c.to_ascii_lowercase());
                match base {
                    Some(b @ ('b' | 'o' | 'd' | 'h')) => {
                        advance!(1);
                        let ds = i;
                        while i < chars.len()
                            && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '?')
                        {
                            advance!(1);
                        }
                        let digits: String = chars[ds..i].iter().filter(|c| **c != '_').collect();
                        let text: String = chars[start..i].iter().collect();
                        let width = if width_text.is_empty() {
                            None
                        } else {
                            match width_text.parse::<u32>() {
                                Ok(w) => Some(w),
                                Err(_) => {
                                    errors.push(ParseError::new(
                                        ParseErrorClass::Lex,
                                        pos,
                                        "literal width out of range",
                                        &text,
                                    ));
                                    continue;
                                }
                            }
                        };
                        if digits.is_empty() {
                            errors.push(ParseError::new(
                                ParseErrorClass::Lex,
                                pos,
                                "based literal has no digits",
                                &text,
                            ));
                            continue;
                        }
                        toks.push(Token {
                            kind: TokKind::Based {
                                width,
                                base: b,
                                digits,
                            },
                            pos,
                            text,
                        });
                    }
                    _ => {
                        let text: String = chars[start..i].iter().collect();
                        errors.push(ParseError::new(
                            ParseErrorClass::Lex,
                            pos,
                            "malformed based literal",
                            &text,
                        ));
                    }
                }
                continue;
            }
            let text: String = chars[start..i].iter().collect();
            match width_text.parse::<u64>() {
                Ok(v) => toks.push(Token {
                    kind: TokKind::Number(v),
                    pos,
                    text,
                }),
                Err(_) => errors.push(ParseError::new(
                    ParseErrorClass::Lex,
                    pos,
                    "number out of range",
                    &text,
                )),
            }
            continue;
        }
        if c == '"' {
            // Strings only appear in behavioral code ($display etc.);
            // lex them whole so the parser can report the construct.
            let start = i;
            advance!(1);
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                advance!(1);
            }
            advance!(1);
            let text: String = chars[start..i.min(chars.len())].iter().collect();
            toks.push(Token {
                kind: TokKind::Sym("\""),
                pos,
                text,
            });
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            advance!(sym.chars().count());
            toks.push(Token {
                kind: TokKind::Sym(sym),
                pos,
                text: (*sym).to_owned(),
            });
            continue;
        }
        errors.push(ParseError::new(
            ParseErrorClass::Lex,
            pos,
            "unexpected character",
            &c.to_string(),
        ));
        advance!(1);
    }
    toks.push(Token {
        kind: TokKind::Eof,
        pos: Pos { line, column: col },
        text: String::new(),
    });
    toks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokKind> {
        let mut errs = Vec::new();
        let t = lex(src, &mut errs);
        assert!(errs.is_empty(), "{errs:?}");
        t.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn based_literals() {
        assert_eq!(
            kinds("1'b0 4'hF"),
            vec![
                TokKind::Based {
                    width: Some(1),
                    base: 'b',
                    digits: "0".into()
                },
                TokKind::Based {
                    width: Some(4),
                    base: 'h',
                    digits: "F".into()
                },
                TokKind::Eof
            ]
        );
    }

    #[test]
    fn comments_and_timescale_vanish() {
        assert_eq!(
            kinds("`timescale 1ns/1ps\n// hi\n/* x */ a"),
            vec![TokKind::Ident("a".into()), TokKind::Eof]
        );
    }

    #[test]
    fn longest_symbol_wins() {
        assert_eq!(
            kinds("a<=b"),
            vec![
                TokKind::Ident("a".into()),
                TokKind::Sym("<="),
                TokKind::Ident("b".into()),
                TokKind::Eof
            ]
        );
    }

    #[test]
    fn bad_characters_are_lex_errors() {
        let mut errs = Vec::new();
        lex("a \u{00e9} \\ b", &mut errs);
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|e| e.class == ParseErrorClass::Lex));
        assert_eq!(errs[0].column, 3);
    }
}
