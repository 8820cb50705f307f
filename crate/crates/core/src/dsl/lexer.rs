use std::sync::Arc;

use super::span::{Diagnostic, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Dot,
    Caret,
    Eq,
    Arrow,
    LeftArrow,
    Tensor,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number `{x}`"),
            Tok::Eof => "end of file".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Caret => "^",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::LeftArrow => "<-",
            Tok::Tensor => "(*)",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    file: &'a Arc<str>,
}

impl Cursor<'_> {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self, line: usize, col: usize, length: usize) -> SourceSpan {
        SourceSpan::new(self.file.clone(), line, col, length)
    }
}

pub fn lex(file: &Arc<str>, text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek(0) {
        let (line, col, start) = (cur.line, cur.col, cur.pos);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek(0).is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            while cur.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let s: String = cur.chars[start..cur.pos].iter().collect();
            tokens.push(Token {
                tok: Tok::Ident(s),
                span: cur.span(line, col, cur.pos - start),
            });
            continue;
        }
        let starts_number = c.is_ascii_digit() || (c == '-' && cur.peek(1).is_some_and(|d| d.is_ascii_digit()));
        if starts_number {
            lex_number(&mut cur, &mut tokens, &mut diags);
            continue;
        }
        let two: Option<Tok> = match (c, cur.peek(1)) {
            ('-', Some('>')) => Some(Tok::Arrow),
            ('<', Some('-')) => Some(Tok::LeftArrow),
            _ => None,
        };
        if let Some(tok) = two {
            cur.bump();
            cur.bump();
            tokens.push(Token {
                tok,
                span: cur.span(line, col, 2),
            });
            continue;
        }
        if c == '(' && cur.peek(1) == Some('*') && cur.peek(2) == Some(')') {
            for _ in 0..3 {
                cur.bump();
            }
            tokens.push(Token {
                tok: Tok::Tensor,
                span: cur.span(line, col, 3),
            });
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '^' => Some(Tok::Caret),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        cur.bump();
        match single {
            Some(tok) => tokens.push(Token {
                tok,
                span: cur.span(line, col, 1),
            }),
            None => {
                let what = if c.is_ascii_graphic() {
                    format!("unexpected character `{c}`")
                } else if c.is_ascii() {
                    format!("unexpected character U+{:04X}", c as u32)
                } else {
                    format!("unexpected character `{c}`; identifiers and keywords are ASCII")
                };
                diags.push(Diagnostic::error(cur.span(line, col, 1), what));
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: cur.span(cur.line, cur.col, 1),
    });
    (tokens, diags)
}

fn lex_number(cur: &mut Cursor<'_>, tokens: &mut Vec<Token>, diags: &mut Vec<Diagnostic>) {
    let (line, col, start) = (cur.line, cur.col, cur.pos);
    if cur.peek(0) == Some('-') {
        cur.bump();
    }
    let digits = |cur: &mut Cursor<'_>| {
        let mut n = 0;
        while cur.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            n += 1;
        }
        n
    };
    digits(cur);
    let mut malformed = false;
    if cur.peek(0) == Some('.') && cur.peek(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        digits(cur);
    }
    if matches!(cur.peek(0), Some('e' | 'E')) {
        let sign = usize::from(matches!(cur.peek(1), Some('+' | '-')));
        if cur.peek(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
            for _ in 0..=sign {
                cur.bump();
            }
            digits(cur);
        } else {
            cur.bump();
            malformed = true;
        }
    }
    // `1x` or `2.5.3`: swallow the tail so the error covers the whole token.
    while cur
        .peek(0)
        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
    {
        cur.bump();
        malformed = true;
    }
    let text: String = cur.chars[start..cur.pos].iter().collect();
    let span = cur.span(line, col, cur.pos - start);
    match text.parse::<f64>() {
        Ok(x) if !malformed && x.is_finite() => tokens.push(Token {
            tok: Tok::Number(x),
            span,
        }),
        Ok(_) if !malformed => diags.push(Diagnostic::error(span, format!("number `{text}` is out of range"))),
        _ => diags.push(Diagnostic::error(span, format!("malformed number `{text}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let (t, d) = lex(&Arc::from("t"), s);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn punctuation_and_numbers() {
        assert_eq!(
            toks("L (*) C -> U { x <- [[-1.5e-3, 2]]; } # trailing"),
            vec![
                Tok::Ident("L".into()),
                Tok::Tensor,
                Tok::Ident("C".into()),
                Tok::Arrow,
                Tok::Ident("U".into()),
                Tok::LBrace,
                Tok::Ident("x".into()),
                Tok::LeftArrow,
                Tok::LBracket,
                Tok::LBracket,
                Tok::Number(-1.5e-3),
                Tok::Comma,
                Tok::Number(2.0),
                Tok::RBracket,
                Tok::RBracket,
                Tok::Semi,
                Tok::RBrace,
                Tok::Eof
            ]
        );
        assert_eq!(
            toks("R^3"),
            vec![Tok::Ident("R".into()), Tok::Caret, Tok::Number(3.0), Tok::Eof]
        );
    }

    #[test]
    fn columns_count_characters() {
        let (t, d) = lex(&Arc::from("t"), "# é comment\n  box é");
        assert_eq!(t[0].span.line, 2);
        assert_eq!(t[0].span.column, 3);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].span.line, d[0].span.column, d[0].span.length), (2, 7, 1));
    }

    #[test]
    fn malformed_numbers() {
        let (_, d) = lex(&Arc::from("t"), "x = 1e; y = 2.5.3; z = 1e999;");
        let msgs: Vec<_> = d.iter().map(|d| (d.span.column, d.span.length)).collect();
        assert_eq!(msgs, vec![(5, 2), (13, 5), (24, 5)]);
        assert!(d[2].message.contains("out of range"));
    }
}
