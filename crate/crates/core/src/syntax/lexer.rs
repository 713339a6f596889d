use crate::num::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(Rational),
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    EqEq,
    Ne,
    Gt,
    Ge,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Assign,
    At,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(q) => format!("number `{}`", crate::num::fmt_rational(q)),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
        other => {
            let s = match other {
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBrace => "{",
                Tok::RBrace => "}",
                Tok::LBrack => "[",
                Tok::RBrack => "]",
                Tok::Comma => ",",
                Tok::Semi => ";",
                Tok::Colon => ":",
                Tok::Dot => ".",
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Star => "*",
                Tok::Slash => "/",
                Tok::Lt => "<",
                Tok::Le => "<=",
                Tok::EqEq => "==",
                Tok::Ne => "!=",
                Tok::Gt => ">",
                Tok::Ge => ">=",
                Tok::Bang => "!",
                Tok::AndAnd => "&&",
                Tok::OrOr => "||",
                Tok::Implies => "==>",
                Tok::Assign => ":=",
                Tok::At => "@",
                _ => unreachable!(),
            };
            format!("`{s}`")
        }
    }
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, (Pos, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, chars: &[char]| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, &chars);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, &chars);
            advance(&mut i, &mut line, &mut col, &chars);
            loop {
                if i + 1 >= chars.len() {
                    return Err((pos, "unterminated block comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, &chars);
                    advance(&mut i, &mut line, &mut col, &chars);
                    break;
                }
                advance(&mut i, &mut line, &mut col, &chars);
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let number = |i: &mut usize, line: &mut usize, col: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    advance(i, line, col, &chars);
                }
                if *i < chars.len() && chars[*i] == '.' && chars.get(*i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    advance(i, line, col, &chars);
                    while *i < chars.len() && chars[*i].is_ascii_digit() {
                        advance(i, line, col, &chars);
                    }
                }
            };
            number(&mut i, &mut line, &mut col);
            // `3/4` written without spaces is a single rational literal.
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, &chars);
                number(&mut i, &mut line, &mut col);
            }
            let text: String = chars[start..i].iter().collect();
            let q = parse_rational(&text).ok_or((pos, format!("invalid number `{text}`")))?;
            out.push(Spanned { tok: Tok::Num(q), pos });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            if i < chars.len() && chars[i] == '#' {
                return Err((Pos { line, col }, "`#` is reserved for generated names".into()));
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        }
        let two: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        let (tok, len) = if two.starts_with("==>") {
            (Tok::Implies, 3)
        } else if two.starts_with("<=") {
            (Tok::Le, 2)
        } else if two.starts_with(">=") {
            (Tok::Ge, 2)
        } else if two.starts_with("==") {
            (Tok::EqEq, 2)
        } else if two.starts_with("!=") {
            (Tok::Ne, 2)
        } else if two.starts_with("&&") {
            (Tok::AndAnd, 2)
        } else if two.starts_with("||") {
            (Tok::OrOr, 2)
        } else if two.starts_with(":=") {
            (Tok::Assign, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' | '·' => Tok::Star,
                '/' => Tok::Slash,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '!' | '¬' => Tok::Bang,
                '∧' => Tok::AndAnd,
                '∨' => Tok::OrOr,
                '@' => Tok::At,
                '#' => return Err((pos, "`#` is reserved for generated names".into())),
                other => return Err((pos, format!("unexpected character `{other}`"))),
            };
            (t, 1)
        };
        for _ in 0..len {
            advance(&mut i, &mut line, &mut col, &chars);
        }
        out.push(Spanned { tok, pos });
    }
    out.push(Spanned { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn rational_literal_needs_adjacent_slash() {
        assert_eq!(toks("3/4"), vec![Tok::Num(ratio(3, 4)), Tok::Eof]);
        assert_eq!(toks("x / 4"), vec![Tok::Ident("x".into()), Tok::Slash, Tok::Num(ratio(4, 1)), Tok::Eof]);
    }

    #[test]
    fn rejects_hash() {
        assert!(lex("x#1").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("a // b\n /* c */ d"), vec![Tok::Ident("a".into()), Tok::Ident("d".into()), Tok::Eof]);
    }

    #[test]
    fn positions() {
        let t = lex("x\n  := 1").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }
}
