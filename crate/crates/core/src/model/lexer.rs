use super::{ParseDiagnostic, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Colon,
    Eq,
    Ge,
    Le,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    while let Some(&(start, c)) = chars.peek() {
        let pos = Pos { line, column: col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            chars.next();
            col += 1;
            if matches!(chars.peek(), Some((_, '/'))) {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
                continue;
            }
            return Err(ParseDiagnostic::error(pos, "unexpected `/`"));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                    end = i + c.len_utf8();
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(src[start..end].to_string()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '-' || c == '.' {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                let sign_ok = (c == '-' || c == '+') && (i == start || matches!(&src[..i].chars().last(), Some('e' | 'E')));
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || sign_ok {
                    end = i + c.len_utf8();
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let text = &src[start..end];
            let value: f64 = text
                .parse()
                .map_err(|_| ParseDiagnostic::error(pos, format!("malformed number `{text}`")))?;
            out.push(Token {
                tok: Tok::Number(value),
                pos,
            });
            continue;
        }
        chars.next();
        col += 1;
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '>' | '<' => {
                if matches!(chars.peek(), Some((_, '='))) {
                    chars.next();
                    col += 1;
                    if c == '>' {
                        Tok::Ge
                    } else {
                        Tok::Le
                    }
                } else {
                    return Err(ParseDiagnostic::error(
                        pos,
                        format!("expected `{c}=`; strict comparisons are not supported"),
                    ));
                }
            }
            other => return Err(ParseDiagnostic::error(pos, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn dotted_identifiers_and_numbers() {
        assert_eq!(
            toks("design f_nav_v0.3_a3.6_r0.8 = 0.65; // trailing"),
            vec![
                Tok::Ident("design".into()),
                Tok::Ident("f_nav_v0.3_a3.6_r0.8".into()),
                Tok::Eq,
                Tok::Number(0.65),
                Tok::Semi,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comparators_and_positions() {
        let t = tokenize("a >= 1\n  b <= -2e-1").unwrap();
        assert_eq!(t[1].tok, Tok::Ge);
        assert_eq!(t[3].tok, Tok::Ident("b".into()));
        assert_eq!((t[3].pos.line, t[3].pos.column), (2, 3));
        assert_eq!(t[5].tok, Tok::Number(-0.2));
    }

    #[test]
    fn stray_character_is_positioned() {
        let e = tokenize("system x {\n  @").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }
}
