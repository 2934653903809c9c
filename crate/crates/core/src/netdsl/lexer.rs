use super::{ParseDiagnostic, Span};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned literal; `integer` when written without `.` or exponent.
    Number { value: f64, integer: bool },
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Dot,
    Arrow,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { value, .. } => format!("number {value}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(source: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, span });
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' {
            if chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, span });
                i += 2;
                col += 2;
            } else {
                out.push(Token { tok: Tok::Minus, span });
                i += 1;
                col += 1;
            }
            continue;
        }
        let digit_at = |j: usize| chars.get(j).is_some_and(|c| c.is_ascii_digit());
        if c == '.' && !digit_at(i + 1) {
            out.push(Token { tok: Tok::Dot, span });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut integer = true;
            while digit_at(i) {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && (digit_at(i + 1) || i > start) {
                integer = false;
                i += 1;
                while digit_at(i) {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e') | Some('E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+') | Some('-')) {
                    j += 1;
                }
                if digit_at(j) {
                    integer = false;
                    i = j;
                    while digit_at(i) {
                        i += 1;
                    }
                } else {
                    return Err(ParseDiagnostic::error(
                        Span { line, column: col + (i - start) },
                        "malformed exponent in number",
                    ));
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| ParseDiagnostic::error(span, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(ParseDiagnostic::error(span, format!("number `{text}` is out of range")));
            }
            out.push(Token { tok: Tok::Number { value, integer }, span });
            col += i - start;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(text), span });
            col += i - start;
            continue;
        }
        return Err(ParseDiagnostic::error(span, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, column: col } });
    Ok(out)
}
