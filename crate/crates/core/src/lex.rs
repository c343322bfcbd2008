//! Minimal Java tokenizer: enough to compare files modulo whitespace and
//! comments.

/// One token with its byte range in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Tokens of `src`, skipping whitespace and comments. Unterminated
/// literals or comments run to the end of input.
pub fn tokenize(src: &str) -> Vec<Token<'_>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map(|n| i + n).unwrap_or(src.len());
            continue;
        }
        if src[i..].starts_with("/*") {
            i = src[i + 2..].find("*/").map(|n| i + 2 + n + 2).unwrap_or(src.len());
            continue;
        }
        if src[i..].starts_with("\"\"\"") {
            i = src[i + 3..].find("\"\"\"").map(|n| i + 3 + n + 3).unwrap_or(src.len());
        } else if c == '"' || c == '\'' {
            i += 1;
            while i < src.len() {
                match bytes[i] {
                    b'\\' => {
                        i += 1;
                        i += src[i..].chars().next().map_or(0, char::len_utf8);
                    }
                    b if b == c as u8 => {
                        i += 1;
                        break;
                    }
                    b'\n' => break,
                    _ => i += 1,
                }
            }
        } else if is_ident_start(c) {
            i += src[i..].find(|ch: char| !is_ident_part(ch)).unwrap_or(src.len() - i);
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < src.len() {
                let b = bytes[i];
                let hex = src[start..i].starts_with("0x") || src[start..i].starts_with("0X");
                let exponent_sign = (b == b'+' || b == b'-')
                    && match bytes[i - 1] {
                        b'e' | b'E' => !hex,
                        b'p' | b'P' => hex,
                        _ => false,
                    };
                if b.is_ascii_alphanumeric() || b == b'.' || b == b'_' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
        } else if let Some(op) = OPERATORS.iter().find(|op| src[i..].starts_with(**op)) {
            i += op.len();
        } else {
            i += c.len_utf8();
        }
        out.push(Token {
            text: &src[start..i],
            start,
            end: i,
        });
    }
    out
}

/// Token texts joined by single spaces.
pub fn normalized(src: &str) -> String {
    let tokens = tokenize(src);
    let mut out = String::with_capacity(src.len());
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.text);
    }
    out
}

/// Equal up to whitespace and comments.
pub fn token_equivalent(a: &str, b: &str) -> bool {
    let (ta, tb) = (tokenize(a), tokenize(b));
    ta.len() == tb.len() && ta.iter().zip(&tb).all(|(x, y)| x.text == y.text)
}
