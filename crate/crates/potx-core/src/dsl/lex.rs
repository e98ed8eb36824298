//! Hand-rolled lexer producing position-tagged tokens.

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Arrow,
    Minus,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    /// Identifier or number text; decoded content for strings.
    pub text: String,
    pub span: SourceSpan,
}

pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut pos = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;

    let err = |line: usize, col: usize, len: usize, message: String| ParseError {
        span: SourceSpan { line, column: col, length: len },
        message,
        expected: None,
    };

    while pos < chars.len() {
        let c = chars[pos];
        let (start_line, start_col) = (line, col);
        let advance = |pos: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*pos] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *pos += 1;
        };

        if c.is_whitespace() {
            advance(&mut pos, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while pos < chars.len() && chars[pos] != '\n' {
                advance(&mut pos, &mut line, &mut col);
            }
            continue;
        }

        let simple = |kind: TokenKind, text: &str| Token {
            kind,
            text: text.to_string(),
            span: SourceSpan { line: start_line, column: start_col, length: text.len() },
        };

        match c {
            '{' | '}' | '(' | ')' | ',' | ';' | ':' => {
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    _ => TokenKind::Colon,
                };
                tokens.push(simple(kind, &c.to_string()));
                advance(&mut pos, &mut line, &mut col);
            }
            '-' => {
                if pos + 1 < chars.len() && chars[pos + 1] == '>' {
                    tokens.push(simple(TokenKind::Arrow, "->"));
                    advance(&mut pos, &mut line, &mut col);
                    advance(&mut pos, &mut line, &mut col);
                } else {
                    tokens.push(simple(TokenKind::Minus, "-"));
                    advance(&mut pos, &mut line, &mut col);
                }
            }
            '"' => {
                advance(&mut pos, &mut line, &mut col);
                let mut text = String::new();
                let mut closed = false;
                while pos < chars.len() {
                    let c = chars[pos];
                    if c == '"' {
                        advance(&mut pos, &mut line, &mut col);
                        closed = true;
                        break;
                    }
                    if c == '\n' {
                        return Err(err(
                            start_line,
                            start_col,
                            1,
                            "unterminated string".to_string(),
                        ));
                    }
                    if c == '\\' {
                        advance(&mut pos, &mut line, &mut col);
                        match chars.get(pos) {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            Some(other) => {
                                return Err(err(
                                    line,
                                    col,
                                    1,
                                    format!("unknown escape '\\{other}'"),
                                ));
                            }
                            None => {
                                return Err(err(
                                    start_line,
                                    start_col,
                                    1,
                                    "unterminated string".to_string(),
                                ));
                            }
                        }
                        advance(&mut pos, &mut line, &mut col);
                        continue;
                    }
                    text.push(c);
                    advance(&mut pos, &mut line, &mut col);
                }
                if !closed {
                    return Err(err(start_line, start_col, 1, "unterminated string".to_string()));
                }
                tokens.push(Token {
                    kind: TokenKind::Str,
                    span: SourceSpan {
                        line: start_line,
                        column: start_col,
                        length: text.chars().count() + 2,
                    },
                    text,
                });
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    text.push(chars[pos]);
                    advance(&mut pos, &mut line, &mut col);
                }
                if pos < chars.len() && chars[pos] == '.' {
                    text.push('.');
                    advance(&mut pos, &mut line, &mut col);
                    if pos >= chars.len() || !chars[pos].is_ascii_digit() {
                        return Err(err(
                            start_line,
                            start_col,
                            text.len(),
                            "digits required after decimal point".to_string(),
                        ));
                    }
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        text.push(chars[pos]);
                        advance(&mut pos, &mut line, &mut col);
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Number,
                    span: SourceSpan {
                        line: start_line,
                        column: start_col,
                        length: text.len(),
                    },
                    text,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while pos < chars.len()
                    && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_')
                {
                    text.push(chars[pos]);
                    advance(&mut pos, &mut line, &mut col);
                }
                tokens.push(Token {
                    kind: TokenKind::Ident,
                    span: SourceSpan {
                        line: start_line,
                        column: start_col,
                        length: text.len(),
                    },
                    text,
                });
            }
            other => {
                return Err(err(start_line, start_col, 1, format!("unexpected character '{other}'")));
            }
        }
    }

    let eof_span = SourceSpan { line, column: col, length: 0 };
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), span: eof_span });
    Ok(tokens)
}
