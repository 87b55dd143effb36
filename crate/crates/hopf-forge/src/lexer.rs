//! Tokenizer for plan files.

use std::fmt;

/// Plan files larger than this are rejected before lexing.
pub const MAX_PLAN_BYTES: usize = 1024 * 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Name(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Caret,
    Arrow,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Name(n) => write!(f, "name `{n}`"),
            TokenKind::Int(n) => write!(f, "integer `{n}`"),
            TokenKind::Str(_) => write!(f, "string literal"),
            TokenKind::LBrace => write!(f, "`{{`"),
            TokenKind::RBrace => write!(f, "`}}`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
            TokenKind::LBracket => write!(f, "`[`"),
            TokenKind::RBracket => write!(f, "`]`"),
            TokenKind::Comma => write!(f, "`,`"),
            TokenKind::Semi => write!(f, "`;`"),
            TokenKind::Colon => write!(f, "`:`"),
            TokenKind::Eq => write!(f, "`=`"),
            TokenKind::Caret => write!(f, "`^`"),
            TokenKind::Arrow => write!(f, "`->`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
}

/// Syntax-level failure with its position; shared by lexer and parser.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

pub fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    if text.len() > MAX_PLAN_BYTES {
        return Err(SyntaxError {
            line: 1,
            col: 1,
            message: format!(
                "plan file is {} bytes; the limit is {MAX_PLAN_BYTES}",
                text.len()
            ),
        });
    }
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, chars: &[char]| {
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
        let (tok_line, tok_col) = (line, col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col, &chars);
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | ':' | '=' | '^' => {
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    ':' => TokenKind::Colon,
                    '=' => TokenKind::Eq,
                    _ => TokenKind::Caret,
                };
                tokens.push(Token {
                    kind,
                    line: tok_line,
                    col: tok_col,
                });
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '-' => {
                advance(&mut i, &mut line, &mut col, &chars);
                match chars.get(i) {
                    Some('>') => {
                        tokens.push(Token {
                            kind: TokenKind::Arrow,
                            line: tok_line,
                            col: tok_col,
                        });
                        advance(&mut i, &mut line, &mut col, &chars);
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let value = lex_digits(&chars, &mut i, &mut line, &mut col, true).map_err(
                            |message| SyntaxError {
                                line: tok_line,
                                col: tok_col,
                                message,
                            },
                        )?;
                        tokens.push(Token {
                            kind: TokenKind::Int(value),
                            line: tok_line,
                            col: tok_col,
                        });
                    }
                    _ => {
                        return Err(SyntaxError {
                            line: tok_line,
                            col: tok_col,
                            message: "`-` must start `->` or a negative integer".into(),
                        });
                    }
                }
            }
            d if d.is_ascii_digit() => {
                let value =
                    lex_digits(&chars, &mut i, &mut line, &mut col, false).map_err(|message| {
                        SyntaxError {
                            line: tok_line,
                            col: tok_col,
                            message,
                        }
                    })?;
                tokens.push(Token {
                    kind: TokenKind::Int(value),
                    line: tok_line,
                    col: tok_col,
                });
            }
            a if a.is_ascii_alphabetic() => {
                let mut name = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    name.push(chars[i]);
                    advance(&mut i, &mut line, &mut col, &chars);
                }
                tokens.push(Token {
                    kind: TokenKind::Name(name),
                    line: tok_line,
                    col: tok_col,
                });
            }
            '"' => {
                advance(&mut i, &mut line, &mut col, &chars);
                let mut value = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(SyntaxError {
                                line: tok_line,
                                col: tok_col,
                                message: "unterminated string literal".into(),
                            });
                        }
                        Some('"') => {
                            advance(&mut i, &mut line, &mut col, &chars);
                            break;
                        }
                        Some('\\') => {
                            advance(&mut i, &mut line, &mut col, &chars);
                            match chars.get(i) {
                                Some('"') => value.push('"'),
                                Some('\\') => value.push('\\'),
                                _ => {
                                    return Err(SyntaxError {
                                        line,
                                        col,
                                        message: "unknown escape; only \\\" and \\\\ exist".into(),
                                    });
                                }
                            }
                            advance(&mut i, &mut line, &mut col, &chars);
                        }
                        Some(other) => {
                            value.push(*other);
                            advance(&mut i, &mut line, &mut col, &chars);
                        }
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    line: tok_line,
                    col: tok_col,
                });
            }
            other => {
                return Err(SyntaxError {
                    line: tok_line,
                    col: tok_col,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

fn lex_digits(
    chars: &[char],
    i: &mut usize,
    line: &mut u32,
    col: &mut u32,
    negative: bool,
) -> Result<i64, String> {
    let mut digits = String::new();
    while *i < chars.len() && chars[*i].is_ascii_digit() {
        digits.push(chars[*i]);
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    }
    let magnitude: i64 = digits
        .parse()
        .map_err(|_| format!("integer `{digits}` is out of range"))?;
    Ok(if negative { -magnitude } else { magnitude })
}
