//! Lexer: converts Origin source text into a token stream with source positions.
//!
//! Newlines are significant (they terminate statements), so the lexer emits
//! `NEWLINE` tokens. Runs of blank lines collapse to a single `NEWLINE`, and
//! newlines inside unclosed `(` or `[` nesting are suppressed entirely, which
//! is what allows a builtin call to span several lines. Braces do not suppress
//! newlines because `{` opens a statement block.

use std::fmt;

use thiserror::Error;

/// Kind of a lexical token. Keywords are limited to the five structural words
/// of the language; builtin names and component keywords lex as `Ident` and
/// are resolved later by the interpreter's global environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Var,
    If,
    Else,
    Loop,
    In,
    Ident,
    Number,
    String,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eq,
    Neq,
    Lt,
    Lte,
    Gt,
    Gte,
    And,
    Or,
    Not,
    Newline,
    Eof,
}

impl TokenKind {
    /// Uppercase name used by the token dump format.
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Var => "VAR",
            TokenKind::If => "IF",
            TokenKind::Else => "ELSE",
            TokenKind::Loop => "LOOP",
            TokenKind::In => "IN",
            TokenKind::Ident => "IDENT",
            TokenKind::Number => "NUMBER",
            TokenKind::String => "STRING",
            TokenKind::LParen => "LPAREN",
            TokenKind::RParen => "RPAREN",
            TokenKind::LBrace => "LBRACE",
            TokenKind::RBrace => "RBRACE",
            TokenKind::LBracket => "LBRACKET",
            TokenKind::RBracket => "RBRACKET",
            TokenKind::Comma => "COMMA",
            TokenKind::Assign => "ASSIGN",
            TokenKind::Plus => "PLUS",
            TokenKind::Minus => "MINUS",
            TokenKind::Star => "STAR",
            TokenKind::Slash => "SLASH",
            TokenKind::Percent => "PERCENT",
            TokenKind::Eq => "EQ",
            TokenKind::Neq => "NEQ",
            TokenKind::Lt => "LT",
            TokenKind::Lte => "LTE",
            TokenKind::Gt => "GT",
            TokenKind::Gte => "GTE",
            TokenKind::And => "AND",
            TokenKind::Or => "OR",
            TokenKind::Not => "NOT",
            TokenKind::Newline => "NEWLINE",
            TokenKind::Eof => "EOF",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Literal payload of a `Number` or `String` token.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

/// One lexical token. `lexeme` is the verbatim source substring; `line` and
/// `column` are 1-based and point at its first character.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub literal: Option<Literal>,
    pub line: u32,
    pub column: u32,
}

/// Lexical error with the position of the offending character.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    /// Open `(`/`[` nesting depth; newlines are suppressed while it is > 0.
    group_depth: usize,
    tokens: Vec<Token>,
}

/// Tokenize Origin source text.
///
/// Returns the token stream in source order, ending with exactly one `Eof`
/// token. Never panics on arbitrary input: malformed text yields a `LexError`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        group_depth: 0,
        tokens: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl Lexer {
    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                ' ' | '\t' | '\r' => {
                    self.advance();
                }
                '\n' => {
                    self.advance();
                    if self.group_depth == 0 {
                        self.push_newline(line, column);
                    }
                }
                '/' => {
                    if self.peek_at(1) == Some('/') {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.advance();
                        }
                    } else {
                        self.advance();
                        self.push(TokenKind::Slash, "/", line, column);
                    }
                }
                '"' => self.string(line, column)?,
                c if c.is_ascii_digit() => self.number(line, column),
                c if c.is_ascii_alphabetic() || c == '_' => self.ident(line, column),
                _ => self.operator(line, column)?,
            }
        }
        self.tokens.push(Token {
            kind: TokenKind::Eof,
            lexeme: String::new(),
            literal: None,
            line: self.line,
            column: self.column,
        });
        Ok(())
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn advance(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, lexeme: &str, line: u32, column: u32) {
        self.tokens.push(Token {
            kind,
            lexeme: lexeme.to_string(),
            literal: None,
            line,
            column,
        });
    }

    fn push_newline(&mut self, line: u32, column: u32) {
        // Collapse runs of physical newlines, and never start the stream
        // with a separator.
        match self.tokens.last() {
            None => {}
            Some(t) if t.kind == TokenKind::Newline => {}
            _ => self.tokens.push(Token {
                kind: TokenKind::Newline,
                lexeme: "\n".to_string(),
                literal: None,
                line,
                column,
            }),
        }
    }

    fn string(&mut self, line: u32, column: u32) -> Result<(), LexError> {
        let start = self.pos;
        self.advance(); // opening quote
        let mut text = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    return Err(LexError {
                        line,
                        column,
                        message: "unterminated string literal".to_string(),
                    });
                }
                Some('"') => {
                    self.advance();
                    break;
                }
                Some('\\') => {
                    let (eline, ecol) = (self.line, self.column);
                    self.advance();
                    let escaped = match self.peek() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('t') => '\t',
                        other => {
                            return Err(LexError {
                                line: eline,
                                column: ecol,
                                message: match other {
                                    Some(c) => format!("invalid escape sequence '\\{c}'"),
                                    None => "unterminated string literal".to_string(),
                                },
                            });
                        }
                    };
                    self.advance();
                    text.push(escaped);
                }
                Some(c) => {
                    self.advance();
                    text.push(c);
                }
            }
        }
        let lexeme: String = self.chars[start..self.pos].iter().collect();
        self.tokens.push(Token {
            kind: TokenKind::String,
            lexeme,
            literal: Some(Literal::Text(text)),
            line,
            column,
        });
        Ok(())
    }

    fn number(&mut self, line: u32, column: u32) {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.advance();
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.advance();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.advance();
            }
        }
        let lexeme: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = lexeme.parse().unwrap_or(f64::NAN);
        self.tokens.push(Token {
            kind: TokenKind::Number,
            lexeme,
            literal: Some(Literal::Number(value)),
            line,
            column,
        });
    }

    fn ident(&mut self, line: u32, column: u32) {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.advance();
        }
        let lexeme: String = self.chars[start..self.pos].iter().collect();
        let kind = match lexeme.as_str() {
            "var" => TokenKind::Var,
            "if" => TokenKind::If,
            "else" => TokenKind::Else,
            "loop" => TokenKind::Loop,
            "in" => TokenKind::In,
            _ => TokenKind::Ident,
        };
        self.tokens.push(Token {
            kind,
            lexeme,
            literal: None,
            line,
            column,
        });
    }

    fn operator(&mut self, line: u32, column: u32) -> Result<(), LexError> {
        let c = self.advance().expect("caller checked peek");
        let followed_by_eq = self.peek() == Some('=');
        let (kind, lexeme) = match c {
            '(' => {
                self.group_depth += 1;
                (TokenKind::LParen, "(")
            }
            ')' => {
                self.group_depth = self.group_depth.saturating_sub(1);
                (TokenKind::RParen, ")")
            }
            '[' => {
                self.group_depth += 1;
                (TokenKind::LBracket, "[")
            }
            ']' => {
                self.group_depth = self.group_depth.saturating_sub(1);
                (TokenKind::RBracket, "]")
            }
            '{' => (TokenKind::LBrace, "{"),
            '}' => (TokenKind::RBrace, "}"),
            ',' => (TokenKind::Comma, ","),
            '+' => (TokenKind::Plus, "+"),
            '-' => (TokenKind::Minus, "-"),
            '*' => (TokenKind::Star, "*"),
            '%' => (TokenKind::Percent, "%"),
            '=' if followed_by_eq => {
                self.advance();
                (TokenKind::Eq, "==")
            }
            '=' => (TokenKind::Assign, "="),
            '!' if followed_by_eq => {
                self.advance();
                (TokenKind::Neq, "!=")
            }
            '!' => (TokenKind::Not, "!"),
            '<' if followed_by_eq => {
                self.advance();
                (TokenKind::Lte, "<=")
            }
            '<' => (TokenKind::Lt, "<"),
            '>' if followed_by_eq => {
                self.advance();
                (TokenKind::Gte, ">=")
            }
            '>' => (TokenKind::Gt, ">"),
            '&' if self.peek() == Some('&') => {
                self.advance();
                (TokenKind::And, "&&")
            }
            '|' if self.peek() == Some('|') => {
                self.advance();
                (TokenKind::Or, "||")
            }
            other => {
                return Err(LexError {
                    line,
                    column,
                    message: format!("unexpected character '{other}'"),
                });
            }
        };
        self.push(kind, lexeme, line, column);
        Ok(())
    }
}

/// Debug dump consumed by the CLI `tokens` subcommand: one token per line,
/// `LINE:COL KIND LEXEME` (the lexeme is omitted for `NEWLINE` and `EOF`).
pub fn dump_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        match t.kind {
            TokenKind::Newline | TokenKind::Eof => {
                out.push_str(&format!("{}:{} {}\n", t.line, t.column, t.kind.name()));
            }
            _ => {
                out.push_str(&format!(
                    "{}:{} {} {}\n",
                    t.line,
                    t.column,
                    t.kind.name(),
                    t.lexeme
                ));
            }
        }
    }
    out
}
