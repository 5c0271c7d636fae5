//! Recursive-descent parser with C-like operator precedence.
//!
//! Precedence, tightest first: unary (`!`, `-`), then `* / %`, `+ -`,
//! comparisons, `&&`, `||`. All binary operators are left-associative and
//! `else` binds to the nearest `if`. Assignment is a statement, not an
//! expression. The first error aborts; there is no recovery.

use thiserror::Error;

use crate::ast::{BinaryOp, ElseBranch, Expr, LoopHeader, Program, Stmt, UnaryOp};
use crate::lexer::{Literal, Token, TokenKind};

/// Parse error at a token-shape violation: what was expected, what was found,
/// and where.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub expected: String,
    pub found: String,
    pub message: String,
}

impl ParseError {
    fn new(expected: &str, token: &Token) -> Self {
        let found = match token.kind {
            TokenKind::Eof => "end of input".to_string(),
            TokenKind::Newline => "end of line".to_string(),
            _ => format!("'{}'", token.lexeme),
        };
        ParseError {
            line: token.line,
            expected: expected.to_string(),
            found: found.clone(),
            message: format!("expected {expected}, found {found}"),
        }
    }
}

/// Combined statement/expression nesting limit. Keeps recursive descent (and
/// the mirroring evaluator recursion) well inside default stack sizes.
const MAX_NESTING_DEPTH: usize = 64;

/// Parse a token stream (ending with `Eof`) into a program.
pub fn parse(tokens: &[Token]) -> Result<Program, ParseError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    parser.program()
}

/// Convenience: lex and parse in one step.
pub fn parse_source(source: &str) -> Result<Program, crate::Error> {
    let tokens = crate::lexer::tokenize(source)?;
    Ok(parse(&tokens)?)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        // The stream always ends with Eof, so clamp instead of panicking.
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .expect("token stream is never empty")
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn peek_at(&self, offset: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + offset)
    }

    fn advance(&mut self) -> &'t Token {
        let token = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        token
    }

    fn check(&self, kind: TokenKind) -> bool {
        self.peek_kind() == kind
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.check(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<&'t Token, ParseError> {
        if self.check(kind) {
            Ok(self.advance())
        } else {
            Err(ParseError::new(expected, self.peek()))
        }
    }

    fn skip_newlines(&mut self) {
        while self.check(TokenKind::Newline) {
            self.advance();
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut statements = Vec::new();
        loop {
            self.skip_newlines();
            if self.check(TokenKind::Eof) {
                break;
            }
            statements.push(self.statement()?);
        }
        Ok(Program { statements })
    }

    fn enter_nested(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING_DEPTH {
            let token = self.peek();
            return Err(ParseError {
                line: token.line,
                expected: "a simpler program".to_string(),
                found: "deeply nested code".to_string(),
                message: "code is nested too deeply".to_string(),
            });
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        self.enter_nested()?;
        let result = self.statement_inner();
        self.depth -= 1;
        result
    }

    fn statement_inner(&mut self) -> Result<Stmt, ParseError> {
        let stmt = match self.peek_kind() {
            TokenKind::Var => self.var_decl()?,
            TokenKind::If => self.if_stmt()?,
            TokenKind::Loop => self.loop_stmt()?,
            TokenKind::Else | TokenKind::RBrace => {
                return Err(ParseError::new("a statement", self.peek()));
            }
            _ => self.expr_or_assign()?,
        };
        self.end_of_statement()?;
        Ok(stmt)
    }

    /// A statement ends at a newline (consumed), or just before `}` / end of
    /// input (left for the caller).
    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek_kind() {
            TokenKind::Newline => {
                self.advance();
                Ok(())
            }
            TokenKind::RBrace | TokenKind::Eof => Ok(()),
            _ => Err(ParseError::new("end of statement", self.peek())),
        }
    }

    fn var_decl(&mut self) -> Result<Stmt, ParseError> {
        let line = self.advance().line; // `var`
        let name = self.expect(TokenKind::Ident, "a variable name")?.lexeme.clone();
        let init = if self.eat(TokenKind::Assign) {
            Some(self.expression()?)
        } else {
            None
        };
        Ok(Stmt::VarDecl { name, init, line })
    }

    fn expr_or_assign(&mut self) -> Result<Stmt, ParseError> {
        let line = self.peek().line;
        let expr = self.expression()?;
        if self.check(TokenKind::Assign) {
            let assign_token = self.peek();
            if !matches!(expr, Expr::Ident { .. } | Expr::Index { .. }) {
                return Err(ParseError {
                    line: assign_token.line,
                    expected: "a variable or array element on the left of '='".to_string(),
                    found: "an expression".to_string(),
                    message: "invalid assignment target".to_string(),
                });
            }
            self.advance();
            let value = self.expression()?;
            return Ok(Stmt::Assign {
                target: expr,
                value,
                line,
            });
        }
        Ok(Stmt::Expr { expr, line })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.advance().line; // `if`
        self.expect(TokenKind::LParen, "'(' after 'if'")?;
        let condition = self.expression()?;
        self.expect(TokenKind::RParen, "')' after the condition")?;
        let then_block = self.block()?;
        let else_branch = self.else_branch()?;
        Ok(Stmt::If {
            condition,
            then_block,
            else_branch,
            line,
        })
    }

    fn else_branch(&mut self) -> Result<Option<ElseBranch>, ParseError> {
        // `else` may appear on the same line as `}` or after newlines.
        let checkpoint = self.pos;
        self.skip_newlines();
        if !self.eat(TokenKind::Else) {
            self.pos = checkpoint;
            return Ok(None);
        }
        if self.check(TokenKind::If) {
            let nested = self.if_stmt()?;
            Ok(Some(ElseBranch::If(Box::new(nested))))
        } else {
            Ok(Some(ElseBranch::Block(self.block()?)))
        }
    }

    fn loop_stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.advance().line; // `loop`
        self.expect(TokenKind::LParen, "'(' after 'loop'")?;
        let header = self.loop_header()?;
        self.expect(TokenKind::RParen, "')' after the loop header")?;
        let body = self.block()?;
        Ok(Stmt::Loop { header, body, line })
    }

    fn loop_header(&mut self) -> Result<LoopHeader, ParseError> {
        if self.check(TokenKind::RParen) {
            return Ok(LoopHeader::Infinite);
        }
        // For-each requires the exact token shape `IDENT in expr`.
        if self.check(TokenKind::Ident)
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::In)
        {
            let variable = self.advance().lexeme.clone();
            self.advance(); // `in`
            let iterable = self.expression()?;
            return Ok(LoopHeader::ForEach { variable, iterable });
        }
        let expr = self.expression()?;
        let conditional = match &expr {
            Expr::Binary { op, .. } => op.is_comparison_or_logical(),
            Expr::Unary { op, .. } => *op == UnaryOp::Not,
            _ => false,
        };
        if conditional {
            Ok(LoopHeader::Conditional(expr))
        } else {
            Ok(LoopHeader::Count(expr))
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.skip_newlines();
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut statements = Vec::new();
        loop {
            self.skip_newlines();
            if self.eat(TokenKind::RBrace) {
                break;
            }
            if self.check(TokenKind::Eof) {
                return Err(ParseError::new("'}'", self.peek()));
            }
            statements.push(self.statement()?);
        }
        Ok(statements)
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        self.enter_nested()?;
        let result = self.or_expr();
        self.depth -= 1;
        result
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.check(TokenKind::Or) {
            let line = self.advance().line;
            let rhs = self.and_expr()?;
            lhs = Expr::Binary {
                op: BinaryOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.comparison()?;
        while self.check(TokenKind::And) {
            let line = self.advance().line;
            let rhs = self.comparison()?;
            lhs = Expr::Binary {
                op: BinaryOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line,
            };
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Eq => BinaryOp::Eq,
                TokenKind::Neq => BinaryOp::Neq,
                TokenKind::Lt => BinaryOp::Lt,
                TokenKind::Lte => BinaryOp::Lte,
                TokenKind::Gt => BinaryOp::Gt,
                TokenKind::Gte => BinaryOp::Gte,
                _ => break,
            };
            let line = self.advance().line;
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => break,
            };
            let line = self.advance().line;
            let rhs = self.factor()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line,
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                TokenKind::Percent => BinaryOp::Rem,
                _ => break,
            };
            let line = self.advance().line;
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek_kind() {
            TokenKind::Not => Some(UnaryOp::Not),
            TokenKind::Minus => Some(UnaryOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.enter_nested()?;
            let line = self.advance().line;
            let operand = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Unary {
                op,
                operand: Box::new(operand),
                line,
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary()?;
        while self.check(TokenKind::LBracket) {
            let line = self.advance().line;
            let index = self.expression()?;
            self.expect(TokenKind::RBracket, "']' after the index")?;
            expr = Expr::Index {
                array: Box::new(expr),
                index: Box::new(index),
                line,
            };
        }
        Ok(expr)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek();
        match token.kind {
            TokenKind::Number => {
                let value = match token.literal {
                    Some(Literal::Number(n)) => n,
                    _ => f64::NAN,
                };
                let line = token.line;
                self.advance();
                Ok(Expr::Number { value, line })
            }
            TokenKind::String => {
                let value = match &token.literal {
                    Some(Literal::Text(s)) => s.clone(),
                    _ => String::new(),
                };
                let line = token.line;
                self.advance();
                Ok(Expr::Str { value, line })
            }
            TokenKind::Ident => {
                let name = token.lexeme.clone();
                let line = token.line;
                self.advance();
                if self.eat(TokenKind::LParen) {
                    let args = self.call_args()?;
                    Ok(Expr::Call {
                        callee: name,
                        args,
                        line,
                    })
                } else {
                    Ok(Expr::Ident { name, line })
                }
            }
            TokenKind::LBracket => {
                let line = token.line;
                self.advance();
                let mut elements = Vec::new();
                if !self.check(TokenKind::RBracket) {
                    loop {
                        elements.push(self.expression()?);
                        if !self.eat(TokenKind::Comma) {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RBracket, "']' after the array elements")?;
                Ok(Expr::Array { elements, line })
            }
            TokenKind::LParen => {
                self.advance();
                let expr = self.expression()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(expr)
            }
            _ => Err(ParseError::new("an expression", token)),
        }
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if !self.check(TokenKind::RParen) {
            loop {
                args.push(self.expression()?);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "')' after the arguments")?;
        Ok(args)
    }
}
