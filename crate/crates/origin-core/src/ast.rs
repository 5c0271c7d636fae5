//! Syntax tree for Origin programs, plus the deterministic JSON dump used by
//! the CLI `ast` subcommand and golden-file tests.

use serde_json::{json, Value as JsonValue};

/// A parsed program: statements in source order. An empty program is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    VarDecl {
        name: String,
        init: Option<Expr>,
        line: u32,
    },
    /// `target` is always an `Expr::Ident` or `Expr::Index`; the parser
    /// rejects anything else.
    Assign {
        target: Expr,
        value: Expr,
        line: u32,
    },
    If {
        condition: Expr,
        then_block: Vec<Stmt>,
        else_branch: Option<ElseBranch>,
        line: u32,
    },
    Loop {
        header: LoopHeader,
        body: Vec<Stmt>,
        line: u32,
    },
    Expr {
        expr: Expr,
        line: u32,
    },
}

impl Stmt {
    pub fn line(&self) -> u32 {
        match self {
            Stmt::VarDecl { line, .. }
            | Stmt::Assign { line, .. }
            | Stmt::If { line, .. }
            | Stmt::Loop { line, .. }
            | Stmt::Expr { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElseBranch {
    Block(Vec<Stmt>),
    /// `else if ...`: always a `Stmt::If`.
    If(Box<Stmt>),
}

/// How a `loop(...)` header was classified. The classification is purely
/// syntactic and decided at parse time: an empty header is infinite, the exact
/// shape `IDENT in expr` is a for-each, an expression whose root operator is a
/// comparison or logical operator is a while-style conditional loop, and any
/// other expression is a repeat-count loop.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopHeader {
    Infinite,
    ForEach { variable: String, iterable: Expr },
    Conditional(Expr),
    Count(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number {
        value: f64,
        line: u32,
    },
    Str {
        value: String,
        line: u32,
    },
    Array {
        elements: Vec<Expr>,
        line: u32,
    },
    Ident {
        name: String,
        line: u32,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        line: u32,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
        line: u32,
    },
    /// Callee is a bare identifier; Origin has no first-class functions.
    Call {
        callee: String,
        args: Vec<Expr>,
        line: u32,
    },
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
        line: u32,
    },
}

impl Expr {
    pub fn line(&self) -> u32 {
        match self {
            Expr::Number { line, .. }
            | Expr::Str { line, .. }
            | Expr::Array { line, .. }
            | Expr::Ident { line, .. }
            | Expr::Binary { line, .. }
            | Expr::Unary { line, .. }
            | Expr::Call { line, .. }
            | Expr::Index { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Neq,
    Lt,
    Lte,
    Gt,
    Gte,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Neq => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Lte => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Gte => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// True for operators that yield a truth value, which makes a loop header
    /// rooted at them a conditional (while-style) loop.
    pub fn is_comparison_or_logical(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq
                | BinaryOp::Neq
                | BinaryOp::Lt
                | BinaryOp::Lte
                | BinaryOp::Gt
                | BinaryOp::Gte
                | BinaryOp::And
                | BinaryOp::Or
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
        }
    }
}

/// Serialize a program to a deterministic, machine-readable JSON tree.
/// Dumping the same program twice yields byte-identical text.
pub fn dump_ast(program: &Program) -> String {
    let doc = json!({ "statements": stmts_to_json(&program.statements) });
    serde_json::to_string(&doc).expect("AST dump cannot fail")
}

fn stmts_to_json(stmts: &[Stmt]) -> JsonValue {
    JsonValue::Array(stmts.iter().map(stmt_to_json).collect())
}

fn stmt_to_json(stmt: &Stmt) -> JsonValue {
    match stmt {
        Stmt::VarDecl { name, init, line } => json!({
            "kind": "var",
            "name": name,
            "init": init.as_ref().map(expr_to_json),
            "line": line,
        }),
        Stmt::Assign {
            target,
            value,
            line,
        } => json!({
            "kind": "assign",
            "target": expr_to_json(target),
            "value": expr_to_json(value),
            "line": line,
        }),
        Stmt::If {
            condition,
            then_block,
            else_branch,
            line,
        } => json!({
            "kind": "if",
            "condition": expr_to_json(condition),
            "then": stmts_to_json(then_block),
            "else": match else_branch {
                None => JsonValue::Null,
                Some(ElseBranch::Block(stmts)) => stmts_to_json(stmts),
                Some(ElseBranch::If(stmt)) => stmt_to_json(stmt),
            },
            "line": line,
        }),
        Stmt::Loop { header, body, line } => json!({
            "kind": "loop",
            "header": match header {
                LoopHeader::Infinite => json!({ "kind": "infinite" }),
                LoopHeader::ForEach { variable, iterable } => json!({
                    "kind": "foreach",
                    "variable": variable,
                    "iterable": expr_to_json(iterable),
                }),
                LoopHeader::Conditional(expr) => json!({
                    "kind": "conditional",
                    "expr": expr_to_json(expr),
                }),
                LoopHeader::Count(expr) => json!({
                    "kind": "count",
                    "expr": expr_to_json(expr),
                }),
            },
            "body": stmts_to_json(body),
            "line": line,
        }),
        Stmt::Expr { expr, line } => json!({
            "kind": "expr",
            "expr": expr_to_json(expr),
            "line": line,
        }),
    }
}

fn expr_to_json(expr: &Expr) -> JsonValue {
    match expr {
        Expr::Number { value, line } => json!({
            "kind": "number",
            "value": value,
            "line": line,
        }),
        Expr::Str { value, line } => json!({
            "kind": "string",
            "value": value,
            "line": line,
        }),
        Expr::Array { elements, line } => json!({
            "kind": "array",
            "elements": elements.iter().map(expr_to_json).collect::<Vec<_>>(),
            "line": line,
        }),
        Expr::Ident { name, line } => json!({
            "kind": "ident",
            "name": name,
            "line": line,
        }),
        Expr::Binary { op, lhs, rhs, line } => json!({
            "kind": "binary",
            "op": op.symbol(),
            "lhs": expr_to_json(lhs),
            "rhs": expr_to_json(rhs),
            "line": line,
        }),
        Expr::Unary { op, operand, line } => json!({
            "kind": "unary",
            "op": op.symbol(),
            "operand": expr_to_json(operand),
            "line": line,
        }),
        Expr::Call { callee, args, line } => json!({
            "kind": "call",
            "callee": callee,
            "args": args.iter().map(expr_to_json).collect::<Vec<_>>(),
            "line": line,
        }),
        Expr::Index { array, index, line } => json!({
            "kind": "index",
            "array": expr_to_json(array),
            "index": expr_to_json(index),
            "line": line,
        }),
    }
}
