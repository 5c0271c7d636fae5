//! Tree-walking evaluator: executes a program against an environment, the
//! builtin registry, and a virtual device.
//!
//! A run is strictly single-threaded: one interpreter owns its environment
//! and device exclusively for the duration of `run`. Every statement
//! execution is charged against the statement budget, and a loop charges one
//! additional statement per iteration, so nonterminating programs halt with
//! `BudgetExceeded` instead of hanging.

use std::collections::HashMap;

use thiserror::Error;

use crate::ast::{BinaryOp, ElseBranch, Expr, LoopHeader, Program, Stmt, UnaryOp};
use crate::builtins::BuiltinRegistry;
use crate::device::DeviceState;
use crate::net::Transport;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    Type,
    Name,
    Arity,
    Index,
    BudgetExceeded,
}

impl RuntimeErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            RuntimeErrorKind::Type => "type error",
            RuntimeErrorKind::Name => "name error",
            RuntimeErrorKind::Arity => "arity error",
            RuntimeErrorKind::Index => "index error",
            RuntimeErrorKind::BudgetExceeded => "budget exceeded",
        }
    }
}

/// Runtime error carrying the source line of the offending statement or
/// expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at line {line}: {message}", kind.label())]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub line: u32,
    pub message: String,
}

impl RuntimeError {
    pub fn new(kind: RuntimeErrorKind, line: u32, message: impl Into<String>) -> RuntimeError {
        RuntimeError {
            kind,
            line,
            message: message.into(),
        }
    }

    pub fn type_error(line: u32, message: impl Into<String>) -> RuntimeError {
        RuntimeError::new(RuntimeErrorKind::Type, line, message)
    }

    pub fn name_error(line: u32, message: impl Into<String>) -> RuntimeError {
        RuntimeError::new(RuntimeErrorKind::Name, line, message)
    }

    pub fn arity_error(line: u32, message: impl Into<String>) -> RuntimeError {
        RuntimeError::new(RuntimeErrorKind::Arity, line, message)
    }

    pub fn index_error(line: u32, message: impl Into<String>) -> RuntimeError {
        RuntimeError::new(RuntimeErrorKind::Index, line, message)
    }
}

/// Limits that make nonterminating programs testable. Every executed
/// statement counts against `max_statements`; `max_virtual_ms` caps the
/// virtual clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutionBudget {
    pub max_statements: u64,
    pub max_virtual_ms: Option<u64>,
}

pub const DEFAULT_MAX_STATEMENTS: u64 = 1_000_000;

impl Default for ExecutionBudget {
    fn default() -> Self {
        ExecutionBudget {
            max_statements: DEFAULT_MAX_STATEMENTS,
            max_virtual_ms: None,
        }
    }
}

/// Scope chain. Lookup walks innermost to global; `var` declares in the
/// current scope; plain assignment requires an existing binding.
#[derive(Debug, Clone)]
pub struct Environment {
    scopes: Vec<HashMap<String, Value>>,
}

impl Environment {
    /// Global environment preloaded with the component and sensor keywords
    /// plus HIGH = 1 and LOW = 0.
    pub fn global() -> Environment {
        let mut globals = HashMap::new();
        globals.insert("HIGH".to_string(), Value::Number(1.0));
        globals.insert("LOW".to_string(), Value::Number(0.0));
        for component in crate::device::ComponentId::ALL {
            globals.insert(component.name().to_string(), Value::Component(component));
        }
        for sensor in crate::device::SensorId::ALL {
            globals.insert(sensor.name().to_string(), Value::Sensor(sensor));
        }
        Environment {
            scopes: vec![globals],
        }
    }

    pub fn push_scope(&mut self) {
        self.scopes.push(HashMap::new());
    }

    pub fn pop_scope(&mut self) {
        debug_assert!(self.scopes.len() > 1, "global scope is never popped");
        self.scopes.pop();
    }

    pub fn depth(&self) -> usize {
        self.scopes.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.scopes.truncate(depth.max(1));
    }

    /// Declare in the current scope. Shadowing an outer scope is legal;
    /// re-declaring in the same scope is not.
    pub fn declare(&mut self, name: &str, value: Value) -> Result<(), String> {
        let scope = self.scopes.last_mut().expect("at least the global scope");
        if scope.contains_key(name) {
            return Err(format!("variable '{name}' is already declared in this scope"));
        }
        scope.insert(name.to_string(), value);
        Ok(())
    }

    /// Assign to an existing binding anywhere in the chain.
    pub fn assign(&mut self, name: &str, value: Value) -> Result<(), String> {
        for scope in self.scopes.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                *slot = value;
                return Ok(());
            }
        }
        Err(format!("assignment to undeclared variable '{name}'"))
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.scopes
            .iter()
            .rev()
            .find_map(|scope| scope.get(name))
            .cloned()
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.scopes.iter().any(|scope| scope.contains_key(name))
    }

    /// Snapshot of the innermost scope, used for the final-environment report.
    pub fn top_scope_snapshot(&self) -> HashMap<String, Value> {
        self.scopes.last().cloned().unwrap_or_default()
    }
}

/// What a completed run reports: the event log, a snapshot of the program's
/// top-level variables, the final clock, and the statements charged.
#[derive(Debug)]
pub struct RunOutcome {
    pub events: Vec<crate::device::EventRecord>,
    pub final_env: HashMap<String, Value>,
    pub final_time_ms: u64,
    pub statements_executed: u64,
}

/// Execute a parsed program. Events emitted before an error are preserved in
/// the device's log.
pub fn run(
    program: &Program,
    device: &mut DeviceState,
    registry: &BuiltinRegistry,
    transport: &mut dyn Transport,
    budget: ExecutionBudget,
    console: Option<&mut dyn FnMut(&str)>,
) -> Result<RunOutcome, RuntimeError> {
    let mut env = Environment::global();
    env.push_scope(); // program scope: top-level `var` lands here
    let mut interp = Interp {
        env: &mut env,
        device,
        registry,
        transport,
        budget,
        statements_executed: 0,
        console,
    };
    let result = interp.exec_stmts(&program.statements);
    let statements_executed = interp.statements_executed;
    result.map(|_| RunOutcome {
        events: device.events().to_vec(),
        final_env: env.top_scope_snapshot(),
        final_time_ms: device.now_ms(),
        statements_executed,
    })
}

/// Interpreter state for one run; also the context handed to builtins.
/// `'c` is the console sink's borrow, independent of the run-scoped borrows.
pub struct Interp<'a, 'c> {
    pub env: &'a mut Environment,
    pub device: &'a mut DeviceState,
    pub registry: &'a BuiltinRegistry,
    pub transport: &'a mut dyn Transport,
    pub budget: ExecutionBudget,
    pub statements_executed: u64,
    pub console: Option<&'c mut dyn FnMut(&str)>,
}

impl<'a, 'c> Interp<'a, 'c> {
    /// Run a whole program, returning the value of the final statement when
    /// it is a bare expression (for REPL echo).
    pub fn eval_program(&mut self, program: &Program) -> Result<Option<Value>, RuntimeError> {
        self.exec_stmts(&program.statements)
    }

    fn charge_statement(&mut self, line: u32) -> Result<(), RuntimeError> {
        self.statements_executed += 1;
        if self.statements_executed > self.budget.max_statements {
            return Err(RuntimeError::new(
                RuntimeErrorKind::BudgetExceeded,
                line,
                format!("statement budget of {} exceeded", self.budget.max_statements),
            ));
        }
        Ok(())
    }

    fn exec_stmts(&mut self, stmts: &[Stmt]) -> Result<Option<Value>, RuntimeError> {
        let mut last = None;
        for stmt in stmts {
            last = self.exec_stmt(stmt)?;
        }
        Ok(last)
    }

    /// Returns the value of an expression statement so the REPL can echo it.
    fn exec_stmt(&mut self, stmt: &Stmt) -> Result<Option<Value>, RuntimeError> {
        self.charge_statement(stmt.line())?;
        match stmt {
            Stmt::VarDecl { name, init, line } => {
                if self.registry.contains(name) {
                    return Err(RuntimeError::name_error(
                        *line,
                        format!("cannot shadow builtin function '{name}'"),
                    ));
                }
                let value = match init {
                    Some(expr) => self.eval(expr)?,
                    None => Value::Null,
                };
                self.env
                    .declare(name, value)
                    .map_err(|message| RuntimeError::name_error(*line, message))?;
                Ok(None)
            }
            Stmt::Assign { target, value, line } => {
                match target {
                    Expr::Ident { name, .. } => {
                        let value = self.eval(value)?;
                        self.env
                            .assign(name, value)
                            .map_err(|message| RuntimeError::name_error(*line, message))?;
                    }
                    Expr::Index { array, index, line: index_line } => {
                        let array_value = self.eval(array)?;
                        let index_value = self.eval(index)?;
                        let value = self.eval(value)?;
                        let elements = match &array_value {
                            Value::Array(elements) => elements,
                            other => {
                                return Err(RuntimeError::type_error(
                                    *index_line,
                                    format!("cannot index {}", other.type_name()),
                                ));
                            }
                        };
                        let idx = self.checked_index(&index_value, elements.borrow().len(), *index_line)?;
                        elements.borrow_mut()[idx] = value;
                    }
                    // The parser only produces Ident or Index targets.
                    other => {
                        return Err(RuntimeError::type_error(
                            other.line(),
                            "invalid assignment target",
                        ));
                    }
                }
                Ok(None)
            }
            Stmt::If {
                condition,
                then_block,
                else_branch,
                ..
            } => {
                let value = self.eval(condition)?;
                if self.truthiness(&value, condition)? {
                    self.exec_block(then_block)?;
                } else {
                    match else_branch {
                        Some(ElseBranch::Block(stmts)) => {
                            self.exec_block(stmts)?;
                        }
                        Some(ElseBranch::If(stmt)) => {
                            self.exec_stmt(stmt)?;
                        }
                        None => {}
                    }
                }
                Ok(None)
            }
            Stmt::Loop { header, body, line } => {
                self.exec_loop(header, body, *line)?;
                Ok(None)
            }
            Stmt::Expr { expr, .. } => Ok(Some(self.eval(expr)?)),
        }
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> Result<(), RuntimeError> {
        self.env.push_scope();
        let result = self.exec_stmts(stmts);
        self.env.pop_scope();
        result.map(|_| ())
    }

    fn exec_loop(
        &mut self,
        header: &LoopHeader,
        body: &[Stmt],
        line: u32,
    ) -> Result<(), RuntimeError> {
        match header {
            LoopHeader::Infinite => loop {
                self.charge_statement(line)?;
                self.exec_block(body)?;
            },
            LoopHeader::Conditional(condition) => loop {
                let value = self.eval(condition)?;
                if !self.truthiness(&value, condition)? {
                    return Ok(());
                }
                self.charge_statement(line)?;
                self.exec_block(body)?;
            },
            LoopHeader::Count(expr) => {
                // Evaluated once, before the first iteration; mutating the
                // count variable inside the body never changes the count.
                let value = self.eval(expr)?;
                let n = match value {
                    Value::Number(n) => n,
                    other => {
                        return Err(self.type_error_from(
                            expr,
                            &other,
                            format!("loop count must be a number, got {}", other.type_name()),
                        ));
                    }
                };
                let iterations = if n >= 1.0 { n.floor() as u64 } else { 0 };
                for _ in 0..iterations {
                    self.charge_statement(line)?;
                    self.exec_block(body)?;
                }
                Ok(())
            }
            LoopHeader::ForEach { variable, iterable } => {
                let value = self.eval(iterable)?;
                let elements = match &value {
                    Value::Array(elements) => elements.borrow().clone(),
                    other => {
                        return Err(self.type_error_from(
                            iterable,
                            other,
                            format!("loop iterable must be an array, got {}", other.type_name()),
                        ));
                    }
                };
                // A pre-declared loop variable is written through, so the
                // final element stays visible after the loop; otherwise the
                // binding is loop-local.
                let preexisting = self.env.is_declared(variable);
                if !preexisting {
                    if self.registry.contains(variable) {
                        return Err(RuntimeError::name_error(
                            line,
                            format!("cannot shadow builtin function '{variable}'"),
                        ));
                    }
                    self.env.push_scope();
                    self.env
                        .declare(variable, Value::Null)
                        .map_err(|message| RuntimeError::name_error(line, message))?;
                }
                let result = self.foreach_iterations(variable, elements, body, line);
                if !preexisting {
                    self.env.pop_scope();
                }
                result
            }
        }
    }

    fn foreach_iterations(
        &mut self,
        variable: &str,
        elements: Vec<Value>,
        body: &[Stmt],
        line: u32,
    ) -> Result<(), RuntimeError> {
        for element in elements {
            self.charge_statement(line)?;
            self.env
                .assign(variable, element)
                .map_err(|message| RuntimeError::name_error(line, message))?;
            self.exec_block(body)?;
        }
        Ok(())
    }

    /// Number != 0 is true; anything else in a bare condition position is a
    /// type error.
    fn truthiness(&self, value: &Value, source: &Expr) -> Result<bool, RuntimeError> {
        match value {
            Value::Number(n) => Ok(*n != 0.0),
            other => Err(self.type_error_from(
                source,
                other,
                format!("condition must be a number, got {}", other.type_name()),
            )),
        }
    }

    /// Build a type error, naming the variable when the offending value is a
    /// Null that came straight from an identifier.
    fn type_error_from(&self, source: &Expr, value: &Value, message: String) -> RuntimeError {
        if let (Value::Null, Expr::Ident { name, line }) = (value, source) {
            return RuntimeError::type_error(
                *line,
                format!("variable '{name}' is null"),
            );
        }
        RuntimeError::type_error(source.line(), message)
    }

    fn checked_index(
        &self,
        index: &Value,
        len: usize,
        line: u32,
    ) -> Result<usize, RuntimeError> {
        let n = match index {
            Value::Number(n) => *n,
            other => {
                return Err(RuntimeError::index_error(
                    line,
                    format!("array index must be a number, got {}", other.type_name()),
                ));
            }
        };
        if !n.is_finite() || n.fract() != 0.0 {
            return Err(RuntimeError::index_error(
                line,
                format!("array index must be an integer, got {}", crate::value::format_number(n)),
            ));
        }
        if n < 0.0 || n >= len as f64 {
            return Err(RuntimeError::index_error(
                line,
                format!("index {} out of range (length {len})", crate::value::format_number(n)),
            ));
        }
        Ok(n as usize)
    }

    pub fn eval(&mut self, expr: &Expr) -> Result<Value, RuntimeError> {
        match expr {
            Expr::Number { value, .. } => Ok(Value::Number(*value)),
            Expr::Str { value, .. } => Ok(Value::Text(value.clone())),
            Expr::Array { elements, .. } => {
                let values: Result<Vec<Value>, RuntimeError> =
                    elements.iter().map(|e| self.eval(e)).collect();
                Ok(Value::array(values?))
            }
            Expr::Ident { name, line } => match self.env.get(name) {
                Some(value) => Ok(value),
                None if self.registry.contains(name) => Err(RuntimeError::name_error(
                    *line,
                    format!("'{name}' is a builtin function, not a value"),
                )),
                None => Err(RuntimeError::name_error(
                    *line,
                    format!("undefined variable '{name}'"),
                )),
            },
            Expr::Binary { op, lhs, rhs, line } => self.eval_binary(*op, lhs, rhs, *line),
            Expr::Unary { op, operand, .. } => {
                let value = self.eval(operand)?;
                match op {
                    UnaryOp::Neg => match value {
                        Value::Number(n) => Ok(Value::Number(-n)),
                        other => Err(self.type_error_from(
                            operand,
                            &other,
                            format!("cannot negate {}", other.type_name()),
                        )),
                    },
                    UnaryOp::Not => {
                        let truthy = self.truthiness(&value, operand)?;
                        Ok(Value::Number(if truthy { 0.0 } else { 1.0 }))
                    }
                }
            }
            Expr::Call { callee, args, line } => self.eval_call(callee, args, *line),
            Expr::Index { array, index, line } => {
                let array_value = self.eval(array)?;
                let index_value = self.eval(index)?;
                match &array_value {
                    Value::Array(elements) => {
                        let elements = elements.borrow();
                        let idx = self.checked_index(&index_value, elements.len(), *line)?;
                        Ok(elements[idx].clone())
                    }
                    other => Err(self.type_error_from(
                        array,
                        other,
                        format!("cannot index {}", other.type_name()),
                    )),
                }
            }
        }
    }

    fn eval_binary(
        &mut self,
        op: BinaryOp,
        lhs_expr: &Expr,
        rhs_expr: &Expr,
        line: u32,
    ) -> Result<Value, RuntimeError> {
        // Short-circuit logical operators evaluate the right side lazily.
        if matches!(op, BinaryOp::And | BinaryOp::Or) {
            let lhs = self.eval(lhs_expr)?;
            let lhs_truthy = self.truthiness(&lhs, lhs_expr)?;
            let result = match op {
                BinaryOp::And => {
                    if !lhs_truthy {
                        false
                    } else {
                        let rhs = self.eval(rhs_expr)?;
                        self.truthiness(&rhs, rhs_expr)?
                    }
                }
                BinaryOp::Or => {
                    if lhs_truthy {
                        true
                    } else {
                        let rhs = self.eval(rhs_expr)?;
                        self.truthiness(&rhs, rhs_expr)?
                    }
                }
                _ => unreachable!(),
            };
            return Ok(Value::Number(if result { 1.0 } else { 0.0 }));
        }

        let lhs = self.eval(lhs_expr)?;
        let rhs = self.eval(rhs_expr)?;
        match op {
            BinaryOp::Add => match (&lhs, &rhs) {
                (Value::Number(a), Value::Number(b)) => Ok(Value::Number(a + b)),
                // Text concatenation coerces the other operand to its
                // display form.
                (Value::Text(a), b) => Ok(Value::Text(format!("{a}{}", b.display()))),
                (a, Value::Text(b)) => Ok(Value::Text(format!("{}{b}", a.display()))),
                _ => Err(self.arith_type_error("+", lhs_expr, &lhs, rhs_expr, &rhs, line)),
            },
            BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => {
                match (&lhs, &rhs) {
                    (Value::Number(a), Value::Number(b)) => Ok(Value::Number(match op {
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        BinaryOp::Div => a / b,
                        BinaryOp::Rem => a % b,
                        _ => unreachable!(),
                    })),
                    _ => Err(self.arith_type_error(
                        op.symbol(),
                        lhs_expr,
                        &lhs,
                        rhs_expr,
                        &rhs,
                        line,
                    )),
                }
            }
            BinaryOp::Eq | BinaryOp::Neq => {
                let equal = self.values_equal(&lhs, &rhs, line)?;
                let result = if op == BinaryOp::Eq { equal } else { !equal };
                Ok(Value::Number(if result { 1.0 } else { 0.0 }))
            }
            BinaryOp::Lt | BinaryOp::Lte | BinaryOp::Gt | BinaryOp::Gte => {
                match (&lhs, &rhs) {
                    (Value::Number(a), Value::Number(b)) => {
                        let result = match op {
                            BinaryOp::Lt => a < b,
                            BinaryOp::Lte => a <= b,
                            BinaryOp::Gt => a > b,
                            BinaryOp::Gte => a >= b,
                            _ => unreachable!(),
                        };
                        Ok(Value::Number(if result { 1.0 } else { 0.0 }))
                    }
                    _ => Err(self.arith_type_error(
                        op.symbol(),
                        lhs_expr,
                        &lhs,
                        rhs_expr,
                        &rhs,
                        line,
                    )),
                }
            }
            BinaryOp::And | BinaryOp::Or => unreachable!(),
        }
    }

    fn arith_type_error(
        &self,
        symbol: &str,
        lhs_expr: &Expr,
        lhs: &Value,
        rhs_expr: &Expr,
        rhs: &Value,
        line: u32,
    ) -> RuntimeError {
        // Name the variable when a Null operand came from an identifier.
        if matches!(lhs, Value::Null) {
            if let Expr::Ident { name, line } = lhs_expr {
                return RuntimeError::type_error(*line, format!("variable '{name}' is null"));
            }
        }
        if matches!(rhs, Value::Null) {
            if let Expr::Ident { name, line } = rhs_expr {
                return RuntimeError::type_error(*line, format!("variable '{name}' is null"));
            }
        }
        RuntimeError::type_error(
            line,
            format!(
                "cannot apply '{symbol}' to {} and {}",
                lhs.type_name(),
                rhs.type_name()
            ),
        )
    }

    /// Equality semantics: numbers by value, text by content, components and
    /// sensors by identity, null only equals null; arrays, json objects, and
    /// request handles cannot be compared.
    fn values_equal(&self, lhs: &Value, rhs: &Value, line: u32) -> Result<bool, RuntimeError> {
        for side in [lhs, rhs] {
            if matches!(side, Value::Array(_) | Value::Json(_) | Value::Request(_)) {
                return Err(RuntimeError::type_error(
                    line,
                    format!("cannot compare {} values", side.type_name()),
                ));
            }
        }
        Ok(match (lhs, rhs) {
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Component(a), Value::Component(b)) => a == b,
            (Value::Sensor(a), Value::Sensor(b)) => a == b,
            (Value::Null, Value::Null) => true,
            _ => false,
        })
    }

    fn eval_call(
        &mut self,
        callee: &str,
        args: &[Expr],
        line: u32,
    ) -> Result<Value, RuntimeError> {
        // Builtins resolve before environment lookup.
        let Some(builtin) = self.registry.get(callee) else {
            return Err(RuntimeError::name_error(
                line,
                format!("unknown function '{callee}'"),
            ));
        };
        if !builtin.arity.accepts(args.len()) {
            return Err(RuntimeError::arity_error(
                line,
                format!(
                    "{callee} expects {}, got {}",
                    builtin.arity.describe(),
                    args.len()
                ),
            ));
        }
        let mut values = Vec::with_capacity(args.len());
        for arg in args {
            values.push(self.eval(arg)?);
        }
        (builtin.handler)(self, values, line)
    }
}
