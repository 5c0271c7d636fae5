//! Independent brute-force evaluator and random program generator used by
//! the oracle-equivalence criterion.
//!
//! The evaluator walks the parsed syntax tree directly with naive semantics
//! (a single flat variable map, plain f64 arithmetic) and shares nothing with
//! the interpreter: no environment chain, no budget, no Value enum.

use std::collections::HashMap;

use origin_core::ast::{BinaryOp, Expr, Program, Stmt, UnaryOp};

/// xorshift64* — deterministic, dependency-free randomness for the generator.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.max(1))
    }

    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

const LITERALS: [&str; 9] = ["0", "1", "2", "3", "7", "10", "0.5", "2.5", "100"];

/// Generator state: which variables exist and what shape they have.
struct GenState {
    num_vars: u32,
    arrays: Vec<usize>, // index = array id, value = length
}

fn gen_expr(rng: &mut Rng, state: &GenState, depth: u32, out: &mut String) {
    let leaf = depth == 0 || rng.below(3) == 0;
    if leaf {
        let mut choices = 1; // literal is always possible
        if state.num_vars > 0 {
            choices += 1;
        }
        if !state.arrays.is_empty() {
            choices += 1;
        }
        match rng.below(choices) {
            0 => {
                let lit = LITERALS[rng.below(LITERALS.len() as u64) as usize];
                if rng.below(4) == 0 {
                    out.push_str(&format!("(-{lit})"));
                } else {
                    out.push_str(lit);
                }
            }
            1 if state.num_vars > 0 => {
                out.push_str(&format!("n{}", rng.below(u64::from(state.num_vars))));
            }
            _ => {
                let id = rng.below(state.arrays.len() as u64) as usize;
                let idx = rng.below(state.arrays[id] as u64);
                out.push_str(&format!("a{id}[{idx}]"));
            }
        }
        return;
    }
    match rng.below(10) {
        0 => {
            out.push_str("(-");
            gen_expr(rng, state, depth - 1, out);
            out.push(')');
        }
        1 => {
            out.push_str("(!");
            gen_expr(rng, state, depth - 1, out);
            out.push(')');
        }
        _ => {
            let op = match rng.below(13) {
                0 => "+",
                1 => "-",
                2 => "*",
                3 => "/",
                4 => "%",
                5 => "==",
                6 => "!=",
                7 => "<",
                8 => "<=",
                9 => ">",
                10 => ">=",
                11 => "&&",
                _ => "||",
            };
            out.push('(');
            gen_expr(rng, state, depth - 1, out);
            out.push_str(&format!(" {op} "));
            gen_expr(rng, state, depth - 1, out);
            out.push(')');
        }
    }
}

/// One random straight-line program over arithmetic, comparisons, and
/// arrays — no builtins, no loops, no possible runtime error.
pub fn gen_program(rng: &mut Rng) -> String {
    let mut state = GenState {
        num_vars: 0,
        arrays: Vec::new(),
    };
    let mut source = String::new();
    let statements = 3 + rng.below(12);
    for _ in 0..statements {
        let mut kinds: Vec<u32> = vec![0, 1]; // declarations always possible
        if state.num_vars > 0 {
            kinds.push(2);
        }
        if !state.arrays.is_empty() {
            kinds.push(3);
        }
        match kinds[rng.below(kinds.len() as u64) as usize] {
            0 => {
                let mut expr = String::new();
                gen_expr(rng, &state, 3, &mut expr);
                source.push_str(&format!("var n{} = {expr}\n", state.num_vars));
                state.num_vars += 1;
            }
            1 => {
                let len = 1 + rng.below(4) as usize;
                let mut elements = Vec::new();
                for _ in 0..len {
                    let mut expr = String::new();
                    gen_expr(rng, &state, 2, &mut expr);
                    elements.push(expr);
                }
                source.push_str(&format!(
                    "var a{} = [{}]\n",
                    state.arrays.len(),
                    elements.join(", ")
                ));
                state.arrays.push(len);
            }
            2 => {
                let target = rng.below(u64::from(state.num_vars));
                let mut expr = String::new();
                gen_expr(rng, &state, 3, &mut expr);
                source.push_str(&format!("n{target} = {expr}\n"));
            }
            _ => {
                let id = rng.below(state.arrays.len() as u64) as usize;
                let idx = rng.below(state.arrays[id] as u64);
                let mut expr = String::new();
                gen_expr(rng, &state, 2, &mut expr);
                source.push_str(&format!("a{id}[{idx}] = {expr}\n"));
            }
        }
    }
    source
}

#[derive(Debug, Clone, PartialEq)]
pub enum NaiveValue {
    Num(f64),
    Arr(Vec<f64>),
}

/// Evaluate a straight-line program with naive semantics.
pub fn naive_run(program: &Program) -> HashMap<String, NaiveValue> {
    let mut vars: HashMap<String, NaiveValue> = HashMap::new();
    for stmt in &program.statements {
        match stmt {
            Stmt::VarDecl { name, init, .. } => {
                let value = match init {
                    Some(Expr::Array { elements, .. }) => {
                        NaiveValue::Arr(elements.iter().map(|e| naive_eval(e, &vars)).collect())
                    }
                    Some(expr) => NaiveValue::Num(naive_eval(expr, &vars)),
                    None => panic!("generator never emits uninitialized declarations"),
                };
                vars.insert(name.clone(), value);
            }
            Stmt::Assign { target, value, .. } => match target {
                Expr::Ident { name, .. } => {
                    let v = naive_eval(value, &vars);
                    vars.insert(name.clone(), NaiveValue::Num(v));
                }
                Expr::Index { array, index, .. } => {
                    let idx = naive_eval(index, &vars) as usize;
                    let v = naive_eval(value, &vars);
                    let Expr::Ident { name, .. } = array.as_ref() else {
                        panic!("generator indexes plain array variables");
                    };
                    match vars.get_mut(name) {
                        Some(NaiveValue::Arr(elements)) => elements[idx] = v,
                        other => panic!("assignment into non-array {other:?}"),
                    }
                }
                other => panic!("unexpected assignment target {other:?}"),
            },
            other => panic!("generator only emits declarations and assignments, got {other:?}"),
        }
    }
    vars
}

fn truthy(n: f64) -> bool {
    n != 0.0
}

fn naive_eval(expr: &Expr, vars: &HashMap<String, NaiveValue>) -> f64 {
    match expr {
        Expr::Number { value, .. } => *value,
        Expr::Ident { name, .. } => match vars.get(name) {
            Some(NaiveValue::Num(n)) => *n,
            other => panic!("expected a number for {name}, got {other:?}"),
        },
        Expr::Index { array, index, .. } => {
            let Expr::Ident { name, .. } = array.as_ref() else {
                panic!("generator indexes plain array variables");
            };
            let idx = naive_eval(index, vars) as usize;
            match vars.get(name) {
                Some(NaiveValue::Arr(elements)) => elements[idx],
                other => panic!("expected an array for {name}, got {other:?}"),
            }
        }
        Expr::Unary { op, operand, .. } => {
            let v = naive_eval(operand, vars);
            match op {
                UnaryOp::Neg => -v,
                UnaryOp::Not => {
                    if truthy(v) {
                        0.0
                    } else {
                        1.0
                    }
                }
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let a = naive_eval(lhs, vars);
            let bool_to_num = |b: bool| if b { 1.0 } else { 0.0 };
            match op {
                BinaryOp::And => bool_to_num(truthy(a) && truthy(naive_eval(rhs, vars))),
                BinaryOp::Or => bool_to_num(truthy(a) || truthy(naive_eval(rhs, vars))),
                _ => {
                    let b = naive_eval(rhs, vars);
                    match op {
                        BinaryOp::Add => a + b,
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        BinaryOp::Div => a / b,
                        BinaryOp::Rem => a % b,
                        BinaryOp::Eq => bool_to_num(a == b),
                        BinaryOp::Neq => bool_to_num(a != b),
                        BinaryOp::Lt => bool_to_num(a < b),
                        BinaryOp::Lte => bool_to_num(a <= b),
                        BinaryOp::Gt => bool_to_num(a > b),
                        BinaryOp::Gte => bool_to_num(a >= b),
                        BinaryOp::And | BinaryOp::Or => unreachable!(),
                    }
                }
            }
        }
        other => panic!("generator never emits {other:?}"),
    }
}
