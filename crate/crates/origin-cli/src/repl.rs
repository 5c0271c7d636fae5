//! Interactive session: reads statements (multi-line until braces balance),
//! executes them against a persistent environment and device, and echoes the
//! value of bare expressions.

use std::io::{BufRead, Write};

use origin_core::device::DeviceState;
use origin_core::interpreter::ExecutionBudget;
use origin_core::lexer::TokenKind;
use origin_core::net::MockTransport;
use origin_core::value::Value;
use origin_core::Session;

use crate::{default_max_steps, report, EXIT_OK};

pub fn cmd_repl() -> u8 {
    let max_statements = match default_max_steps() {
        Ok(n) => n,
        Err(code) => return code,
    };
    let budget = ExecutionBudget {
        max_statements,
        max_virtual_ms: None,
    };
    let mut session = Session::new(DeviceState::new(), Box::new(MockTransport::default()))
        .with_budget(budget);

    let interactive = crate::stdin_is_interactive();
    if interactive {
        println!("origin interpreter — :events shows the device log, :quit exits");
    }

    let stdin = std::io::stdin();
    let mut buffer = String::new();
    loop {
        if interactive {
            let prompt = if buffer.is_empty() { "> " } else { ".. " };
            print!("{prompt}");
            let _ = std::io::stdout().flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break, // EOF
            Ok(_) => {}
            Err(e) => {
                eprintln!("origin: error: {e}");
                break;
            }
        }

        if buffer.is_empty() {
            match line.trim() {
                ":quit" | ":q" => break,
                ":events" => {
                    print!("{}", session.device().events_jsonl());
                    continue;
                }
                command if command.starts_with(':') => {
                    eprintln!("origin: unknown command {command} (try :events or :quit)");
                    continue;
                }
                "" => continue,
                _ => {}
            }
        }

        buffer.push_str(&line);
        if !input_complete(&buffer) {
            continue;
        }

        let input = std::mem::take(&mut buffer);
        let mut print_console = |text: &str| println!("{text}");
        match session.eval_with_console(&input, Some(&mut print_console)) {
            Ok(Some(value)) => {
                if !matches!(value, Value::Null) {
                    println!("{}", value.display());
                }
            }
            Ok(None) => {}
            Err(e) => {
                // Errors print and the session continues.
                report(&e);
            }
        }
    }
    EXIT_OK
}

/// Input is complete when it lexes with balanced braces (or fails to lex at
/// all, so the error surfaces immediately). Strings cannot span lines, so
/// braces are the only multi-line construct.
fn input_complete(buffer: &str) -> bool {
    match origin_core::tokenize(buffer) {
        Err(_) => true,
        Ok(tokens) => {
            let mut depth = 0i64;
            for token in &tokens {
                match token.kind {
                    TokenKind::LBrace => depth += 1,
                    TokenKind::RBrace => depth -= 1,
                    _ => {}
                }
            }
            depth <= 0
        }
    }
}
