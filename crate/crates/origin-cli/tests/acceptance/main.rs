//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The corpus under `corpus/` holds the figure programs, their device
//! fixtures, and hand-simulated golden event logs.

mod naive;

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use origin_core::device::{load_wifi_config, DeviceState, EventKind, EventRecord, SensorTrace};
use origin_core::interpreter::{run, ExecutionBudget, RunOutcome};
use origin_core::net::{MockTransport, TransportScript};
use origin_core::parser::parse_source;
use origin_core::value::Value;
use origin_core::{BuiltinRegistry, LexError, ParseError, RuntimeErrorKind};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel)
}

fn read_corpus(rel: &str) -> String {
    fs::read_to_string(corpus(rel)).unwrap_or_else(|e| panic!("read {rel}: {e}"))
}

struct Fixture {
    trace: Option<&'static str>,
    wifi: Option<&'static str>,
    script: Option<&'static str>,
    budget: ExecutionBudget,
}

impl Fixture {
    fn none() -> Fixture {
        Fixture {
            trace: None,
            wifi: None,
            script: None,
            budget: ExecutionBudget::default(),
        }
    }
}

struct FigRun {
    outcome: Result<RunOutcome, origin_core::RuntimeError>,
    device: DeviceState,
    transport: MockTransport,
    console: Vec<String>,
}

fn run_fig(program_rel: &str, fixture: &Fixture) -> FigRun {
    let source = read_corpus(program_rel);
    let program = parse_source(&source).expect("figure program parses");
    let registry = BuiltinRegistry::standard();
    let mut device = DeviceState::new();
    if let Some(rel) = fixture.trace {
        device.set_trace(SensorTrace::parse_jsonl(&read_corpus(rel)).unwrap());
    }
    if let Some(rel) = fixture.wifi {
        device.set_known_networks(load_wifi_config(&read_corpus(rel)).unwrap());
    }
    let script = match fixture.script {
        Some(rel) => TransportScript::parse(&read_corpus(rel)).unwrap(),
        None => TransportScript::empty(),
    };
    let mut transport = MockTransport::new(script);
    let mut console = Vec::new();
    let mut sink = |text: &str| console.push(text.to_string());
    let outcome = run(
        &program,
        &mut device,
        &registry,
        &mut transport,
        fixture.budget,
        Some(&mut sink),
    );
    FigRun {
        outcome,
        device,
        transport,
        console,
    }
}

fn actuator_states(events: &[EventRecord]) -> Vec<(u64, u8)> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Actuator { state, .. } => Some((e.t_ms, *state)),
            _ => None,
        })
        .collect()
}

#[test]
fn criterion_1_fig1_blink() {
    let started = Instant::now();
    let run = run_fig("programs/fig1.origin", &Fixture::none());
    let elapsed = started.elapsed();
    let outcome = run.outcome.expect("fig1 runs");
    assert_eq!(
        run.device.events_jsonl(),
        "{\"t\":0,\"type\":\"actuator\",\"component\":\"led\",\"state\":1}\n\
         {\"t\":1000,\"type\":\"actuator\",\"component\":\"led\",\"state\":0}\n"
    );
    assert_eq!(outcome.final_time_ms, 2000);
    assert!(
        elapsed.as_millis() < 50,
        "virtual-time run took {elapsed:?}, expected < 50 ms"
    );
    println!("ACCEPTANCE 1 PASS: fig1 blink log exact, final time 2000 ms, ran in {elapsed:?}");
}

#[test]
fn criterion_2_fig2_accelerometer_bindings() {
    let fixture = Fixture {
        trace: Some("traces/fig2.jsonl"),
        ..Fixture::none()
    };
    let run = run_fig("programs/fig2.origin", &fixture);
    let outcome = run.outcome.expect("fig2 runs");
    for (name, expected) in [("x", 0.1f64), ("y", 0.2), ("z", 0.3)] {
        match outcome.final_env.get(name) {
            Some(Value::Number(n)) => {
                assert_eq!(n.to_bits(), expected.to_bits(), "{name} must pass through exactly");
            }
            other => panic!("expected number binding for {name}, got {other:?}"),
        }
    }
    println!("ACCEPTANCE 2 PASS: fig2 binds x=0.1, y=0.2, z=0.3 exactly");
}

#[test]
fn criterion_3_telephony_events() {
    let run = run_fig("programs/fig3.origin", &Fixture::none());
    run.outcome.expect("fig3 runs");
    let events = run.device.events();
    assert_eq!(events.len(), 1);
    assert_eq!(
        events[0].kind,
        EventKind::Call {
            number: "+911234557890".to_string()
        }
    );

    let run = run_fig("programs/fig4.origin", &Fixture::none());
    run.outcome.expect("fig4 runs");
    let events = run.device.events();
    assert_eq!(events.len(), 1);
    assert_eq!(
        events[0].kind,
        EventKind::Sms {
            number: "+911234557890".to_string(),
            body: "Hello world !!".to_string()
        }
    );
    println!("ACCEPTANCE 3 PASS: fig3 call event and fig4 sms event exact");
}

#[test]
fn criterion_4_fig5_conditional() {
    let pos = Fixture {
        trace: Some("traces/fig5_pos.jsonl"),
        ..Fixture::none()
    };
    let run = run_fig("programs/fig5.origin", &pos);
    run.outcome.expect("fig5 runs");
    assert_eq!(actuator_states(run.device.events()), vec![(0, 1)]);

    let neg = Fixture {
        trace: Some("traces/fig5_neg.jsonl"),
        ..Fixture::none()
    };
    let run = run_fig("programs/fig5.origin", &neg);
    run.outcome.expect("fig5 runs");
    assert_eq!(actuator_states(run.device.events()), vec![(0, 0)]);
    println!("ACCEPTANCE 4 PASS: fig5 emits [led 1] for +1.0 and [led 0] for -1.0");
}

#[test]
fn criterion_5_loop_dispatch() {
    // Figs 7 and 8: 20 actuator events, final time 20 s, logs match the
    // hand-simulated goldens.
    for (program, golden) in [
        ("programs/fig7.origin", "golden/fig7_events.jsonl"),
        ("programs/fig8.origin", "golden/fig8_events.jsonl"),
    ] {
        let run = run_fig(program, &Fixture::none());
        let outcome = run.outcome.expect("figure runs");
        assert_eq!(run.device.events().len(), 20, "{program}");
        assert_eq!(outcome.final_time_ms, 20_000, "{program}");
        assert_eq!(run.device.events_jsonl(), read_corpus(golden), "{program}");
    }

    // Fig 9: 8 events with the gap pattern from the array, final time 10 s.
    let run = run_fig("programs/fig9.origin", &Fixture::none());
    let outcome = run.outcome.expect("fig9 runs");
    let states = actuator_states(run.device.events());
    assert_eq!(states.len(), 8);
    let gaps: Vec<u64> = states.windows(2).map(|w| w[1].0 - w[0].0).collect();
    assert_eq!(gaps, vec![500, 500, 1000, 1000, 1500, 1500, 2000]);
    assert_eq!(outcome.final_time_ms, 10_000);
    assert_eq!(run.device.events_jsonl(), read_corpus("golden/fig9_events.jsonl"));

    // Fig 6 through the CLI: exit code 3 and a strictly alternating prefix.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fig6.jsonl");
    let output = Command::new(env!("CARGO_BIN_EXE_origin"))
        .arg("run")
        .arg(corpus("programs/fig6.origin"))
        .args(["--max-steps", "1000", "--events-out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let log = fs::read_to_string(&out_path).unwrap();
    let events: Vec<EventRecord> = log
        .lines()
        .map(|l| EventRecord::from_jsonl_line(l).unwrap())
        .collect();
    assert!(!events.is_empty());
    for (i, event) in events.iter().enumerate() {
        match &event.kind {
            EventKind::Actuator { state, .. } => {
                assert_eq!(*state, u8::from(i % 2 == 0), "event {i} breaks alternation");
            }
            other => panic!("unexpected event {other:?}"),
        }
    }
    println!(
        "ACCEPTANCE 5 PASS: figs 7-9 match goldens, fig6 exits 3 with {} alternating events",
        events.len()
    );
}

#[test]
fn criterion_6_fig10_end_to_end() {
    let base = Fixture {
        trace: Some("traces/fig10.jsonl"),
        wifi: Some("wifi/fig10.json"),
        script: Some("transport/post_ok.json"),
        ..Fixture::none()
    };
    let run = run_fig("programs/fig10.origin", &base);
    let outcome = run.outcome.expect("fig10 runs");
    match outcome.final_env.get("conStatus") {
        Some(Value::Number(n)) => assert_eq!(*n, 1.0, "wifiConnect must succeed"),
        other => panic!("expected conStatus number, got {other:?}"),
    }
    let calls = run.transport.recorded_calls();
    assert_eq!(calls.len(), 1, "exactly one transport call");
    assert_eq!(calls[0].method, origin_core::net::Method::Post);
    assert_eq!(calls[0].url, "http://sampleurl.com");
    assert_eq!(
        calls[0].body.as_deref(),
        Some(br#"{"name":"vishnu","age":20,"gyroscopeX":0.25}"#.as_slice()),
        "body must be byte-exact"
    );
    assert_eq!(run.console, vec![" post request successful ".to_string()]);

    // Same run with the transport scripted to 500.
    let failing = Fixture {
        trace: Some("traces/fig10.jsonl"),
        wifi: Some("wifi/fig10.json"),
        script: Some("transport/post_fail.json"),
        budget: ExecutionBudget::default(),
    };
    let run = run_fig("programs/fig10.origin", &failing);
    run.outcome.expect("fig10 runs");
    assert_eq!(run.console, vec![" post request failed ".to_string()]);

    // Wrong WiFi password: no transport traffic at all.
    let wrong_wifi = Fixture {
        trace: Some("traces/fig10.jsonl"),
        wifi: Some("wifi/fig10_wrong.json"),
        script: Some("transport/post_ok.json"),
        budget: ExecutionBudget::default(),
    };
    let run = run_fig("programs/fig10.origin", &wrong_wifi);
    run.outcome.expect("fig10 runs");
    assert_eq!(run.console, vec!["Wifi not connected".to_string()]);
    assert_eq!(run.transport.recorded_calls().len(), 0);
    println!("ACCEPTANCE 6 PASS: fig10 byte-exact POST body, 200/500 console lines, wifi gate");
}

/// Every figure with its fixture; fig6 runs under a budget so it halts.
fn full_corpus_fixtures() -> Vec<(&'static str, Fixture)> {
    let budgeted = ExecutionBudget {
        max_statements: 1000,
        max_virtual_ms: None,
    };
    vec![
        ("programs/fig1.origin", Fixture::none()),
        (
            "programs/fig2.origin",
            Fixture { trace: Some("traces/fig2.jsonl"), ..Fixture::none() },
        ),
        ("programs/fig3.origin", Fixture::none()),
        ("programs/fig4.origin", Fixture::none()),
        (
            "programs/fig5.origin",
            Fixture { trace: Some("traces/fig5_pos.jsonl"), ..Fixture::none() },
        ),
        (
            "programs/fig6.origin",
            Fixture { budget: budgeted, ..Fixture::none() },
        ),
        ("programs/fig7.origin", Fixture::none()),
        ("programs/fig8.origin", Fixture::none()),
        ("programs/fig9.origin", Fixture::none()),
        (
            "programs/fig10.origin",
            Fixture {
                trace: Some("traces/fig10.jsonl"),
                wifi: Some("wifi/fig10.json"),
                script: Some("transport/post_ok.json"),
                budget: ExecutionBudget::default(),
            },
        ),
    ]
}

#[test]
fn criterion_7_determinism_over_100_runs() {
    let corpus_hash = || {
        let mut hasher = DefaultHasher::new();
        for (program, fixture) in full_corpus_fixtures() {
            let run = run_fig(program, &fixture);
            run.device.events_jsonl().hash(&mut hasher);
        }
        hasher.finish()
    };
    let first = corpus_hash();
    for i in 1..100 {
        assert_eq!(corpus_hash(), first, "run {i} diverged");
    }
    println!("ACCEPTANCE 7 PASS: 100 corpus runs hash to {first:#018x}");
}

#[test]
fn criterion_8_oracle_equivalence_200_programs() {
    let mut rng = naive::Rng::new(0x0716_1f2e_3d4c_5b6a);
    for case in 0..200 {
        let source = naive::gen_program(&mut rng);
        let program = parse_source(&source)
            .unwrap_or_else(|e| panic!("case {case}: generated program fails to parse: {e}\n{source}"));

        let expected = naive::naive_run(&program);

        let registry = BuiltinRegistry::standard();
        let mut device = DeviceState::new();
        let mut transport = MockTransport::default();
        let outcome = run(
            &program,
            &mut device,
            &registry,
            &mut transport,
            ExecutionBudget::default(),
            None,
        )
        .unwrap_or_else(|e| panic!("case {case}: interpreter failed: {e}\n{source}"));

        for (name, naive_value) in &expected {
            match (naive_value, outcome.final_env.get(name)) {
                (naive::NaiveValue::Num(expected), Some(Value::Number(actual))) => {
                    assert_eq!(
                        actual.to_bits(),
                        expected.to_bits(),
                        "case {case}: {name} diverged ({actual} vs {expected})\n{source}"
                    );
                }
                (naive::NaiveValue::Arr(expected), Some(Value::Array(actual))) => {
                    let actual: Vec<u64> = actual.borrow().iter().map(|v| match v {
                        Value::Number(n) => n.to_bits(),
                        other => panic!("case {case}: non-number element {other:?}\n{source}"),
                    }).collect();
                    let expected: Vec<u64> = expected.iter().map(|n| n.to_bits()).collect();
                    assert_eq!(actual, expected, "case {case}: {name} diverged\n{source}");
                }
                (naive_value, actual) => {
                    panic!("case {case}: {name} shape mismatch: {naive_value:?} vs {actual:?}\n{source}");
                }
            }
        }
    }
    println!("ACCEPTANCE 8 PASS: 200 random straight-line programs match the naive evaluator");
}

/// What kind of failure a malformed program must produce.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ExpectedError {
    Lex,
    Parse,
    Runtime(RuntimeErrorKind),
}

fn diagnose(source: &str) -> Result<(), (ExpectedError, u32)> {
    let tokens = match origin_core::tokenize(source) {
        Ok(tokens) => tokens,
        Err(LexError { line, .. }) => return Err((ExpectedError::Lex, line)),
    };
    let program = match origin_core::parse(&tokens) {
        Ok(program) => program,
        Err(ParseError { line, .. }) => return Err((ExpectedError::Parse, line)),
    };
    let registry = BuiltinRegistry::standard();
    let mut device = DeviceState::new();
    let mut transport = MockTransport::default();
    match run(
        &program,
        &mut device,
        &registry,
        &mut transport,
        ExecutionBudget {
            max_statements: 10_000,
            max_virtual_ms: None,
        },
        None,
    ) {
        Ok(_) => Ok(()),
        Err(e) => Err((ExpectedError::Runtime(e.kind), e.line)),
    }
}

#[test]
fn criterion_9_error_taxonomy() {
    use ExpectedError::*;
    use RuntimeErrorKind::*;
    // (name, source, expected error, expected line)
    let corpus: &[(&str, &str, ExpectedError, u32)] = &[
        ("unterminated string", "var s = \"hello", Lex, 1),
        ("invalid escape", "var a = 1\nvar s = \"a\\qb\"", Lex, 2),
        ("char outside alphabet", "var x = 1 @ 2", Lex, 1),
        ("lone ampersand", "var x = 1 & 2", Lex, 1),
        ("missing brace after if", "if( a > 0)\noutput(led, HIGH)", Parse, 2),
        ("unclosed block", "loop(){\noutput(led, HIGH)\n", Parse, 3),
        ("missing variable name", "var = 5", Parse, 1),
        ("assignment in expression", "var x = (1 = 2)", Parse, 1),
        ("dangling operator", "var x = 1 +", Parse, 1),
        ("invalid assignment target", "output(led, HIGH) = 5", Parse, 1),
        ("two statements one line", "var x = 1 var y = 2", Parse, 1),
        ("bare else", "else {\n}", Parse, 1),
        ("undeclared assignment", "x = 5", Runtime(Name), 1),
        ("undefined variable read", "var y = x + 1", Runtime(Name), 1),
        ("redeclaration", "var x = 1\nvar x = 2", Runtime(Name), 2),
        ("builtin shadowed by var", "var output = 1", Runtime(Name), 1),
        ("unknown function", "frobnicate(1)", Runtime(Name), 1),
        ("output with no args", "output()", Runtime(Arity), 1),
        ("message with one arg", "message(\"x\")", Runtime(Arity), 1),
        ("json with odd args", "json(\"k\")", Runtime(Arity), 1),
        ("wait with two args", "wait(1, 2)", Runtime(Arity), 1),
        ("input of an actuator", "var x = input(led)", Runtime(Type), 1),
        ("wait of text", "wait(\"x\")", Runtime(Type), 1),
        ("wait of negative", "wait(-5)", Runtime(Type), 1),
        ("call of a number", "call(5)", Runtime(Type), 1),
        ("output state not a number", "output(led, \"on\")", Runtime(Type), 1),
        ("wifiConnect non-text", "wifiConnect(1, 2)", Runtime(Type), 1),
        ("json non-text key", "json(1, 2)", Runtime(Type), 1),
        ("addJsonElement non-object", "addJsonElement(5, \"k\", 1)", Runtime(Type), 1),
        ("request bad scheme", "request(\"ftp://x\")", Runtime(Type), 1),
        ("addJson non-request", "addJson(\"x\", json())", Runtime(Type), 1),
        ("post of non-request", "var ok = post(5)", Runtime(Type), 1),
        ("number plus array", "var a = [1, 2]\nvar b = 1 + a", Runtime(Type), 2),
        ("text condition", "if(\"x\"){\n}", Runtime(Type), 1),
        ("null arithmetic", "var x\nvar y = x + 1", Runtime(Type), 2),
        ("count loop over text", "loop(\"x\"){\n}", Runtime(Type), 1),
        ("foreach over number", "loop(i in 5){\n}", Runtime(Type), 1),
        ("index out of range", "var a = [1, 2]\nvar b = a[5]", Runtime(Index), 2),
        ("non-integer index", "var a = [1, 2]\nvar b = a[0.5]", Runtime(Index), 2),
        ("index into number", "var n = 3\nvar b = n[0]", Runtime(Type), 2),
        ("infinite loop budget", "loop(){\n}", Runtime(BudgetExceeded), 1),
    ];

    for (name, source, expected_error, expected_line) in corpus {
        match diagnose(source) {
            Ok(()) => panic!("{name}: expected {expected_error:?}, but the program succeeded"),
            Err((error, line)) => {
                assert_eq!(error, *expected_error, "{name}: wrong error kind");
                assert_eq!(line, *expected_line, "{name}: wrong line");
            }
        }
    }
    println!(
        "ACCEPTANCE 9 PASS: {} malformed programs produce the specified kind and line",
        corpus.len()
    );
}
