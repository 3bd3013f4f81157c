//! Report envelope shared by every subcommand.

use std::fs;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use crate::{Format, RunArgs};

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunArgs,
    result: &'a Value,
}

fn header(run: &RunArgs, command: &str) -> String {
    format!(
        "feynman {} {command}  tol={:e} seed={} samples={}\n",
        env!("CARGO_PKG_VERSION"),
        run.tolerance,
        run.rng_seed,
        run.sample_count
    )
}

pub fn render(run: &RunArgs, command: &str, result: &Value, text: &str) -> String {
    match run.output_format {
        Format::Json => {
            let env = Envelope { tool: "feynman", version: env!("CARGO_PKG_VERSION"), command, config: run, result };
            let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => header(run, command) + text,
    }
}

pub fn emit(run: &RunArgs, command: &str, result: &Value, text: &str) -> io::Result<()> {
    let body = render(run, command, result, text);
    match &run.out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}
