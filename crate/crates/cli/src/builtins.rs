//! Circuit sources: built-in names or circuit files.

use std::path::Path;

use grover_optics::circuit::{build_grover_compiled, build_grover_generic, build_grover_uncompiled, default_iterations};
use grover_optics::compiler::compile;
use grover_optics::format::parse_circuit;
use grover_optics::oracle::OracleSetting;
use grover_optics::{BitString, Circuit};

use crate::error::{usage, CliResult};

pub const BUILTIN_HELP: &str = "grover2-uncompiled, grover2-compiled, grover<n>, grover<n>-compiled";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Builtin {
    Uncompiled2,
    Compiled2,
    Generic { n: usize, compiled: bool },
}

fn parse_builtin(name: &str) -> Option<Builtin> {
    match name {
        "grover2-uncompiled" => return Some(Builtin::Uncompiled2),
        "grover2-compiled" => return Some(Builtin::Compiled2),
        _ => {}
    }
    let rest = name.strip_prefix("grover")?;
    let (digits, compiled) = match rest.strip_suffix("-compiled") {
        Some(d) => (d, true),
        None => (rest, false),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(|n| Builtin::Generic { n, compiled })
}

pub fn parse_oracle(text: &str) -> CliResult<OracleSetting> {
    text.parse().map_err(|e: grover_optics::Error| crate::error::CliError::Usage(e.to_string()))
}

fn default_oracle(n: usize) -> CliResult<OracleSetting> {
    Ok(OracleSetting::Ideal(BitString::new(0, n)?))
}

/// Circuit named by `source`: an existing file, else a built-in.
pub fn resolve(source: &str, oracle: Option<&str>, iterations: Option<usize>) -> CliResult<Circuit> {
    let path = Path::new(source);
    if path.is_file() {
        if oracle.is_some() || iterations.is_some() {
            return usage("--oracle and --iterations apply to built-in circuits only");
        }
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::Usage(format!("cannot read {source}: {e}")))?;
        return Ok(parse_circuit(&text)?);
    }
    let Some(b) = parse_builtin(source) else {
        return usage(format!("`{source}` is neither a file nor a built-in circuit ({BUILTIN_HELP})"));
    };
    let n = match b {
        Builtin::Uncompiled2 | Builtin::Compiled2 => 2,
        Builtin::Generic { n, .. } => n,
    };
    let setting = match oracle {
        Some(o) => parse_oracle(o)?,
        None => default_oracle(n)?,
    };
    if iterations.is_some() && !matches!(b, Builtin::Generic { .. }) {
        return usage(format!("{source} has a fixed single iteration; use grover2 for --iterations"));
    }
    let c = match b {
        Builtin::Uncompiled2 => build_grover_uncompiled(2, &setting)?,
        Builtin::Compiled2 => build_grover_compiled(2, &setting)?,
        Builtin::Generic { n, compiled } => {
            let k = iterations.unwrap_or_else(|| default_iterations(n));
            let c = build_grover_generic(n, &setting, k)?;
            if compiled {
                compile(&c)?.0.with_name(format!("grover{n}-compiled"))
            } else {
                c
            }
        }
    };
    Ok(c)
}
