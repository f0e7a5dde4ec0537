use clap::Parser;

use fraclab_cli::cli::{self, Cli};

fn main() {
    // The only environment knob: a cap on the worker pool.
    if let Ok(v) = std::env::var("FRACLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    let argv = match overlay_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    };
    let parsed = Cli::parse_from(&argv);
    if let Err(failure) = cli::run(parsed) {
        eprintln!("error: {failure}");
        std::process::exit(failure.code);
    }
}

/// Overlays defaults from a `--config` JSON file before parsing: the file
/// supplies flag values by long name, and flags given on the command
/// line win. Unknown keys are rejected by the argument parser.
fn overlay_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut config_path: Option<String> = None;
    for (i, arg) in argv.iter().enumerate() {
        if arg == "--config" {
            config_path = argv.get(i + 1).cloned();
        } else if let Some(rest) = arg.strip_prefix("--config=") {
            config_path = Some(rest.to_string());
        }
    }
    let Some(path) = config_path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let serde_json::Value::Object(map) = doc else {
        return Err(format!("{path}: expected a JSON object"));
    };
    if argv.len() < 2 {
        return Err("missing subcommand".to_string());
    }
    let mut merged = vec![argv[0].clone(), argv[1].clone()];
    for (key, value) in &map {
        if key == "config" {
            return Err("config files cannot set `config`".to_string());
        }
        // Explicit flags win: skip file keys that appear on the command
        // line in either `--key value` or `--key=value` form.
        let flag = format!("--{key}");
        let given = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        let rendered = match value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        merged.push(flag);
        merged.push(rendered);
    }
    merged.extend_from_slice(&argv[2..]);
    Ok(merged)
}
