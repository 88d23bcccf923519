use std::io::Write;

use anyhow::Result;
use serde_json::json;

/// Installs the stderr logger. `RUST_LOG` wins over `level`.
pub fn init(level: &str, json_lines: bool) -> Result<()> {
    let filters = std::env::var("RUST_LOG").unwrap_or_else(|_| level.to_string());
    let mut b = env_logger::Builder::new();
    b.parse_filters(&filters).target(env_logger::Target::Stderr);
    if json_lines {
        b.format(|buf, r| {
            let line = json!({
                "ts": buf.timestamp_millis().to_string(),
                "level": r.level().as_str(),
                "target": r.target(),
                "msg": r.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    b.try_init()?;
    Ok(())
}
