use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::runner::RunOutput;
use super::CliError;

/// Output prefix resolved against the output directory (absolute prefixes win).
pub fn resolve_prefix(output_dir: Option<&Path>, prefix: &str) -> PathBuf {
    let p = Path::new(prefix);
    match output_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

/// Writes `bytes` next to `path` and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.to_path_buf(), source: e };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = with_suffix(path, &format!(".tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

/// Writes `<prefix>_<table>.csv` and `<prefix>_meta.json`; returns both paths.
pub fn write_outputs(prefix: &Path, out: &RunOutput) -> Result<(PathBuf, PathBuf), CliError> {
    let csv_path = with_suffix(prefix, &format!("_{}.csv", out.table_kind));
    let meta_path = with_suffix(prefix, "_meta.json");
    let mut meta = serde_json::to_string_pretty(&out.meta).map_err(|e| CliError::Config(e.to_string()))?;
    meta.push('\n');
    write_atomic(&csv_path, out.csv.as_bytes())?;
    write_atomic(&meta_path, meta.as_bytes())?;
    Ok((csv_path, meta_path))
}
