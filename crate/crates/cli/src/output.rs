use std::fmt::Display;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, enough to reload any f64 exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn kv(key: &str, value: impl Display) {
    println!("{key}={value}");
}

pub fn kv_num(key: &str, x: f64) {
    kv(key, num(x));
}

/// Write `contents` next to `path` under a temporary name, then rename it
/// into place so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
