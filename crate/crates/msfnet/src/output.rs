//! Atomic file output and run manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Default manifest location for an output file: `<out>.manifest`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Reproducibility record: tool versions, the command line and the fully
/// resolved flag set. Contains nothing time- or host-dependent.
pub fn manifest(argv: &[String], resolved: &str, outputs: &[&Path]) -> String {
    let mut out = String::new();
    out.push_str(&format!("msfnet {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("msfnet-core {}\n", msfnet_core::VERSION));
    out.push_str("argv:");
    for a in argv.iter().skip(1) {
        out.push(' ');
        out.push_str(a);
    }
    out.push('\n');
    out.push_str("outputs:\n");
    for p in outputs {
        out.push_str(&format!("  {}\n", p.display()));
    }
    out.push_str("resolved:\n");
    out.push_str(resolved);
    if !resolved.ends_with('\n') {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"second");
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn manifest_is_stable() {
        let argv = vec!["msfnet".to_string(), "msf".into(), "grid".into()];
        let a = manifest(&argv, "steps: 3", &[Path::new("g.csv")]);
        assert_eq!(a, manifest(&argv, "steps: 3", &[Path::new("g.csv")]));
        assert!(a.contains("argv: msf grid\n"));
        assert_eq!(manifest_path(Path::new("x/g.csv")), PathBuf::from("x/g.csv.manifest"));
    }
}
