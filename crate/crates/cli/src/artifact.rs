//! Artifact emission: every file carries a metadata header (version,
//! command, config echo, config hash, seeds) sufficient to reproduce it.

use std::fs;
use std::io;
use std::path::Path;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a, used for the reproducibility hash of the configuration echo.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub struct Meta {
    pub command: String,
    pub config: String,
    pub seeds: Vec<u64>,
    pub extra: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str, config: String, seeds: Vec<u64>) -> Self {
        Meta {
            command: command.to_string(),
            config,
            seeds,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: String) -> Self {
        self.extra.push((key.to_string(), value));
        self
    }

    pub fn header(&self) -> String {
        let seeds = self
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!(
            "# landscape-law v{VERSION}\n# command: {}\n# config: {}\n# config_hash: {:016x}\n# seeds: {}\n",
            self.command,
            self.config,
            fnv1a(self.config.as_bytes()),
            seeds
        );
        for (k, v) in &self.extra {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }
}

/// Write header + body to the path.
pub fn write_artifact(path: &Path, meta: &Meta, body: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, format!("{}{}", meta.header(), body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn header_shape() {
        let m = Meta::new("ids", "d=1 k=4".into(), vec![7]).with("note", "x".into());
        let h = m.header();
        assert!(h.starts_with("# landscape-law v"));
        assert!(h.contains("# command: ids\n"));
        assert!(h.contains("# seeds: 7\n"));
        assert!(h.contains("# note: x\n"));
    }
}
