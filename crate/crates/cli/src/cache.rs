//! Band-tree cache: the dump format behind a header carrying the config hash.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use sturm_core::dump::{read_tree, write_records};
use sturm_core::BandTree;

use crate::config::RunConfig;
use crate::CliError;

const MAGIC: &str = "# sturm-cache v1 config-sha256=";

/// The cached tree when the header matches `cfg`; `None` (with a warning)
/// when the file is absent, foreign or stale.
pub fn load(path: &Path, cfg: &RunConfig) -> Option<BandTree> {
    let file = File::open(path).ok()?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    if reader.read_line(&mut header).is_err() {
        log::warn!("cache {} unreadable; ignored", path.display());
        return None;
    }
    let want = cfg.tree_hash();
    match header.trim_end().strip_prefix(MAGIC) {
        Some(h) if h == want => {}
        Some(_) => {
            log::warn!("cache {} was built with a different config hash; ignored", path.display());
            return None;
        }
        None => {
            log::warn!("cache {} has no config header; ignored", path.display());
            return None;
        }
    }
    match read_tree(reader, &cfg.cf, &cfg.params, cfg.settings.clone()) {
        Ok(tree) => Some(tree),
        Err(e) => {
            log::warn!("cache {} is corrupt ({e}); ignored", path.display());
            None
        }
    }
}

pub fn store(path: &Path, cfg: &RunConfig, tree: &BandTree) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError::Internal(format!("writing cache {}: {e}", path.display()));
    {
        let mut out = BufWriter::new(File::create(&tmp).map_err(io)?);
        writeln!(out, "{MAGIC}{}", cfg.tree_hash()).map_err(io)?;
        write_records(tree, &mut out).map_err(io)?;
        out.flush().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)
}
