//! File helpers shared by the CLI and the bindings.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::dp::PlacementFile;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphFile};
use crate::tree::{RootedTree, TreeFile};

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value).expect("serializable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Reads JSON, reporting parse failures as `path:line:column: message`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        path: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    Graph::from_file(&file).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_tree(path: &Path) -> Result<RootedTree> {
    let file: TreeFile = read_json(path)?;
    Ok(RootedTree::from_file(&file))
}

pub fn read_placement(path: &Path) -> Result<PlacementFile> {
    read_json(path)
}
