//! Field files: raw little-endian `f64` samples in `name.bin` next to a JSON
//! header `name.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_core::GridField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    pub n_per_axis: usize,
    pub extent: f64,
    pub origin: f64,
    pub periodic: bool,
    pub components: usize,
}

impl FieldHeader {
    pub fn of(f: &GridField) -> Self {
        FieldHeader {
            dim: f.dim,
            n_per_axis: f.n,
            extent: f.extent,
            origin: f.origin,
            periodic: f.periodic,
            components: f.components,
        }
    }
}

/// `foo.bin` and `foo.json` for any of `foo`, `foo.bin`, `foo.json`.
pub fn field_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("bin") | Some("json") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".bin"), with(".json"))
}

pub fn write_field(path: &Path, f: &GridField) -> Result<()> {
    f.validate()?;
    let (bin, json) = field_paths(path);
    if let Some(dir) = bin.parent() {
        fs::create_dir_all(dir)?;
    }
    let bytes: Vec<u8> = f.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    fs::write(&json, serde_json::to_string_pretty(&FieldHeader::of(f))? + "\n")?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<GridField> {
    let (bin, json) = field_paths(path);
    let header: FieldHeader = serde_json::from_slice(&fs::read(&json)?)?;
    let bytes = fs::read(&bin)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Config(format!("{}: length is not a multiple of 8", bin.display())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let f = GridField {
        dim: header.dim,
        n: header.n_per_axis,
        extent: header.extent,
        origin: header.origin,
        periodic: header.periodic,
        components: header.components,
        data,
    };
    f.validate()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_variants() {
        let (b, j) = field_paths(Path::new("out/fields/u_0.25_1.bin"));
        assert_eq!(b, Path::new("out/fields/u_0.25_1.bin"));
        assert_eq!(j, Path::new("out/fields/u_0.25_1.json"));
        assert_eq!(field_paths(Path::new("a/u")).0, Path::new("a/u.bin"));
    }
}
