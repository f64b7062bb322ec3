//! Directory-per-class corpora: `<root>/<class>/<sample>.pbm`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use glyphfuzz_core::raster::{parse_netpbm, Image, RasterError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: RasterError },
    #[error("{0}: no class directories")]
    NoClasses(PathBuf),
    #[error("{0}: class directory has no .pbm samples")]
    EmptyClass(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub path: PathBuf,
    pub image: Image,
}

#[derive(Debug, Clone)]
pub struct ClassDir {
    pub label: String,
    pub samples: Vec<Sample>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_image(path: &Path) -> Result<Image, CorpusError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    parse_netpbm(&bytes).map_err(|source| CorpusError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut paths = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err(dir))?;
    paths.sort();
    Ok(paths)
}

/// Loads every class directory in name order, samples in file-name order.
/// Files without a `.pbm` extension are ignored.
pub fn load(root: &Path) -> Result<Vec<ClassDir>, CorpusError> {
    let mut classes = Vec::new();
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let label = dir
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let mut samples = Vec::new();
        for path in sorted_entries(&dir)? {
            if path.is_file() && path.extension().is_some_and(|e| e == "pbm") {
                let image = read_image(&path)?;
                samples.push(Sample { path, image });
            }
        }
        if samples.is_empty() {
            return Err(CorpusError::EmptyClass(dir));
        }
        classes.push(ClassDir { label, samples });
    }
    if classes.is_empty() {
        return Err(CorpusError::NoClasses(root.to_path_buf()));
    }
    Ok(classes)
}
