//! Instance files and result tables.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::prior_nmf::{NmfGeneratorParams, NmfInstance, Planted, TopicDb};
use crate::smart_design::{Component, GeneratedDesign, GeneratorParams, SmartDesignInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum InstanceFile {
    SmartDesign(DesignFile),
    PriorNmf(NmfFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub seed: u64,
    pub params: Option<GeneratorParams>,
    pub components: Vec<Component>,
    pub bound: f64,
    pub strict: bool,
    pub noise_sigma: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub planted_u: Option<Vec<bool>>,
    pub planted_theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfFile {
    pub seed: u64,
    pub params: Option<NmfGeneratorParams>,
    pub k: usize,
    pub noise_sigma: f64,
    pub topics: Vec<Vec<bool>>,
    pub a: Vec<Vec<f64>>,
    pub planted: Option<PlantedFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFile {
    pub topics: Vec<usize>,
    pub w: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn matrix_of(rows: &[Vec<f64>], cols: usize) -> Result<Matrix> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols));
    }
    Matrix::from_rows(rows)
}

impl DesignFile {
    pub fn from_generated(g: &GeneratedDesign, params: Option<GeneratorParams>) -> Self {
        let inst = &g.instance;
        DesignFile {
            seed: inst.seed,
            params,
            components: inst.components.clone(),
            bound: inst.bound,
            strict: inst.strict,
            noise_sigma: inst.noise_sigma,
            x: rows_of(&inst.x),
            y: inst.y.to_vec(),
            planted_u: Some(g.planted_u.clone()),
            planted_theta: Some(g.planted_theta.to_vec()),
        }
    }

    pub fn from_instance(inst: &SmartDesignInstance) -> Self {
        DesignFile {
            seed: inst.seed,
            params: None,
            components: inst.components.clone(),
            bound: inst.bound,
            strict: inst.strict,
            noise_sigma: inst.noise_sigma,
            x: rows_of(&inst.x),
            y: inst.y.to_vec(),
            planted_u: None,
            planted_theta: None,
        }
    }

    pub fn to_instance(&self) -> Result<SmartDesignInstance> {
        let features = self.components.iter().map(|c| c.size).sum();
        SmartDesignInstance::new(
            matrix_of(&self.x, features)?,
            Vector::new(self.y.clone())?,
            self.components.clone(),
            self.bound,
            self.strict,
            self.seed,
            self.noise_sigma,
        )
    }
}

impl NmfFile {
    pub fn from_instance(inst: &NmfInstance, params: Option<NmfGeneratorParams>) -> Self {
        NmfFile {
            seed: inst.seed,
            params,
            k: inst.k,
            noise_sigma: inst.noise_sigma,
            topics: (0..inst.db.len()).map(|j| inst.db.topic_bits(j)).collect(),
            a: rows_of(&inst.a),
            planted: inst.planted.as_ref().map(|p| PlantedFile {
                topics: p.topics.clone(),
                w: rows_of(&p.w),
                h: rows_of(&p.h),
            }),
        }
    }

    pub fn to_instance(&self) -> Result<NmfInstance> {
        let words = self.a.len();
        let db = TopicDb::new(words, self.topics.clone())?;
        let a = matrix_of(&self.a, 0)?;
        let planted = match &self.planted {
            Some(p) => Some(Planted {
                topics: p.topics.clone(),
                w: matrix_of(&p.w, 0)?,
                h: matrix_of(&p.h, 0)?,
            }),
            None => None,
        };
        NmfInstance::new(a, self.k, db, planted, self.seed, self.noise_sigma)
    }
}

impl InstanceFile {
    /// Canonical serialized form; the digest is taken over these bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("instance serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn digest(&self) -> String {
        digest(&self.to_bytes())
    }

    pub fn problem_name(&self) -> &'static str {
        match self {
            InstanceFile::SmartDesign(_) => "smart-design",
            InstanceFile::PriorNmf(_) => "prior-nmf",
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Short form of a digest used to key result rows.
pub fn instance_id(digest: &str) -> String {
    digest[..16].to_string()
}

pub fn write_instance(path: &Path, file: &InstanceFile) -> Result<String> {
    let bytes = file.to_bytes();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(digest(&bytes))
}

/// Reads an instance file and returns it with the digest of its bytes.
pub fn read_instance(path: &Path) -> Result<(InstanceFile, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let file: InstanceFile = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((file, digest(&bytes)))
}

/// Appends rows to a CSV table, writing the header only when the file is
/// new or empty.
pub fn append_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Rewrites a CSV table from scratch.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// Appends one JSON document as a line.
pub fn append_json_line<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let line = serde_json::to_string(value).expect("metadata serializes");
    writeln!(file, "{line}").map_err(|e| Error::io(path, e))
}

/// `<path><suffix>`, e.g. `results.csv` → `results.csv.meta.jsonl`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
