//! Versioned named-tensor container file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic  "AGNN"          4 bytes
//! version                u32
//! tensor count           u32
//! per tensor:
//!   name length          u32, then UTF-8 name bytes
//!   rank                 u32
//!   dims                 u64 each
//!   payload              f64 little-endian, row-major
//! ```
//!
//! Round-trips are bit-exact: payloads are stored via `f64::to_le_bytes`, so
//! every finite and non-finite bit pattern survives.

use crate::error::{Error, Result};
use crate::numkit::Tensor;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"AGNN";
pub const FORMAT_VERSION: u32 = 1;

/// Ordered collection of named tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Container {
    entries: Vec<(String, Tensor)>,
}

impl Container {
    pub fn new() -> Self {
        Container::default()
    }

    pub fn push(&mut self, name: &str, tensor: Tensor) {
        self.entries.push((name.to_string(), tensor));
    }

    /// Insert a single scalar value under `name`.
    pub fn push_scalar(&mut self, name: &str, value: f64) {
        self.push(name, Tensor::vector(&[value]));
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor> {
        self.get(name)
            .ok_or_else(|| Error::Io(format!("container is missing tensor '{name}'")))
    }

    pub fn require_scalar(&self, name: &str) -> Result<f64> {
        let t = self.require(name)?;
        if t.len() != 1 {
            return Err(Error::Io(format!(
                "tensor '{name}' is not a scalar (shape {:?})",
                t.shape()
            )));
        }
        Ok(t.data()[0])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        for (name, t) in &self.entries {
            let bytes = name.as_bytes();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(bytes)?;
            w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
            for d in t.shape() {
                w.write_all(&(*d as u64).to_le_bytes())?;
            }
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Io("bad magic, not an AGNN container".into()));
        }
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Io(format!(
                "unsupported container version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let count = read_u32(r)? as usize;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = read_u32(r)? as usize;
            let mut name_bytes = vec![0u8; name_len];
            r.read_exact(&mut name_bytes)?;
            let name = String::from_utf8(name_bytes)
                .map_err(|_| Error::Io("tensor name is not UTF-8".into()))?;
            let rank = read_u32(r)? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(read_u64(r)? as usize);
            }
            let n: usize = shape.iter().product();
            let mut data = Vec::with_capacity(n);
            let mut buf = [0u8; 8];
            for _ in 0..n {
                r.read_exact(&mut buf)?;
                data.push(f64::from_le_bytes(buf));
            }
            entries.push((name, Tensor::new(shape, data)?));
        }
        Ok(Container { entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut file)?;
        use std::io::Write as _;
        file.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        Container::read_from(&mut file)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
