//! Flat binary container for parameter checkpoints.
//!
//! Layout: 8-byte magic, a u64 scalar table, an f64 scalar table, then a
//! tensor table of (name, shape, row-major f64 data) entries. All integers
//! and floats are little-endian; save/load round-trips are bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"NMCKPT01";

/// Named integers, scalars, and tensors headed for disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BinaryStore {
    pub ints: Vec<(String, u64)>,
    pub scalars: Vec<(String, f64)>,
    pub tensors: Vec<(String, Vec<usize>, Vec<f64>)>,
}

fn write_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_str(r: &mut impl Read) -> std::io::Result<String> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut buf = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

impl BinaryStore {
    pub fn int(&self, name: &str) -> Result<u64> {
        self.ints
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Input(format!("checkpoint missing int {name:?}")))
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Input(format!("checkpoint missing scalar {name:?}")))
    }

    pub fn tensor(&self, name: &str) -> Result<(&[usize], &[f64])> {
        self.tensors
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, s, d)| (s.as_slice(), d.as_slice()))
            .ok_or_else(|| Error::Input(format!("checkpoint missing tensor {name:?}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        let io = |e| Error::io(path, e);
        (|| -> std::io::Result<()> {
            let w = &mut buf;
            w.write_all(&(self.ints.len() as u32).to_le_bytes())?;
            for (name, v) in &self.ints {
                write_str(w, name)?;
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(&(self.scalars.len() as u32).to_le_bytes())?;
            for (name, v) in &self.scalars {
                write_str(w, name)?;
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
            for (name, shape, data) in &self.tensors {
                write_str(w, name)?;
                w.write_all(&(shape.len() as u32).to_le_bytes())?;
                for d in shape {
                    w.write_all(&(*d as u64).to_le_bytes())?;
                }
                w.write_all(&(data.len() as u64).to_le_bytes())?;
                for v in data {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Ok(())
        })()
        .map_err(io)?;
        std::fs::write(path, &buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = bytes.as_slice();
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|e| Error::io(path, e))?;
        if &magic != MAGIC {
            return Err(Error::Input(format!(
                "{}: not a checkpoint (bad magic)",
                path.display()
            )));
        }
        let io = |e| Error::io(path, e);
        (|| -> std::io::Result<Self> {
            let mut store = BinaryStore::default();
            let mut count = [0u8; 4];
            r.read_exact(&mut count)?;
            for _ in 0..u32::from_le_bytes(count) {
                let name = read_str(&mut r)?;
                let mut v = [0u8; 8];
                r.read_exact(&mut v)?;
                store.ints.push((name, u64::from_le_bytes(v)));
            }
            r.read_exact(&mut count)?;
            for _ in 0..u32::from_le_bytes(count) {
                let name = read_str(&mut r)?;
                let mut v = [0u8; 8];
                r.read_exact(&mut v)?;
                store.scalars.push((name, f64::from_le_bytes(v)));
            }
            r.read_exact(&mut count)?;
            for _ in 0..u32::from_le_bytes(count) {
                let name = read_str(&mut r)?;
                let mut ndim = [0u8; 4];
                r.read_exact(&mut ndim)?;
                let mut shape = Vec::new();
                for _ in 0..u32::from_le_bytes(ndim) {
                    let mut d = [0u8; 8];
                    r.read_exact(&mut d)?;
                    shape.push(u64::from_le_bytes(d) as usize);
                }
                let mut len = [0u8; 8];
                r.read_exact(&mut len)?;
                let n = u64::from_le_bytes(len) as usize;
                let mut data = Vec::with_capacity(n);
                for _ in 0..n {
                    let mut v = [0u8; 8];
                    r.read_exact(&mut v)?;
                    data.push(f64::from_le_bytes(v));
                }
                store.tensors.push((name, shape, data));
            }
            Ok(store)
        })()
        .map_err(io)
    }
}
