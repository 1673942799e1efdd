// SPDX-License-Identifier: Apache-2.0

//! Single-file container for trained models.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      b"RECKIT-MODEL\0"
//! version    u32
//! algorithm  u32 length + UTF-8
//! params     u32 length + UTF-8 JSON
//! n_arrays   u32
//! arrays     n_arrays × { name: u32 length + UTF-8, tag: u8, count: u64, data }
//! ```
//!
//! Array tags: 1 = f64, 2 = u64, 3 = strings (each u32 length + UTF-8).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 13] = b"RECKIT-MODEL\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    F64(Vec<f64>),
    U64(Vec<u64>),
    Str(Vec<String>),
}

impl Array {
    fn tag(&self) -> u8 {
        match self {
            Array::F64(_) => 1,
            Array::U64(_) => 2,
            Array::Str(_) => 3,
        }
    }
}

/// Algorithm name, hyperparameters and named payload arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPayload {
    pub algorithm: String,
    pub params: serde_json::Value,
    pub arrays: Vec<(String, Array)>,
}

/// Conversion between a fitted algorithm and its payload.
pub trait Persist: Sized {
    fn from_payload(payload: &ModelPayload) -> Result<Self>;
}

impl ModelPayload {
    pub fn new(algorithm: &str, params: &impl Serialize) -> Result<Self> {
        Ok(ModelPayload {
            algorithm: algorithm.to_owned(),
            params: serde_json::to_value(params)?,
            arrays: Vec::new(),
        })
    }

    /// A wrapper payload embedding `inner` under the `inner.` prefix.
    pub fn wrapping(algorithm: &str, inner: ModelPayload) -> Self {
        let params = serde_json::json!({
            "inner": inner.algorithm,
            "inner_params": inner.params,
        });
        ModelPayload {
            algorithm: algorithm.to_owned(),
            params,
            arrays: inner
                .arrays
                .into_iter()
                .map(|(name, a)| (format!("inner.{name}"), a))
                .collect(),
        }
    }

    /// Recover the payload embedded by [`ModelPayload::wrapping`].
    pub fn unwrap_inner(&self) -> Result<ModelPayload> {
        let algorithm = self
            .params
            .get("inner")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Format("wrapper is missing inner algorithm".into()))?
            .to_owned();
        let params = self.params.get("inner_params").cloned().unwrap_or_default();
        let arrays = self
            .arrays
            .iter()
            .filter_map(|(name, a)| name.strip_prefix("inner.").map(|n| (n.to_owned(), a.clone())))
            .collect();
        Ok(ModelPayload {
            algorithm,
            params,
            arrays,
        })
    }

    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        Ok(serde_json::from_value(self.params.clone())?)
    }

    pub fn push(&mut self, name: impl Into<String>, array: Array) {
        self.arrays.push((name.into(), array));
    }

    pub fn push_f64s(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.push(name, Array::F64(values));
    }

    pub fn push_u64s(&mut self, name: impl Into<String>, values: Vec<u64>) {
        self.push(name, Array::U64(values));
    }

    pub fn push_usizes(&mut self, name: impl Into<String>, values: &[usize]) {
        self.push(name, Array::U64(values.iter().map(|&v| v as u64).collect()));
    }

    pub fn push_strs(&mut self, name: impl Into<String>, values: Vec<String>) {
        self.push(name, Array::Str(values));
    }

    fn get(&self, name: &str) -> Result<&Array> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Format(format!("missing array {name}")))
    }

    pub fn f64s(&self, name: &str) -> Result<&[f64]> {
        match self.get(name)? {
            Array::F64(v) => Ok(v),
            _ => Err(Error::Format(format!("array {name} is not f64"))),
        }
    }

    pub fn u64s(&self, name: &str) -> Result<&[u64]> {
        match self.get(name)? {
            Array::U64(v) => Ok(v),
            _ => Err(Error::Format(format!("array {name} is not u64"))),
        }
    }

    pub fn usizes(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.u64s(name)?.iter().map(|&v| v as usize).collect())
    }

    pub fn strs(&self, name: &str) -> Result<&[String]> {
        match self.get(name)? {
            Array::Str(v) => Ok(v),
            _ => Err(Error::Format(format!("array {name} is not a string array"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        put_str(&mut out, &self.algorithm);
        put_str(&mut out, &self.params.to_string());
        out.extend_from_slice(&(self.arrays.len() as u32).to_le_bytes());
        for (name, array) in &self.arrays {
            put_str(&mut out, name);
            out.push(array.tag());
            match array {
                Array::F64(v) => {
                    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
                    for x in v {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
                Array::U64(v) => {
                    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
                    for x in v {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
                Array::Str(v) => {
                    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
                    for s in v {
                        put_str(&mut out, s);
                    }
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version > FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let algorithm = r.string()?;
        let params = serde_json::from_str(&r.string()?)?;
        let n = r.u32()? as usize;
        let mut arrays = Vec::with_capacity(n);
        for _ in 0..n {
            let name = r.string()?;
            let tag = r.take(1)?[0];
            let count = r.u64()? as usize;
            let array = match tag {
                1 => Array::F64(
                    (0..count)
                        .map(|_| r.u64().map(f64::from_bits))
                        .collect::<Result<_>>()?,
                ),
                2 => Array::U64((0..count).map(|_| r.u64()).collect::<Result<_>>()?),
                3 => Array::Str((0..count).map(|_| r.string()).collect::<Result<_>>()?),
                t => return Err(Error::Format(format!("unknown array tag {t} for {name}"))),
            };
            arrays.push((name, array));
        }
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after model payload".into()));
        }
        Ok(ModelPayload {
            algorithm,
            params,
            arrays,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.to_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated model file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Format("invalid UTF-8 in model file".into()))
    }
}
