//! Self-describing binary container shared by dataset and checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes
//! version      u32
//! header_len   u64
//! header       header_len bytes of UTF-8 JSON
//! payload_len  u64   (number of f64 values)
//! payload      payload_len x f64 LE
//! crc32        u32   over every preceding byte
//! ```

use crate::error::{Error, Result};

pub struct Container {
    pub version: u32,
    pub header: Vec<u8>,
    pub payload: Vec<f64>,
}

pub fn encode(magic: &[u8; 8], version: u32, header: &[u8], payload: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 + 8 + header.len() + 8 + 8 * payload.len() + 4);
    out.extend_from_slice(magic);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    for x in payload {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Reads a whole file, reporting a missing path as [`Error::MissingFile`].
pub fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated {
                needed: self.pos.saturating_add(n),
                available: self.bytes.len(),
            }),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format(format!("length {v} does not fit in memory")))
    }
}

pub fn decode(bytes: &[u8], magic: &[u8; 8], max_version: u32) -> Result<Container> {
    let mut r = Reader { bytes, pos: 0 };
    let m = r.take(8)?;
    if m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.u32()?;
    if version > max_version || version == 0 {
        return Err(Error::Version {
            found: version,
            supported: max_version,
        });
    }
    let header_len = r.u64()?;
    let header = r.take(header_len)?.to_vec();
    let n = r.u64()?;
    let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Format("payload too large".into()))?)?;
    let body_end = r.pos;
    let stored = r.u32()?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after checksum",
            bytes.len() - r.pos
        )));
    }
    let payload = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Container {
        version,
        header,
        payload,
    })
}

/// Cursor over a decoded payload.
pub struct Payload<'a> {
    data: &'a [f64],
    pos: usize,
}

impl<'a> Payload<'a> {
    pub fn new(data: &'a [f64]) -> Self {
        Payload { data, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [f64]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Format(format!(
                "payload shorter than header declares ({} < {})",
                self.data.len(),
                self.pos + n
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!(
                "payload has {} unread values",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAGIC: &[u8; 8] = b"TESTFMT\0";

    #[test]
    fn round_trip_preserves_bits() {
        let payload = [0.1, -0.0, f64::MIN_POSITIVE, 1e300, f64::NAN];
        let bytes = encode(MAGIC, 1, b"{}", &payload);
        let c = decode(&bytes, MAGIC, 1).unwrap();
        assert_eq!(c.header, b"{}");
        for (a, b) in payload.iter().zip(&c.payload) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn error_kinds() {
        let bytes = encode(MAGIC, 1, b"{}", &[1.0, 2.0]);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad, MAGIC, 1), Err(Error::Format(_))));

        let newer = encode(MAGIC, 2, b"{}", &[1.0]);
        assert!(matches!(decode(&newer, MAGIC, 1), Err(Error::Version { found: 2, .. })));

        assert!(matches!(
            decode(&bytes[..bytes.len() - 9], MAGIC, 1),
            Err(Error::Truncated { .. })
        ));

        let mut flipped = bytes.clone();
        let k = bytes.len() - 6;
        flipped[k] ^= 0x40;
        assert!(matches!(decode(&flipped, MAGIC, 1), Err(Error::Checksum { .. })));
    }
}
