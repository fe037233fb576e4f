//! Binary checkpoint, all integers and floats little-endian:
//!
//! ```text
//! magic "ATTNCKPT" | u32 version
//! u64 len | config text (UTF-8, `key = value` lines)
//! u64 len | maze grid text (UTF-8)
//! u64 n   | n x f64 parameters
//! u64 n   | n x f64 RMSProp accumulators
//! u64 updates | u64 skipped
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::OptState;

const MAGIC: &[u8; 8] = b"ATTNCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: String,
    pub maze: String,
    pub params: Vec<f64>,
    pub opt: OptState,
}

impl Checkpoint {
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for text in [&self.config, &self.maze] {
            w.write_all(&(text.len() as u64).to_le_bytes())?;
            w.write_all(text.as_bytes())?;
        }
        for values in [&self.params, &self.opt.accum] {
            w.write_all(&(values.len() as u64).to_le_bytes())?;
            for v in values.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.write_all(&self.opt.updates.to_le_bytes())?;
        w.write_all(&self.opt.skipped.to_le_bytes())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Checkpoint> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::io("<checkpoint stream>", e))?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let config = cur.text()?;
        let maze = cur.text()?;
        let params = cur.floats()?;
        let accum = cur.floats()?;
        if accum.len() != params.len() {
            return Err(Error::Checkpoint("accumulator and parameter lengths differ".into()));
        }
        let updates = cur.u64()?;
        let skipped = cur.u64()?;
        if cur.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Checkpoint {
            config,
            maze,
            params,
            opt: OptState {
                accum,
                updates,
                skipped,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }

    fn text(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("text section is not UTF-8".into()))
    }

    fn floats(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("length overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            config: "agent.gamma = 0.99\n".into(),
            maze: "S.G\n".into(),
            params: vec![1.5, -2.0, 0.0],
            opt: OptState {
                accum: vec![0.1, 0.2, 0.3],
                updates: 7,
                skipped: 1,
            },
        }
    }

    #[test]
    fn roundtrip() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"ATTNCKPT");
        assert_eq!(Checkpoint::read(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        assert!(Checkpoint::read(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Checkpoint::read(&bad[..]).is_err());
        let mut newer = buf.clone();
        newer[8] = 2;
        assert!(Checkpoint::read(&newer[..]).is_err());
        buf.push(0);
        assert!(Checkpoint::read(&buf[..]).is_err());
    }
}
