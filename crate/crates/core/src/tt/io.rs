//! Binary `TTv1` files.
//!
//! Layout, all integers `u64` little-endian:
//!
//! ```text
//! b"TTv1" | d | n_1 .. n_d | r_0 .. r_d | cores
//! ```
//!
//! Each core is written as `(re: f64, im: f64)` pairs in row-major
//! `(left_rank, mode, right_rank)` order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;

use super::TTTensor;
use crate::error::{Error, Result};
use crate::C64;

pub const MAGIC: &[u8; 4] = b"TTv1";

// Upper bounds that keep a corrupt header from triggering huge allocations.
const MAX_DIMS: u64 = 1 << 16;
const MAX_CORE_ENTRIES: u64 = 1 << 32;

/// Serializes to any writer.
pub fn write_to<W: Write>(t: &TTTensor, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(t.ndim() as u64).to_le_bytes())?;
    for n in t.mode_sizes() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for r in t.ranks() {
        w.write_all(&(r as u64).to_le_bytes())?;
    }
    for core in t.cores() {
        for x in core.data().iter() {
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `t` to `path` atomically: the data goes to a temporary file in
/// the same directory that is renamed over `path` once complete.
pub fn tt_write(t: &TTTensor, path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write_to(t, BufWriter::new(tmp.as_file_mut()))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        let mut filled = 0;
        while filled < N {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Format {
                        offset: self.offset + filled as u64,
                        message: format!("unexpected end of file while reading {what}"),
                    })
                }
                Ok(k) => filled += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += N as u64;
        Ok(buf)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes::<8>(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>(what)?))
    }

    fn fail(&self, at: u64, message: String) -> Error {
        Error::Format { offset: at, message }
    }
}

/// Parses a `TTv1` stream.
pub fn read_from<R: Read>(r: R) -> Result<TTTensor> {
    let mut c = Cursor { inner: r, offset: 0 };
    let magic = c.bytes::<4>("magic")?;
    if &magic != MAGIC {
        return Err(c.fail(0, format!("bad magic {magic:?}, expected \"TTv1\"")));
    }
    let at = c.offset;
    let d = c.u64("dimension")?;
    if d == 0 || d > MAX_DIMS {
        return Err(c.fail(at, format!("invalid dimension {d}")));
    }
    let mut modes = Vec::with_capacity(d as usize);
    for _ in 0..d {
        let at = c.offset;
        let n = c.u64("mode size")?;
        if n == 0 {
            return Err(c.fail(at, "mode size 0".into()));
        }
        modes.push(n);
    }
    let mut ranks = Vec::with_capacity(d as usize + 1);
    for k in 0..=d {
        let at = c.offset;
        let r = c.u64("rank")?;
        let boundary = k == 0 || k == d;
        if r == 0 || (boundary && r != 1) {
            return Err(c.fail(at, format!("invalid rank r_{k} = {r}")));
        }
        ranks.push(r);
    }
    let mut cores = Vec::with_capacity(d as usize);
    for k in 0..d as usize {
        let (a, n, b) = (ranks[k], modes[k], ranks[k + 1]);
        let entries = a
            .checked_mul(n)
            .and_then(|x| x.checked_mul(b))
            .filter(|&x| x <= MAX_CORE_ENTRIES)
            .ok_or_else(|| c.fail(c.offset, format!("core {k} is too large")))?;
        let mut data = Vec::with_capacity(entries as usize);
        for _ in 0..entries {
            let re = c.f64("core entry")?;
            let im = c.f64("core entry")?;
            data.push(C64::new(re, im));
        }
        cores.push(Array3::from_shape_vec((a as usize, n as usize, b as usize), data)?);
    }
    let mut extra = [0u8; 1];
    if c.inner.read(&mut extra)? != 0 {
        return Err(c.fail(c.offset, "trailing bytes after last core".into()));
    }
    TTTensor::from_arrays(cores)
}

pub fn tt_read(path: &Path) -> Result<TTTensor> {
    read_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> TTTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        TTTensor::random(&[3, 5, 2], &[2, 4], true, &mut rng).unwrap()
    }

    fn bytes_of(t: &TTTensor) -> Vec<u8> {
        let mut out = Vec::new();
        write_to(t, &mut out).unwrap();
        out
    }

    #[test]
    fn header_layout() {
        let t = TTTensor::ones(&[2, 3]).unwrap();
        let b = bytes_of(&t);
        assert_eq!(&b[..4], b"TTv1");
        assert_eq!(u64::from_le_bytes(b[4..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(b[12..20].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(b[20..28].try_into().unwrap()), 3);
        // ranks 1 1 1, then 5 entries of 16 bytes
        assert_eq!(b.len(), 4 + 8 + 16 + 24 + 5 * 16);
        assert_eq!(f64::from_le_bytes(b[52..60].try_into().unwrap()), 1.0);
    }

    #[test]
    fn memory_round_trip_is_bit_exact() {
        let t = sample();
        let back = read_from(bytes_of(&t).as_slice()).unwrap();
        assert_eq!(bytes_of(&back), bytes_of(&t));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tt");
        let t = sample();
        tt_write(&t, &path).unwrap();
        assert_eq!(tt_read(&path).unwrap(), t);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn wrong_magic() {
        let mut b = bytes_of(&sample());
        b[3] = b'2';
        match read_from(b.as_slice()) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_reports_offset() {
        let b = bytes_of(&sample());
        let cut = b.len() - 5;
        match read_from(&b[..cut]) {
            Err(Error::Format { offset, .. }) => assert!(offset >= (cut - 16) as u64 && offset <= cut as u64),
            other => panic!("expected format error, got {other:?}"),
        }
        match read_from(&b[..10]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_boundary_rank_and_trailing_bytes() {
        let mut b = bytes_of(&sample());
        // r_0 sits after magic, d and three mode sizes
        let r0 = 4 + 8 + 24;
        b[r0] = 2;
        assert!(matches!(read_from(b.as_slice()), Err(Error::Format { offset, .. }) if offset == r0 as u64));
        let mut b = bytes_of(&sample());
        b.push(0);
        assert!(matches!(read_from(b.as_slice()), Err(Error::Format { .. })));
    }
}
