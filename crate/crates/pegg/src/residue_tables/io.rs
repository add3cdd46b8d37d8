//! Versioned binary cache files for the lookup tables.
//!
//! Layout (little-endian): magic "PGGT", format version u32, exponent triple
//! u16 x 3, permutation u8, single coefficient u64 (0 = generic), modulus u64,
//! entry width u8, class count u64, offsets block ((class count + 1) x u64,
//! skip-ahead files only), delta block, trailing FNV-1a 64-bit checksum of
//! everything before it. Entry width 1 marks an elimination flag file whose
//! delta block is the flag array itself.

use super::{Deltas, EliminationCoTable, SkipaheadTable};
use crate::equations::{ExponentTriple, Permutation};
use crate::numtheory::factorize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"PGGT";
const FORMAT_VERSION: u32 = 1;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Error)]
pub enum TableIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("corrupt table file: {0}")]
    Corrupt(&'static str),
    #[error("table file format version {found} unsupported (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("table file does not match the requested spec: {0}")]
    SpecMismatch(String),
}

fn fnv_update(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(FNV_PRIME);
    }
}

struct HashingWriter<W: Write> {
    inner: W,
    hash: u64,
}

impl<W: Write> HashingWriter<W> {
    fn new(inner: W) -> Self {
        HashingWriter {
            inner,
            hash: FNV_OFFSET,
        }
    }

    fn put(&mut self, bytes: &[u8]) -> std::io::Result<()> {
        fnv_update(&mut self.hash, bytes);
        self.inner.write_all(bytes)
    }
}

struct HashingReader<R: Read> {
    inner: R,
    hash: u64,
}

impl<R: Read> HashingReader<R> {
    fn new(inner: R) -> Self {
        HashingReader {
            inner,
            hash: FNV_OFFSET,
        }
    }

    fn take(&mut self, buf: &mut [u8]) -> Result<(), TableIoError> {
        self.inner
            .read_exact(buf)
            .map_err(|_| TableIoError::Corrupt("truncated file"))?;
        fnv_update(&mut self.hash, buf);
        Ok(())
    }

    fn take_u8(&mut self) -> Result<u8, TableIoError> {
        let mut b = [0u8; 1];
        self.take(&mut b)?;
        Ok(b[0])
    }

    fn take_u16(&mut self) -> Result<u16, TableIoError> {
        let mut b = [0u8; 2];
        self.take(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    fn take_u32(&mut self) -> Result<u32, TableIoError> {
        let mut b = [0u8; 4];
        self.take(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn take_u64(&mut self) -> Result<u64, TableIoError> {
        let mut b = [0u8; 8];
        self.take(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
}

fn perm_code(p: Permutation) -> u8 {
    match p {
        Permutation::AxMinusCz => 0,
        Permutation::CzMinusAx => 1,
        Permutation::AxPlusCz => 2,
    }
}

fn perm_from(code: u8) -> Result<Permutation, TableIoError> {
    match code {
        0 => Ok(Permutation::AxMinusCz),
        1 => Ok(Permutation::CzMinusAx),
        2 => Ok(Permutation::AxPlusCz),
        _ => Err(TableIoError::Corrupt("bad permutation code")),
    }
}

struct Header {
    exps: ExponentTriple,
    permutation: Permutation,
    single_coefficient: Option<u64>,
    modulus: u64,
    entry_width: u8,
    class_count: u64,
}

fn write_header<W: Write>(w: &mut HashingWriter<W>, h: &Header) -> std::io::Result<()> {
    w.put(MAGIC)?;
    w.put(&FORMAT_VERSION.to_le_bytes())?;
    for e in h.exps.as_array() {
        w.put(&(e as u16).to_le_bytes())?;
    }
    w.put(&[perm_code(h.permutation)])?;
    w.put(&h.single_coefficient.unwrap_or(0).to_le_bytes())?;
    w.put(&h.modulus.to_le_bytes())?;
    w.put(&[h.entry_width])?;
    w.put(&h.class_count.to_le_bytes())
}

fn read_header<R: Read>(r: &mut HashingReader<R>) -> Result<Header, TableIoError> {
    let mut magic = [0u8; 4];
    r.take(&mut magic)?;
    if &magic != MAGIC {
        return Err(TableIoError::Corrupt("bad magic"));
    }
    let version = r.take_u32()?;
    if version != FORMAT_VERSION {
        return Err(TableIoError::VersionMismatch { found: version });
    }
    let x = r.take_u16()? as u64;
    let y = r.take_u16()? as u64;
    let z = r.take_u16()? as u64;
    let permutation = perm_from(r.take_u8()?)?;
    let sc = r.take_u64()?;
    let modulus = r.take_u64()?;
    let entry_width = r.take_u8()?;
    let class_count = r.take_u64()?;
    Ok(Header {
        exps: ExponentTriple::new(x, y, z),
        permutation,
        single_coefficient: if sc == 0 { None } else { Some(sc) },
        modulus,
        entry_width,
        class_count,
    })
}

const CHUNK: usize = 1 << 20;

pub fn save_skipahead(table: &SkipaheadTable, path: &Path) -> Result<(), TableIoError> {
    let file = File::create(path)?;
    let mut w = HashingWriter::new(BufWriter::new(file));
    write_header(
        &mut w,
        &Header {
            exps: table.exps,
            permutation: table.permutation,
            single_coefficient: table.single_coefficient,
            modulus: table.modulus,
            entry_width: table.entry_width(),
            class_count: table.modulus,
        },
    )?;
    let mut buf = Vec::with_capacity(CHUNK);
    for off in &table.class_offsets {
        buf.extend_from_slice(&off.to_le_bytes());
        if buf.len() >= CHUNK {
            w.put(&buf)?;
            buf.clear();
        }
    }
    match &table.deltas {
        Deltas::U16(v) => {
            for d in v {
                buf.extend_from_slice(&d.to_le_bytes());
                if buf.len() >= CHUNK {
                    w.put(&buf)?;
                    buf.clear();
                }
            }
        }
        Deltas::U32(v) => {
            for d in v {
                buf.extend_from_slice(&d.to_le_bytes());
                if buf.len() >= CHUNK {
                    w.put(&buf)?;
                    buf.clear();
                }
            }
        }
    }
    w.put(&buf)?;
    let checksum = w.hash;
    w.inner.write_all(&checksum.to_le_bytes())?;
    w.inner.flush()?;
    Ok(())
}

pub fn load_skipahead(path: &Path) -> Result<SkipaheadTable, TableIoError> {
    let file = File::open(path)?;
    let mut r = HashingReader::new(BufReader::new(file));
    let h = read_header(&mut r)?;
    if h.entry_width != 2 && h.entry_width != 4 {
        return Err(TableIoError::Corrupt("not a skip-ahead file"));
    }
    if h.class_count != h.modulus {
        return Err(TableIoError::Corrupt("class count must equal the modulus"));
    }
    let classes = h.class_count as usize;
    let mut offsets = Vec::with_capacity(classes + 1);
    let mut chunk = vec![0u8; CHUNK];
    let mut remaining = (classes + 1) * 8;
    while remaining > 0 {
        let n = remaining.min(CHUNK) / 8 * 8;
        r.take(&mut chunk[..n])?;
        for b in chunk[..n].chunks_exact(8) {
            offsets.push(u64::from_le_bytes(b.try_into().unwrap()));
        }
        remaining -= n;
    }
    if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(TableIoError::Corrupt("offsets not monotone"));
    }
    let entries = offsets[classes] as usize;
    let width = h.entry_width as usize;
    let mut deltas = match width {
        2 => Deltas::U16(Vec::with_capacity(entries)),
        _ => Deltas::U32(Vec::with_capacity(entries)),
    };
    let mut remaining = entries * width;
    while remaining > 0 {
        let n = remaining.min(CHUNK) / width * width;
        r.take(&mut chunk[..n])?;
        match &mut deltas {
            Deltas::U16(v) => {
                for b in chunk[..n].chunks_exact(2) {
                    v.push(u16::from_le_bytes(b.try_into().unwrap()));
                }
            }
            Deltas::U32(v) => {
                for b in chunk[..n].chunks_exact(4) {
                    v.push(u32::from_le_bytes(b.try_into().unwrap()));
                }
            }
        }
        remaining -= n;
    }
    let computed = r.hash;
    let mut tail = [0u8; 8];
    r.inner
        .read_exact(&mut tail)
        .map_err(|_| TableIoError::Corrupt("missing checksum"))?;
    if u64::from_le_bytes(tail) != computed {
        return Err(TableIoError::Corrupt("checksum mismatch"));
    }
    if r.inner.read(&mut chunk[..1]).unwrap_or(0) != 0 {
        return Err(TableIoError::Corrupt("trailing bytes"));
    }
    Ok(SkipaheadTable {
        exps: h.exps,
        permutation: h.permutation,
        modulus: h.modulus,
        factors: prime_power_factors(h.modulus),
        single_coefficient: h.single_coefficient,
        class_offsets: offsets,
        deltas,
    })
}

pub fn save_elimination_cotable(
    cotable: &EliminationCoTable,
    exps: ExponentTriple,
    permutation: Permutation,
    path: &Path,
) -> Result<(), TableIoError> {
    let file = File::create(path)?;
    let mut w = HashingWriter::new(BufWriter::new(file));
    write_header(
        &mut w,
        &Header {
            exps,
            permutation,
            single_coefficient: None,
            modulus: cotable.modulus,
            entry_width: 1,
            class_count: cotable.modulus,
        },
    )?;
    w.put(&cotable.flags)?;
    let checksum = w.hash;
    w.inner.write_all(&checksum.to_le_bytes())?;
    w.inner.flush()?;
    Ok(())
}

pub fn load_elimination_cotable(
    path: &Path,
) -> Result<(EliminationCoTable, ExponentTriple, Permutation), TableIoError> {
    let file = File::open(path)?;
    let mut r = HashingReader::new(BufReader::new(file));
    let h = read_header(&mut r)?;
    if h.entry_width != 1 {
        return Err(TableIoError::Corrupt("not an elimination flag file"));
    }
    let mut flags = vec![0u8; h.class_count as usize];
    r.take(&mut flags)?;
    let computed = r.hash;
    let mut tail = [0u8; 8];
    r.inner
        .read_exact(&mut tail)
        .map_err(|_| TableIoError::Corrupt("missing checksum"))?;
    if u64::from_le_bytes(tail) != computed {
        return Err(TableIoError::Corrupt("checksum mismatch"));
    }
    Ok((
        EliminationCoTable {
            modulus: h.modulus,
            factors: prime_power_factors(h.modulus),
            flags,
        },
        h.exps,
        h.permutation,
    ))
}

/// The co-prime prime-power factorization a composite table modulus was built
/// from is recoverable from the modulus itself.
fn prime_power_factors(modulus: u64) -> Vec<u64> {
    let mut factors: Vec<u64> = factorize(modulus)
        .into_iter()
        .map(|(p, e)| p.pow(e))
        .collect();
    factors.sort_unstable();
    factors
}
