//! Shard files: one per storage node.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//!      0     8  magic "EPSMSR\0\x01"
//!      8     4  format version (currently 1)
//!     12     4  node index
//!     16    32  SHA-256 of the codec.json bytes this shard belongs to
//!     48     8  symbol count
//!     56  4*sc  symbols, one u32 each
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const MAGIC: &[u8; 8] = b"EPSMSR\0\x01";
pub const VERSION: u32 = 1;

/// `node_<i>.shard` inside the working directory.
pub fn shard_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node_{node}.shard"))
}

/// Where `fail` parks a shard to simulate loss.
pub fn lost_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node_{node}.shard.lost"))
}

pub fn write_shard(path: &Path, node: usize, meta_hash: &[u8; 32], symbols: &[u64]) -> Result<()> {
    let mut buf = Vec::with_capacity(56 + 4 * symbols.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(node as u32).to_le_bytes());
    buf.extend_from_slice(meta_hash);
    buf.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    for &s in symbols {
        let s32 = u32::try_from(s)
            .map_err(|_| anyhow::anyhow!("symbol {s} does not fit the 32-bit payload"))?;
        buf.extend_from_slice(&s32.to_le_bytes());
    }
    let mut file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    file.write_all(&buf)?;
    Ok(())
}

/// Reads and validates a shard against the expected codec hash.
pub fn read_shard(path: &Path, node: usize, meta_hash: &[u8; 32]) -> Result<Vec<u64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 56 {
        bail!("{}: truncated header ({} bytes)", path.display(), bytes.len());
    }
    if &bytes[0..8] != MAGIC {
        bail!("{}: bad magic", path.display());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        bail!("{}: unsupported version {version}", path.display());
    }
    let stored_node = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    if stored_node as usize != node {
        bail!(
            "{}: header names node {stored_node}, expected {node}",
            path.display()
        );
    }
    if &bytes[16..48] != meta_hash {
        bail!(
            "{}: codec hash mismatch (shard belongs to different parameters)",
            path.display()
        );
    }
    let count = u64::from_le_bytes(bytes[48..56].try_into().unwrap()) as usize;
    if bytes.len() != 56 + 4 * count {
        bail!(
            "{}: payload length {} does not match symbol count {count}",
            path.display(),
            bytes.len() - 56
        );
    }
    let symbols = bytes[56..]
        .chunks_exact(4)
        .map(|c| u64::from(u32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_header_checks() {
        let dir = tempfile::tempdir().unwrap();
        let path = shard_path(dir.path(), 3);
        let hash = [7u8; 32];
        let symbols = vec![0u64, 1, 9999, 4_000_000_000];
        write_shard(&path, 3, &hash, &symbols).unwrap();
        assert_eq!(read_shard(&path, 3, &hash).unwrap(), symbols);
        // Wrong node index or hash is rejected.
        assert!(read_shard(&path, 2, &hash).is_err());
        assert!(read_shard(&path, 3, &[8u8; 32]).is_err());
        // Symbols beyond u32 are refused at write time.
        assert!(write_shard(&path, 3, &hash, &[1u64 << 33]).is_err());
    }

    #[test]
    fn tampered_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = shard_path(dir.path(), 0);
        let hash = [1u8; 32];
        write_shard(&path, 0, &hash, &[5, 6, 7]).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(read_shard(&path, 0, &hash).is_err());
        // Truncation breaks the count check.
        write_shard(&path, 0, &hash, &[5, 6, 7]).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(read_shard(&path, 0, &hash).is_err());
        // An empty payload is legitimate.
        write_shard(&path, 0, &hash, &[]).unwrap();
        assert_eq!(read_shard(&path, 0, &hash).unwrap(), Vec::<u64>::new());
    }
}
