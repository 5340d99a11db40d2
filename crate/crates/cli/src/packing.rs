//! Fixed byte-to-symbol packing.
//!
//! Shards carry field symbols, not bytes, so input bytes must be mapped into
//! values below `q`. Two fixed modes cover every field the selector
//! produces: one byte per symbol when the field is large enough to hold
//! 0..=255, otherwise two 4-bit symbols per byte (high nibble first). The
//! nibble mode needs `q >= 17`; smaller fields are valid codes but cannot
//! store file data, and `encode` refuses them up front.

use anyhow::{bail, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Packing {
    /// Two symbols per byte, each holding one nibble. Requires `q >= 17`.
    Nibble,
    /// One symbol per byte. Requires `q >= 257`.
    Byte,
}

impl Packing {
    pub fn for_field(q: u64) -> Packing {
        if q >= 257 {
            Packing::Byte
        } else {
            Packing::Nibble
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Packing::Nibble => "nibble",
            Packing::Byte => "byte",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Packing> {
        match tag {
            "nibble" => Ok(Packing::Nibble),
            "byte" => Ok(Packing::Byte),
            other => bail!("unknown packing mode {other:?}"),
        }
    }

    /// Symbols produced per input byte.
    pub fn symbols_per_byte(self) -> usize {
        match self {
            Packing::Nibble => 2,
            Packing::Byte => 1,
        }
    }

    /// Refuses fields that cannot hold the mode's symbol range.
    pub fn check_field(self, q: u64) -> Result<()> {
        let needed = match self {
            Packing::Nibble => 17,
            Packing::Byte => 257,
        };
        if q < needed {
            bail!(
                "GF({q}) cannot hold {} symbols (needs q >= {needed}); \
                 this code can be repaired and verified but not used to store \
                 file data",
                self.tag()
            );
        }
        Ok(())
    }

    pub fn pack(self, bytes: &[u8]) -> Vec<u64> {
        match self {
            Packing::Nibble => bytes
                .iter()
                .flat_map(|&b| [u64::from(b >> 4), u64::from(b & 0x0f)])
                .collect(),
            Packing::Byte => bytes.iter().map(|&b| u64::from(b)).collect(),
        }
    }

    /// Inverse of [`Packing::pack`]; `len` is the original byte count (the
    /// symbol stream may carry zero padding past it).
    pub fn unpack(self, symbols: &[u64], len: usize) -> Result<Vec<u8>> {
        let needed = len * self.symbols_per_byte();
        if symbols.len() < needed {
            bail!(
                "{} symbols cannot hold {len} bytes ({needed} needed)",
                symbols.len()
            );
        }
        let mut out = Vec::with_capacity(len);
        match self {
            Packing::Nibble => {
                for pair in symbols[..needed].chunks_exact(2) {
                    let (hi, lo) = (pair[0], pair[1]);
                    if hi > 0x0f || lo > 0x0f {
                        bail!("symbol out of nibble range: {hi}, {lo}");
                    }
                    out.push(((hi as u8) << 4) | lo as u8);
                }
            }
            Packing::Byte => {
                for &s in &symbols[..needed] {
                    if s > 0xff {
                        bail!("symbol out of byte range: {s}");
                    }
                    out.push(s as u8);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_selection_tracks_field_size() {
        assert_eq!(Packing::for_field(17), Packing::Nibble);
        assert_eq!(Packing::for_field(251), Packing::Nibble);
        assert_eq!(Packing::for_field(257), Packing::Byte);
        assert!(Packing::Nibble.check_field(17).is_ok());
        assert!(Packing::Nibble.check_field(13).is_err());
        assert!(Packing::Byte.check_field(251).is_err());
    }

    #[test]
    fn nibble_roundtrip() {
        let bytes = [0x00, 0xff, 0xa5, 0x3c];
        let syms = Packing::Nibble.pack(&bytes);
        assert_eq!(syms, [0, 0, 15, 15, 10, 5, 3, 12]);
        assert_eq!(Packing::Nibble.unpack(&syms, 4).unwrap(), bytes);
        // Padding past the original length is ignored.
        let mut padded = syms.clone();
        padded.extend([0, 0]);
        assert_eq!(Packing::Nibble.unpack(&padded, 4).unwrap(), bytes);
        assert!(Packing::Nibble.unpack(&syms, 5).is_err());
    }

    #[test]
    fn byte_roundtrip() {
        let bytes = [7u8, 0, 255, 128];
        let syms = Packing::Byte.pack(&bytes);
        assert_eq!(syms, [7, 0, 255, 128]);
        assert_eq!(Packing::Byte.unpack(&syms, 4).unwrap(), bytes);
        assert!(Packing::Byte.unpack(&[300], 1).is_err());
    }

    #[test]
    fn tags_roundtrip() {
        for p in [Packing::Nibble, Packing::Byte] {
            assert_eq!(Packing::from_tag(p.tag()).unwrap(), p);
        }
        assert!(Packing::from_tag("bits").is_err());
    }
}
