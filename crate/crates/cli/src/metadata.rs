//! `codec.json`: the persisted code descriptor.
//!
//! The file is written with sorted keys so its bytes are canonical for a
//! given parameter set; every shard header embeds the SHA-256 of those bytes,
//! which ties shards to the exact parameters that produced them. Loading
//! re-runs all construction checks, so a descriptor that validated once
//! cannot silently drift.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use epsmsr_core::eps_msr::EpsMsrCode;
use epsmsr_core::field::{FieldElement, PrimeField};
use epsmsr_core::multi_repair::{lcm_up_to, MultiCode};
use epsmsr_core::outer_code::OuterCode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::packing::Packing;

pub const CODEC_FILE: &str = "codec.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecMetadata {
    /// `base`, `eps-msr`, or `multi`. `base` is the single-chunk special
    /// case (lambda = 1, one distinct coordinate per node).
    pub construction: String,
    pub n: usize,
    pub k: usize,
    /// Repair degree `k + s - 1`; absent for `multi`, which picks the helper
    /// count per repair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Selector step; absent for `multi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// Group modulus `lcm(1..=n-k)`; only for `multi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<usize>,
    pub t: usize,
    pub lambda: usize,
    pub q: u64,
    pub alpha: u64,
    /// Outer-code words, one per node.
    pub words: Vec<Vec<usize>>,
    /// `nibble` or `byte`; see [`crate::packing`].
    pub packing: String,
    /// Original file length in bytes; zero until `encode` runs.
    pub file_len: u64,
    /// Stripes per shard; zero until `encode` runs.
    pub stripes: u64,
}

/// The code object a descriptor denotes. `base` and `eps-msr` share the
/// single-failure machinery; `multi` brings its own.
pub enum Codec {
    Single(EpsMsrCode),
    Multi(MultiCode),
}

impl Codec {
    pub fn n(&self) -> usize {
        match self {
            Codec::Single(c) => c.n(),
            Codec::Multi(c) => c.n(),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Codec::Single(c) => c.k(),
            Codec::Multi(c) => c.k(),
        }
    }

    pub fn r(&self) -> usize {
        self.n() - self.k()
    }

    pub fn ell(&self) -> usize {
        match self {
            Codec::Single(c) => c.ell(),
            Codec::Multi(c) => c.ell(),
        }
    }

    pub fn field(&self) -> PrimeField {
        match self {
            Codec::Single(c) => c.field(),
            Codec::Multi(c) => c.field(),
        }
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        Ok(match self {
            Codec::Single(c) => c.encode(message)?,
            Codec::Multi(c) => c.encode(message)?,
        })
    }

    pub fn erase_decode(
        &self,
        partial: &[Option<Vec<FieldElement>>],
    ) -> Result<Vec<Vec<FieldElement>>> {
        Ok(match self {
            Codec::Single(c) => c.erase_decode(partial)?,
            Codec::Multi(c) => c.erase_decode(partial)?,
        })
    }

    pub fn is_codeword(&self, nodes: &[Vec<FieldElement>]) -> Result<bool> {
        Ok(match self {
            Codec::Single(c) => c.is_codeword(nodes)?,
            Codec::Multi(c) => c.is_codeword(nodes)?,
        })
    }

    pub fn verify_mds(&self) -> Result<bool> {
        Ok(match self {
            Codec::Single(c) => c.verify_mds()?,
            Codec::Multi(c) => c.verify_mds()?,
        })
    }
}

impl CodecMetadata {
    /// Descriptor for the single-failure constructions. `base` is expressed
    /// as the lambda = 1 outer code over t = n distinct symbols.
    pub fn single(construction: &str, code: &EpsMsrCode) -> CodecMetadata {
        CodecMetadata {
            construction: construction.to_string(),
            n: code.n(),
            k: code.k(),
            d: Some(code.d()),
            s: Some(code.s()),
            zeta: None,
            t: code.t(),
            lambda: code.lambda(),
            q: code.field().q(),
            alpha: code.field().alpha(),
            words: (0..code.n()).map(|j| code.outer().word(j).to_vec()).collect(),
            packing: Packing::for_field(code.field().q()).tag().to_string(),
            file_len: 0,
            stripes: 0,
        }
    }

    pub fn multi(code: &MultiCode) -> CodecMetadata {
        CodecMetadata {
            construction: "multi".to_string(),
            n: code.n(),
            k: code.k(),
            d: None,
            s: None,
            zeta: Some(code.zeta()),
            t: code.t(),
            lambda: code.lambda(),
            q: code.field().q(),
            alpha: code.field().alpha(),
            words: (0..code.n()).map(|j| code.outer().word(j).to_vec()).collect(),
            packing: Packing::for_field(code.field().q()).tag().to_string(),
            file_len: 0,
            stripes: 0,
        }
    }

    /// Rebuilds the code object, re-running every construction check.
    pub fn build(&self) -> Result<Codec> {
        let field = PrimeField::new(self.q, self.alpha)
            .with_context(|| format!("field GF({}) with generator {}", self.q, self.alpha))?;
        let outer = OuterCode::new(self.t, self.lambda, self.words.clone())
            .context("outer code from metadata words")?;
        let packing = Packing::from_tag(&self.packing)?;
        if packing != Packing::for_field(self.q) {
            bail!(
                "packing {:?} does not match GF({}) (expected {:?})",
                self.packing,
                self.q,
                Packing::for_field(self.q).tag()
            );
        }
        match self.construction.as_str() {
            "base" | "eps-msr" => {
                let s = match self.s {
                    Some(s) => s,
                    None => bail!("construction {:?} needs `s`", self.construction),
                };
                if self.zeta.is_some() {
                    bail!("`zeta` is only valid for the multi construction");
                }
                if self.d != Some(self.k + s - 1) {
                    bail!(
                        "d = {:?} does not match k + s - 1 = {}",
                        self.d,
                        self.k + s - 1
                    );
                }
                if self.construction == "base" {
                    let identity = self.t == self.n
                        && self.lambda == 1
                        && self.words.iter().enumerate().all(|(j, w)| w == &[j]);
                    if !identity {
                        bail!("base construction requires the t = n identity word set");
                    }
                }
                let code = EpsMsrCode::new(field, self.n, self.k, s, outer)?;
                Ok(Codec::Single(code))
            }
            "multi" => {
                if self.s.is_some() || self.d.is_some() {
                    bail!("`s` and `d` are only valid for single-failure constructions");
                }
                let expect = lcm_up_to(self.n - self.k);
                if self.zeta != Some(expect) {
                    bail!("zeta = {:?} does not match lcm(1..={}) = {expect}", self.zeta, self.n - self.k);
                }
                let code = MultiCode::new(field, self.n, self.k, outer)?;
                Ok(Codec::Multi(code))
            }
            other => bail!("unknown construction {other:?}"),
        }
    }

    pub fn packing(&self) -> Result<Packing> {
        Packing::from_tag(&self.packing)
    }

    /// The canonical serialized form: pretty JSON with sorted keys and a
    /// trailing newline. Shard headers hash these exact bytes.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        // Round-tripping through Value sorts the keys.
        let value = serde_json::to_value(self)?;
        let mut bytes = serde_json::to_vec_pretty(&value)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn hash(&self) -> Result<[u8; 32]> {
        Ok(Sha256::digest(self.canonical_bytes()?).into())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CODEC_FILE);
        fs::write(&path, self.canonical_bytes()?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Loads and validates; returns the descriptor and the hash of the file
    /// bytes as stored (which shard headers must match).
    pub fn load(dir: &Path) -> Result<(CodecMetadata, [u8; 32])> {
        let path = dir.join(CODEC_FILE);
        let bytes = fs::read(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let meta: CodecMetadata = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok((meta, Sha256::digest(&bytes).into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps_meta() -> CodecMetadata {
        let code = EpsMsrCode::design(6, 3, 3, 3, 4, 2).unwrap();
        CodecMetadata::single("eps-msr", &code)
    }

    #[test]
    fn canonical_bytes_are_stable_and_sorted() {
        let meta = eps_meta();
        let a = meta.canonical_bytes().unwrap();
        let b = meta.canonical_bytes().unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let alpha_pos = text.find("\"alpha\"").unwrap();
        let words_pos = text.find("\"words\"").unwrap();
        assert!(alpha_pos < words_pos, "keys are sorted");
        // `file_len` changes the canonical bytes, hence the hash.
        let mut touched = meta.clone();
        touched.file_len = 10;
        assert_ne!(meta.hash().unwrap(), touched.hash().unwrap());
    }

    #[test]
    fn save_load_build_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let meta = eps_meta();
        meta.save(dir.path()).unwrap();
        let (back, hash) = CodecMetadata::load(dir.path()).unwrap();
        assert_eq!(back, meta);
        assert_eq!(hash, meta.hash().unwrap());
        match back.build().unwrap() {
            Codec::Single(code) => {
                assert_eq!(code.ell(), 108);
                assert_eq!(code.d(), 5);
            }
            Codec::Multi(_) => panic!("wrong construction"),
        }
    }

    #[test]
    fn build_rejects_inconsistent_descriptors() {
        let mut meta = eps_meta();
        meta.d = Some(4);
        assert!(meta.build().is_err());

        let mut meta = eps_meta();
        meta.construction = "base".to_string();
        assert!(meta.build().is_err(), "eps words are not the identity set");

        // A non-generator is rejected by the field check.
        let mut meta = eps_meta();
        meta.alpha = 1;
        assert!(meta.build().is_err());

        let mut meta = eps_meta();
        meta.packing = "byte".to_string();
        assert!(meta.build().is_err());
    }

    #[test]
    fn multi_descriptor_roundtrip() {
        let code = MultiCode::design(6, 3, 2, 3, 1).unwrap();
        let meta = CodecMetadata::multi(&code);
        assert_eq!(meta.zeta, Some(6));
        assert!(matches!(meta.build().unwrap(), Codec::Multi(_)));
        let mut bad = meta.clone();
        bad.zeta = Some(4);
        assert!(bad.build().is_err());
    }

    #[test]
    fn base_descriptor_is_the_identity_word_set() {
        let outer = OuterCode::new(4, 1, vec![vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let field = epsmsr_core::field::select_field(4, 2).unwrap();
        let code = EpsMsrCode::new(field, 4, 2, 2, outer).unwrap();
        let meta = CodecMetadata::single("base", &code);
        assert_eq!(meta.q, 11);
        assert!(matches!(meta.build().unwrap(), Codec::Single(_)));
    }
}
