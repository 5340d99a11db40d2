//! Command implementations.
//!
//! Every command works on a directory holding `codec.json` plus
//! `node_<i>.shard` files, so a whole simulation is one self-contained
//! folder that can be inspected, copied, or diffed.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use epsmsr_core::eps_msr::{EpsMsrCode, RepairTranscript};
use epsmsr_core::error::Error as CodeError;
use epsmsr_core::field::select_field;
use epsmsr_core::multi_repair::{MultiCode, MultiRepairTranscript};
use epsmsr_core::outer_code::OuterCode;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::metadata::{Codec, CodecMetadata};
use crate::parallel::map_indexed;
use crate::shard::{lost_path, read_shard, shard_path, write_shard};

/// Lexicographic r-subsets of 0..n (same order the library sweeps in).
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Accepts "1", "0.5", or "1/2".
pub fn parse_ratio(text: &str) -> Result<Ratio<u64>> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().context("ratio numerator")?;
        let den: u64 = den.trim().parse().context("ratio denominator")?;
        if den == 0 {
            bail!("ratio denominator is zero");
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().context("decimal")? };
        if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            bail!("cannot parse {text:?} as a ratio");
        }
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse()?;
        return Ok(Ratio::new(whole * scale + frac, scale));
    }
    let whole: u64 = text.parse().with_context(|| format!("cannot parse {text:?} as a ratio"))?;
    Ok(Ratio::from_integer(whole))
}

pub struct GenParams {
    pub construction: String,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub t: Option<usize>,
    pub lambda: Option<usize>,
    pub delta: String,
}

pub fn cmd_gen_params(dir: &Path, args: &GenParams) -> Result<()> {
    if args.k == 0 || args.k >= args.n {
        bail!("need 0 < k < n (got n={}, k={})", args.n, args.k);
    }
    fs::create_dir_all(dir)?;
    let meta = match args.construction.as_str() {
        "base" => {
            if let Some(t) = args.t {
                if t != args.n {
                    bail!("base construction fixes t = n (got t={t}, n={})", args.n);
                }
            }
            if args.lambda.unwrap_or(1) != 1 {
                bail!("base construction fixes lambda = 1");
            }
            let d = args.d.ok_or_else(|| anyhow!("base construction needs --repair-degree"))?;
            let s = degree_to_step(args.n, args.k, d)?;
            let words = (0..args.n).map(|j| vec![j]).collect();
            let outer = OuterCode::new(args.n, 1, words)?;
            let field = select_field(args.n, s)?;
            let code = EpsMsrCode::new(field, args.n, args.k, s, outer)?;
            let meta = CodecMetadata::single("base", &code);
            print_single(&code, &meta);
            meta
        }
        "eps-msr" => {
            let d = args.d.ok_or_else(|| anyhow!("eps-msr needs --repair-degree"))?;
            let t = args.t.ok_or_else(|| anyhow!("eps-msr needs --symbols"))?;
            let lambda = args.lambda.ok_or_else(|| anyhow!("eps-msr needs --lambda"))?;
            let s = degree_to_step(args.n, args.k, d)?;
            let delta = parse_ratio(&args.delta)?;
            let dist = OuterCode::distance_requirement(delta, lambda)?;
            let code = EpsMsrCode::design(args.n, args.k, s, t, lambda, dist)?;
            let meta = CodecMetadata::single("eps-msr", &code);
            print_single(&code, &meta);
            meta
        }
        "multi" => {
            if args.d.is_some() {
                bail!("multi chooses the helper count per repair; drop --repair-degree");
            }
            let t = args.t.ok_or_else(|| anyhow!("multi needs --symbols"))?;
            let lambda = args.lambda.ok_or_else(|| anyhow!("multi needs --lambda"))?;
            let delta = parse_ratio(&args.delta)?;
            let dist = OuterCode::distance_requirement(delta, lambda)?;
            let code = MultiCode::design(args.n, args.k, t, lambda, dist)?;
            let meta = CodecMetadata::multi(&code);
            print_multi(&code, &meta);
            meta
        }
        other => bail!("unknown construction {other:?} (base | eps-msr | multi)"),
    };
    meta.save(dir)?;
    println!("wrote {}", dir.join(crate::metadata::CODEC_FILE).display());
    if meta.packing()?.check_field(meta.q).is_err() {
        println!(
            "note: GF({}) is too small for {} packing; encode will refuse file data",
            meta.q, meta.packing
        );
    }
    Ok(())
}

fn degree_to_step(n: usize, k: usize, d: usize) -> Result<usize> {
    if d <= k || d >= n {
        bail!("repair degree must satisfy k < d < n (got d={d}, k={k}, n={n})");
    }
    Ok(d - k + 1)
}

fn print_single(code: &EpsMsrCode, meta: &CodecMetadata) {
    println!(
        "construction {}: n={} k={} d={} (s={}) t={} lambda={}",
        meta.construction,
        code.n(),
        code.k(),
        code.d(),
        code.s(),
        code.t(),
        code.lambda()
    );
    println!("field GF({}), generator {}", meta.q, meta.alpha);
    println!(
        "outer code: {} words, minimum distance {} of {} (delta {}, epsilon {})",
        code.n(),
        code.outer().dist_min(),
        code.lambda(),
        code.outer().delta(),
        code.epsilon()
    );
    println!(
        "node size ell = {} symbols ({} chunks of {})",
        code.ell(),
        code.lambda(),
        code.chunk_len()
    );
    println!(
        "per-helper repair bound: {} symbols per stripe",
        code.bandwidth_bound()
    );
    println!("packing: {}", meta.packing);
}

fn print_multi(code: &MultiCode, meta: &CodecMetadata) {
    println!(
        "construction multi: n={} k={} r={} zeta={} t={} lambda={}",
        code.n(),
        code.k(),
        code.r(),
        code.zeta(),
        code.t(),
        code.lambda()
    );
    println!("field GF({}), generator {}", meta.q, meta.alpha);
    println!(
        "outer code: {} words, minimum distance {} of {} (delta {})",
        code.n(),
        code.outer().dist_min(),
        code.lambda(),
        code.outer().delta()
    );
    println!(
        "node size ell = {} symbols ({} chunks of {})",
        code.ell(),
        code.lambda(),
        code.chunk_len()
    );
    println!("per-helper bounds by (h failures, d helpers), symbols per stripe:");
    for h in 1..=code.r() {
        let mut cells = Vec::new();
        for d in code.k()..=code.n() - h {
            if let Ok(b) = code.bandwidth_bound(h, d) {
                cells.push(format!("d={d} -> {b}"));
            }
        }
        println!("  h={h}: {}", cells.join(", "));
    }
    println!("packing: {}", meta.packing);
}

/// Loads metadata, its on-disk hash, and the rebuilt code object.
fn load_codec(dir: &Path) -> Result<(CodecMetadata, [u8; 32], Codec)> {
    let (meta, hash) = CodecMetadata::load(dir)?;
    let codec = meta.build()?;
    Ok((meta, hash, codec))
}

fn read_node(dir: &Path, meta: &CodecMetadata, hash: &[u8; 32], node: usize, ell: usize) -> Result<Vec<u64>> {
    let path = shard_path(dir, node);
    let symbols = read_shard(&path, node, hash)?;
    let expect = meta.stripes as usize * ell;
    if symbols.len() != expect {
        bail!(
            "{}: {} symbols, metadata promises {expect}",
            path.display(),
            symbols.len()
        );
    }
    Ok(symbols)
}

pub fn cmd_encode(dir: &Path, input: &Path) -> Result<()> {
    let (mut meta, _, codec) = load_codec(dir)?;
    let packing = meta.packing()?;
    packing.check_field(meta.q)?;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let symbols = packing.pack(&bytes);
    let stripe_symbols = codec.k() * codec.ell();
    let stripes = symbols.len().div_ceil(stripe_symbols);
    meta.file_len = bytes.len() as u64;
    meta.stripes = stripes as u64;
    meta.save(dir)?;
    let hash = meta.hash()?;

    let per_stripe = map_indexed(stripes, |i| {
        let mut message = vec![0u64; stripe_symbols];
        let lo = i * stripe_symbols;
        let hi = symbols.len().min(lo + stripe_symbols);
        message[..hi - lo].copy_from_slice(&symbols[lo..hi]);
        codec.encode(&message)
    })?;

    for node in 0..codec.n() {
        let mut data = Vec::with_capacity(stripes * codec.ell());
        for stripe in &per_stripe {
            data.extend_from_slice(&stripe[node]);
        }
        write_shard(&shard_path(dir, node), node, &hash, &data)?;
    }
    println!(
        "encoded {} bytes into {} shards of {} symbols ({} stripes)",
        bytes.len(),
        codec.n(),
        stripes * codec.ell(),
        stripes
    );
    Ok(())
}

pub fn cmd_decode(dir: &Path, output: &Path) -> Result<()> {
    let (meta, hash, codec) = load_codec(dir)?;
    let packing = meta.packing()?;
    let ell = codec.ell();
    let stripes = meta.stripes as usize;

    let mut nodes: Vec<Option<Vec<u64>>> = Vec::with_capacity(codec.n());
    for node in 0..codec.n() {
        if shard_path(dir, node).exists() {
            nodes.push(Some(read_node(dir, &meta, &hash, node, ell)?));
        } else {
            nodes.push(None);
        }
    }
    let present = nodes.iter().flatten().count();
    if present < codec.k() {
        bail!(
            "only {present} shards present; need at least k = {}",
            codec.k()
        );
    }

    let messages = map_indexed(stripes, |i| {
        let partial: Vec<Option<Vec<u64>>> = nodes
            .iter()
            .map(|n| n.as_ref().map(|data| data[i * ell..(i + 1) * ell].to_vec()))
            .collect();
        let word = codec.erase_decode(&partial)?;
        let mut message = Vec::with_capacity(codec.k() * ell);
        for node in word.iter().take(codec.k()) {
            message.extend_from_slice(node);
        }
        Ok(message)
    })?;

    let symbols: Vec<u64> = messages.into_iter().flatten().collect();
    let bytes = packing.unpack(&symbols, meta.file_len as usize)?;
    fs::write(output, &bytes).with_context(|| format!("writing {}", output.display()))?;
    println!("decoded {} bytes from {present} shards", bytes.len());
    Ok(())
}

pub fn cmd_fail(dir: &Path, nodes: &[usize]) -> Result<()> {
    let (_, _, codec) = load_codec(dir)?;
    for &node in nodes {
        if node >= codec.n() {
            bail!("node {node} out of range (n = {})", codec.n());
        }
        let from = shard_path(dir, node);
        let to = lost_path(dir, node);
        if !from.exists() {
            bail!("{} does not exist (already failed?)", from.display());
        }
        fs::rename(&from, &to)
            .with_context(|| format!("renaming {} -> {}", from.display(), to.display()))?;
        println!("failed node {node}: {}", to.display());
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HelperLine {
    pub node: usize,
    /// Symbol indices read within one stripe (identical across stripes).
    pub accessed_per_stripe: Vec<usize>,
    pub transmitted_per_stripe: u64,
    pub transmitted_total: u64,
}

/// `transcript.json`: what moved during a repair.
#[derive(Debug, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub stripes: u64,
    pub bound_per_helper_per_stripe: u64,
    pub per_helper: Vec<HelperLine>,
    pub total_transmitted: u64,
    pub bandwidth_ok: bool,
    pub help_by_transfer: bool,
}

impl TranscriptFile {
    fn from_single(t: &RepairTranscript, stripes: u64) -> TranscriptFile {
        TranscriptFile {
            failed: vec![t.failed],
            helpers: t.helpers.clone(),
            stripes,
            bound_per_helper_per_stripe: t.bound_per_helper,
            per_helper: t
                .per_helper
                .iter()
                .map(|h| HelperLine {
                    node: h.node,
                    accessed_per_stripe: h.accessed.clone(),
                    transmitted_per_stripe: h.transmitted,
                    transmitted_total: h.transmitted * stripes,
                })
                .collect(),
            total_transmitted: t.total_transmitted * stripes,
            bandwidth_ok: t.bandwidth_ok,
            help_by_transfer: t.help_by_transfer,
        }
    }

    fn from_multi(t: &MultiRepairTranscript, stripes: u64) -> TranscriptFile {
        TranscriptFile {
            failed: t.failed.clone(),
            helpers: t.helpers.clone(),
            stripes,
            bound_per_helper_per_stripe: t.bound_per_helper,
            per_helper: t
                .per_helper
                .iter()
                .map(|h| HelperLine {
                    node: h.node,
                    accessed_per_stripe: h.accessed.clone(),
                    transmitted_per_stripe: h.transmitted,
                    transmitted_total: h.transmitted * stripes,
                })
                .collect(),
            total_transmitted: t.total_transmitted * stripes,
            bandwidth_ok: t.bandwidth_ok,
            help_by_transfer: t.help_by_transfer,
        }
    }

    fn save(&self, path: &Path) -> Result<()> {
        let value = serde_json::to_value(self)?;
        let mut bytes = serde_json::to_vec_pretty(&value)?;
        bytes.push(b'\n');
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Maps the solver's "not enough information" outcome to actionable advice.
fn explain_repair_error(e: anyhow::Error) -> anyhow::Error {
    match e.downcast_ref::<CodeError>() {
        Some(CodeError::Singular) => e.context(
            "the fixed helper downloads do not determine the failed data for \
             this helper set (a node outside it shares a failed node's \
             coordinate in some chunk); repair from a different helper set \
             or decode from k intact shards",
        ),
        _ => e,
    }
}

pub fn cmd_repair(
    dir: &Path,
    failed: &[usize],
    helpers: &[usize],
    transcript_path: Option<&Path>,
) -> Result<()> {
    let (meta, hash, codec) = load_codec(dir)?;
    let ell = codec.ell();
    let stripes = meta.stripes as usize;
    if failed.is_empty() {
        bail!("no failed nodes given");
    }

    // Pull helper shards; everything else stays untouched on disk.
    let mut word_template: Vec<Vec<u64>> = vec![Vec::new(); codec.n()];
    for &j in helpers {
        if j >= codec.n() {
            bail!("helper {j} out of range (n = {})", codec.n());
        }
        word_template[j] = read_node(dir, &meta, &hash, j, ell)?;
    }

    // An empty archive still validates the request and reports the plan: run
    // the repair over one all-zero stripe (zero is a codeword, and whether
    // the download determines the failed data does not depend on the data).
    let run_stripes = stripes.max(1);
    let results = map_indexed(run_stripes, |i| {
        let word: Vec<Vec<u64>> = word_template
            .iter()
            .map(|data| {
                if data.is_empty() {
                    vec![0u64; ell]
                } else {
                    data[i * ell..(i + 1) * ell].to_vec()
                }
            })
            .collect();
        match &codec {
            Codec::Single(code) => {
                if failed.len() != 1 {
                    bail!("this construction repairs one node at a time; use repair-multi only with the multi construction");
                }
                let (rebuilt, t) = code.repair(failed[0], helpers, &word)?;
                Ok((vec![rebuilt], TranscriptFile::from_single(&t, meta.stripes)))
            }
            Codec::Multi(code) => {
                let (rebuilt, t) = code.repair(failed, helpers, &word)?;
                Ok((rebuilt, TranscriptFile::from_multi(&t, meta.stripes)))
            }
        }
    })
    .map_err(explain_repair_error)?;

    // Failed nodes come back in sorted order from the multi path.
    let mut order: Vec<usize> = failed.to_vec();
    order.sort_unstable();
    for (slot, &node) in order.iter().enumerate() {
        let mut data = Vec::with_capacity(stripes * ell);
        if stripes > 0 {
            for (rebuilt, _) in &results {
                data.extend_from_slice(&rebuilt[slot]);
            }
        }
        write_shard(&shard_path(dir, node), node, &hash, &data)?;
        println!("rebuilt node {node} ({} symbols)", data.len());
    }

    let transcript = &results[0].1;
    let default_path = dir.join("transcript.json");
    let path = transcript_path.unwrap_or(&default_path);
    transcript.save(path)?;
    println!(
        "transcript: {} (per-helper bound {} symbols/stripe, bandwidth_ok={}, help_by_transfer={})",
        path.display(),
        transcript.bound_per_helper_per_stripe,
        transcript.bandwidth_ok,
        transcript.help_by_transfer
    );
    Ok(())
}

pub fn cmd_verify(dir: &Path, mds_exhaustive: bool) -> Result<()> {
    let (meta, hash, codec) = load_codec(dir)?;
    let ell = codec.ell();
    let stripes = meta.stripes as usize;

    let mut nodes: Vec<Option<Vec<u64>>> = Vec::with_capacity(codec.n());
    let mut bad_headers = 0usize;
    for node in 0..codec.n() {
        let path = shard_path(dir, node);
        if !path.exists() {
            println!("node {node}: missing");
            nodes.push(None);
            continue;
        }
        match read_node(dir, &meta, &hash, node, ell) {
            Ok(data) => nodes.push(Some(data)),
            Err(e) => {
                println!("node {node}: unreadable ({e:#})");
                nodes.push(None);
                bad_headers += 1;
            }
        }
    }
    let present: Vec<usize> = (0..codec.n()).filter(|&j| nodes[j].is_some()).collect();
    let missing = codec.n() - present.len();
    if missing > codec.r() {
        bail!("{missing} shards unavailable; the code only tolerates {}", codec.r());
    }

    let mut bad_stripes = 0usize;
    for i in 0..stripes {
        let partial: Vec<Option<Vec<u64>>> = nodes
            .iter()
            .map(|n| n.as_ref().map(|data| data[i * ell..(i + 1) * ell].to_vec()))
            .collect();
        let consistent = if missing == 0 {
            let full: Vec<Vec<u64>> = partial.iter().flatten().cloned().collect();
            codec.is_codeword(&full)?
        } else {
            match codec.erase_decode(&partial) {
                Ok(_) => true,
                Err(e) => match e.downcast_ref::<CodeError>() {
                    Some(CodeError::Inconsistent) => false,
                    _ => return Err(e),
                },
            }
        };
        if !consistent {
            bad_stripes += 1;
            match localize(&codec, &partial) {
                Some(node) => println!("stripe {i}: corrupt at node {node}"),
                None => println!("stripe {i}: inconsistent (not localizable)"),
            }
        }
    }
    if present.len() == codec.k() {
        println!(
            "note: exactly k shards present; parity holds trivially, corruption would go unseen"
        );
    }

    if mds_exhaustive {
        if codec.n() > 12 || codec.ell() > 512 {
            bail!("--mds-exhaustive is limited to n <= 12 and ell <= 512");
        }
        let subsets = combinations(codec.n(), codec.r()).len();
        if codec.verify_mds()? {
            println!("mds: all {subsets} erasure patterns decodable");
        } else {
            bail!("mds: some {subsets}-subset is not decodable; the descriptor is corrupt");
        }
    }

    if bad_headers > 0 || bad_stripes > 0 {
        bail!("{bad_headers} unreadable shards, {bad_stripes} inconsistent stripes");
    }
    println!(
        "verified {} stripes across {} shards: consistent",
        stripes,
        present.len()
    );
    Ok(())
}

/// Finds the single shard whose removal makes the stripe consistent again.
fn localize(codec: &Codec, partial: &[Option<Vec<u64>>]) -> Option<usize> {
    let missing = partial.iter().filter(|n| n.is_none()).count();
    if missing + 1 > codec.r() {
        return None;
    }
    let mut culprit = None;
    for suspect in 0..partial.len() {
        if partial[suspect].is_none() {
            continue;
        }
        let mut probe = partial.to_vec();
        probe[suspect] = None;
        if codec.erase_decode(&probe).is_ok() {
            if culprit.is_some() {
                return None; // ambiguous
            }
            culprit = Some(suspect);
        }
    }
    culprit
}

pub fn cmd_bench(dir: &Path, out: Option<&Path>) -> Result<()> {
    let (meta, hash, codec) = load_codec(dir)?;
    let ell = codec.ell();

    // Prefer stripe 0 of real shards; otherwise bench a deterministic
    // synthetic stripe.
    let word: Vec<Vec<u64>> = if meta.stripes > 0
        && (0..codec.n()).all(|j| shard_path(dir, j).exists())
    {
        (0..codec.n())
            .map(|j| read_node(dir, &meta, &hash, j, ell).map(|d| d[..ell].to_vec()))
            .collect::<Result<_>>()?
    } else {
        let q = codec.field().q();
        let message: Vec<u64> = (0..codec.k() * ell)
            .map(|i| (i as u64 * 31 + 7) % q)
            .collect();
        codec.encode(&message)?
    };

    let mut csv = String::from(
        "failed,helpers,h,d,max_per_helper_per_stripe,bound_per_helper_per_stripe,bandwidth_ok,help_by_transfer,status\n",
    );
    let mut rows = 0usize;
    match &codec {
        Codec::Single(code) => {
            for failed in 0..code.n() {
                let others: Vec<usize> =
                    (0..code.n()).filter(|&j| j != failed).collect();
                for pick in combinations(others.len(), code.d()) {
                    let helpers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
                    let row = match code.repair(failed, &helpers, &word) {
                        Ok((rebuilt, t)) => {
                            if rebuilt != word[failed] {
                                bail!("repair of {failed} from {helpers:?} returned wrong data");
                            }
                            bench_row(&[failed], &helpers, 1, code.d(), Some(&t.per_helper), t.bound_per_helper, t.bandwidth_ok, t.help_by_transfer)
                        }
                        Err(CodeError::Singular) => {
                            bench_row(&[failed], &helpers, 1, code.d(), None, code.bandwidth_bound(), false, false)
                        }
                        Err(e) => return Err(e.into()),
                    };
                    csv.push_str(&row);
                    rows += 1;
                }
            }
        }
        Codec::Multi(code) => {
            for h in 1..=code.r() {
                for failed in combinations(code.n(), h) {
                    let others: Vec<usize> =
                        (0..code.n()).filter(|j| !failed.contains(j)).collect();
                    for d in code.k()..=code.n() - h {
                        for pick in combinations(others.len(), d) {
                            let helpers: Vec<usize> =
                                pick.iter().map(|&i| others[i]).collect();
                            let bound = code.bandwidth_bound(h, d)?;
                            let row = match code.repair(&failed, &helpers, &word) {
                                Ok((rebuilt, t)) => {
                                    for (slot, &f) in failed.iter().enumerate() {
                                        if rebuilt[slot] != word[f] {
                                            bail!("repair of {failed:?} from {helpers:?} returned wrong data");
                                        }
                                    }
                                    bench_row(&failed, &helpers, h, d, Some(&t.per_helper), t.bound_per_helper, t.bandwidth_ok, t.help_by_transfer)
                                }
                                Err(CodeError::Singular) => {
                                    bench_row(&failed, &helpers, h, d, None, bound, false, false)
                                }
                                Err(e) => return Err(e.into()),
                            };
                            csv.push_str(&row);
                            rows += 1;
                        }
                    }
                }
            }
        }
    }

    match out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {rows} rows to {}", path.display());
        }
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench_row(
    failed: &[usize],
    helpers: &[usize],
    h: usize,
    d: usize,
    per_helper: Option<&[epsmsr_core::eps_msr::HelperReport]>,
    bound: u64,
    bandwidth_ok: bool,
    help_by_transfer: bool,
) -> String {
    let join = |xs: &[usize]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("|")
    };
    match per_helper {
        Some(reports) => {
            let max = reports.iter().map(|r| r.transmitted).max().unwrap_or(0);
            format!(
                "{},{},{h},{d},{max},{bound},{bandwidth_ok},{help_by_transfer},ok\n",
                join(failed),
                join(helpers)
            )
        }
        None => format!(
            "{},{},{h},{d},,{bound},,,undetermined\n",
            join(failed),
            join(helpers)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    // Storing file data needs q >= 17 (nibble packing), which pushes the
    // single constructions up to n = 8. The multi construction reaches
    // GF(17) already at n = 6.
    fn setup(construction: &str) -> (tempfile::TempDir, GenParams) {
        let dir = tempfile::tempdir().unwrap();
        let args = match construction {
            "eps-msr" => GenParams {
                construction: "eps-msr".into(),
                n: 8,
                k: 4,
                d: Some(5),
                t: Some(3),
                lambda: Some(4),
                delta: "1/2".into(),
            },
            "multi" => GenParams {
                construction: "multi".into(),
                n: 6,
                k: 3,
                d: None,
                t: Some(2),
                lambda: Some(3),
                delta: "1/3".into(),
            },
            // q = 11: a valid code that cannot hold nibbles.
            "small-field" => GenParams {
                construction: "eps-msr".into(),
                n: 6,
                k: 3,
                d: Some(5),
                t: Some(3),
                lambda: Some(4),
                delta: "1/2".into(),
            },
            _ => GenParams {
                construction: "base".into(),
                n: 8,
                k: 4,
                d: Some(5),
                t: None,
                lambda: None,
                delta: "1".into(),
            },
        };
        (dir, args)
    }

    fn write_input(dir: &Path, len: usize, seed: u64) -> std::path::PathBuf {
        let mut rng = StdRng::seed_from_u64(seed);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let path = dir.join("input.bin");
        fs::write(&path, &bytes).unwrap();
        path
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_ratio("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_ratio("0.5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_ratio(".25").unwrap(), Ratio::new(1, 4));
        assert!(parse_ratio("x").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn encode_decode_roundtrip_with_losses() {
        let (dir, args) = setup("eps-msr");
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = write_input(dir.path(), 3000, 1);
        cmd_encode(dir.path(), &input).unwrap();
        cmd_verify(dir.path(), false).unwrap();
        // Drop r = 4 shards, decode anyway.
        cmd_fail(dir.path(), &[0, 2, 5, 7]).unwrap();
        let out = dir.path().join("out.bin");
        cmd_decode(dir.path(), &out).unwrap();
        assert_eq!(fs::read(&out).unwrap(), fs::read(&input).unwrap());
        // A fifth loss is refused.
        cmd_fail(dir.path(), &[1]).unwrap();
        assert!(cmd_decode(dir.path(), &out).is_err());
    }

    #[test]
    fn repair_restores_identical_shard() {
        // base: every node holds a distinct coordinate, so repair succeeds
        // from any d helpers.
        let (dir, args) = setup("base");
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = write_input(dir.path(), 2000, 2);
        cmd_encode(dir.path(), &input).unwrap();
        let original = fs::read(shard_path(dir.path(), 4)).unwrap();
        cmd_fail(dir.path(), &[4]).unwrap();
        cmd_repair(dir.path(), &[4], &[0, 1, 2, 3, 5], None).unwrap();
        assert_eq!(fs::read(shard_path(dir.path(), 4)).unwrap(), original);
        // Transcript is on disk with the stripe totals.
        let t: TranscriptFile = serde_json::from_slice(
            &fs::read(dir.path().join("transcript.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(t.failed, vec![4]);
        assert!(t.help_by_transfer);
        assert!(t.bandwidth_ok);
        assert_eq!(
            t.total_transmitted,
            t.per_helper.iter().map(|h| h.transmitted_total).sum::<u64>()
        );
    }

    #[test]
    fn multi_repair_restores_two_nodes() {
        let (dir, args) = setup("multi");
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = write_input(dir.path(), 1500, 3);
        cmd_encode(dir.path(), &input).unwrap();
        let orig1 = fs::read(shard_path(dir.path(), 1)).unwrap();
        let orig4 = fs::read(shard_path(dir.path(), 4)).unwrap();
        cmd_fail(dir.path(), &[1, 4]).unwrap();
        // d = n - h = 4: absent set empty, repair is guaranteed.
        cmd_repair(dir.path(), &[1, 4], &[0, 2, 3, 5], None).unwrap();
        assert_eq!(fs::read(shard_path(dir.path(), 1)).unwrap(), orig1);
        assert_eq!(fs::read(shard_path(dir.path(), 4)).unwrap(), orig4);
    }

    #[test]
    fn verify_localizes_a_flipped_symbol() {
        let (dir, args) = setup("base");
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = write_input(dir.path(), 500, 4);
        cmd_encode(dir.path(), &input).unwrap();
        // Replace node 2's first payload symbol with a different field value.
        let path = shard_path(dir.path(), 2);
        let mut bytes = fs::read(&path).unwrap();
        let v = u32::from_le_bytes(bytes[56..60].try_into().unwrap());
        bytes[56..60].copy_from_slice(&((v + 1) % 17).to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        let err = cmd_verify(dir.path(), false).unwrap_err();
        assert!(err.to_string().contains("inconsistent"), "{err:#}");
    }

    #[test]
    fn small_field_refuses_file_data() {
        let (dir, args) = setup("small-field"); // q = 11 < 17
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = write_input(dir.path(), 100, 5);
        let err = cmd_encode(dir.path(), &input).unwrap_err();
        assert!(err.to_string().contains("q >= 17"), "{err:#}");
    }

    #[test]
    fn empty_file_roundtrip() {
        let (dir, args) = setup("base");
        cmd_gen_params(dir.path(), &args).unwrap();
        let input = dir.path().join("empty.bin");
        fs::write(&input, b"").unwrap();
        cmd_encode(dir.path(), &input).unwrap();
        cmd_verify(dir.path(), false).unwrap();
        // Repair of a zero-stripe archive still validates and reports.
        cmd_fail(dir.path(), &[3]).unwrap();
        cmd_repair(dir.path(), &[3], &[0, 1, 2, 4, 5], None).unwrap();
        let out = dir.path().join("out.bin");
        cmd_decode(dir.path(), &out).unwrap();
        assert_eq!(fs::read(&out).unwrap(), b"");
    }

    #[test]
    fn bench_emits_csv() {
        let (dir, args) = setup("base");
        cmd_gen_params(dir.path(), &args).unwrap();
        let csv_path = dir.path().join("bench.csv");
        cmd_bench(dir.path(), Some(&csv_path)).unwrap();
        let text = fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // 8 failures x C(7,5) helper sets + header.
        assert_eq!(lines.len(), 169);
        assert!(lines[0].starts_with("failed,helpers"));
        assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
    }
}
