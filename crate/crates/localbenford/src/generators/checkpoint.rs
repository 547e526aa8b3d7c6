//! Binary checkpoint files for replay-only streams.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "LBCKPT01"
//! 8       4     version (u32, currently 1)
//! 12      8     spec hash (FNV-1a over "render(spec)|base|frac_bits")
//! 20      4     base (u32)
//! 24      4     frac bits (u32, always 128)
//! 28      8     index (u64, next n to emit)
//! 36      4     register byte count (u32)
//! 40      ...   raw register words (family-specific)
//! ```
//!
//! Round-trips are bit-exact: a restored state emits the same words the
//! uninterrupted stream would have.

use std::path::{Path, PathBuf};

use super::state::{GeneratorState, RegReader, RegWriter, SeekPolicy};
use super::spec::SequenceSpec;
use super::GenConfig;
use crate::error::{Error, Result};
use crate::fixed::FRAC_BITS;

const MAGIC: &[u8; 8] = b"LBCKPT01";
const VERSION: u32 = 1;

/// Default snapshot cadence for long runs.
pub const CHECKPOINT_INTERVAL: u64 = 1 << 20;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stable identity of a `(spec, base)` stream for checkpoint validation.
pub fn spec_hash(spec: &SequenceSpec, base: u32) -> u64 {
    fnv1a(format!("{}|{}|{}", spec.render(), base, FRAC_BITS).as_bytes())
}

/// Serialize a state to checkpoint bytes.
pub fn to_bytes(state: &GeneratorState) -> Vec<u8> {
    let mut regs = RegWriter(Vec::new());
    state.save_registers(&mut regs);
    let mut out = Vec::with_capacity(40 + regs.0.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&spec_hash(state.spec(), state.base()).to_le_bytes());
    out.extend_from_slice(&state.base().to_le_bytes());
    out.extend_from_slice(&FRAC_BITS.to_le_bytes());
    out.extend_from_slice(&state.peek_index().to_le_bytes());
    out.extend_from_slice(&(regs.0.len() as u32).to_le_bytes());
    out.extend_from_slice(&regs.0);
    out
}

/// Restore a state from checkpoint bytes, validating the header against the
/// expected spec and base.
pub fn from_bytes(
    spec: &SequenceSpec,
    base: u32,
    cfg: &GenConfig,
    bytes: &[u8],
) -> Result<GeneratorState> {
    if bytes.len() < 40 {
        return Err(Error::Checkpoint("file shorter than the header".into()));
    }
    if &bytes[0..8] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let rd_u32 = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let rd_u64 = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if rd_u32(8) != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", rd_u32(8))));
    }
    if rd_u64(12) != spec_hash(spec, base) {
        return Err(Error::Checkpoint("spec hash mismatch".into()));
    }
    if rd_u32(20) != base {
        return Err(Error::Checkpoint("base mismatch".into()));
    }
    if rd_u32(24) != FRAC_BITS {
        return Err(Error::Checkpoint("fractional-bit width mismatch".into()));
    }
    let index = rd_u64(28);
    let len = rd_u32(36) as usize;
    if bytes.len() != 40 + len {
        return Err(Error::Checkpoint("register section length mismatch".into()));
    }
    let mut reader = RegReader::new(&bytes[40..]);
    let st = GeneratorState::load_registers(spec.clone(), base, cfg.clone(), index, &mut reader)?;
    if !reader.finished() {
        return Err(Error::Checkpoint("trailing bytes after registers".into()));
    }
    Ok(st)
}

pub fn write_file(state: &GeneratorState, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(state))?;
    Ok(())
}

pub fn read_file(
    spec: &SequenceSpec,
    base: u32,
    cfg: &GenConfig,
    path: &Path,
) -> Result<GeneratorState> {
    let bytes = std::fs::read(path)?;
    from_bytes(spec, base, cfg, &bytes)
}

fn file_name(spec: &SequenceSpec, base: u32, index: u64) -> String {
    format!("lb-{:016x}-n{index:012}.ckpt", spec_hash(spec, base))
}

/// Latest checkpoint in `dir` for this stream with index <= `n0`.
pub fn find_latest(dir: &Path, spec: &SequenceSpec, base: u32, n0: u64) -> Option<(u64, PathBuf)> {
    let prefix = format!("lb-{:016x}-n", spec_hash(spec, base));
    let mut best: Option<(u64, PathBuf)> = None;
    for entry in std::fs::read_dir(dir).ok()?.flatten() {
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".ckpt")) {
            if let Ok(idx) = rest.parse::<u64>() {
                if idx <= n0 && best.as_ref().map(|(b, _)| idx > *b).unwrap_or(true) {
                    best = Some((idx, entry.path()));
                }
            }
        }
    }
    best
}

/// Seek that consults a checkpoint directory before replaying from n = 1.
pub fn seek_with_checkpoints(
    spec: &SequenceSpec,
    base: u32,
    cfg: &GenConfig,
    n0: u64,
    dir: Option<&Path>,
) -> Result<GeneratorState> {
    if let Ok(st) =
        GeneratorState::seek(spec.clone(), base, cfg.clone(), n0, SeekPolicy::DirectOnly)
    {
        return Ok(st);
    }
    if let Some(dir) = dir {
        if let Some((_, path)) = find_latest(dir, spec, base, n0) {
            let mut st = read_file(spec, base, cfg, &path)?;
            while st.peek_index() < n0 {
                st.next_term()?;
            }
            return Ok(st);
        }
    }
    GeneratorState::seek(spec.clone(), base, cfg.clone(), n0, SeekPolicy::AllowReplay)
}

/// Drops a snapshot every [`CHECKPOINT_INTERVAL`] indices into `dir`.
pub struct CheckpointWriter {
    dir: PathBuf,
    interval: u64,
    next_due: u64,
}

impl CheckpointWriter {
    pub fn new(dir: PathBuf, start: u64) -> CheckpointWriter {
        let interval = CHECKPOINT_INTERVAL;
        CheckpointWriter { dir, interval, next_due: start.next_multiple_of(interval) }
    }

    /// Write a snapshot if the state has crossed the next due index.
    pub fn maybe_write(&mut self, state: &GeneratorState) -> Result<()> {
        let idx = state.peek_index();
        if idx >= self.next_due {
            let path = self.dir.join(file_name(state.spec(), state.base(), idx));
            write_file(state, &path)?;
            self.next_due = idx.next_multiple_of(self.interval).max(idx + 1);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::spec::parse_spec;
    use crate::generators::state::frac_stream;

    fn resume_matches(spec_str: &str, stop: u64, extra: u64) {
        let spec = parse_spec(spec_str).unwrap();
        let cfg = GenConfig::default();
        let mut live = GeneratorState::new(spec.clone(), 10, cfg.clone()).unwrap();
        for _ in 0..stop {
            live.next_term().unwrap();
        }
        let bytes = to_bytes(&live);
        let mut restored = from_bytes(&spec, 10, &cfg, &bytes).unwrap();
        assert_eq!(restored.peek_index(), stop + 1);
        for _ in 0..extra {
            assert_eq!(
                live.next_term().unwrap(),
                restored.next_term().unwrap(),
                "{spec_str} diverged after restore"
            );
        }
    }

    #[test]
    fn roundtrip_bit_exact_across_families() {
        resume_matches("n!", 100, 100);
        resume_matches("p(n)", 60, 40);
        resume_matches("superfact(2)", 80, 50);
        resume_matches("2^prime(n)", 90, 60);
        resume_matches("2^(n^2)", 50, 50);
        resume_matches("fib-exp(2)", 50, 30); // crosses the recurrence cutover
    }

    #[test]
    fn header_validation() {
        let spec = parse_spec("n!").unwrap();
        let cfg = GenConfig::default();
        let mut st = GeneratorState::new(spec.clone(), 10, cfg.clone()).unwrap();
        for _ in 0..10 {
            st.next_term().unwrap();
        }
        let mut bytes = to_bytes(&st);
        // wrong spec
        let other = parse_spec("p(n)").unwrap();
        assert!(from_bytes(&other, 10, &cfg, &bytes).is_err());
        // wrong base
        assert!(from_bytes(&spec, 7, &cfg, &bytes).is_err());
        // corrupt magic
        bytes[0] ^= 0xff;
        assert!(matches!(from_bytes(&spec, 10, &cfg, &bytes), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn find_latest_picks_greatest_below() {
        let dir = std::env::temp_dir().join(format!("lbckpt-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let spec = parse_spec("n!").unwrap();
        let cfg = GenConfig::default();
        let mut st = GeneratorState::new(spec.clone(), 10, cfg.clone()).unwrap();
        for stop in [20u64, 40, 60] {
            while st.peek_index() <= stop {
                st.next_term().unwrap();
            }
            write_file(&st, &dir.join(file_name(&spec, 10, st.peek_index()))).unwrap();
        }
        let (idx, _) = find_latest(&dir, &spec, 10, 55).unwrap();
        assert_eq!(idx, 41);
        assert!(find_latest(&dir, &spec, 10, 10).is_none());

        // resume through the helper and cross-check against a fresh stream
        let mut resumed = seek_with_checkpoints(&spec, 10, &cfg, 55, Some(&dir)).unwrap();
        let fresh: Vec<_> = frac_stream(&spec, 10, 55..60, &cfg)
            .unwrap()
            .map(|r| r.unwrap())
            .collect();
        for f in fresh {
            assert_eq!(resumed.next_term().unwrap(), f);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
