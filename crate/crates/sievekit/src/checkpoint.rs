//! Resumable checkpoint files for long scans.
//!
//! A checkpoint is a small versioned text file. The header names the scan,
//! its limit, and the segment width; each record line stores the cumulative
//! state after one completed segment; the final line is a SHA-256 checksum of
//! everything above it, so a torn or hand-edited file is detected instead of
//! silently resuming from garbage.
//!
//! ```text
//! sievekit-checkpoint v1
//! scan = verify-mertens
//! limit = 4000000000
//! segment_width = 100000000
//! columns = segment_index, last_prime, sum_neg_log_terms, checked_count
//! 0, 99999989, 3.4960570818495244541508795397509424782064959205693, 5761455
//! checksum = 9f7c…
//! ```
//!
//! `sum_neg_log_terms` is the running compensated sum of `-log(1 - 1/p)`
//! over all primes up to `last_prime`, printed to fifty significant digits —
//! comfortably more than the double-double pair it is reconstructed into on
//! resume, so a save/load round trip loses nothing.
//!
//! Files are rewritten whole (to a sibling temp file, then renamed) each time
//! a batch of segments completes; a crash leaves either the old file or the
//! new one, never a half-written hybrid.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::scalar::{HighPrec, NeumaierSum};
use crate::{Error, Result};

/// First line of every checkpoint file.
pub const VERSION_LINE: &str = "sievekit-checkpoint v1";

/// Significant decimal digits stored for the running sum.
pub const SUM_DIGITS: usize = 50;

const COLUMNS_LINE: &str = "columns = segment_index, last_prime, sum_neg_log_terms, checked_count";

/// Cumulative state after one completed segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRecord {
    /// Zero-based index of the completed segment.
    pub index: u64,
    /// Largest prime seen so far (carried forward over a primeless segment).
    pub last_prime: u64,
    /// Cumulative `sum of -log(1 - 1/p)` over `p <= last_prime`, as a
    /// 50-significant-digit decimal string.
    pub sum_digits: String,
    /// Cumulative number of primes checked.
    pub checked_count: u64,
}

impl SegmentRecord {
    /// Builds a record from the live accumulator state.
    pub fn from_state(index: u64, last_prime: u64, sum: &NeumaierSum, checked_count: u64) -> Self {
        SegmentRecord {
            index,
            last_prime,
            sum_digits: sum.to_high_prec().format_sig(SUM_DIGITS),
            checked_count,
        }
    }

    /// Reconstructs the compensated accumulator from the stored digits.
    pub fn sum(&self) -> Result<NeumaierSum> {
        let hp = HighPrec::parse(&self.sum_digits)?;
        let hi = hp.to_f64();
        let lo = (hp - HighPrec::from_f64(hi)).to_f64();
        Ok(NeumaierSum::from_parts(hi, lo))
    }
}

/// In-memory image of a checkpoint file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointFile {
    /// Scan identifier, e.g. `"verify-mertens"`.
    pub scan: String,
    /// Upper limit of the scan the checkpoint belongs to.
    pub limit: u64,
    /// Segment width the scan was started with.
    pub segment_width: u64,
    /// One record per completed segment, contiguous from index 0.
    pub records: Vec<SegmentRecord>,
}

impl CheckpointFile {
    pub fn new(scan: &str, limit: u64, segment_width: u64) -> Self {
        CheckpointFile {
            scan: scan.to_string(),
            limit,
            segment_width,
            records: Vec::new(),
        }
    }

    fn body(&self) -> String {
        let mut out = String::new();
        out.push_str(VERSION_LINE);
        out.push('\n');
        out.push_str(&format!("scan = {}\n", self.scan));
        out.push_str(&format!("limit = {}\n", self.limit));
        out.push_str(&format!("segment_width = {}\n", self.segment_width));
        out.push_str(COLUMNS_LINE);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{}, {}, {}, {}\n",
                r.index, r.last_prime, r.sum_digits, r.checked_count
            ));
        }
        out
    }

    /// Writes the whole file atomically: temp sibling first, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let body = self.body();
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        let content = format!("{body}checksum = {digest}\n");
        let tmp = path.with_extension("tmp");
        let fail = |detail: String| Error::Checkpoint {
            path: path.display().to_string(),
            detail,
        };
        fs::write(&tmp, content).map_err(|e| fail(format!("cannot write temp file: {e}")))?;
        fs::rename(&tmp, path).map_err(|e| fail(format!("cannot rename temp file: {e}")))?;
        Ok(())
    }

    /// Loads and validates a checkpoint. `Ok(None)` when the file does not
    /// exist; any structural or checksum problem is a [`Error::Checkpoint`].
    pub fn load(path: &Path) -> Result<Option<CheckpointFile>> {
        let fail = |detail: String| Error::Checkpoint {
            path: path.display().to_string(),
            detail,
        };
        let content = match fs::read_to_string(path) {
            Ok(c) => c,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(fail(format!("cannot read: {e}"))),
        };

        let marker = "checksum = ";
        let trimmed = content.trim_end_matches('\n');
        let (body, checksum_line) = match trimmed.rfind(&format!("\n{marker}")) {
            Some(pos) => (&content[..pos + 1], &trimmed[pos + 1..]),
            None => return Err(fail("missing checksum line".into())),
        };
        let stored = &checksum_line[marker.len()..];
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        if stored != digest {
            return Err(fail(format!(
                "checksum mismatch: stored {stored}, computed {digest}"
            )));
        }

        let mut lines = body.lines();
        let version = lines.next().unwrap_or_default();
        if version != VERSION_LINE {
            return Err(fail(format!(
                "unsupported version line {version:?} (expected {VERSION_LINE:?})"
            )));
        }
        let mut key = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| fail(format!("missing `{name}` line")))?;
            line.strip_prefix(&format!("{name} = "))
                .map(str::to_string)
                .ok_or_else(|| fail(format!("malformed `{name}` line {line:?}")))
        };
        let scan = key("scan")?;
        let limit: u64 = key("limit")?
            .parse()
            .map_err(|e| fail(format!("bad limit: {e}")))?;
        let segment_width: u64 = key("segment_width")?
            .parse()
            .map_err(|e| fail(format!("bad segment_width: {e}")))?;
        let columns = lines.next().unwrap_or_default();
        if columns != COLUMNS_LINE {
            return Err(fail(format!("unexpected columns line {columns:?}")));
        }

        let mut records = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split(", ").collect();
            if parts.len() != 4 {
                return Err(fail(format!("malformed record {line:?}")));
            }
            let num = |i: usize| -> Result<u64> {
                parts[i]
                    .parse()
                    .map_err(|e| fail(format!("bad field {:?} in record {line:?}: {e}", parts[i])))
            };
            let rec = SegmentRecord {
                index: num(0)?,
                last_prime: num(1)?,
                sum_digits: parts[2].to_string(),
                checked_count: num(3)?,
            };
            // Reject digits that do not parse now rather than at resume time.
            rec.sum()
                .map_err(|e| fail(format!("bad sum in record {line:?}: {e}")))?;
            if rec.index != records.len() as u64 {
                return Err(fail(format!(
                    "records not contiguous: expected index {}, found {}",
                    records.len(),
                    rec.index
                )));
            }
            records.push(rec);
        }

        Ok(Some(CheckpointFile {
            scan,
            limit,
            segment_width,
            records,
        }))
    }

    /// Validates that this checkpoint belongs to the scan about to run.
    pub fn matches(&self, path: &Path, scan: &str, limit: u64, segment_width: u64) -> Result<()> {
        let fail = |detail: String| Error::Checkpoint {
            path: path.display().to_string(),
            detail,
        };
        if self.scan != scan {
            return Err(fail(format!(
                "belongs to scan {:?}, not {scan:?}",
                self.scan
            )));
        }
        if self.limit != limit {
            return Err(fail(format!(
                "was written for limit {}, not {limit}",
                self.limit
            )));
        }
        if self.segment_width != segment_width {
            return Err(fail(format!(
                "was written with segment width {}, not {segment_width}",
                self.segment_width
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CheckpointFile {
        let mut sum = NeumaierSum::new();
        for p in [2u64, 3, 5, 7] {
            sum.add(-(-1.0 / p as f64).ln_1p());
        }
        let mut cp = CheckpointFile::new("verify-mertens", 1_000_000, 250_000);
        cp.records
            .push(SegmentRecord::from_state(0, 249_989, &sum, 22_044));
        sum.add(-(-1.0 / 11.0f64).ln_1p());
        cp.records
            .push(SegmentRecord::from_state(1, 499_979, &sum, 41_538));
        cp
    }

    #[test]
    fn save_load_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let cp = sample();
        cp.save(&path).unwrap();
        let back = CheckpointFile::load(&path).unwrap().unwrap();
        assert_eq!(back, cp);

        // The compensated pair's value survives the decimal round trip far
        // beyond double precision: fifty digits is more than the ~32 the
        // pair carries. (The split into (sum, comp) may re-balance.)
        let mut sum = NeumaierSum::new();
        for p in [2u64, 3, 5, 7] {
            sum.add(-(-1.0 / p as f64).ln_1p());
        }
        let restored = back.records[0].sum().unwrap();
        let diff = (restored.to_high_prec() - sum.to_high_prec()).to_f64().abs();
        assert!(diff < 1e-30, "round-trip drift {diff}");
    }

    #[test]
    fn missing_file_is_none_not_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(CheckpointFile::load(&dir.path().join("absent.ckpt"))
            .unwrap()
            .is_none());
    }

    #[test]
    fn tampered_record_fails_the_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        sample().save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // Flip the last_prime digit of record 0.
        let bad = text.replacen("249989", "249983", 1);
        assert_ne!(bad, text);
        fs::write(&path, bad).unwrap();
        let err = CheckpointFile::load(&path).unwrap_err();
        assert!(matches!(err, Error::Checkpoint { .. }), "{err}");
        assert!(err.to_string().contains("checksum mismatch"), "{err}");
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        sample().save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut = text.lines().take(6).collect::<Vec<_>>().join("\n");
        fs::write(&path, cut).unwrap();
        let err = CheckpointFile::load(&path).unwrap_err();
        assert!(err.to_string().contains("missing checksum"), "{err}");
    }

    #[test]
    fn version_and_shape_problems_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");

        // Wrong version line, checksum made consistent so the version check
        // is what fires.
        let body = "sievekit-checkpoint v9\nscan = verify-mertens\nlimit = 10\n\
                    segment_width = 5\ncolumns = segment_index, last_prime, \
                    sum_neg_log_terms, checked_count\n";
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        fs::write(&path, format!("{body}checksum = {digest}\n")).unwrap();
        let err = CheckpointFile::load(&path).unwrap_err();
        assert!(err.to_string().contains("unsupported version"), "{err}");

        // Non-contiguous records.
        let mut cp = sample();
        cp.records[1].index = 5;
        cp.save(&path).unwrap();
        let err = CheckpointFile::load(&path).unwrap_err();
        assert!(err.to_string().contains("not contiguous"), "{err}");
    }

    #[test]
    fn mismatched_scan_parameters_are_rejected_on_resume() {
        let cp = sample();
        let path = Path::new("x.ckpt");
        assert!(cp.matches(path, "verify-mertens", 1_000_000, 250_000).is_ok());
        for (scan, limit, width) in [
            ("verify-interval", 1_000_000, 250_000),
            ("verify-mertens", 2_000_000, 250_000),
            ("verify-mertens", 1_000_000, 100_000),
        ] {
            let err = cp.matches(path, scan, limit, width).unwrap_err();
            assert!(matches!(err, Error::Checkpoint { .. }), "{err}");
        }
    }
}
