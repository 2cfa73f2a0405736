//! Append-only annotation log: one JSON record per line.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateTag;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiscardReason {
    QualityThinShell,
    QualityMeaningless,
    QualityIncomplete,
    Misclassified,
    PoseErrorNoneCorrect,
    /// Free text, written as `other:<text>`.
    Other(String),
}

/// Coarse grouping used in summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscardGroup {
    Quality,
    Misclassified,
    Pose,
    Other,
}

impl DiscardReason {
    pub fn group(&self) -> DiscardGroup {
        match self {
            DiscardReason::QualityThinShell | DiscardReason::QualityMeaningless | DiscardReason::QualityIncomplete => {
                DiscardGroup::Quality
            }
            DiscardReason::Misclassified => DiscardGroup::Misclassified,
            DiscardReason::PoseErrorNoneCorrect => DiscardGroup::Pose,
            DiscardReason::Other(_) => DiscardGroup::Other,
        }
    }
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscardReason::QualityThinShell => f.write_str("quality-thin-shell"),
            DiscardReason::QualityMeaningless => f.write_str("quality-meaningless"),
            DiscardReason::QualityIncomplete => f.write_str("quality-incomplete"),
            DiscardReason::Misclassified => f.write_str("misclassified"),
            DiscardReason::PoseErrorNoneCorrect => f.write_str("pose-error-none-correct"),
            DiscardReason::Other(text) => write!(f, "other:{text}"),
        }
    }
}

impl FromStr for DiscardReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "quality-thin-shell" => DiscardReason::QualityThinShell,
            "quality-meaningless" => DiscardReason::QualityMeaningless,
            "quality-incomplete" => DiscardReason::QualityIncomplete,
            "misclassified" => DiscardReason::Misclassified,
            "pose-error-none-correct" => DiscardReason::PoseErrorNoneCorrect,
            other => match other.strip_prefix("other:") {
                Some(text) if !text.trim().is_empty() => DiscardReason::Other(text.to_string()),
                _ => return Err(Error::InvalidDecision(format!("unknown discard reason `{s}`"))),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Select(CandidateTag),
    Discard(DiscardReason),
}

impl Decision {
    /// From the wire form: a tag or `discard`, plus a reason iff discarding.
    pub fn parse(decision: &str, reason: Option<&str>) -> Result<Self> {
        match (decision, reason) {
            ("discard", Some(r)) => Ok(Decision::Discard(r.parse()?)),
            ("discard", None) => Err(Error::InvalidDecision("discard needs a reason".into())),
            (tag, None) => tag
                .parse()
                .map(Decision::Select)
                .map_err(|_| Error::InvalidDecision(format!("unknown candidate tag `{tag}`"))),
            (_, Some(_)) => Err(Error::InvalidDecision("a reason is only allowed with discard".into())),
        }
    }
}

/// One annotator decision. Serialized with `decision` as a tag name or
/// `"discard"`, and `discard_reason` present only for discards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnotation", into = "RawAnnotation")]
pub struct AnnotationRecord {
    pub object_id: String,
    pub decision: Decision,
    pub annotator_id: String,
    pub elapsed_ms: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub candidate_set_hash: String,
}

#[derive(Serialize, Deserialize)]
struct RawAnnotation {
    object_id: String,
    decision: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discard_reason: Option<String>,
    annotator_id: String,
    elapsed_ms: u64,
    timestamp: u64,
    candidate_set_hash: String,
}

impl TryFrom<RawAnnotation> for AnnotationRecord {
    type Error = Error;

    fn try_from(r: RawAnnotation) -> Result<Self> {
        Ok(AnnotationRecord {
            decision: Decision::parse(&r.decision, r.discard_reason.as_deref())?,
            object_id: r.object_id,
            annotator_id: r.annotator_id,
            elapsed_ms: r.elapsed_ms,
            timestamp: r.timestamp,
            candidate_set_hash: r.candidate_set_hash,
        })
    }
}

impl From<AnnotationRecord> for RawAnnotation {
    fn from(r: AnnotationRecord) -> Self {
        let (decision, discard_reason) = match r.decision {
            Decision::Select(tag) => (tag.as_str().to_string(), None),
            Decision::Discard(reason) => ("discard".to_string(), Some(reason.to_string())),
        };
        RawAnnotation {
            object_id: r.object_id,
            decision,
            discard_reason,
            annotator_id: r.annotator_id,
            elapsed_ms: r.elapsed_ms,
            timestamp: r.timestamp,
            candidate_set_hash: r.candidate_set_hash,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogContents {
    pub records: Vec<AnnotationRecord>,
    /// 1 when the file ends in an incomplete or unparsable line, else 0.
    pub truncated_tail: usize,
    /// Byte length of the complete records.
    pub valid_len: u64,
}

/// Reads every complete record. A damaged final line (a write cut short)
/// is skipped and counted; damage anywhere else is a parse error.
pub fn read_annotations(path: &Path) -> Result<LogContents> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(LogContents::default()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out = LogContents::default();
    let mut start = 0;
    let mut line_no = 0;
    while start < bytes.len() {
        line_no += 1;
        let end = bytes[start..].iter().position(|&b| b == b'\n').map(|i| start + i);
        let line = &bytes[start..end.unwrap_or(bytes.len())];
        let parsed = std::str::from_utf8(line)
            .map_err(|e| e.to_string())
            .and_then(|s| {
                if s.trim().is_empty() {
                    Ok(None)
                } else {
                    serde_json::from_str::<AnnotationRecord>(s).map(Some).map_err(|e| e.to_string())
                }
            });
        let is_last = end.is_none_or(|e| e + 1 >= bytes.len());
        match (parsed, end) {
            (Ok(rec), Some(e)) => {
                out.records.extend(rec);
                start = e + 1;
                out.valid_len = start as u64;
            }
            (_, None) => {
                out.truncated_tail = 1;
                break;
            }
            (Err(_), Some(_)) if is_last => {
                out.truncated_tail = 1;
                break;
            }
            (Err(msg), Some(_)) => return Err(Error::parse(path, line_no, msg)),
        }
    }
    Ok(out)
}

/// Appends one record as a single whole-line write followed by a sync.
pub fn append_annotation(path: &Path, record: &AnnotationRecord) -> Result<()> {
    let mut log = AnnotationLog::open(path)?.0;
    log.append(record)
}

/// Writer side of the log. Opening cuts off a damaged tail so new records
/// always start on a fresh line.
#[derive(Debug)]
pub struct AnnotationLog {
    path: PathBuf,
    file: File,
}

impl AnnotationLog {
    pub fn open(path: &Path) -> Result<(Self, LogContents)> {
        let contents = read_annotations(path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if contents.truncated_tail > 0 {
            file.set_len(contents.valid_len).map_err(|e| Error::io(path, e))?;
            tracing::warn!(path = %path.display(), "dropped incomplete final record");
        }
        Ok((
            AnnotationLog {
                path: path.to_path_buf(),
                file,
            },
            contents,
        ))
    }

    pub fn append(&mut self, record: &AnnotationRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record).map_err(|e| Error::InvalidInput(e.to_string()))?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Last record per object, in order of first appearance, and the number of
/// records that were superseded.
pub fn latest_per_object(records: &[AnnotationRecord]) -> (Vec<&AnnotationRecord>, usize) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut out: Vec<&AnnotationRecord> = Vec::new();
    let mut duplicates = 0;
    for r in records {
        match index.get(r.object_id.as_str()) {
            Some(&i) => {
                out[i] = r;
                duplicates += 1;
            }
            None => {
                index.insert(&r.object_id, out.len());
                out.push(r);
            }
        }
    }
    (out, duplicates)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationStats {
    /// Objects with a decision (latest record per object).
    pub total: usize,
    pub retained_pct: f64,
    pub discard_quality_pct: f64,
    pub discard_misclassified_pct: f64,
    pub discard_pose_pct: f64,
    pub discard_other_pct: f64,
    /// Share of all decisions that selected each tag.
    pub tag_pct: BTreeMap<String, f64>,
    /// Mean seconds per decision for each annotator, over all records.
    pub annotator_mean_s: BTreeMap<String, f64>,
    pub duplicates: usize,
}

impl AnnotationStats {
    pub fn from_records(records: &[AnnotationRecord]) -> Self {
        let (latest, duplicates) = latest_per_object(records);
        let total = latest.len();
        let pct = |n: usize| if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };

        let mut tags: BTreeMap<String, usize> = CandidateTag::ALL.iter().map(|t| (t.to_string(), 0)).collect();
        let mut groups: HashMap<DiscardGroup, usize> = HashMap::new();
        let mut retained = 0;
        for r in &latest {
            match &r.decision {
                Decision::Select(tag) => {
                    retained += 1;
                    *tags.entry(tag.to_string()).or_default() += 1;
                }
                Decision::Discard(reason) => *groups.entry(reason.group()).or_default() += 1,
            }
        }
        let group = |g| pct(groups.get(&g).copied().unwrap_or(0));

        let mut time: BTreeMap<String, (u64, usize)> = BTreeMap::new();
        for r in records {
            let e = time.entry(r.annotator_id.clone()).or_default();
            e.0 += r.elapsed_ms;
            e.1 += 1;
        }
        AnnotationStats {
            total,
            retained_pct: pct(retained),
            discard_quality_pct: group(DiscardGroup::Quality),
            discard_misclassified_pct: group(DiscardGroup::Misclassified),
            discard_pose_pct: group(DiscardGroup::Pose),
            discard_other_pct: group(DiscardGroup::Other),
            tag_pct: tags.into_iter().map(|(k, n)| (k, pct(n))).collect(),
            annotator_mean_s: time
                .into_iter()
                .map(|(k, (ms, n))| (k, ms as f64 / 1000.0 / n as f64))
                .collect(),
            duplicates,
        }
    }
}
