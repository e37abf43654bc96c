//! Workspaces: labeled record files, character pools with provenance, the
//! write-ahead info log and the commands that act on them.
//!
//! A workspace is a directory. For a group `G` and prime `p` it holds
//!
//! * `G.tbl`: the ordinary table in MOC format,
//! * `G.p`: the basic set state,
//! * `G.p.bras`: Brauer characters over BS₀,
//! * `G.p.proj`: projective characters over Irr(B),
//! * `G.p.info`: the log of every command that changed the state.
//!
//! Replaying the log on an empty directory rebuilds the first four files
//! byte for byte.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use num_traits::{One, Zero};

use crate::basis::{certify_brauer_basic, certify_pair, hat_matrix, BrauerVerdict, PairVerdict};
use crate::charops::{
    induce, inner_product, is_virtual_projective, restrict, symmetrize, tensor, ClassFunction, FusionMap,
    SymmetrizationData,
};
use crate::chartable::MocTable;
use crate::error::{Error, Result};
use crate::exactnum::{legacy_decode, legacy_encode, BigInt, LegacyRecord};
use crate::ilp::{gomory_solve, IlpOutcome, IlpProblem, DEFAULT_PIVOT_LIMIT};
use crate::improve::{fong_parity, parity_event, ImproveContext, PartVerdict, ProofEvent, SplitOutcome};
use crate::intlin::IntMatrix;

pub const LABEL_BRAUER: u16 = 30500;
pub const LABEL_RELATIONS: u16 = 30550;
pub const LABEL_PROJECTIVES: u16 = 30700;
pub const LABEL_CLASS_FUNCTIONS: u16 = 30900;

pub const LABEL_HEADER: u16 = 30000;
pub const LABEL_BLOCK: u16 = 30100;
pub const LABEL_BS0: u16 = 30110;
pub const LABEL_PAIR: u16 = 30600;
pub const LABEL_PIMS: u16 = 30610;
pub const LABEL_IRREDUCIBLES: u16 = 30620;
pub const LABEL_PROVENANCE: u16 = 30800;

pub const LABEL_RANGE: std::ops::RangeInclusive<u16> = 30000..=30999;

// ---------------------------------------------------------------------------
// labeled records

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Codec {
    #[default]
    Text,
    Legacy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Matrix(IntMatrix),
    Lines(Vec<String>),
    /// A record whose label this version does not know, kept verbatim.
    Opaque(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRecord {
    pub label: u16,
    pub tags: Vec<String>,
    pub payload: Payload,
}

fn known_label(l: u16) -> bool {
    matches!(
        l,
        LABEL_HEADER
            | LABEL_BLOCK
            | LABEL_BS0
            | LABEL_BRAUER
            | LABEL_RELATIONS
            | LABEL_PAIR
            | LABEL_PIMS
            | LABEL_IRREDUCIBLES
            | LABEL_PROJECTIVES
            | LABEL_PROVENANCE
            | LABEL_CLASS_FUNCTIONS
    )
}

fn fmt_int(v: &BigInt, codec: Codec) -> String {
    match codec {
        Codec::Text => v.to_string(),
        Codec::Legacy => legacy_encode(v).to_text(),
    }
}

fn parse_int(tok: &str, codec: Codec) -> Result<BigInt> {
    match codec {
        Codec::Text => tok.parse().map_err(|_| Error::Format(format!("bad integer `{tok}`"))),
        Codec::Legacy => legacy_decode(&LegacyRecord::parse(tok)?),
    }
}

impl LabeledRecord {
    pub fn matrix(label: u16, m: IntMatrix) -> Self {
        LabeledRecord { label, tags: vec![], payload: Payload::Matrix(m) }
    }

    pub fn lines(label: u16, lines: Vec<String>) -> Self {
        LabeledRecord { label, tags: vec![], payload: Payload::Lines(lines) }
    }

    pub fn with_tags(mut self, tags: Vec<String>) -> Self {
        self.tags = tags;
        self
    }

    fn write(&self, out: &mut String, codec: Codec) {
        let tags = if self.tags.is_empty() { String::new() } else { format!(" {}", self.tags.join(" ")) };
        match &self.payload {
            Payload::Matrix(m) => {
                let c = if codec == Codec::Legacy { "legacy" } else { "text" };
                let _ = writeln!(out, "@{} matrix {} {} {c}{tags}", self.label, m.nrows(), m.ncols());
                for i in 0..m.nrows() {
                    let row: Vec<String> = m.row(i).iter().map(|v| fmt_int(v, codec)).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
            Payload::Lines(l) => {
                let _ = writeln!(out, "@{} lines {}{tags}", self.label, l.len());
                for x in l {
                    let _ = writeln!(out, "{x}");
                }
            }
            Payload::Opaque(l) => {
                for x in l {
                    let _ = writeln!(out, "{x}");
                }
            }
        }
    }
}

/// A whole record file, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecordFile {
    pub records: Vec<LabeledRecord>,
    /// Labels skipped while reading because they are unknown.
    pub warnings: Vec<String>,
}

impl RecordFile {
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let mut out = RecordFile::default();
        let mut k = 0;
        while k < lines.len() {
            let line = lines[k].trim_end();
            if line.is_empty() || line.starts_with('#') {
                k += 1;
                continue;
            }
            let head: Vec<&str> = line
                .strip_prefix('@')
                .ok_or_else(|| Error::Format(format!("line {}: expected a record header", k + 1)))?
                .split_whitespace()
                .collect();
            let label: u16 = head
                .first()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("line {}: bad label", k + 1)))?;
            if !LABEL_RANGE.contains(&label) {
                return Err(Error::Format(format!("label {label} outside 30000..=30999")));
            }
            let count = |t: Option<&&str>| -> Result<usize> {
                t.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format(format!("line {}: bad size", k + 1)))
            };
            let (body_len, tag_start) = match head.get(1).copied() {
                Some("matrix") => (count(head.get(2))?, 5),
                Some("lines") => (count(head.get(2))?, 3),
                _ => return Err(Error::Format(format!("line {}: unknown record kind", k + 1))),
            };
            if k + 1 + body_len > lines.len() {
                return Err(Error::Format(format!("record {label} is truncated")));
            }
            let body = &lines[k + 1..k + 1 + body_len];
            let tags: Vec<String> = head.iter().skip(tag_start).map(|s| s.to_string()).collect();
            if !known_label(label) {
                out.warnings.push(format!("unknown label {label} preserved"));
                out.records.push(LabeledRecord {
                    label,
                    tags: vec![],
                    payload: Payload::Opaque(lines[k..k + 1 + body_len].iter().map(|s| s.to_string()).collect()),
                });
            } else if head[1] == "matrix" {
                let cols = count(head.get(3))?;
                let codec = match head.get(4).copied() {
                    Some("text") => Codec::Text,
                    Some("legacy") => Codec::Legacy,
                    _ => return Err(Error::Format(format!("record {label}: unknown codec"))),
                };
                let mut rows = Vec::with_capacity(body_len);
                for l in body {
                    let row = l.split_whitespace().map(|t| parse_int(t, codec)).collect::<Result<Vec<_>>>()?;
                    if row.len() != cols {
                        return Err(Error::Format(format!("record {label}: row of length {}", row.len())));
                    }
                    rows.push(row);
                }
                out.records.push(LabeledRecord {
                    label,
                    tags,
                    payload: Payload::Matrix(IntMatrix::from_rows_with_cols(rows, cols)),
                });
            } else {
                out.records.push(LabeledRecord {
                    label,
                    tags,
                    payload: Payload::Lines(body.iter().map(|s| s.to_string()).collect()),
                });
            }
            k += 1 + body_len;
        }
        Ok(out)
    }

    pub fn to_text(&self, codec: Codec) -> String {
        let mut s = String::new();
        for r in &self.records {
            r.write(&mut s, codec);
        }
        s
    }

    pub fn get(&self, label: u16) -> Result<&LabeledRecord> {
        self.records
            .iter()
            .find(|r| r.label == label)
            .ok_or_else(|| Error::NotFound(format!("no record with label {label}")))
    }

    pub fn matrix(&self, label: u16) -> Result<&IntMatrix> {
        match &self.get(label)?.payload {
            Payload::Matrix(m) => Ok(m),
            _ => Err(Error::Format(format!("record {label} is not a matrix"))),
        }
    }

    pub fn lines(&self, label: u16) -> Result<&[String]> {
        match &self.get(label)?.payload {
            Payload::Lines(l) => Ok(l),
            _ => Err(Error::Format(format!("record {label} is not text"))),
        }
    }

    /// Replaces the record with this label, or appends it.
    pub fn put(&mut self, rec: LabeledRecord) {
        match self.records.iter_mut().find(|r| r.label == rec.label) {
            Some(r) => *r = rec,
            None => self.records.push(rec),
        }
    }
}

// ---------------------------------------------------------------------------
// pools

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub id: String,
    pub origin: String,
    pub parents: Vec<String>,
    pub coeffs: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    pub prefix: char,
    pub width: usize,
    pub entries: Vec<PoolEntry>,
    /// Table coordinates of each entry, when a table is present.
    pub values: Option<IntMatrix>,
    pub extra: Vec<LabeledRecord>,
}

impl Pool {
    fn new(prefix: char, width: usize) -> Self {
        Pool { prefix, width, entries: vec![], values: None, extra: vec![] }
    }

    pub fn get(&self, id: &str) -> Result<&PoolEntry> {
        self.entries.iter().find(|e| e.id == id).ok_or_else(|| Error::NotFound(format!("no character `{id}`")))
    }

    /// Adds a character unless an equal one is present; returns its id and
    /// whether it is new.
    fn add(&mut self, coeffs: Vec<BigInt>, origin: String, parents: Vec<String>) -> (String, bool) {
        if let Some(e) = self.entries.iter().find(|e| e.coeffs == coeffs) {
            return (e.id.clone(), false);
        }
        let id = format!("{}{}", self.prefix, self.entries.len() + 1);
        self.entries.push(PoolEntry { id: id.clone(), origin, parents, coeffs });
        (id, true)
    }

    fn to_records(&self, main: u16) -> RecordFile {
        let m = IntMatrix::from_rows_with_cols(self.entries.iter().map(|e| e.coeffs.clone()).collect(), self.width);
        let ids: Vec<String> = self.entries.iter().map(|e| e.id.clone()).collect();
        let prov = self.entries.iter().map(|e| format!("{} <{}> {}", e.id, e.parents.join(","), e.origin)).collect();
        let mut f = RecordFile::default();
        f.records.push(LabeledRecord::matrix(main, m).with_tags(ids));
        f.records.push(LabeledRecord::lines(LABEL_PROVENANCE, prov));
        if let Some(v) = &self.values {
            f.records.push(LabeledRecord::matrix(LABEL_CLASS_FUNCTIONS, v.clone()));
        }
        f.records.extend(self.extra.iter().cloned());
        f
    }

    fn from_records(f: RecordFile, main: u16, prefix: char) -> Result<Self> {
        let rec = f.get(main)?.clone();
        let m = match &rec.payload {
            Payload::Matrix(m) => m,
            _ => return Err(Error::Format("pool record is not a matrix".into())),
        };
        let prov = f.lines(LABEL_PROVENANCE)?.to_vec();
        if prov.len() != m.nrows() || rec.tags.len() != m.nrows() {
            return Err(Error::Format("pool provenance does not match its rows".into()));
        }
        let mut entries = Vec::new();
        for (k, line) in prov.iter().enumerate() {
            let (id, rest) = line.split_once(' ').ok_or_else(|| Error::Format("bad provenance line".into()))?;
            let rest = rest.strip_prefix('<').ok_or_else(|| Error::Format("bad provenance line".into()))?;
            let (parents, origin) = rest.split_once("> ").ok_or_else(|| Error::Format("bad provenance line".into()))?;
            if id != rec.tags[k] {
                return Err(Error::Format(format!("provenance for `{id}` out of order")));
            }
            entries.push(PoolEntry {
                id: id.to_string(),
                origin: origin.to_string(),
                parents: parents.split(',').filter(|s| !s.is_empty()).map(String::from).collect(),
                coeffs: m.row(k).to_vec(),
            });
        }
        let values = f.matrix(LABEL_CLASS_FUNCTIONS).ok().cloned();
        let extra = f.records.into_iter().filter(|r| !known_label(r.label)).collect();
        Ok(Pool { prefix, width: m.ncols(), entries, values, extra })
    }
}

// ---------------------------------------------------------------------------
// basic set state

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub group: String,
    pub prime: u64,
    pub codec: Codec,
    /// Without a table the basic pair was given as matrices.
    pub table_mode: bool,
    pub block: Option<usize>,
    /// Rows of the ordinary table in the block.
    pub block_rows: Vec<usize>,
    /// Positions in `block_rows` of BS₀.
    pub bs0: Vec<usize>,
    /// Relations: restricted block characters over BS₀.
    pub s: Option<IntMatrix>,
    pub bs: Vec<String>,
    pub ps: Vec<String>,
    pub u: Option<IntMatrix>,
    pub pims: BTreeSet<usize>,
    pub irreducibles: BTreeSet<usize>,
    pub pruned: BTreeSet<String>,
    pub extra: Vec<LabeledRecord>,
}

fn row_matrix<T: Clone + Into<BigInt>>(v: &[T]) -> IntMatrix {
    IntMatrix::from_rows_with_cols(vec![v.iter().cloned().map(Into::into).collect()], v.len())
}

fn usizes(m: &IntMatrix) -> Result<Vec<usize>> {
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    m.row(0).iter().map(|v| usize::try_from(v).map_err(|_| Error::Format("bad index".into()))).collect()
}

impl State {
    fn new(group: &str, prime: u64, codec: Codec) -> Self {
        State {
            group: group.to_string(),
            prime,
            codec,
            table_mode: true,
            block: None,
            block_rows: vec![],
            bs0: vec![],
            s: None,
            bs: vec![],
            ps: vec![],
            u: None,
            pims: BTreeSet::new(),
            irreducibles: BTreeSet::new(),
            pruned: BTreeSet::new(),
            extra: vec![],
        }
    }

    fn to_records(&self) -> RecordFile {
        let mut f = RecordFile::default();
        let mode = if self.table_mode { "table" } else { "matrices" };
        let codec = if self.codec == Codec::Legacy { "legacy" } else { "text" };
        f.records.push(LabeledRecord::lines(
            LABEL_HEADER,
            vec![
                format!("group {}", self.group),
                format!("prime {}", self.prime),
                format!("mode {mode}"),
                format!("codec {codec}"),
                format!("pruned {}", self.pruned.iter().cloned().collect::<Vec<_>>().join(" ")),
            ],
        ));
        if let Some(b) = self.block {
            f.records.push(LabeledRecord::matrix(LABEL_BLOCK, row_matrix(&self.block_rows)).with_tags(vec![b.to_string()]));
            f.records.push(LabeledRecord::matrix(LABEL_BS0, row_matrix(&self.bs0)));
        }
        if let Some(s) = &self.s {
            f.records.push(LabeledRecord::matrix(LABEL_RELATIONS, s.clone()));
        }
        if let Some(u) = &self.u {
            let mut tags = vec!["bs".to_string()];
            tags.extend(self.bs.iter().cloned());
            tags.push("ps".into());
            tags.extend(self.ps.iter().cloned());
            f.records.push(LabeledRecord::matrix(LABEL_PAIR, u.clone()).with_tags(tags));
            let p: Vec<usize> = self.pims.iter().copied().collect();
            let i: Vec<usize> = self.irreducibles.iter().copied().collect();
            f.records.push(LabeledRecord::matrix(LABEL_PIMS, row_matrix(&p)));
            f.records.push(LabeledRecord::matrix(LABEL_IRREDUCIBLES, row_matrix(&i)));
        }
        f.records.extend(self.extra.iter().cloned());
        f
    }

    fn from_records(f: RecordFile) -> Result<Self> {
        let head = f.lines(LABEL_HEADER)?;
        let val = |key: &str| -> Result<String> {
            head.iter()
                .find_map(|l| l.strip_prefix(key).map(|r| r.trim().to_string()))
                .ok_or_else(|| Error::Format(format!("state header lacks `{key}`")))
        };
        let prime = val("prime")?.parse().map_err(|_| Error::Format("bad prime".into()))?;
        let codec = if val("codec")? == "legacy" { Codec::Legacy } else { Codec::Text };
        let mut st = State::new(&val("group")?, prime, codec);
        st.table_mode = val("mode")? == "table";
        st.pruned = val("pruned")?.split_whitespace().map(String::from).collect();
        if let Ok(r) = f.get(LABEL_BLOCK) {
            st.block = Some(r.tags.first().and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format("bad block".into()))?);
            st.block_rows = usizes(f.matrix(LABEL_BLOCK)?)?;
            st.bs0 = usizes(f.matrix(LABEL_BS0)?)?;
        }
        st.s = f.matrix(LABEL_RELATIONS).ok().cloned();
        if let Ok(r) = f.get(LABEL_PAIR) {
            let split = r.tags.iter().position(|t| t == "ps").ok_or_else(|| Error::Format("bad pair tags".into()))?;
            st.bs = r.tags[1..split].to_vec();
            st.ps = r.tags[split + 1..].to_vec();
            st.u = Some(f.matrix(LABEL_PAIR)?.clone());
            st.pims = usizes(f.matrix(LABEL_PIMS)?)?.into_iter().collect();
            st.irreducibles = usizes(f.matrix(LABEL_IRREDUCIBLES)?)?.into_iter().collect();
        }
        st.extra = f.records.into_iter().filter(|r| !known_label(r.label)).collect();
        Ok(st)
    }
}

// ---------------------------------------------------------------------------
// commands

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImproveCommand {
    PimTest { column: Option<usize> },
    Subtract { pim: usize, from: String },
    Triangular,
    Split { column: usize },
    Prune,
    Parity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Init { legacy: bool },
    /// Stores the table text as `<group>.tbl`.
    ImportTable { group: String, text: String },
    Blocks,
    BasicSet { block: usize, rows: Vec<String> },
    /// A basic pair given directly: `⟨BS, PS⟩`, further Brauer characters
    /// over BS and further projectives over PS.
    BasicSetMatrices { u: String, brauer: Option<String>, projective: Option<String>, names: Vec<String> },
    Certify { bs: Vec<String>, ps: Vec<String> },
    Induce { from: String, table: String, fusion: Vec<String>, operand: String },
    Restrict { from: String, table: String, fusion: Vec<String>, operand: String },
    Tensor { a: String, b: String },
    Symmetrize { partition: Vec<u64>, operand: String },
    Improve(ImproveCommand),
    IlpSolve { problem: String },
    Atoms,
    Status,
    Trace { id: String },
}

fn list(v: &[String]) -> String {
    v.join(",")
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').filter(|t| !t.is_empty()).map(String::from).collect()
}

impl Command {
    pub fn mutates(&self) -> bool {
        !matches!(self, Command::Blocks | Command::IlpSolve { .. } | Command::Status | Command::Trace { .. })
    }

    /// Canonical words for the log; texts read from files become numbered
    /// attachments.
    pub fn to_words(&self) -> (Vec<String>, Vec<String>) {
        let w = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mut att = Vec::new();
        let mut attach = |t: &str| {
            att.push(t.to_string());
            format!("@{}", att.len())
        };
        let words = match self {
            Command::Init { legacy } => {
                if *legacy {
                    w(&["init", "--legacy"])
                } else {
                    w(&["init"])
                }
            }
            Command::ImportTable { group, text } => w(&["import-table", group, &attach(text)]),
            Command::Blocks => w(&["blocks"]),
            Command::BasicSet { block, rows } => w(&["basicset", "--block", &block.to_string(), "--rows", &list(rows)]),
            Command::BasicSetMatrices { u, brauer, projective, names } => {
                let mut v = w(&["basicset", "--matrices", &attach(u)]);
                if let Some(b) = brauer {
                    v.extend(w(&["--brauer", &attach(b)]));
                }
                if let Some(p) = projective {
                    v.extend(w(&["--projective", &attach(p)]));
                }
                if !names.is_empty() {
                    v.extend(w(&["--names", &list(names)]));
                }
                v
            }
            Command::Certify { bs, ps } => w(&["certify", "--bs", &list(bs), "--ps", &list(ps)]),
            Command::Induce { from, table, fusion, operand } => {
                w(&["induce", "--from", from, "--table", &attach(table), "--fusion", &list(fusion), operand])
            }
            Command::Restrict { from, table, fusion, operand } => {
                w(&["restrict", "--from", from, "--table", &attach(table), "--fusion", &list(fusion), operand])
            }
            Command::Tensor { a, b } => w(&["tensor", a, b]),
            Command::Symmetrize { partition, operand } => {
                let p: Vec<String> = partition.iter().map(|x| x.to_string()).collect();
                w(&["symmetrize", "--partition", &list(&p), operand])
            }
            Command::Improve(c) => match c {
                ImproveCommand::PimTest { column: None } => w(&["improve", "pimtest"]),
                ImproveCommand::PimTest { column: Some(j) } => {
                    w(&["improve", "pimtest", "--column", &(j + 1).to_string()])
                }
                ImproveCommand::Subtract { pim, from } => {
                    w(&["improve", "subtract", "--pim", &(pim + 1).to_string(), "--from", from])
                }
                ImproveCommand::Triangular => w(&["improve", "triangular"]),
                ImproveCommand::Split { column } => w(&["improve", "split", "--column", &(column + 1).to_string()]),
                ImproveCommand::Prune => w(&["improve", "prune"]),
                ImproveCommand::Parity => w(&["improve", "parity"]),
            },
            Command::IlpSolve { problem } => w(&["ilp", "solve", &attach(problem)]),
            Command::Atoms => w(&["atoms"]),
            Command::Status => w(&["status"]),
            Command::Trace { id } => w(&["trace", id]),
        };
        (words, att)
    }

    pub fn from_words(words: &[String], attachments: &[String]) -> Result<Self> {
        let bad = || Error::Format(format!("cannot parse command `{}`", words.join(" ")));
        let get_att = |t: &str| -> Result<String> {
            let k: usize = t.strip_prefix('@').and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            attachments.get(k.wrapping_sub(1)).cloned().ok_or_else(bad)
        };
        let opt = |key: &str| -> Option<&str> {
            words.iter().position(|w| w == key).and_then(|k| words.get(k + 1)).map(|s| s.as_str())
        };
        let req = |key: &str| opt(key).ok_or_else(bad);
        let col = |key: &str| -> Result<usize> {
            req(key)?.parse::<usize>().ok().filter(|&v| v > 0).map(|v| v - 1).ok_or_else(bad)
        };
        let positional = |k: usize| words.get(k).cloned().ok_or_else(bad);
        let last = || words.last().cloned().ok_or_else(bad);
        let first = words.first().ok_or_else(bad)?;
        Ok(match first.as_str() {
            "init" => Command::Init { legacy: words.iter().any(|w| w == "--legacy") },
            "import-table" => Command::ImportTable { group: positional(1)?, text: get_att(&positional(2)?)? },
            "blocks" => Command::Blocks,
            "basicset" if opt("--matrices").is_some() => Command::BasicSetMatrices {
                u: get_att(req("--matrices")?)?,
                brauer: opt("--brauer").map(get_att).transpose()?,
                projective: opt("--projective").map(get_att).transpose()?,
                names: opt("--names").map(split_list).unwrap_or_default(),
            },
            "basicset" => Command::BasicSet {
                block: req("--block")?.parse().map_err(|_| bad())?,
                rows: split_list(req("--rows")?),
            },
            "certify" => Command::Certify { bs: split_list(req("--bs")?), ps: split_list(req("--ps")?) },
            "induce" | "restrict" => {
                let from = req("--from")?.to_string();
                let table = get_att(req("--table")?)?;
                let fusion = split_list(req("--fusion")?);
                let operand = last()?;
                if first == "induce" {
                    Command::Induce { from, table, fusion, operand }
                } else {
                    Command::Restrict { from, table, fusion, operand }
                }
            }
            "tensor" => Command::Tensor { a: positional(1)?, b: positional(2)? },
            "symmetrize" => Command::Symmetrize {
                partition: split_list(req("--partition")?)
                    .iter()
                    .map(|x| x.parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
                operand: last()?,
            },
            "improve" => Command::Improve(match words.get(1).map(|s| s.as_str()) {
                Some("pimtest") => ImproveCommand::PimTest { column: opt("--column").map(|_| col("--column")).transpose()? },
                Some("subtract") => ImproveCommand::Subtract { pim: col("--pim")?, from: req("--from")?.to_string() },
                Some("triangular") => ImproveCommand::Triangular,
                Some("split") => ImproveCommand::Split { column: col("--column")? },
                Some("prune") => ImproveCommand::Prune,
                Some("parity") => ImproveCommand::Parity,
                _ => return Err(bad()),
            }),
            "ilp" => Command::IlpSolve { problem: get_att(&positional(2)?)? },
            "atoms" => Command::Atoms,
            "status" => Command::Status,
            "trace" => Command::Trace { id: positional(1)? },
            _ => return Err(bad()),
        })
    }
}

/// What a command printed and proved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub events: Vec<ProofEvent>,
}

impl Outcome {
    fn say(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

// ---------------------------------------------------------------------------
// the workspace

#[derive(Debug, Clone)]
pub struct Workspace {
    pub root: PathBuf,
    pub group: String,
    pub prime: u64,
}

/// Holds the advisory lock of a workspace until dropped.
struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub number: usize,
    pub time: u64,
    pub words: Vec<String>,
    pub attachments: Vec<String>,
    pub lines: Vec<String>,
    pub events: Vec<ProofEvent>,
    pub committed: bool,
    pub aborted: Option<String>,
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}tmp",
        path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
    ));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn staged(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".new");
    PathBuf::from(s)
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>, group: &str, prime: u64) -> Result<Self> {
        if group.is_empty() || group.contains(['/', '\\', ' ']) {
            return Err(Error::Domain(format!("bad group name `{group}`")));
        }
        if prime < 2 {
            return Err(Error::Domain(format!("{prime} is not a prime")));
        }
        Ok(Workspace { root: root.into(), group: group.to_string(), prime })
    }

    fn file(&self, ext: &str) -> PathBuf {
        self.root.join(format!("{}.{}{ext}", self.group, self.prime))
    }

    pub fn state_path(&self) -> PathBuf {
        self.file("")
    }

    pub fn brauer_path(&self) -> PathBuf {
        self.file(".bras")
    }

    pub fn projective_path(&self) -> PathBuf {
        self.file(".proj")
    }

    pub fn info_path(&self) -> PathBuf {
        self.file(".info")
    }

    pub fn table_path(&self, group: &str) -> PathBuf {
        self.root.join(format!("{group}.tbl"))
    }

    fn lock_path(&self) -> PathBuf {
        self.file(".lock")
    }

    pub fn is_initialized(&self) -> bool {
        self.state_path().exists()
    }

    /// The files whose contents make up the state, in a fixed order.
    pub fn state_files(&self) -> Vec<PathBuf> {
        vec![self.table_path(&self.group), self.state_path(), self.brauer_path(), self.projective_path()]
    }

    fn lock(&self) -> Result<LockGuard> {
        fs::create_dir_all(&self.root)?;
        let p = self.lock_path();
        match OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard(p))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Io(format!(
                "workspace is locked by another writer ({} exists)",
                p.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes one record into a file of the workspace, replacing a record
    /// with the same label.
    pub fn ws_write(&self, path: &Path, rec: LabeledRecord, codec: Codec) -> Result<()> {
        if !self.is_initialized() {
            return Err(Error::Precondition("workspace is not initialized".into()));
        }
        if !LABEL_RANGE.contains(&rec.label) {
            return Err(Error::Domain(format!("label {} outside 30000..=30999", rec.label)));
        }
        let _g = self.lock()?;
        let mut f = match fs::read_to_string(path) {
            Ok(t) => RecordFile::parse(&t)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => RecordFile::default(),
            Err(e) => return Err(e.into()),
        };
        f.put(rec);
        write_atomic(path, &f.to_text(codec))
    }

    pub fn ws_read(&self, path: &Path, label: u16) -> Result<LabeledRecord> {
        let text = fs::read_to_string(path)?;
        Ok(RecordFile::parse(&text)?.get(label)?.clone())
    }

    fn read_records(&self, path: &Path) -> Result<RecordFile> {
        RecordFile::parse(&fs::read_to_string(path)?)
    }

    fn load(&self) -> Result<(State, Pool, Pool)> {
        if !self.is_initialized() {
            return Err(Error::Precondition(format!(
                "no workspace for {} mod {} in {}",
                self.group,
                self.prime,
                self.root.display()
            )));
        }
        let st = State::from_records(self.read_records(&self.state_path())?)?;
        let bras = Pool::from_records(self.read_records(&self.brauer_path())?, LABEL_BRAUER, 'B')?;
        let proj = Pool::from_records(self.read_records(&self.projective_path())?, LABEL_PROJECTIVES, 'P')?;
        Ok((st, bras, proj))
    }

    pub fn state(&self) -> Result<State> {
        Ok(self.load()?.0)
    }

    pub fn pools(&self) -> Result<(Pool, Pool)> {
        let (_, b, p) = self.load()?;
        Ok((b, p))
    }

    pub fn table(&self) -> Result<Arc<MocTable>> {
        self.table_of(&self.group)
    }

    fn table_of(&self, group: &str) -> Result<Arc<MocTable>> {
        let p = self.table_path(group);
        let text = fs::read_to_string(&p)
            .map_err(|_| Error::Precondition(format!("no table for {group}; run import-table first")))?;
        Ok(Arc::new(MocTable::parse(&text)?))
    }

    /// Finishes or discards a command interrupted between staging and
    /// renaming.
    fn recover(&self) -> Result<()> {
        let staged_files: Vec<PathBuf> =
            self.state_files().iter().map(|p| staged(p)).filter(|p| p.exists()).collect();
        if staged_files.is_empty() {
            return Ok(());
        }
        let committed = self.read_log()?.last().map_or(false, |e| e.committed);
        for s in staged_files {
            if committed {
                let target = PathBuf::from(s.to_string_lossy().trim_end_matches(".new").to_string());
                fs::rename(&s, target)?;
            } else {
                fs::remove_file(&s)?;
            }
        }
        Ok(())
    }

    pub fn read_log(&self) -> Result<Vec<LogEntry>> {
        match fs::read_to_string(self.info_path()) {
            Ok(t) => parse_log(&t),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(vec![]),
            Err(e) => Err(e.into()),
        }
    }

    fn append_log(&self, text: &str) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.info_path())?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        Ok(())
    }

    /// Runs one command. Commands that change the state are logged before
    /// anything is written, and their effect becomes visible atomically.
    pub fn run_command(&self, cmd: &Command) -> Result<Outcome> {
        if !cmd.mutates() {
            let (st, bras, proj) = self.load()?;
            let mut out = Outcome::default();
            let mut run = Run { ws: self, st, bras, proj, out: &mut out };
            run.read_only(cmd)?;
            return Ok(out);
        }
        fs::create_dir_all(&self.root)?;
        let _g = self.lock()?;
        self.recover()?;
        let (words, atts) = cmd.to_words();
        let number = self.read_log()?.len() + 1;
        let time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut head = format!("entry {number} {time}\ncommand {}\n", words.join(" "));
        for a in &atts {
            let _ = writeln!(head, "attach {}", a.lines().count());
            for l in a.lines() {
                let _ = writeln!(head, "{l}");
            }
        }
        head.push_str("begin\n");
        let is_init = matches!(cmd, Command::Init { .. });
        if is_init && self.is_initialized() {
            return Err(Error::Precondition("workspace already initialized".into()));
        }
        self.append_log(&head)?;
        let result = self.execute(cmd);
        let (out, files) = match result {
            Ok(x) => x,
            Err(e) => {
                self.append_log(&format!("abort {}\n", e.to_string().replace('\n', " ")))?;
                return Err(e);
            }
        };
        for (path, text) in &files {
            let s = staged(path);
            let mut f = File::create(&s)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        let mut tail = String::new();
        for l in &out.lines {
            let _ = writeln!(tail, "line {l}");
        }
        for e in &out.events {
            tail.push_str(&e.to_text());
        }
        tail.push_str("commit\n");
        self.append_log(&tail)?;
        for (path, _) in &files {
            fs::rename(staged(path), path)?;
        }
        Ok(out)
    }

    /// Computes the outcome and the new file contents without touching the
    /// state files.
    fn execute(&self, cmd: &Command) -> Result<(Outcome, Vec<(PathBuf, String)>)> {
        let mut out = Outcome::default();
        if let Command::Init { legacy } = cmd {
            let codec = if *legacy { Codec::Legacy } else { Codec::Text };
            let st = State::new(&self.group, self.prime, codec);
            let run = Run { ws: self, st, bras: Pool::new('B', 0), proj: Pool::new('P', 0), out: &mut out };
            let mut files = run.files();
            files.retain(|(p, _)| *p != self.table_path(&self.group));
            out.say(format!("initialized workspace for {} mod {}", self.group, self.prime));
            return Ok((out, files));
        }
        if let Command::ImportTable { group, text } = cmd {
            if group != &self.group {
                return Err(Error::Domain(format!("table for {group} imported into the workspace of {}", self.group)));
            }
            let t = MocTable::parse(text)?;
            let (st, _, _) = self.load()?;
            if st.block.is_some() || st.u.is_some() {
                return Err(Error::Precondition("a basic set is already chosen".into()));
            }
            out.say(format!("imported table {} with {} characters", t.name, t.nrows()));
            return Ok((out, vec![(self.table_path(group), text.clone())]));
        }
        let (st, bras, proj) = self.load()?;
        let mut run = Run { ws: self, st, bras, proj, out: &mut out };
        run.mutate(cmd)?;
        let files = run.files();
        let files = files
            .into_iter()
            .filter(|(p, t)| fs::read_to_string(p).map_or(true, |old| old != *t))
            .collect();
        Ok((out, files))
    }
}

fn parse_log(text: &str) -> Result<Vec<LogEntry>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out: Vec<LogEntry> = Vec::new();
    let mut k = 0;
    let bad = |k: usize| Error::Format(format!("info log line {}: unexpected content", k + 1));
    while k < lines.len() {
        let l = lines[k];
        if let Some(rest) = l.strip_prefix("entry ") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            let number = f.first().and_then(|x| x.parse().ok()).ok_or_else(|| bad(k))?;
            let time = f.get(1).and_then(|x| x.parse().ok()).ok_or_else(|| bad(k))?;
            let words = lines
                .get(k + 1)
                .and_then(|l| l.strip_prefix("command "))
                .ok_or_else(|| bad(k + 1))?
                .split_whitespace()
                .map(String::from)
                .collect();
            out.push(LogEntry {
                number,
                time,
                words,
                attachments: vec![],
                lines: vec![],
                events: vec![],
                committed: false,
                aborted: None,
            });
            k += 2;
        } else if let Some(n) = l.strip_prefix("attach ") {
            let n: usize = n.parse().map_err(|_| bad(k))?;
            let e = out.last_mut().ok_or_else(|| bad(k))?;
            if k + 1 + n > lines.len() {
                return Err(bad(k));
            }
            let mut s = lines[k + 1..k + 1 + n].join("\n");
            s.push('\n');
            e.attachments.push(s);
            k += 1 + n;
        } else if l == "begin" {
            k += 1;
        } else if let Some(t) = l.strip_prefix("line ") {
            out.last_mut().ok_or_else(|| bad(k))?.lines.push(t.to_string());
            k += 1;
        } else if l.starts_with("event ") {
            let end = (k..lines.len()).find(|&j| lines[j] == "end").ok_or_else(|| bad(k))?;
            let ev = ProofEvent::parse(&lines[k..=end].join("\n"))?;
            out.last_mut().ok_or_else(|| bad(k))?.events.push(ev);
            k = end + 1;
        } else if l == "commit" {
            out.last_mut().ok_or_else(|| bad(k))?.committed = true;
            k += 1;
        } else if let Some(m) = l.strip_prefix("abort") {
            out.last_mut().ok_or_else(|| bad(k))?.aborted = Some(m.trim().to_string());
            k += 1;
        } else if l.is_empty() {
            k += 1;
        } else {
            return Err(bad(k));
        }
    }
    Ok(out)
}

/// Re-runs the committed commands of an info log in `target`, which must not
/// be initialized yet.
pub fn replay(log: &str, target: &Workspace) -> Result<Vec<Outcome>> {
    if target.is_initialized() {
        return Err(Error::Precondition("replay needs a fresh workspace".into()));
    }
    let mut outs = Vec::new();
    for e in parse_log(log)?.into_iter().filter(|e| e.committed) {
        let cmd = Command::from_words(&e.words, &e.attachments)?;
        outs.push(target.run_command(&cmd)?);
    }
    Ok(outs)
}

/// Reads the state files of a workspace, for byte comparisons.
pub fn snapshot(ws: &Workspace) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for p in ws.state_files() {
        let name = p.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default();
        match fs::read(&p) {
            Ok(b) => out.push((name, b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// command bodies

struct Run<'a> {
    ws: &'a Workspace,
    st: State,
    bras: Pool,
    proj: Pool,
    out: &'a mut Outcome,
}

fn fmt_vec(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_matrix(text: &str, what: &str) -> Result<IntMatrix> {
    IntMatrix::parse_text(text).map_err(|e| Error::Format(format!("{what}: {e}")))
}

impl Run<'_> {
    fn files(&self) -> Vec<(PathBuf, String)> {
        let c = self.st.codec;
        vec![
            (self.ws.state_path(), self.st.to_records().to_text(c)),
            (self.ws.brauer_path(), self.bras.to_records(LABEL_BRAUER).to_text(c)),
            (self.ws.projective_path(), self.proj.to_records(LABEL_PROJECTIVES).to_text(c)),
        ]
    }

    fn read_only(&mut self, cmd: &Command) -> Result<()> {
        match cmd {
            Command::Blocks => self.blocks(),
            Command::IlpSolve { problem } => self.ilp(problem),
            Command::Status => self.status(),
            Command::Trace { id } => self.trace(id),
            _ => unreachable!("mutating command on the read-only path"),
        }
    }

    fn mutate(&mut self, cmd: &Command) -> Result<()> {
        match cmd {
            Command::BasicSet { block, rows } => self.basicset(*block, rows),
            Command::BasicSetMatrices { u, brauer, projective, names } => {
                self.basicset_matrices(u, brauer.as_deref(), projective.as_deref(), names)
            }
            Command::Certify { bs, ps } => self.certify(bs, ps),
            Command::Induce { from, table, fusion, operand } => self.transfer(from, table, fusion, operand, true),
            Command::Restrict { from, table, fusion, operand } => self.transfer(from, table, fusion, operand, false),
            Command::Tensor { a, b } => self.tensor(a, b),
            Command::Symmetrize { partition, operand } => self.symmetrize(partition, operand),
            Command::Improve(c) => self.improve(c),
            Command::Atoms => self.atoms(),
            _ => unreachable!("handled by the caller"),
        }
    }

    fn table(&self) -> Result<Arc<MocTable>> {
        if !self.st.table_mode {
            return Err(Error::Precondition("the basic pair was given without a table".into()));
        }
        self.ws.table()
    }

    fn need_block(&self) -> Result<usize> {
        self.st.block.ok_or_else(|| Error::Precondition("choose a basic set first (basicset)".into()))
    }

    fn blocks(&mut self) -> Result<()> {
        let t = self.ws.table()?;
        let p = self.st.prime;
        for (k, b) in t.block_distribution(p)?.iter().enumerate() {
            let d = t.block_defect(p, b)?;
            let labels: Vec<&str> = b.iter().map(|&r| t.labels[r].as_str()).collect();
            self.out.say(format!("block {}: {} (defect {d})", k + 1, labels.join(" ")));
        }
        Ok(())
    }

    fn basicset(&mut self, block: usize, rows: &[String]) -> Result<()> {
        let t = self.table()?;
        if self.st.block.is_some() || self.st.u.is_some() {
            return Err(Error::Precondition("a basic set is already chosen".into()));
        }
        let p = self.st.prime;
        let blocks = t.block_distribution(p)?;
        let brows = blocks
            .get(block.wrapping_sub(1))
            .ok_or_else(|| Error::Domain(format!("there is no block {block}")))?
            .clone();
        let mut bs0 = Vec::new();
        for l in rows {
            let r = t.row_by_label(l)?;
            let pos = brows
                .iter()
                .position(|&x| x == r)
                .ok_or_else(|| Error::Domain(format!("{l} is not in block {block}")))?;
            bs0.push(pos);
        }
        let hat = hat_matrix(&t, p, &brows);
        let cand = hat_matrix(&t, p, &bs0.iter().map(|&k| brows[k]).collect::<Vec<_>>());
        let s = match certify_brauer_basic(&hat, &cand)? {
            BrauerVerdict::Basic { relations } => relations,
            BrauerVerdict::NotBasic(w) => {
                return Err(Error::Domain(format!("{} is not a basic set: {w:?}", rows.join(" "))))
            }
        };
        let n = bs0.len();
        self.bras = Pool::new('B', n);
        self.proj = Pool::new('P', brows.len());
        for (k, l) in rows.iter().enumerate() {
            let mut e = vec![BigInt::zero(); n];
            e[k] = BigInt::one();
            self.bras.add(e, format!("restriction of {l} to the {p}-regular classes"), vec![]);
        }
        self.st.block = Some(block);
        self.st.block_rows = brows;
        self.st.bs0 = bs0;
        self.st.s = Some(s);
        self.refresh_values()?;
        self.out.say(format!("basic set {} of block {block} certified; {n} Brauer characters", rows.join(" ")));
        for r in 0..self.st.block_rows.len() {
            let t_row = self.st.block_rows[r];
            if t.defect_zero(p, t_row)? {
                let mut e = vec![BigInt::zero(); self.st.block_rows.len()];
                e[r] = BigInt::one();
                let (id, _) = self.proj.add(e, format!("character {} of defect 0", t.labels[t_row]), vec![]);
                self.out.say(format!("{id}: {} is projective, because it has defect 0", t.labels[t_row]));
            }
        }
        self.refresh_values()
    }

    fn basicset_matrices(&mut self, u: &str, b: Option<&str>, p: Option<&str>, names: &[String]) -> Result<()> {
        if self.st.block.is_some() || self.st.u.is_some() {
            return Err(Error::Precondition("a basic set is already chosen".into()));
        }
        let u = parse_matrix(u, "scalar products")?;
        let s = u.nrows();
        if let PairVerdict::Reject { det } = certify_pair(&u)? {
            return Err(Error::Domain(format!("not a basic pair: determinant {det}")));
        }
        if !names.is_empty() && names.len() != s {
            return Err(Error::Domain(format!("{} names for {s} projectives", names.len())));
        }
        self.st.table_mode = false;
        self.st.block = Some(1);
        self.st.block_rows = (0..s).collect();
        self.st.bs0 = (0..s).collect();
        self.bras = Pool::new('B', s);
        self.proj = Pool::new('P', s);
        for k in 0..s {
            let mut e = vec![BigInt::zero(); s];
            e[k] = BigInt::one();
            let (id, _) = self.bras.add(e, format!("basic Brauer character nr {}", k + 1), vec![]);
            self.st.bs.push(id);
        }
        for j in 0..s {
            let name = names.get(j).cloned().unwrap_or_else(|| format!("nr {}", j + 1));
            let (id, fresh) = self.proj.add(u.col(j), format!("given as {name}"), vec![]);
            if !fresh {
                return Err(Error::Domain("two equal basic projectives".into()));
            }
            self.st.ps.push(id);
        }
        if let Some(b) = b {
            let b = parse_matrix(b, "Brauer characters")?;
            for k in 0..b.nrows() {
                self.bras.add(b.row(k).to_vec(), "given over the basic set".into(), vec![]);
            }
        }
        if let Some(p) = p {
            let p = parse_matrix(p, "projectives")?;
            for k in 0..p.nrows() {
                self.proj.add(u.mul_vec(p.row(k)), "given over the basic set".into(), vec![]);
            }
        }
        self.st.u = Some(u);
        self.out.say(format!(
            "basic pair of size {s} with determinant {}; {} Brauer and {} projective characters",
            self.st.u.as_ref().expect("just set").det()?,
            self.bras.entries.len(),
            self.proj.entries.len()
        ));
        Ok(())
    }

    fn refresh_values(&mut self) -> Result<()> {
        if !self.st.table_mode || self.st.block.is_none() {
            return Ok(());
        }
        let t = self.ws.table()?;
        let w = t.width();
        let bs0_rows: Vec<usize> = self.st.bs0.iter().map(|&k| self.st.block_rows[k]).collect();
        let mut bv = Vec::new();
        for e in &self.bras.entries {
            let mut v = vec![BigInt::zero(); w];
            for (x, &r) in e.coeffs.iter().zip(&bs0_rows) {
                for (a, b) in v.iter_mut().zip(t.row(r)) {
                    *a += x * b;
                }
            }
            bv.push(crate::charops::hat_restrict(&ClassFunction::new(t.clone(), v, crate::charops::Kind::Virtual)?, self.st.prime).coeffs);
        }
        let mut pv = Vec::new();
        for e in &self.proj.entries {
            let mut v = vec![BigInt::zero(); w];
            for (x, &r) in e.coeffs.iter().zip(&self.st.block_rows) {
                for (a, b) in v.iter_mut().zip(t.row(r)) {
                    *a += x * b;
                }
            }
            pv.push(v);
        }
        self.bras.values = Some(IntMatrix::from_rows_with_cols(bv, w));
        self.proj.values = Some(IntMatrix::from_rows_with_cols(pv, w));
        Ok(())
    }

    /// BS₀ coordinates of the Brauer characters and PA₀ coordinates of the
    /// projectives currently chosen as basic sets.
    fn basic_matrices(&self) -> Result<(IntMatrix, IntMatrix)> {
        let x = IntMatrix::from_rows_with_cols(
            self.st.bs.iter().map(|id| Ok(self.bras.get(id)?.coeffs.clone())).collect::<Result<_>>()?,
            self.st.bs0.len(),
        );
        let cols: Vec<Vec<BigInt>> =
            self.st.ps.iter().map(|id| Ok(self.pa0(&self.proj.get(id)?.coeffs))).collect::<Result<_>>()?;
        Ok((x, IntMatrix::from_columns(&cols, self.st.bs0.len())))
    }

    fn pa0(&self, irr: &[BigInt]) -> Vec<BigInt> {
        self.st.bs0.iter().map(|&k| irr[k].clone()).collect()
    }

    fn certify(&mut self, bs: &[String], ps: &[String]) -> Result<()> {
        self.need_block()?;
        if bs.len() != self.st.bs0.len() || ps.len() != self.st.bs0.len() {
            return Err(Error::Domain(format!("a basic set has {} members", self.st.bs0.len())));
        }
        for id in bs {
            self.bras.get(id)?;
        }
        for id in ps {
            self.proj.get(id)?;
        }
        let old = (self.st.bs.clone(), self.st.ps.clone());
        self.st.bs = bs.to_vec();
        self.st.ps = ps.to_vec();
        let (x, a) = self.basic_matrices()?;
        let u = x.mul(&a)?;
        match certify_pair(&u)? {
            PairVerdict::BasicPair { .. } => {}
            PairVerdict::Reject { det } => {
                self.st.bs = old.0;
                self.st.ps = old.1;
                return Err(Error::Domain(format!("not a basic pair: determinant {det}")));
            }
        }
        self.out.say(format!("basic pair ({}) / ({}) certified, determinant {}", bs.join(" "), ps.join(" "), u.det()?));
        self.st.u = Some(u);
        self.st.pims.clear();
        self.st.irreducibles.clear();
        Ok(())
    }

    /// An ordinary class function for a table row label or pool id.
    fn operand(&self, t: &Arc<MocTable>, name: &str) -> Result<(ClassFunction, String)> {
        if let Ok(e) = self.proj.get(name) {
            let mut v = vec![BigInt::zero(); t.width()];
            for (x, &r) in e.coeffs.iter().zip(&self.st.block_rows) {
                for (a, b) in v.iter_mut().zip(t.row(r)) {
                    *a += x * b;
                }
            }
            return Ok((ClassFunction::new(t.clone(), v, crate::charops::Kind::Virtual)?, e.id.clone()));
        }
        if let Ok(e) = self.bras.get(name) {
            let mut v = vec![BigInt::zero(); t.width()];
            for (x, &k) in e.coeffs.iter().zip(&self.st.bs0) {
                for (a, b) in v.iter_mut().zip(t.row(self.st.block_rows[k])) {
                    *a += x * b;
                }
            }
            return Ok((ClassFunction::new(t.clone(), v, crate::charops::Kind::Virtual)?, e.id.clone()));
        }
        let r = t.row_by_label(name)?;
        Ok((ClassFunction::row(t, r), String::new()))
    }

    /// Files a class function of this group into one of the pools.
    fn file_character(&mut self, theta: &ClassFunction, origin: String, parents: Vec<String>) -> Result<()> {
        self.need_block()?;
        let t = theta.table.clone();
        let p = self.st.prime;
        let mut irr = Vec::with_capacity(t.nrows());
        for r in 0..t.nrows() {
            let ip = inner_product(theta, &ClassFunction::row(&t, r))?;
            if !ip.is_integer() {
                return Err(Error::Domain("result is not a generalized character".into()));
            }
            irr.push(ip.to_integer());
        }
        let block: Vec<BigInt> = self.st.block_rows.iter().map(|&r| irr[r].clone()).collect();
        if block.iter().all(|x| x.is_zero()) {
            return Err(Error::Domain("result has no constituent in the block".into()));
        }
        let (id, fresh) = if is_virtual_projective(theta, p) {
            self.proj.add(block, origin.clone(), parents)
        } else {
            let s = self.st.s.as_ref().expect("block chosen");
            self.bras.add(s.vec_mul(&block), origin.clone(), parents)
        };
        let kind = if id.starts_with('P') { "projective" } else { "Brauer character" };
        if fresh {
            self.out.say(format!("{id}: new {kind}, {origin}"));
        } else {
            self.out.say(format!("{id}: {kind} already known"));
        }
        self.refresh_values()
    }

    fn tensor(&mut self, a: &str, b: &str) -> Result<()> {
        let t = self.table()?;
        let (x, px) = self.operand(&t, a)?;
        let (y, py) = self.operand(&t, b)?;
        let d0 = |name: &str, pid: &str| -> Result<bool> {
            Ok(pid.is_empty() && t.defect_zero(self.st.prime, t.row_by_label(name)?)?)
        };
        let origin = if d0(a, &px)? || d0(b, &py)? {
            format!("obtained by: tensoring ordinaries with defect 0 characters ({a} x {b})")
        } else {
            format!("obtained by: tensoring {a} with {b}")
        };
        let parents = [px, py].into_iter().filter(|s| !s.is_empty()).collect();
        self.file_character(&tensor(&x, &y)?, origin, parents)
    }

    fn symmetrize(&mut self, partition: &[u64], operand: &str) -> Result<()> {
        let t = self.table()?;
        let (x, px) = self.operand(&t, operand)?;
        let r: u64 = partition.iter().sum();
        let data = SymmetrizationData::builtin(r)?;
        let th = symmetrize(&x, partition, 0, &data)?;
        let lam: Vec<String> = partition.iter().map(|v| v.to_string()).collect();
        let parents = if px.is_empty() { vec![] } else { vec![px] };
        self.file_character(&th, format!("obtained by: symmetrization [{}] of {operand}", lam.join(",")), parents)
    }

    fn transfer(&mut self, from: &str, table: &str, fusion: &[String], operand: &str, up: bool) -> Result<()> {
        let own = self.table()?;
        let other = Arc::new(MocTable::parse(table)?);
        let other_path = self.ws.table_path(from);
        if let Ok(existing) = fs::read_to_string(&other_path) {
            if existing != table {
                return Err(Error::Domain(format!("table of {from} differs from {}", other_path.display())));
            }
        }
        let r = other.row_by_label(operand)?;
        let src = ClassFunction::row(&other, r);
        let names: Vec<&str> = fusion.iter().map(|s| s.as_str()).collect();
        let (theta, verb) = if up {
            (induce(&src, &FusionMap::by_names(other.clone(), own.clone(), &names)?)?, "inducing")
        } else {
            (restrict(&src, &FusionMap::by_names(own.clone(), other.clone(), &names)?)?, "restricting")
        };
        self.file_character(&theta, format!("obtained by: {verb} {operand} of {from}"), vec![])
    }

    fn context(&self) -> Result<(ImproveContext, Vec<String>, Vec<String>)> {
        let u = self.st.u.clone().ok_or_else(|| Error::Precondition("certify a basic pair first".into()))?;
        let (x, a) = self.basic_matrices()?;
        let xi = x.inverse_unimodular()?;
        let ai = a.inverse_unimodular()?;
        let mut b_ids = Vec::new();
        let mut b = Vec::new();
        for e in &self.bras.entries {
            if !self.st.bs.contains(&e.id) {
                b.push(xi.vec_mul(&e.coeffs));
                b_ids.push(e.id.clone());
            }
        }
        let mut p_ids = Vec::new();
        let mut p = Vec::new();
        for e in &self.proj.entries {
            if !self.st.ps.contains(&e.id) && !self.st.pruned.contains(&e.id) {
                p.push(ai.mul_vec(&self.pa0(&e.coeffs)));
                p_ids.push(e.id.clone());
            }
        }
        let s = u.nrows();
        let mut ctx = ImproveContext::new(
            u,
            IntMatrix::from_rows_with_cols(b, s),
            IntMatrix::from_rows_with_cols(p, s),
        )?;
        ctx.pims = self.st.pims.clone();
        ctx.irreducibles = self.st.irreducibles.clone();
        ctx.ps_names = self.st.ps.clone();
        ctx.bs_names = self.st.bs.clone();
        Ok((ctx, b_ids, p_ids))
    }

    fn ps_label(&self, j: usize) -> String {
        let id = &self.st.ps[j];
        let given = self.proj.get(id).ok().and_then(|e| e.origin.strip_prefix("given as ").map(String::from));
        match given {
            Some(n) => format!("projective nr {} ({n})", j + 1),
            None => format!("projective nr {} ({id})", j + 1),
        }
    }

    fn block_no(&self) -> usize {
        self.st.block.unwrap_or(1)
    }

    /// Takes over a basis change made inside the context.
    fn adopt(&mut self, ctx: &ImproveContext, how: &str) -> Result<Vec<usize>> {
        let old_u = self.st.u.clone().expect("pair certified");
        let t = old_u.inverse_unimodular()?.mul(&ctx.u)?;
        let s = old_u.nrows();
        let id = IntMatrix::identity(s);
        let old_ps = self.st.ps.clone();
        let mut changed = Vec::new();
        for j in 0..s {
            if t.col(j) == id.col(j) {
                continue;
            }
            let mut v = vec![BigInt::zero(); self.proj.width];
            let mut parents = Vec::new();
            for (k, c) in t.col(j).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                parents.push(old_ps[k].clone());
                for (a, b) in v.iter_mut().zip(&self.proj.get(&old_ps[k])?.coeffs) {
                    *a += c * b;
                }
            }
            let (nid, _) = self.proj.add(v, format!("obtained by: {how}"), parents);
            self.st.ps[j] = nid;
            changed.push(j);
        }
        self.st.u = Some(ctx.u.clone());
        self.st.pims = ctx.pims.clone();
        self.refresh_values()?;
        Ok(changed)
    }

    fn atoms(&mut self) -> Result<()> {
        let (mut ctx, _, _) = self.context()?;
        let before = ctx.pims.clone();
        let atoms = ctx.detect_atoms();
        for &j in &atoms {
            if !before.contains(&j) {
                let msg = format!(
                    "{} in block {} is indecomposable, because it is an atom",
                    self.ps_label(j),
                    self.block_no()
                );
                self.out.say(msg);
            }
        }
        if atoms.is_empty() {
            self.out.say("no projective of the basic set is an atom");
        }
        self.out.events.extend(ctx.events.clone());
        self.st.pims = ctx.pims;
        Ok(())
    }

    fn improve(&mut self, c: &ImproveCommand) -> Result<()> {
        let (mut ctx, _b_ids, p_ids) = self.context()?;
        let s = ctx.size();
        let b = self.block_no();
        match c {
            ImproveCommand::PimTest { column } => {
                let cols: Vec<usize> = match column {
                    Some(j) if *j < s => vec![*j],
                    Some(j) => return Err(Error::Domain(format!("there is no projective nr {}", j + 1))),
                    None => (0..s).filter(|j| !ctx.pims.contains(j)).collect(),
                };
                for j in cols {
                    match ctx.pim_test(j)? {
                        PartVerdict::Proved(_) => {
                            let m = format!("{} in block {b} is indecomposable, because of the PIM test", self.ps_label(j));
                            self.out.say(m);
                        }
                        PartVerdict::Inconclusive(Some(x)) => {
                            let m = format!("{}: PIM test inconclusive, possible part ({})", self.ps_label(j), fmt_vec(&x));
                            self.out.say(m);
                        }
                        PartVerdict::Inconclusive(None) => {
                            let m = format!("{}: PIM test inconclusive, solver gave up", self.ps_label(j));
                            self.out.say(m);
                        }
                    }
                }
                self.st.pims = ctx.pims.clone();
            }
            ImproveCommand::Subtract { pim, from } => {
                if *pim >= s {
                    return Err(Error::Domain(format!("there is no projective nr {}", pim + 1)));
                }
                let e = self.proj.get(from)?.clone();
                let (_, a) = self.basic_matrices()?;
                let sigma = a.inverse_unimodular()?.mul_vec(&self.pa0(&e.coeffs));
                let sub = ctx.subtract_indecomposable(*pim, &sigma, from)?;
                if sub.z.is_zero() {
                    self.out.say(format!("{from}: no multiple of {} can be subtracted", self.ps_label(*pim)));
                } else {
                    let f = self.proj.get(&self.st.ps[*pim])?.coeffs.clone();
                    let v: Vec<BigInt> = e.coeffs.iter().zip(&f).map(|(a, b)| a - &sub.z * b).collect();
                    let origin = format!("obtained by: subtracting {} times {} from {from}", sub.z, self.st.ps[*pim]);
                    let (id, _) = self.proj.add(v, origin, vec![from.clone(), self.st.ps[*pim].clone()]);
                    let m = format!("{id} = {from} - {}*{} is projective, by the bits of the basic set", sub.z, self.st.ps[*pim]);
                    self.out.say(m);
                    self.refresh_values()?;
                }
            }
            ImproveCommand::Triangular => {
                let steps = ctx.triangular_reduce()?;
                if steps.is_empty() {
                    self.out.say("triangular reduction changes nothing");
                }
                for st in &steps {
                    let m = format!(
                        "{} contains {} times {}, because of {}",
                        self.ps_label(st.j0),
                        st.z,
                        self.ps_label(st.i),
                        p_ids[st.witness]
                    );
                    self.out.say(m);
                }
                if !steps.is_empty() {
                    for j in self.adopt(&ctx, "triangular reduction")? {
                        let m = format!("projective nr {} replaced by {}", j + 1, self.st.ps[j]);
                        self.out.say(m);
                    }
                }
            }
            ImproveCommand::Split { column } => {
                if *column >= s {
                    return Err(Error::Domain(format!("there is no projective nr {}", column + 1)));
                }
                let label = self.ps_label(*column);
                match ctx.split_decomposable(*column)? {
                    SplitOutcome::NoAction(why) => self.out.say(format!("{label}: no action, {why}")),
                    SplitOutcome::Split { parts, .. } => {
                        self.out.say(format!(
                            "{label} is decomposable into ({}) and ({})",
                            fmt_vec(&parts[0]),
                            fmt_vec(&parts[1])
                        ));
                        for j in self.adopt(&ctx, "splitting a decomposable projective")? {
                            let m = format!("projective nr {} replaced by {}", j + 1, self.st.ps[j]);
                            self.out.say(m);
                        }
                    }
                }
            }
            ImproveCommand::Prune => {
                let rep = ctx.prune()?;
                for (k, _) in &rep.discarded {
                    self.st.pruned.insert(p_ids[*k].clone());
                    self.out.say(format!("{} is not essential", p_ids[*k]));
                }
                let kept: Vec<&str> = rep.essential.iter().map(|&k| p_ids[k].as_str()).collect();
                self.out.say(format!("essential: {}", kept.join(" ")));
                // rename the discarded rows in the events to their ids
                for (e, (k, _)) in ctx.events.iter_mut().zip(&rep.discarded) {
                    e.inputs = vec![p_ids[*k].clone()];
                }
            }
            ImproveCommand::Parity => {
                let t = self.table()?;
                let rows = &self.st.block_rows;
                let triv = ClassFunction::trivial(&t);
                if rows.first().map_or(true, |&r| ClassFunction::row(&t, r) != triv) {
                    return Err(Error::Precondition("parity needs the principal block".into()));
                }
                let mut degrees = Vec::new();
                let mut real = Vec::new();
                for &r in rows {
                    let chi = ClassFunction::row(&t, r);
                    degrees.push(chi.degree().as_integer().ok_or_else(|| Error::Domain("irrational degree".into()))?);
                    real.push(chi.conj() == chi);
                }
                let cols: Vec<Vec<BigInt>> =
                    self.st.ps.iter().map(|id| Ok(self.proj.get(id)?.coeffs.clone())).collect::<Result<_>>()?;
                let proj = IntMatrix::from_columns(&cols, rows.len());
                let rep = fong_parity(self.st.prime, &degrees, &real, &proj)?;
                match (&rep.source, &rep.trivial_pim) {
                    (Some(j), Some(_)) => {
                        if rep.containments.is_empty() {
                            self.out.say(format!("{}: parity determines the trivial PIM", self.ps_label(*j)));
                        }
                        for k in &rep.containments {
                            let m = format!("{} contains {}, by the parity condition", self.ps_label(*j), self.ps_label(*k));
                            self.out.say(m);
                        }
                        if let Some(e) = parity_event(&degrees, &real, &proj, &rep) {
                            ctx.events.push(e);
                        }
                    }
                    _ => self.out.say("parity condition gives nothing"),
                }
            }
        }
        self.out.events.extend(ctx.events);
        Ok(())
    }

    fn ilp(&mut self, text: &str) -> Result<()> {
        let p = IlpProblem::parse(text)?;
        match gomory_solve(&p, false, DEFAULT_PIVOT_LIMIT)? {
            IlpOutcome::Optimum { x, value } => {
                self.out.say(format!("optimum {value}"));
                self.out.say(format!("x {}", fmt_vec(&x)));
            }
            IlpOutcome::Infeasible => self.out.say("infeasible"),
            IlpOutcome::Aborted { .. } => {
                return Err(Error::Inconclusive("pivot limit reached".into()));
            }
        }
        Ok(())
    }

    fn status(&mut self) -> Result<()> {
        let st = &self.st;
        self.out.say(format!("group {} prime {}", st.group, st.prime));
        match st.block {
            None => self.out.say("no basic set chosen"),
            Some(b) => {
                let mode = if st.table_mode { "" } else { " (given as matrices)" };
                self.out.say(format!("block {b}{mode}, {} characters, |BS0| = {}", st.block_rows.len(), st.bs0.len()));
            }
        }
        self.out.say(format!("{} Brauer and {} projective characters", self.bras.entries.len(), self.proj.entries.len()));
        if let Some(u) = &st.u {
            self.out.say(format!("BS: {}", st.bs.join(" ")));
            self.out.say(format!("PS: {}", st.ps.join(" ")));
            let p: Vec<String> = st.pims.iter().map(|j| (j + 1).to_string()).collect();
            self.out.say(format!("indecomposable: {}", p.join(" ")));
            if !st.pruned.is_empty() {
                self.out.say(format!("not essential: {}", st.pruned.iter().cloned().collect::<Vec<_>>().join(" ")));
            }
            for i in 0..u.nrows() {
                self.out.say(fmt_vec(u.row(i)));
            }
        }
        Ok(())
    }

    fn trace(&mut self, id: &str) -> Result<()> {
        let mut stack = vec![(id.to_string(), 0usize)];
        let mut seen = BTreeSet::new();
        while let Some((id, depth)) = stack.pop() {
            let e = self.proj.get(&id).or_else(|_| self.bras.get(&id))?;
            let again = if seen.insert(id.clone()) { "" } else { " (see above)" };
            self.out.say(format!("{}{}: {}{again}", "  ".repeat(depth), e.id, e.origin));
            if again.is_empty() {
                for p in e.parents.iter().rev() {
                    stack.push((p.clone(), depth + 1));
                }
            }
        }
        Ok(())
    }
}
