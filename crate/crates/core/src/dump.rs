//! JSON-lines band records. Every real is a decimal string carrying the full
//! working precision, so a dump read back at the same precision reproduces
//! the tree bit for bit.

use std::io::{BufRead, Write};

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::bandtree::{Band, BandTree, CharPath, EnumerationSettings};
use crate::cfrac::ContinuedFraction;
use crate::error::{Error, Result};
use crate::tracemap::{SpectralParams, TraceLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandRecord {
    pub order: u32,
    pub kind: String,
    pub level: u32,
    pub power: i64,
    pub l: u32,
    pub p: u32,
    pub path: String,
    pub lo: String,
    pub hi: String,
    pub parent_path: Option<String>,
}

/// Shortest decimal string that reads back to the same `Float`.
pub fn decimal(x: &Float) -> String {
    x.to_string_radix(10, None)
}

fn parse_real(s: &str, prec: u32) -> Result<Float> {
    Float::parse(s)
        .map(|v| Float::with_val(prec, v))
        .map_err(|_| Error::InvalidArgument(format!("bad decimal `{s}`")))
}

impl BandRecord {
    pub fn of(band: &Band, parent: Option<&Band>) -> Self {
        Self {
            order: band.order,
            kind: band.kind.to_string(),
            level: band.label.level,
            power: band.label.power,
            l: band.index_l,
            p: band.family_p,
            path: band.path.to_string(),
            lo: decimal(&band.lo),
            hi: decimal(&band.hi),
            parent_path: parent.map(|b| b.path.to_string()),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::InvalidArgument(format!("bad record: {e}")))
    }
}

/// Records of every band, ordered by generation and path.
pub fn records(tree: &BandTree) -> impl Iterator<Item = BandRecord> + '_ {
    tree.generations()
        .iter()
        .flatten()
        .map(move |b| BandRecord::of(b, tree.parent_of(b)))
}

pub fn write_records<W: Write>(tree: &BandTree, mut out: W) -> std::io::Result<()> {
    for r in records(tree) {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

/// Rebuilds generations from records, resolving parents by path.
pub fn generations_from_records(records: &[BandRecord], prec: u32) -> Result<Vec<Vec<Band>>> {
    let mut gens: Vec<Vec<Band>> = Vec::new();
    for r in records {
        let order = r.order as usize;
        if order > gens.len() {
            return Err(Error::InvalidArgument(format!("record {} skips an order", r.path)));
        }
        if order == gens.len() {
            gens.push(Vec::new());
        }
        let path: CharPath = r.path.parse()?;
        let parent = match (&r.parent_path, order) {
            (None, 0) => None,
            (Some(pp), o) if o > 0 => {
                let pp: CharPath = pp.parse()?;
                let i = gens[o - 1]
                    .binary_search_by(|b| b.path.cmp(&pp))
                    .map_err(|_| Error::InadmissiblePath(pp.to_string()))?;
                Some(i)
            }
            _ => return Err(Error::InadmissiblePath(r.path.clone())),
        };
        gens[order].push(Band {
            order: r.order,
            kind: r.kind.parse()?,
            label: TraceLabel::new(r.level, r.power),
            lo: parse_real(&r.lo, prec)?,
            hi: parse_real(&r.hi, prec)?,
            index_l: r.l,
            family_p: r.p,
            path,
            parent,
        });
    }
    Ok(gens)
}

/// Reads records (skipping `#` comment lines) into a tree.
pub fn read_tree<R: BufRead>(
    input: R,
    cf: &ContinuedFraction,
    params: &SpectralParams,
    settings: EnumerationSettings,
) -> Result<BandTree> {
    let mut recs = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        recs.push(BandRecord::from_line(&line)?);
    }
    let gens = generations_from_records(&recs, params.precision())?;
    if gens.is_empty() {
        return Err(Error::EmptyGeneration);
    }
    BandTree::from_generations(cf, params, settings, gens)
}
