//! Text rendering of deletion-set tables, and the matching parser.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use qdel_core::combinatorics::Side;
use qdel_core::{delta_table, BitString, BitStringSet, CodePair, DeltaTable};

fn header(side: Side) -> &'static str {
    match side {
        Side::A => "Δ_{i,b}(A)",
        Side::B => "Δ_{i,b}(B)",
    }
}

/// One section per side, one row per position `i`, columns `b=0` and `b=1`.
pub fn render_table(pair: &CodePair) -> String {
    let table = delta_table(pair);
    let n = pair.n();
    let mut out = String::new();
    for (k, side) in [Side::A, Side::B].into_iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let set = if side == Side::A { pair.a() } else { pair.b() };
        let name = if side == Side::A { "A" } else { "B" };
        writeln!(out, "{}  {name} = {set}", header(side)).unwrap();
        let cells: Vec<[String; 2]> =
            (1..=n).map(|i| [0u8, 1].map(|b| table.side(side, i, b).to_string())).collect();
        let iw = n.to_string().len().max(1);
        let w0 = cells.iter().map(|c| c[0].chars().count()).max().unwrap_or(0).max(3);
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
        writeln!(out, "{} | {} | b=1", pad("i", iw), pad("b=0", w0)).unwrap();
        for (i, c) in cells.iter().enumerate() {
            writeln!(out, "{} | {} | {}", pad(&(i + 1).to_string(), iw), pad(&c[0], w0), c[1]).unwrap();
        }
    }
    out
}

/// Cells parsed back from [`render_table`] output, `[i-1][b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTable {
    pub a: Vec<[BitStringSet; 2]>,
    pub b: Vec<[BitStringSet; 2]>,
}

impl ParsedTable {
    pub fn matches(&self, table: &DeltaTable) -> bool {
        let n = table.n();
        self.a.len() == n
            && self.b.len() == n
            && (1..=n).all(|i| {
                (0..2u8).all(|b| &self.a[i - 1][b as usize] == table.a(i, b) && &self.b[i - 1][b as usize] == table.b(i, b))
            })
    }
}

fn parse_cell(cell: &str, len: usize) -> anyhow::Result<BitStringSet> {
    let cell = cell.trim();
    if cell == "∅" {
        return Ok(BitStringSet::empty(len));
    }
    let inner = cell
        .strip_prefix('{')
        .and_then(|c| c.strip_suffix('}'))
        .with_context(|| format!("malformed cell {cell:?}"))?;
    let items = inner.split(',').map(|s| s.trim().parse::<BitString>()).collect::<Result<Vec<_>, _>>()?;
    Ok(BitStringSet::from_iter_checked(len, items)?)
}

pub fn parse_table(text: &str, n: usize) -> anyhow::Result<ParsedTable> {
    let mut sides: Vec<Vec<[BitStringSet; 2]>> = Vec::new();
    for line in text.lines() {
        if line.starts_with("Δ_{i,b}") {
            sides.push(Vec::new());
            continue;
        }
        let cols: Vec<&str> = line.split('|').collect();
        if cols.len() != 3 || cols[0].trim() == "i" {
            continue;
        }
        let rows = sides.last_mut().context("row before section header")?;
        let i: usize = cols[0].trim().parse().with_context(|| format!("bad row label in {line:?}"))?;
        if i != rows.len() + 1 {
            bail!("rows out of order at i={i}");
        }
        rows.push([parse_cell(cols[1], n - 1)?, parse_cell(cols[2], n - 1)?]);
    }
    let [a, b]: [Vec<[BitStringSet; 2]>; 2] = sides.try_into().map_err(|_| anyhow::anyhow!("expected two sections"))?;
    Ok(ParsedTable { a, b })
}
