//! Plain-text renderers for alignments, following the two figure
//! conventions: horizontal (rows as lines, `|` connectors) and vertical
//! (patterns as columns, `-` connectors).

use crate::align::flatten::{flatten_items, FlatSource};
use crate::align::{check_alignment_legal, Alignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Renders a legal alignment as monospaced text. Horizontal output wraps
/// into bands at `width` characters (continuation marked by `...`);
/// vertical output errors when the full line does not fit.
pub fn render_alignment(a: &Alignment, orientation: Orientation, width: usize) -> Result<String> {
    let violations = check_alignment_legal(a);
    if !violations.is_empty() {
        return Err(Error::IllegalAlignment(violations));
    }
    match orientation {
        Orientation::Horizontal => render_horizontal(a, width),
        Orientation::Vertical => render_vertical(a, width),
    }
}

struct Slot {
    /// Participating rows with their symbol text (columns have several,
    /// plain instances one).
    cells: Vec<(usize, String)>,
    /// Row span of the connector, when this slot is a match column.
    connect: Option<(usize, usize)>,
    width: usize,
}

fn slots_of(a: &Alignment) -> Vec<Slot> {
    flatten_items(a)
        .into_iter()
        .map(|item| match item.source {
            FlatSource::Column(c) => {
                let col = &a.columns[c];
                let cells: Vec<(usize, String)> = col
                    .entries
                    .iter()
                    .map(|e| (e.row, item.name.clone()))
                    .collect();
                let lo = col.entries.iter().map(|e| e.row).min().unwrap_or(0);
                let hi = col.entries.iter().map(|e| e.row).max().unwrap_or(0);
                Slot {
                    width: item.name.len() + 1,
                    cells,
                    connect: Some((lo, hi)),
                }
            }
            FlatSource::Instance { row, .. } => Slot {
                width: item.name.len() + 1,
                cells: vec![(row, item.name.clone())],
                connect: None,
            },
        })
        .collect()
}

fn render_horizontal(a: &Alignment, width: usize) -> Result<String> {
    let slots = slots_of(a);
    let n_rows = a.rows.len();
    let prefix = format!("{}", n_rows.saturating_sub(1)).len() + 1;

    for s in &slots {
        if prefix + s.width > width {
            return Err(Error::RenderWidth {
                width,
                needed: prefix + s.width,
            });
        }
    }

    // greedy banding
    let mut bands: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < slots.len() {
        let mut end = start;
        let mut used = prefix;
        while end < slots.len() && used + slots[end].width <= width {
            used += slots[end].width;
            end += 1;
        }
        bands.push((start, end));
        start = end;
    }

    let mut out = String::new();
    for (band_idx, &(lo, hi)) in bands.iter().enumerate() {
        if band_idx > 0 {
            out.push_str("...\n");
        }
        let band = &slots[lo..hi];
        let band_width: usize = prefix + band.iter().map(|s| s.width).sum::<usize>();
        // 2*n_rows - 1 text lines: row lines interleaved with connector lines
        let mut grid = vec![vec![' '; band_width]; 2 * n_rows - 1];
        for (r, line) in grid.iter_mut().enumerate().step_by(2) {
            let label = format!("{}", r / 2);
            for (i, ch) in label.chars().enumerate() {
                line[i] = ch;
            }
        }
        let mut x = prefix;
        for slot in band {
            for (row, text) in &slot.cells {
                for (i, ch) in text.chars().enumerate() {
                    grid[row * 2][x + i] = ch;
                }
            }
            if let Some((lo_row, hi_row)) = slot.connect {
                for line in (lo_row * 2 + 1)..(hi_row * 2) {
                    if grid[line][x] == ' ' {
                        grid[line][x] = '|';
                    }
                }
            }
            x += slot.width;
        }
        for line in grid {
            let text: String = line.into_iter().collect();
            out.push_str(text.trim_end());
            out.push('\n');
        }
    }
    Ok(out)
}

fn render_vertical(a: &Alignment, width: usize) -> Result<String> {
    let n_rows = a.rows.len();
    // text-column widths: widest symbol of each alignment row
    let col_width: Vec<usize> = a
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.symbols
                .iter()
                .map(|s| s.name.len())
                .max()
                .unwrap_or(1)
                .max(format!("{r}").len())
        })
        .collect();
    let mut col_x = Vec::with_capacity(n_rows);
    let mut x = 0;
    for w in &col_width {
        col_x.push(x);
        x += w + 1;
    }
    let total = x.saturating_sub(1);
    if total > width {
        return Err(Error::RenderWidth {
            width,
            needed: total,
        });
    }

    let slots = slots_of(a);
    let mut out = String::new();
    let mut header = vec![' '; total];
    for (r, &cx) in col_x.iter().enumerate() {
        for (i, ch) in format!("{r}").chars().enumerate() {
            header[cx + i] = ch;
        }
    }
    let header: String = header.into_iter().collect();
    out.push_str(header.trim_end());
    out.push_str("\n\n");

    for slot in &slots {
        let mut line = vec![' '; total];
        for (row, text) in &slot.cells {
            for (i, ch) in text.chars().enumerate() {
                line[col_x[*row] + i] = ch;
            }
        }
        if slot.connect.is_some() && slot.cells.len() >= 2 {
            let mut rows: Vec<usize> = slot.cells.iter().map(|(r, _)| *r).collect();
            rows.sort_unstable();
            for pair in rows.windows(2) {
                let (left, right) = (pair[0], pair[1]);
                let from = col_x[left] + slot.cells.iter().find(|(r, _)| *r == left).unwrap().1.len() + 1;
                let to = col_x[right].saturating_sub(1);
                for cell in line.iter_mut().take(to).skip(from) {
                    if *cell == ' ' {
                        *cell = '-';
                    }
                }
            }
        }
        let text: String = line.into_iter().collect();
        out.push_str(text.trim_end());
        out.push('\n');
    }

    out.push('\n');
    out.push_str(header.trim_end());
    out.push('\n');
    Ok(out)
}
