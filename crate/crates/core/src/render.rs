//! String-diagram layout with SVG and plain-text output.
//!
//! Layout works from the canonical form, so equal morphisms render to the
//! same bytes. There is one column per Foata layer. Inside a column, boxes and
//! passing wires are stacked in boundary order, each box taking
//! `max(inputs, outputs, 1)` rows. Resource wires change row only in the gaps
//! between columns. Each device wire runs left to right through the boxes
//! that carry it, jogging vertically only on column boundaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::freecat::PremonoidalMorphism;
use crate::graphs::{DeviceId, ObjectId};

/// Grid position of a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutBox {
    pub label: String,
    pub column: usize,
    pub top: usize,
    pub rows: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub devices: Vec<DeviceId>,
}

/// Where a resource wire is, column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceWire {
    pub object: ObjectId,
    /// `(column, row)` of the producing output port; `None` for the left boundary.
    pub start: Option<(usize, usize)>,
    /// `(column, row)` of the consuming input port; `None` for the right boundary.
    pub end: Option<(usize, usize)>,
    /// Columns the wire passes straight through, with its row there.
    pub through: Vec<(usize, usize)>,
    /// Row on the left boundary, or on the right boundary, when it touches one.
    pub left_row: Option<usize>,
    pub right_row: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceWire {
    pub device: DeviceId,
    /// Position of the device among all devices of the graph; picks the dash pattern.
    pub index: usize,
    /// Carrying boxes, left to right.
    pub carriers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub columns: usize,
    pub rows: usize,
    pub boxes: Vec<LayoutBox>,
    pub wires: Vec<ResourceWire>,
    pub devices: Vec<DeviceWire>,
}

enum Item {
    Wire(usize),
    Box { event: usize, inputs: Vec<usize>, outputs: Vec<usize> },
}

impl Item {
    fn width(&self) -> usize {
        match self {
            Item::Wire(_) => 1,
            Item::Box { outputs, .. } => outputs.len(),
        }
    }
}

pub fn layout(f: &PremonoidalMorphism) -> Layout {
    let graph = f.graph();
    let form = f.canonical_form();
    let layers = form.layers();
    let all_devices: Vec<&DeviceId> = graph.devices.iter().collect();

    let mut wires: Vec<ResourceWire> = Vec::new();
    let new_wire = |wires: &mut Vec<ResourceWire>, object: &ObjectId| {
        wires.push(ResourceWire {
            object: object.clone(),
            start: None,
            end: None,
            through: Vec::new(),
            left_row: None,
            right_row: None,
        });
        wires.len() - 1
    };
    let mut current: Vec<usize> = form.source.iter().map(|o| new_wire(&mut wires, o)).collect();
    for (row, &w) in current.iter().enumerate() {
        wires[w].left_row = Some(row);
    }
    let mut boxes = Vec::new();
    let mut rows = current.len();

    for (column, layer) in layers.iter().enumerate() {
        let mut items: Vec<Item> = current.iter().map(|&w| Item::Wire(w)).collect();
        for (k, e) in layer.iter().enumerate() {
            let arity = graph.arity(&e.gen).expect("event generators belong to the graph");
            let start = e.left.len();
            let mut at = items.len();
            let mut pos = 0;
            for (i, item) in items.iter().enumerate() {
                if pos == start && item.width() > 0 {
                    at = i;
                    break;
                }
                pos += item.width();
            }
            let taken: Vec<usize> = items
                .drain(at..at + arity.dom.len())
                .map(|item| match item {
                    Item::Wire(w) => w,
                    Item::Box { .. } => unreachable!("events in one layer are independent"),
                })
                .collect();
            let outputs = arity.cod.iter().map(|o| new_wire(&mut wires, o)).collect();
            items.insert(at, Item::Box { event: k, inputs: taken, outputs });
        }
        let mut row = 0;
        current.clear();
        for item in items {
            match item {
                Item::Wire(w) => {
                    wires[w].through.push((column, row));
                    current.push(w);
                    row += 1;
                }
                Item::Box { event, inputs, outputs } => {
                    let e = &layer[event];
                    let height = inputs.len().max(outputs.len()).max(1);
                    for (k, &w) in inputs.iter().enumerate() {
                        wires[w].end = Some((column, row + k));
                    }
                    for (k, &w) in outputs.iter().enumerate() {
                        wires[w].start = Some((column, row + k));
                    }
                    current.extend(&outputs);
                    let devices = graph.devices_of(&e.gen).map(|d| d.iter().cloned().collect()).unwrap_or_default();
                    boxes.push(LayoutBox {
                        label: e.gen.to_string(),
                        column,
                        top: row,
                        rows: height,
                        inputs: inputs.len(),
                        outputs: outputs.len(),
                        devices,
                    });
                    row += height;
                }
            }
        }
        rows = rows.max(row);
    }
    for (row, &w) in current.iter().enumerate() {
        wires[w].right_row = Some(row);
    }
    rows = rows.max(current.len());

    let devices = all_devices
        .iter()
        .enumerate()
        .filter_map(|(index, d)| {
            let carriers: Vec<usize> = (0..boxes.len()).filter(|&b| boxes[b].devices.contains(d)).collect();
            (!carriers.is_empty()).then(|| DeviceWire { device: (*d).clone(), index, carriers })
        })
        .collect();
    Layout { columns: layers.len(), rows, boxes, wires, devices }
}

const MARGIN: f64 = 40.0;
const COLUMN: f64 = 90.0;
const BOX_IN: f64 = 20.0;
const BOX_OUT: f64 = 70.0;
const ROW: f64 = 30.0;
const TOP: f64 = 20.0;

impl Layout {
    pub fn width(&self) -> f64 {
        2.0 * MARGIN + COLUMN * self.columns as f64
    }

    pub fn height(&self) -> f64 {
        2.0 * TOP + ROW * self.rows.max(1) as f64 + 12.0 * self.devices.len() as f64 + 4.0
    }

    fn column_x(column: usize) -> f64 {
        MARGIN + COLUMN * column as f64
    }

    fn row_y(row: usize) -> f64 {
        TOP + ROW * (row as f64 + 0.5)
    }

    /// Polyline of a resource wire, left to right.
    pub fn wire_points(&self, w: &ResourceWire) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        match (w.start, w.left_row) {
            (Some((c, r)), _) => pts.push((Self::column_x(c) + BOX_OUT, Self::row_y(r))),
            (None, Some(r)) => pts.push((0.0, Self::row_y(r))),
            (None, None) => {}
        }
        for &(c, r) in &w.through {
            let y = Self::row_y(r);
            pts.push((Self::column_x(c) + BOX_IN, y));
            pts.push((Self::column_x(c) + BOX_OUT, y));
        }
        match (w.end, w.right_row) {
            (Some((c, r)), _) => pts.push((Self::column_x(c) + BOX_IN, Self::row_y(r))),
            (None, Some(r)) => pts.push((self.width(), Self::row_y(r))),
            (None, None) => {}
        }
        if pts.len() == 1 {
            // Identity wire with no columns at all.
            pts.push((self.width(), pts[0].1));
        }
        pts
    }

    fn lane_y(&self, b: &LayoutBox, device: &DeviceId) -> f64 {
        let k = b.devices.iter().position(|d| d == device).unwrap_or(0);
        TOP + ROW * (b.top + b.rows) as f64 - 8.0 - 5.0 * k as f64
    }

    /// Idle height of the `k`-th drawn device wire, below all resource rows.
    fn idle_y(&self, k: usize) -> f64 {
        TOP + ROW * self.rows.max(1) as f64 + 12.0 * (k + 1) as f64
    }

    /// Polyline of a device wire. It idles on its own lane below the
    /// diagram and rises into each carrier, jogging only on column boundaries.
    pub fn device_points(&self, d: &DeviceWire) -> Vec<(f64, f64)> {
        let k = self.devices.iter().position(|e| e.device == d.device).unwrap_or(0);
        let idle = self.idle_y(k);
        let mut pts = vec![(0.0, idle)];
        for (i, &b) in d.carriers.iter().enumerate() {
            let bx = &self.boxes[b];
            let y = self.lane_y(bx, &d.device);
            let x0 = Self::column_x(bx.column);
            let prev_y = pts.last().expect("nonempty").1;
            if prev_y != y {
                pts.push((x0, prev_y));
                pts.push((x0, y));
            }
            pts.push((x0 + BOX_IN, y));
            pts.push((x0 + BOX_OUT, y));
            let adjacent = d.carriers.get(i + 1).is_some_and(|&n| self.boxes[n].column == bx.column + 1);
            if !adjacent && y != idle {
                pts.push((x0 + COLUMN, y));
                pts.push((x0 + COLUMN, idle));
            }
        }
        pts.push((self.width(), idle));
        pts
    }

    /// Every device wire meets each vertical line at most once, and passes through each of its carriers.
    pub fn check_slices(&self) -> bool {
        self.devices.iter().all(|d| {
            let pts = self.device_points(d);
            let monotone = pts.windows(2).all(|p| p[0].0 <= p[1].0);
            let vertical_runs_are_single =
                pts.windows(3).all(|p| !(p[0].0 == p[1].0 && p[1].0 == p[2].0));
            let threads = d.carriers.iter().all(|&b| {
                let bx = &self.boxes[b];
                let (x0, x1) = (Self::column_x(bx.column) + BOX_IN, Self::column_x(bx.column) + BOX_OUT);
                let (y0, y1) = (TOP + ROW * bx.top as f64, TOP + ROW * (bx.top + bx.rows) as f64);
                pts.windows(2).any(|p| p[0].0 <= x0 && p[1].0 >= x1 && (y0..=y1).contains(&p[0].1))
            });
            monotone && vertical_runs_are_single && threads
        })
    }
}

fn dash(index: usize) -> String {
    format!("{} {}", 2 + 3 * (index % 5), 2 + index / 5)
}

const COLOURS: [&str; 6] = ["#c0392b", "#2471a3", "#229954", "#b9770e", "#7d3c98", "#17a589"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

pub fn render_svg(l: &Layout) -> Vec<u8> {
    let (w, h) = (l.width(), l.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    s.push_str("<g class=\"resources\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.50\">\n");
    for wire in &l.wires {
        let _ = writeln!(
            s,
            "<polyline points=\"{}\"><title>{}</title></polyline>",
            points(&l.wire_points(wire)),
            escape(wire.object.as_str())
        );
    }
    s.push_str("</g>\n<g class=\"labels\" font-family=\"monospace\" font-size=\"9.00\" fill=\"#555555\">\n");
    for wire in &l.wires {
        if let Some(r) = wire.left_row {
            let _ = writeln!(s, "<text x=\"2.00\" y=\"{:.2}\">{}</text>", Layout::row_y(r) - 3.0, escape(wire.object.as_str()));
        }
        if let Some(r) = wire.right_row {
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                w - 2.0,
                Layout::row_y(r) - 3.0,
                escape(wire.object.as_str())
            );
        }
    }
    s.push_str("</g>\n<g class=\"boxes\" font-family=\"monospace\" font-size=\"12.00\" text-anchor=\"middle\">\n");
    for b in &l.boxes {
        let x = Layout::column_x(b.column) + BOX_IN;
        let y = TOP + ROW * b.top as f64 + 3.0;
        let bh = ROW * b.rows as f64 - 6.0;
        let _ = writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{bh:.2}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
            BOX_OUT - BOX_IN
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            x + (BOX_OUT - BOX_IN) / 2.0,
            y + bh / 2.0 + 4.0,
            escape(&b.label)
        );
    }
    s.push_str("</g>\n<g class=\"devices\" fill=\"none\" stroke-width=\"2.00\">\n");
    for (k, d) in l.devices.iter().enumerate() {
        let colour = COLOURS[d.index % COLOURS.len()];
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" stroke=\"{colour}\" stroke-dasharray=\"{}\"><title>{}</title></polyline>",
            points(&l.device_points(d)),
            dash(d.index),
            escape(d.device.as_str())
        );
        let _ = writeln!(
            s,
            "<text x=\"2.00\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"9.00\" fill=\"{colour}\">{}</text>",
            l.idle_y(k) - 3.0,
            escape(d.device.as_str())
        );
    }
    s.push_str("</g>\n</svg>\n");
    s.into_bytes()
}

/// Monospaced drawing: `-` and `|` for resource wires, `+` at bends,
/// `[label]` for boxes, and one `=` lane per device with `#` at its carriers.
pub fn render_text(l: &Layout) -> String {
    const GAP: usize = 3;
    let widths: Vec<usize> = (0..l.columns)
        .map(|c| {
            l.boxes.iter().filter(|b| b.column == c).map(|b| b.label.chars().count() + 2).max().unwrap_or(3).max(3)
        })
        .collect();
    let mut starts = Vec::with_capacity(l.columns);
    let mut x = GAP;
    for w in &widths {
        starts.push(x);
        x += w + GAP;
    }
    let total = x.max(2 * GAP);
    let rows = l.rows.max(1);
    let mut grid = vec![vec![' '; total]; rows];
    let mut put = |grid: &mut Vec<Vec<char>>, r: usize, c: usize, ch: char| {
        let cell = &mut grid[r][c];
        *cell = match (*cell, ch) {
            ('-', '|') | ('|', '-') | ('+', _) => '+',
            _ => ch,
        };
    };

    // Runs from `out` to `inn`, bending in the cell after `out`.
    let gap = |grid: &mut Vec<Vec<char>>, out: usize, inn: usize, from: usize, to: usize, put: &mut dyn FnMut(&mut Vec<Vec<char>>, usize, usize, char)| {
        put(grid, from, out, '-');
        for x in out + 2..inn {
            put(grid, to, x, '-');
        }
        if from == to {
            put(grid, from, out + 1, '-');
        } else {
            for r in from.min(to)..=from.max(to) {
                put(grid, r, out + 1, if r == from || r == to { '+' } else { '|' });
            }
        }
    };
    for wire in &l.wires {
        let mut stops: Vec<(usize, usize, usize)> = Vec::new(); // (x_in, x_out, row)
        match (wire.start, wire.left_row) {
            (Some((c, r)), _) => stops.push((0, starts[c] + widths[c], r)),
            (None, Some(r)) => stops.push((0, 0, r)),
            (None, None) => {}
        }
        for &(c, r) in &wire.through {
            stops.push((starts[c], starts[c] + widths[c], r));
        }
        match (wire.end, wire.right_row) {
            (Some((c, r)), _) => stops.push((starts[c], total, r)),
            (None, Some(r)) => stops.push((total, total, r)),
            (None, None) => {}
        }
        if stops.len() == 1 {
            stops.push((total, total, stops[0].2));
        }
        for pair in stops.windows(2) {
            let ((_, out, r0), (inn, _, r1)) = (pair[0], pair[1]);
            gap(&mut grid, out, inn, r0, r1, &mut put);
        }
        for &(a, b, r) in &stops[1..stops.len() - 1] {
            for x in a..b {
                put(&mut grid, r, x, '-');
            }
        }
    }
    for b in &l.boxes {
        let (x0, w) = (starts[b.column], widths[b.column]);
        for r in b.top..b.top + b.rows {
            grid[r][x0] = '[';
            grid[r][x0 + w - 1] = ']';
            for x in x0 + 1..x0 + w - 1 {
                grid[r][x] = ' ';
            }
        }
        let mid = b.top + (b.rows - 1) / 2;
        let label: Vec<char> = b.label.chars().collect();
        let pad = (w - 2 - label.len()) / 2;
        for (i, ch) in label.into_iter().enumerate() {
            grid[mid][x0 + 1 + pad + i] = ch;
        }
    }
    let mut out: Vec<String> = grid.into_iter().map(|r| r.into_iter().collect::<String>().trim_end().to_string()).collect();
    let name_width = l.devices.iter().map(|d| d.device.as_str().chars().count()).max().unwrap_or(0);
    for d in &l.devices {
        let mut lane = vec!['='; total];
        for &b in &d.carriers {
            let c = l.boxes[b].column;
            for cell in &mut lane[starts[c]..starts[c] + widths[c]] {
                *cell = '#';
            }
        }
        let name = d.device.as_str();
        let pad = name_width - name.chars().count();
        out.push(format!("{}{name} {}", " ".repeat(pad), lane.into_iter().collect::<String>()));
    }
    let mut text = out.join("\n");
    text.push('\n');
    text
}

/// Renders a morphism straight to SVG bytes.
pub fn svg(f: &PremonoidalMorphism) -> Vec<u8> {
    render_svg(&layout(f))
}

pub fn text(f: &PremonoidalMorphism) -> String {
    render_text(&layout(f))
}

/// Number of boxes per column, for quick structural checks.
pub fn column_sizes(l: &Layout) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = (0..l.columns).map(|c| (c, 0)).collect();
    for b in &l.boxes {
        *counts.entry(b.column).or_default() += 1;
    }
    counts.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freecat::tests::{one_printer, two_printers};
    use crate::graphs::tests::{g, w};

    #[test]
    fn identity_is_a_single_line() {
        let c = one_printer();
        let l = layout(&c.identity(&w("Doc")).unwrap());
        assert_eq!(l.columns, 0);
        assert!(l.boxes.is_empty());
        assert_eq!(l.wires.len(), 1);
        assert_eq!(l.wire_points(&l.wires[0]), vec![(0.0, 35.0), (80.0, 35.0)]);
        assert_eq!(render_text(&l), "------\n");
    }

    #[test]
    fn one_printer_uses_two_columns_and_one_device_wire() {
        let c = one_printer();
        let f = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("print"), 0)]).unwrap();
        let l = layout(&f);
        assert_eq!(column_sizes(&l), vec![1, 1]);
        assert_eq!(l.devices.len(), 1);
        assert_eq!(l.devices[0].carriers, vec![0, 1]);
        assert!(l.check_slices());
    }

    #[test]
    fn two_printers_share_a_column() {
        let c = two_printers();
        let f = c.from_steps(&w("Doc Doc"), &[(g("l·print"), 0), (g("r·print"), 0)]).unwrap();
        let l = layout(&f);
        assert_eq!(column_sizes(&l), vec![2]);
        assert_eq!(l.devices.len(), 2);
        assert!(l.check_slices());
        let swapped = c.from_steps(&w("Doc Doc"), &[(g("r·print"), 1), (g("l·print"), 0)]).unwrap();
        assert_eq!(svg(&f), svg(&swapped));
        assert_eq!(text(&f), text(&swapped));
    }

    #[test]
    fn text_shows_boxes_and_lanes() {
        let c = one_printer();
        let f = c.from_steps(&w(""), &[(g("doc"), 0), (g("print"), 0)]).unwrap();
        let t = text(&f);
        assert!(t.contains("[ doc ]") || t.contains("[doc]"), "{t}");
        assert!(t.contains("[print]"), "{t}");
        assert!(t.lines().last().unwrap().starts_with("p1 "), "{t}");
        assert!(t.contains('#'));
    }

    #[test]
    fn svg_is_stable_and_well_formed() {
        let c = one_printer();
        let f = c.from_steps(&w("Doc"), &[(g("doc"), 1), (g("print"), 0), (g("print"), 0)]).unwrap();
        let a = svg(&f);
        assert_eq!(a, svg(&f));
        let s = String::from_utf8(a).unwrap();
        assert!(s.starts_with("<svg "));
        assert!(s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<rect").count(), 3);
        assert!(s.contains("stroke-dasharray=\"2 2\""));
    }
}
