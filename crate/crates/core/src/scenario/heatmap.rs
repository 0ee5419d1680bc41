//! SVG stress heatmaps on a viridis colour scale.

use std::fmt::Write as _;

use super::run::CellTable;

// Viridis sampled at 0.0, 0.1, ..., 1.0.
const VIRIDIS: [[u8; 3]; 11] = [
    [0x44, 0x01, 0x54],
    [0x48, 0x24, 0x75],
    [0x41, 0x44, 0x87],
    [0x35, 0x5f, 0x8d],
    [0x2a, 0x78, 0x8e],
    [0x21, 0x91, 0x8c],
    [0x22, 0xa8, 0x84],
    [0x44, 0xbf, 0x70],
    [0x7a, 0xd1, 0x51],
    [0xbd, 0xdf, 0x26],
    [0xfd, 0xe7, 0x25],
];

/// Colour for `t` in `[0, 1]` (clamped), piecewise linear between viridis anchors.
pub fn viridis(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (VIRIDIS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(VIRIDIS.len() - 2);
    let frac = pos - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * frac).round() as u8;
    [mix(a[0], b[0]), mix(a[1], b[1]), mix(a[2], b[2])]
}

pub fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub const CELL_PX: usize = 16;

/// One `<rect>` per cell, coloured over `[0, domain_max]`; row 0 is drawn at the bottom.
pub fn render_svg(title: &str, cells: &CellTable, domain_max: f64) -> String {
    let grid = cells.grid;
    let (w, h) = (grid.nx * CELL_PX, grid.ny * CELL_PX);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(title));
    for (i, &d) in cells.stress.iter().enumerate() {
        let (x, y) = grid.coords(i);
        let t = if domain_max > 0.0 { d / domain_max } else { 0.0 };
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{CELL_PX}" height="{CELL_PX}" fill="{}"/>"#,
            x * CELL_PX,
            (grid.ny - 1 - y) * CELL_PX,
            hex(viridis(t))
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
