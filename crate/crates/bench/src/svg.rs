//! SVG rendering of a map, its start regions and a planned team.

use std::fmt::Write as _;
use std::path::Path;

use ergoplan::maps::{GridMap, StartRegionSet};
use ergoplan::optimizer::Solution;

use crate::error::Result;

/// Canvas width in pixels; the height follows the domain aspect ratio.
const WIDTH: f64 = 480.0;
/// Heatmap cells per side at most; finer maps are averaged down.
const MAX_CELLS: usize = 100;
const PALETTE: [&str; 4] = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3"];

fn color_for(type_index: usize) -> &'static str {
    PALETTE[type_index % PALETTE.len()]
}

/// White to dark orange ramp.
fn heat(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let r = 255.0 - 40.0 * v;
    let g = 255.0 - 170.0 * v;
    let b = 255.0 - 235.0 * v;
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Block averages of the map on at most `MAX_CELLS` per side.
fn coarsen(map: &GridMap) -> (usize, usize, Vec<f64>) {
    let fx = map.nx().div_ceil(MAX_CELLS);
    let fy = map.ny().div_ceil(MAX_CELLS);
    let (cx, cy) = (map.nx().div_ceil(fx), map.ny().div_ceil(fy));
    let mut out = vec![0.0; cx * cy];
    let mut count = vec![0usize; cx * cy];
    for iy in 0..map.ny() {
        for ix in 0..map.nx() {
            let c = (iy / fy) * cx + ix / fx;
            out[c] += map.get(ix, iy);
            count[c] += 1;
        }
    }
    for (v, n) in out.iter_mut().zip(&count) {
        *v /= *n as f64;
    }
    (cx, cy, out)
}

/// Renders the picture as an SVG document. `team` pairs a solution with the
/// type id of each agent; without it only the map and regions are drawn.
/// Output bytes depend only on the inputs.
pub fn render_svg(map: &GridMap, regions: &StartRegionSet, team: Option<(&Solution, &[u32])>) -> String {
    let [lx, ly] = map.lengths();
    let scale = WIDTH / lx;
    let height = ly * scale;
    // domain y points up, SVG y points down
    let px = |x: f64| x * scale;
    let py = |y: f64| height - y * scale;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.2} {height:.2}">"#
    );

    let (cx, cy, cells) = coarsen(map);
    let peak = cells.iter().cloned().fold(0.0, f64::max);
    let (w, h) = (WIDTH / cx as f64, height / cy as f64);
    let _ = writeln!(s, r#"<g id="heatmap" shape-rendering="crispEdges">"#);
    for iy in 0..cy {
        for ix in 0..cx {
            let v = if peak > 0.0 { cells[iy * cx + ix] / peak } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                ix as f64 * w,
                height - (iy + 1) as f64 * h,
                w + 0.05,
                h + 0.05,
                heat(v)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let mut type_ids: Vec<u32> = regions.types().collect();
    if let Some((_, agent_types)) = team {
        type_ids.extend(agent_types);
    }
    type_ids.sort_unstable();
    type_ids.dedup();
    let type_index = |t: u32| type_ids.iter().position(|x| *x == t).unwrap_or(0);
    let _ = writeln!(s, r#"<g id="regions" fill="none" stroke-width="1.5" stroke-dasharray="6 4">"#);
    for t in regions.types() {
        for r in regions.rects(t).unwrap_or(&[]) {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" stroke="{}" data-type="{t}"/>"#,
                px(r.min[0]),
                py(r.max[1]),
                (r.max[0] - r.min[0]) * scale,
                (r.max[1] - r.min[1]) * scale,
                color_for(type_index(t))
            );
        }
    }
    let _ = writeln!(s, "</g>");

    if let Some((sol, agent_types)) = team {
        let _ = writeln!(s, r#"<g id="trajectories" fill="none" stroke-width="1.5">"#);
        for (i, traj) in sol.trajectories.iter().enumerate() {
            let t = agent_types.get(i).copied().unwrap_or(0);
            let points: Vec<String> = traj
                .positions
                .iter()
                .map(|p| format!("{:.2},{:.2}", px(p[0]), py(p[1])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" stroke="{}" data-agent="{i}" data-type="{t}"/>"#,
                points.join(" "),
                color_for(type_index(t))
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g id="starts" stroke="black" stroke-width="1">"#);
        for (i, start) in sol.starts.iter().enumerate() {
            let t = agent_types.get(i).copied().unwrap_or(0);
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}" data-agent="{i}"/>"#,
                px(start.position[0]),
                py(start.position[1]),
                color_for(type_index(t))
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    crate::export::write(path, svg)
}
