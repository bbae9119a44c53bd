//! Information maps and start-region geometry.
//!
//! A [`GridMap`] stores a density sampled at cell midpoints in row-major,
//! y-major order: cell `(ix, iy)` lives at `iy * nx + ix` and its midpoint
//! is `((ix + 0.5) * L1 / nx, (iy + 0.5) * L2 / ny)`.
//!
//! Start regions are unions of axis-aligned rectangles, one union per agent
//! type.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::Point;

const MAP_MAGIC: &str = "ERGMAP 1";
const REGION_MAGIC: &str = "ERGSTART 1";

#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    nx: usize,
    ny: usize,
    lengths: [f64; 2],
    cells: Vec<f64>,
}

impl GridMap {
    /// Builds a map from nonnegative finite cell values.
    pub fn new(nx: usize, ny: usize, lengths: [f64; 2], cells: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return precondition(format!("grid must be nonempty, got {nx}x{ny}"));
        }
        if !lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
            return precondition(format!("domain lengths must be positive, got {lengths:?}"));
        }
        if cells.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: cells.len(),
            });
        }
        if let Some(i) = cells.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return precondition(format!("cell {i} is negative or not finite ({})", cells[i]));
        }
        Ok(Self {
            nx,
            ny,
            lengths,
            cells,
        })
    }

    /// Grid that may hold negative values, as produced by band-limited
    /// reconstructions.
    pub(crate) fn from_signed(nx: usize, ny: usize, lengths: [f64; 2], cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), nx * ny);
        Self {
            nx,
            ny,
            lengths,
            cells,
        }
    }

    /// The normalized uniform density.
    pub fn uniform(nx: usize, ny: usize, lengths: [f64; 2]) -> Self {
        let value = 1.0 / (lengths[0] * lengths[1]);
        Self::from_signed(nx, ny, lengths, vec![value; nx * ny])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.cells[iy * self.nx + ix]
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [
            self.lengths[0] / self.nx as f64,
            self.lengths[1] / self.ny as f64,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.lengths[0] * self.lengths[1] / (self.nx * self.ny) as f64
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        let [dx, dy] = self.cell_size();
        [(ix as f64 + 0.5) * dx, (iy as f64 + 0.5) * dy]
    }

    /// Midpoint-rule integral of the density.
    pub fn integral(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cell with the largest value; the first one in storage order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.cells.iter().enumerate() {
            if *v > self.cells[best] {
                best = i;
            }
        }
        (best % self.nx, best / self.nx)
    }

    /// Density-weighted mean position.
    pub fn centroid(&self) -> Point {
        let mut acc = [0.0, 0.0];
        let mut mass = 0.0;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.get(ix, iy);
                let c = self.cell_center(ix, iy);
                acc[0] += v * c[0];
                acc[1] += v * c[1];
                mass += v;
            }
        }
        if mass > 0.0 {
            [acc[0] / mass, acc[1] / mass]
        } else {
            [0.5 * self.lengths[0], 0.5 * self.lengths[1]]
        }
    }

    /// Rescales the map so that it integrates to one.
    pub fn normalize(&self) -> Result<GridMap> {
        let total: f64 = self.cells.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateMap);
        }
        let scale = 1.0 / (total * self.cell_area());
        Ok(Self::from_signed(
            self.nx,
            self.ny,
            self.lengths,
            self.cells.iter().map(|v| v * scale).collect(),
        ))
    }

    /// Sets negative cells to zero.
    pub fn clipped(&self) -> GridMap {
        Self::from_signed(
            self.nx,
            self.ny,
            self.lengths,
            self.cells.iter().map(|v| v.max(0.0)).collect(),
        )
    }

    /// Serializes to the `ERGMAP 1` text format. Values are written with
    /// shortest round-trip formatting, so parsing gives back identical bits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 24);
        let _ = writeln!(out, "{MAP_MAGIC}");
        let _ = writeln!(
            out,
            "{} {} {:?} {:?}",
            self.nx, self.ny, self.lengths[0], self.lengths[1]
        );
        for row in self.cells.chunks_exact(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<GridMap> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, magic) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        if magic.trim() != MAP_MAGIC {
            return Err(parse_err(1, format!("expected header `{MAP_MAGIC}`")));
        }
        let (line_no, dims) = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing dimension line"))?;
        let fields: Vec<&str> = dims.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(line_no, "expected `nx ny L1 L2`"));
        }
        let nx: usize = parse_token(fields[0], line_no, "nx")?;
        let ny: usize = parse_token(fields[1], line_no, "ny")?;
        let l1: f64 = parse_token(fields[2], line_no, "L1")?;
        let l2: f64 = parse_token(fields[3], line_no, "L2")?;
        if nx == 0 || ny == 0 || !(l1 > 0.0 && l2 > 0.0) {
            return Err(parse_err(line_no, "dimensions must be positive"));
        }
        let expected = nx
            .checked_mul(ny)
            .ok_or_else(|| parse_err(line_no, "grid too large"))?;
        let mut cells = Vec::with_capacity(expected);
        for (line_no, line) in lines {
            for (col, token) in line.split_whitespace().enumerate() {
                let v: f64 = token.parse().map_err(|_| {
                    parse_err(line_no, format!("value {} (`{token}`) is not a number", col + 1))
                })?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(parse_err(
                        line_no,
                        format!("value {} is negative or not finite ({token})", col + 1),
                    ));
                }
                cells.push(v);
            }
        }
        if cells.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: cells.len(),
            });
        }
        GridMap::new(nx, ny, [l1, l2], cells)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GridMap> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_token<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{token}`")))
}

/// One Gaussian component of a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Point,
    pub covariance: [[f64; 2]; 2],
}

impl GmmComponent {
    fn density(&self, x: Point) -> f64 {
        let [[a, b], [_, d]] = self.covariance;
        let det = a * d - b * b;
        let dx = x[0] - self.mean[0];
        let dy = x[1] - self.mean[1];
        // (dx, dy) Sigma^-1 (dx, dy)^T
        let q = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    pub components: Vec<GmmComponent>,
    pub seed: u64,
}

impl GmmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return precondition("mixture needs at least one component");
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 || self.components.iter().any(|c| !(c.weight > 0.0)) {
            return precondition(format!("weights must be positive and sum to 1 (sum {total})"));
        }
        for (i, c) in self.components.iter().enumerate() {
            let [[a, b], [b2, d]] = c.covariance;
            if b != b2 || !(a > 0.0) || !(a * d - b * b > 0.0) {
                return precondition(format!(
                    "covariance of component {i} is not symmetric positive definite"
                ));
            }
        }
        Ok(())
    }
}

/// Random mixture with 2 to 5 isotropic components, means uniform in the
/// domain and spreads uniform in `[0.05 L, 0.2 L]` where `L` is the shorter
/// side.
pub fn random_gmm_spec(seed: u64, lengths: [f64; 2]) -> GmmSpec {
    let mut rng = crate::seeded_rng(seed);
    let count = rng.gen_range(2..=5);
    let short = lengths[0].min(lengths[1]);
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut components: Vec<GmmComponent> = raw
        .iter()
        .map(|w| {
            let mean = [rng.gen_range(0.0..lengths[0]), rng.gen_range(0.0..lengths[1])];
            let sigma = rng.gen_range(0.05 * short..=0.2 * short);
            GmmComponent {
                weight: w / total,
                mean,
                covariance: [[sigma * sigma, 0.0], [0.0, sigma * sigma]],
            }
        })
        .collect();
    // absorb rounding so the weights sum to one
    let rest: f64 = components[1..].iter().map(|c| c.weight).sum();
    components[0].weight = 1.0 - rest;
    GmmSpec { components, seed }
}

/// Samples the mixture density at the cell midpoints and normalizes.
pub fn generate_gmm_map(spec: &GmmSpec, nx: usize, ny: usize, lengths: [f64; 2]) -> Result<GridMap> {
    spec.validate()?;
    for (i, c) in spec.components.iter().enumerate() {
        let inside = (0.0..=lengths[0]).contains(&c.mean[0]) && (0.0..=lengths[1]).contains(&c.mean[1]);
        if !inside {
            return precondition(format!("mean of component {i} lies outside the domain"));
        }
    }
    let blank = GridMap::new(nx, ny, lengths, vec![0.0; nx * ny])?;
    let mut cells = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let x = blank.cell_center(ix, iy);
            cells.push(spec.components.iter().map(|c| c.weight * c.density(x)).sum());
        }
    }
    GridMap::new(nx, ny, lengths, cells)?.normalize()
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self {
            min: [xmin, ymin],
            max: [xmax, ymax],
        }
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.min[0]..=self.max[0]).contains(&p[0]) && (self.min[1]..=self.max[1]).contains(&p[1])
    }

    /// Nearest point of the rectangle.
    pub fn clamp(&self, p: Point) -> Point {
        [
            p[0].clamp(self.min[0], self.max[0]),
            p[1].clamp(self.min[1], self.max[1]),
        ]
    }

    pub fn within(&self, lengths: [f64; 2]) -> bool {
        self.min[0] >= 0.0 && self.min[1] >= 0.0 && self.max[0] <= lengths[0] && self.max[1] <= lengths[1]
    }
}

fn dist_sq(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Viable start locations: a union of rectangles per agent type.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StartRegionSet {
    regions: BTreeMap<u32, Vec<Rect>>,
}

impl StartRegionSet {
    /// Builds the set from `(type_id, rectangle)` entries, keeping their
    /// order within each type.
    pub fn new(entries: impl IntoIterator<Item = (u32, Rect)>) -> Result<Self> {
        let mut regions: BTreeMap<u32, Vec<Rect>> = BTreeMap::new();
        for (type_id, rect) in entries {
            let finite = rect.min.iter().chain(&rect.max).all(|v| v.is_finite());
            if !finite || rect.max[0] <= rect.min[0] || rect.max[1] <= rect.min[1] {
                return precondition(format!(
                    "rectangle {rect:?} of type {type_id} has no positive area"
                ));
            }
            regions.entry(type_id).or_default().push(rect);
        }
        Ok(Self { regions })
    }

    pub fn types(&self) -> impl Iterator<Item = u32> + '_ {
        self.regions.keys().copied()
    }

    pub fn rects(&self, type_id: u32) -> Result<&[Rect]> {
        self.regions
            .get(&type_id)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownAgentType(type_id))
    }

    /// Checks that every rectangle lies inside `[0, L1] x [0, L2]`.
    pub fn check_within(&self, lengths: [f64; 2]) -> Result<()> {
        for (type_id, rects) in &self.regions {
            if let Some(r) = rects.iter().find(|r| !r.within(lengths)) {
                return precondition(format!(
                    "rectangle {r:?} of type {type_id} leaves the domain {lengths:?}"
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, type_id: u32, p: Point) -> Result<bool> {
        Ok(self.rects(type_id)?.iter().any(|r| r.contains(p)))
    }

    pub fn total_area(&self, type_id: u32) -> Result<f64> {
        Ok(self.rects(type_id)?.iter().map(Rect::area).sum())
    }

    /// Uniform sample over the union of the type's rectangles: a rectangle
    /// is picked with probability proportional to its area, then a point
    /// uniformly inside it. Overlaps are counted once per rectangle.
    pub fn sample_start<R: Rng + ?Sized>(&self, type_id: u32, rng: &mut R) -> Result<Point> {
        let rects = self.rects(type_id)?;
        let total: f64 = rects.iter().map(Rect::area).sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = rects[rects.len() - 1];
        for r in rects {
            if pick < r.area() {
                chosen = *r;
                break;
            }
            pick -= r.area();
        }
        Ok([
            rng.gen_range(chosen.min[0]..=chosen.max[0]),
            rng.gen_range(chosen.min[1]..=chosen.max[1]),
        ])
    }

    /// Euclidean projection onto the union of the type's rectangles. Ties
    /// go to the rectangle listed first.
    pub fn project(&self, type_id: u32, x: Point) -> Result<Point> {
        let rects = self.rects(type_id)?;
        let mut best = rects[0].clamp(x);
        let mut best_d = dist_sq(best, x);
        for r in &rects[1..] {
            let q = r.clamp(x);
            let d = dist_sq(q, x);
            if d < best_d {
                best = q;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// Alternating projection onto the unions of several types. Returns the
    /// first point reached that lies in every union (a fixed point of the
    /// whole cycle), or `None` when `rounds` cycles pass without one.
    pub fn cyclic_projection(&self, types: &[u32], x: Point, rounds: usize) -> Result<Option<Point>> {
        let mut p = x;
        for _ in 0..rounds {
            if self.contains_all(types, p)? {
                return Ok(Some(p));
            }
            for &t in types {
                p = self.project(t, p)?;
            }
        }
        Ok(self.contains_all(types, p)?.then_some(p))
    }

    pub fn contains_all(&self, types: &[u32], p: Point) -> Result<bool> {
        for &t in types {
            if !self.contains(t, p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{REGION_MAGIC}\n");
        for (type_id, rects) in &self.regions {
            for r in rects {
                let _ = writeln!(
                    out,
                    "{type_id} {:?} {:?} {:?} {:?}",
                    r.min[0], r.min[1], r.max[0], r.max[1]
                );
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == REGION_MAGIC => {}
            _ => return Err(parse_err(1, format!("expected header `{REGION_MAGIC}`"))),
        }
        let mut entries = Vec::new();
        for (line_no, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 5 {
                return Err(parse_err(line_no, "expected `type_id xmin ymin xmax ymax`"));
            }
            let type_id: u32 = parse_token(fields[0], line_no, "type_id")?;
            let mut v = [0.0; 4];
            for (slot, token) in v.iter_mut().zip(&fields[1..]) {
                *slot = parse_token(token, line_no, "coordinate")?;
            }
            let rect = Rect::new(v[0], v[1], v[2], v[3]);
            if rect.max[0] <= rect.min[0] || rect.max[1] <= rect.min[1] {
                return Err(parse_err(line_no, "rectangle has no positive area"));
            }
            entries.push((type_id, rect));
        }
        if entries.is_empty() {
            return Err(parse_err(1, "no rectangles"));
        }
        Self::new(entries)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Layout parameters for randomly generated start regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionLayout {
    /// Inclusive range for the number of rectangles.
    pub count: [usize; 2],
    /// Inclusive range for the fraction of the domain area they cover.
    pub coverage: [f64; 2],
}

impl Default for RegionLayout {
    fn default() -> Self {
        Self {
            count: [2, 4],
            coverage: [0.05, 0.15],
        }
    }
}

/// Random start regions for the given agent types.
///
/// Rectangle 0 is shared by every type; the others are dealt to the types
/// round-robin, so with more than one type the per-type unions differ but
/// always intersect.
pub fn random_start_regions<R: Rng + ?Sized>(
    rng: &mut R,
    lengths: [f64; 2],
    types: &[u32],
    layout: &RegionLayout,
) -> Result<StartRegionSet> {
    if types.is_empty() {
        return Err(Error::Config("at least one agent type is required".into()));
    }
    let lo = layout.count[0].max(types.len()).max(1);
    let hi = layout.count[1].max(lo);
    let count = rng.gen_range(lo..=hi);
    let coverage = rng.gen_range(layout.coverage[0]..=layout.coverage[1]);
    let area_each = coverage * lengths[0] * lengths[1] / count as f64;
    let mut entries = Vec::new();
    for i in 0..count {
        let aspect: f64 = rng.gen_range(0.5..=2.0);
        let w = (area_each * aspect).sqrt().min(lengths[0]);
        let h = (area_each / w).min(lengths[1]);
        let x0 = rng.gen_range(0.0..=lengths[0] - w);
        let y0 = rng.gen_range(0.0..=lengths[1] - h);
        let rect = Rect::new(x0, y0, x0 + w, y0 + h);
        if i == 0 {
            entries.extend(types.iter().map(|&t| (t, rect)));
        } else {
            entries.push((types[(i - 1) % types.len()], rect));
        }
    }
    StartRegionSet::new(entries)
}
