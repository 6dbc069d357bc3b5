//! Occupancy grids: the tri-state world model, map file I/O, binarization,
//! local windows and the map-entropy metric.
//!
//! Cells are addressed as `(col, row)`; row 0 is the first row of a map file
//! and world `y` grows with the row index. The world coordinate of a cell is
//! the centre of the cell: `origin + (index + 0.5) * resolution`.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed map header: {0}")]
    Header(String),
    #[error("malformed sidecar {path}: {msg}")]
    Sidecar { path: PathBuf, msg: String },
    #[error("dimension mismatch: expected {expected} cells, found {found}")]
    Dimensions { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("point ({x:.3}, {y:.3}) lies outside the map")]
    OutsideMap { x: f64, y: f64 },
}

/// Tri-state cell value with the canonical integer codes 0 / 100 / -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    pub fn code(self) -> i8 {
        match self {
            CellState::Free => 0,
            CellState::Occupied => 100,
            CellState::Unknown => -1,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            0 => Some(CellState::Free),
            100 => Some(CellState::Occupied),
            -1 => Some(CellState::Unknown),
            _ => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

/// Integer cell address. Ordering is lexicographic on `(row, col)`, which is
/// the tie-break order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(col: usize, row: usize) -> Self {
        Cell { row, col }
    }

    /// Euclidean distance between cell centres, in cells.
    pub fn dist(self, other: Cell) -> f64 {
        let dx = self.col as f64 - other.col as f64;
        let dy = self.row as f64 - other.row as f64;
        dx.hypot(dy)
    }

    pub fn is_8_adjacent(self, other: Cell) -> bool {
        self != other && self.col.abs_diff(other.col) <= 1 && self.row.abs_diff(other.row) <= 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

/// A planar world-frame point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Robot pose; `heading` is kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Point,
        cells: Vec<CellState>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Invalid(format!("empty grid {width}x{height}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(MapError::Invalid(format!("resolution {resolution}")));
        }
        if cells.len() != width * height {
            return Err(MapError::Dimensions {
                expected: width * height,
                found: cells.len(),
            });
        }
        Ok(OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// A grid with every cell set to `state`, origin at (0, 0).
    pub fn filled(width: usize, height: usize, resolution: f64, state: CellState) -> Self {
        Self::new(
            width,
            height,
            resolution,
            Point::default(),
            vec![state; width * height],
        )
        .expect("filled grid with positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> CellState {
        self.cells[self.index(cell)]
    }

    /// Signed lookup; out-of-range coordinates yield `None`.
    #[inline]
    pub fn get_signed(&self, col: i64, row: i64) -> Option<CellState> {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some(self.cells[row as usize * self.width + col as usize])
        }
    }

    pub fn set(&mut self, cell: Cell, state: CellState) {
        let i = self.index(cell);
        self.cells[i] = state;
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// World coordinates of the centre of `cell`.
    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// The cell containing a world point, if inside the map.
    pub fn world_to_cell(&self, p: Point) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(Cell::new(fx as usize, fy as usize))
    }

    /// Continuous position in cell units (cell (c, r) spans [c, c+1) x [r, r+1)).
    pub fn world_to_grid(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.resolution,
            (p.y - self.origin.y) / self.resolution,
        )
    }

    pub fn neighbors8(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (c, r) = (cell.col as i64, cell.row as i64);
        NEIGHBORS8.iter().filter_map(move |&(dc, dr)| {
            let (nc, nr) = (c + dc, r + dr);
            (nc >= 0 && nr >= 0 && nc < self.width as i64 && nr < self.height as i64)
                .then(|| Cell::new(nc as usize, nr as usize))
        })
    }
}

pub(crate) const NEIGHBORS8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Obstacle mask: `true` means obstacle-or-unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryImage {
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub fn binarize(grid: &OccupancyGrid) -> BinaryImage {
    BinaryImage {
        width: grid.width,
        height: grid.height,
        bits: grid.cells.iter().map(|&c| c != CellState::Free).collect(),
    }
}

/// Like [`binarize`], but the outermost ring of cells is forced to obstacle.
pub fn binarize_closed(grid: &OccupancyGrid) -> BinaryImage {
    let mut img = binarize(grid);
    let (w, h) = (img.width, img.height);
    for col in 0..w {
        img.bits[col] = true;
        img.bits[(h - 1) * w + col] = true;
    }
    for row in 0..h {
        img.bits[row * w] = true;
        img.bits[row * w + w - 1] = true;
    }
    img
}

/// Cell-index rectangle `[col0, col1) x [row0, row1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub col0: usize,
    pub row0: usize,
    pub col1: usize,
    pub row1: usize,
}

impl Window {
    pub fn contains(&self, cell: Cell) -> bool {
        cell.col >= self.col0 && cell.col < self.col1 && cell.row >= self.row0 && cell.row < self.row1
    }

    pub fn width(&self) -> usize {
        self.col1 - self.col0
    }

    pub fn height(&self) -> usize {
        self.row1 - self.row0
    }
}

/// Bounds of the square window of side `side` meters centred on the cell
/// holding `center`. The side in cells is rounded up to the next odd count so
/// the centre cell sits exactly in the middle, then clamped to the map.
pub fn window_bounds(grid: &OccupancyGrid, center: Point, side: f64) -> Result<Window, MapError> {
    if !(side > 0.0) {
        return Err(MapError::Invalid(format!("window side {side}")));
    }
    let c = grid
        .world_to_cell(center)
        .ok_or(MapError::OutsideMap { x: center.x, y: center.y })?;
    let mut n = (side / grid.resolution - 1e-9).ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n += 1;
    }
    let half = n / 2;
    Ok(Window {
        col0: c.col.saturating_sub(half),
        row0: c.row.saturating_sub(half),
        col1: (c.col + half + 1).min(grid.width),
        row1: (c.row + half + 1).min(grid.height),
    })
}

/// Sub-grid around `center`; the origin is shifted so every cell keeps its
/// world coordinates.
pub fn local_window(grid: &OccupancyGrid, center: Pose, side: f64) -> Result<OccupancyGrid, MapError> {
    let win = window_bounds(grid, center.position(), side)?;
    let mut cells = Vec::with_capacity(win.width() * win.height());
    for row in win.row0..win.row1 {
        let start = row * grid.width;
        cells.extend_from_slice(&grid.cells[start + win.col0..start + win.col1]);
    }
    let origin = Point::new(
        grid.origin.x + win.col0 as f64 * grid.resolution,
        grid.origin.y + win.row0 as f64 * grid.resolution,
    );
    OccupancyGrid::new(win.width(), win.height(), grid.resolution, origin, cells)
}

/// Map entropy in bits: unknown cells contribute one bit each, known cells zero.
pub fn map_entropy(grid: &OccupancyGrid) -> f64 {
    grid.count(CellState::Unknown) as f64
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Metadata stored next to a PGM map (`<stem>.cfg`).
#[derive(Debug, Clone, PartialEq)]
pub struct Sidecar {
    pub resolution: f64,
    /// Darkness (0..=255) at or above which a pixel is occupied.
    pub occupied_thresh: u8,
    /// Darkness at or below which a pixel is free.
    pub free_thresh: u8,
    pub origin: Point,
    /// Treat pixel value as darkness directly instead of `255 - value`.
    pub negate: bool,
    pub closed_world: bool,
}

impl Default for Sidecar {
    fn default() -> Self {
        Sidecar {
            resolution: 0.1,
            occupied_thresh: 65,
            free_thresh: 25,
            origin: Point::default(),
            negate: false,
            closed_world: true,
        }
    }
}

impl Sidecar {
    pub fn parse(text: &str, path: &Path) -> Result<Self, MapError> {
        let err = |msg: String| MapError::Sidecar {
            path: path.to_path_buf(),
            msg,
        };
        let mut sc = Sidecar::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| err(format!("expected `key: value`, got `{line}`")))?;
            let value = value.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("bad number `{v}` for {key}")));
            match key.trim() {
                "resolution" => sc.resolution = num(value)?,
                "occupied_thresh" => sc.occupied_thresh = num(value)? as u8,
                "free_thresh" => sc.free_thresh = num(value)? as u8,
                "origin" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() < 2 {
                        return Err(err(format!("origin needs two values, got `{value}`")));
                    }
                    sc.origin = Point::new(num(parts[0])?, num(parts[1])?);
                }
                "negate" => sc.negate = parse_bool(value).ok_or_else(|| err(format!("bad bool `{value}`")))?,
                "closed_world" => {
                    sc.closed_world = parse_bool(value).ok_or_else(|| err(format!("bad bool `{value}`")))?
                }
                "image" | "width" | "height" => {}
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if !(sc.resolution > 0.0) {
            return Err(err(format!("resolution must be positive, got {}", sc.resolution)));
        }
        if sc.free_thresh >= sc.occupied_thresh {
            return Err(err("free_thresh must be below occupied_thresh".into()));
        }
        Ok(sc)
    }

    pub fn render(&self) -> String {
        format!(
            "resolution: {}\noccupied_thresh: {}\nfree_thresh: {}\norigin: {} {}\nnegate: {}\nclosed_world: {}\n",
            self.resolution,
            self.occupied_thresh,
            self.free_thresh,
            self.origin.x,
            self.origin.y,
            self.negate as u8,
            self.closed_world
        )
    }

    fn classify(&self, value: u32, maxval: u32) -> CellState {
        let scaled = (value * 255 + maxval / 2) / maxval;
        let darkness = if self.negate { scaled } else { 255 - scaled };
        if darkness >= self.occupied_thresh as u32 {
            CellState::Occupied
        } else if darkness <= self.free_thresh as u32 {
            CellState::Free
        } else {
            CellState::Unknown
        }
    }

    /// Pixel value (maxval 255) that reads back as `state`.
    fn pixel(&self, state: CellState) -> u8 {
        let darkness = match state {
            CellState::Occupied => 255,
            CellState::Free => 0,
            CellState::Unknown => (self.occupied_thresh as u16 + self.free_thresh as u16).div_ceil(2) as u8,
        };
        if self.negate {
            darkness
        } else {
            255 - darkness
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Sidecar path for a PGM map: `maps/foo.pgm` -> `maps/foo.cfg`.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("cfg")
}

/// Loads a PGM (with sidecar) or ASCII map, detected by magic bytes.
pub fn load_map(path: impl AsRef<Path>) -> Result<OccupancyGrid, MapError> {
    load_map_with_meta(path).map(|(g, _)| g)
}

/// Loads a map and returns the sidecar metadata in effect (defaults for ASCII).
pub fn load_map_with_meta(path: impl AsRef<Path>) -> Result<(OccupancyGrid, Sidecar), MapError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| MapError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        let sc_path = sidecar_path(path);
        let text = fs::read_to_string(&sc_path).map_err(|source| MapError::Io {
            path: sc_path.clone(),
            source,
        })?;
        let sc = Sidecar::parse(&text, &sc_path)?;
        let grid = parse_pgm(&bytes, &sc)?;
        Ok((grid, sc))
    } else {
        let text = String::from_utf8(bytes).map_err(|_| MapError::Header("not a PGM and not UTF-8 text".into()))?;
        parse_ascii(&text)
    }
}

fn pgm_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize), MapError> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if i >= bytes.len() {
            return Err(MapError::Header("truncated PGM header".into()));
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i))
}

pub fn parse_pgm(bytes: &[u8], sc: &Sidecar) -> Result<OccupancyGrid, MapError> {
    let (head, mut pos) = pgm_tokens(bytes, 4)?;
    let num = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| MapError::Header(format!("bad PGM header field `{s}`")))
    };
    let (width, height, maxval) = (num(&head[1])? as usize, num(&head[2])? as usize, num(&head[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(MapError::Header(format!("bad PGM geometry {width}x{height} maxval {maxval}")));
    }
    let n = width * height;
    let values: Vec<u32> = match head[0].as_str() {
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let vals: Result<Vec<u32>, _> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(|l| l.split_whitespace())
                .map(num)
                .collect();
            vals?
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let raw = bytes.get(pos..).unwrap_or(&[]);
            if maxval < 256 {
                raw.iter().map(|&b| b as u32).collect()
            } else {
                raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as u32).collect()
            }
        }
        other => return Err(MapError::Header(format!("unsupported magic `{other}`"))),
    };
    if values.len() != n {
        return Err(MapError::Dimensions {
            expected: n,
            found: values.len(),
        });
    }
    let cells = values
        .into_iter()
        .map(|v| sc.classify(v.min(maxval), maxval))
        .collect();
    OccupancyGrid::new(width, height, sc.resolution, sc.origin, cells)
}

/// Binary (P5) PGM raster of the grid using the sidecar's thresholds.
pub fn encode_pgm(grid: &OccupancyGrid, sc: &Sidecar) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    out.extend(grid.cells.iter().map(|&c| sc.pixel(c)));
    out
}

/// Writes `path` (P5) and its sidecar.
pub fn save_pgm(grid: &OccupancyGrid, path: impl AsRef<Path>) -> Result<(), MapError> {
    let path = path.as_ref();
    let sc = Sidecar {
        resolution: grid.resolution,
        origin: grid.origin,
        ..Sidecar::default()
    };
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| MapError::Io { path: p, source }
    };
    fs::write(path, encode_pgm(grid, &sc)).map_err(io_err(path))?;
    let sc_path = sidecar_path(path);
    fs::write(&sc_path, sc.render()).map_err(io_err(&sc_path))
}

/// ASCII map: `#` occupied, `.` free, `?` unknown, one row per line.
/// Optional leading `% key: value` lines carry `resolution` and `origin`.
pub fn parse_ascii(text: &str) -> Result<(OccupancyGrid, Sidecar), MapError> {
    let mut sc = Sidecar::default();
    let mut rows: Vec<Vec<CellState>> = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if let Some(meta) = line.strip_prefix('%') {
            let meta_sc = Sidecar::parse(meta, Path::new("<ascii header>"))?;
            if meta.contains("resolution") {
                sc.resolution = meta_sc.resolution;
            }
            if meta.contains("origin") {
                sc.origin = meta_sc.origin;
            }
            if meta.contains("closed_world") {
                sc.closed_world = meta_sc.closed_world;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let row = line
            .chars()
            .map(|ch| match ch {
                '#' => Ok(CellState::Occupied),
                '.' => Ok(CellState::Free),
                '?' => Ok(CellState::Unknown),
                other => Err(MapError::Header(format!("unexpected character `{other}` in ASCII map"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(MapError::Dimensions {
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let grid = OccupancyGrid::new(width, height, sc.resolution, sc.origin, rows.concat())?;
    Ok((grid, sc))
}

pub fn encode_ascii(grid: &OccupancyGrid) -> String {
    let mut out = format!(
        "% resolution: {}\n% origin: {} {}\n",
        grid.resolution, grid.origin.x, grid.origin.y
    );
    for row in grid.cells.chunks(grid.width) {
        out.extend(row.iter().map(|c| match c {
            CellState::Occupied => '#',
            CellState::Free => '.',
            CellState::Unknown => '?',
        }));
        out.push('\n');
    }
    out
}

pub fn save_ascii(grid: &OccupancyGrid, path: impl AsRef<Path>) -> Result<(), MapError> {
    let path = path.as_ref();
    fs::write(path, encode_ascii(grid)).map_err(|source| MapError::Io {
        path: path.to_path_buf(),
        source,
    })
}
