//! MovingAI `.map` and `.scen` files and 4-connected grid queries.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Result, SimError};

/// Row-major cell index, `row * width + col`.
pub type Cell = usize;

/// Neighbour order used everywhere: up, right, down, left. Up is `row - 1`.
pub const DIRECTIONS: [(isize, isize); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    open: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, open: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || open.len() != width * height {
            return Err(SimError::Dimensions { width, height, cells: open.len() });
        }
        Ok(Self { width, height, open })
    }

    pub fn open(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![true; width * height]).expect("non-empty grid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.open.len()
    }

    pub fn is_open(&self, c: Cell) -> bool {
        self.open.get(c).copied().unwrap_or(false)
    }

    pub fn cell(&self, col: usize, row: usize) -> Cell {
        row * self.width + col
    }

    /// `(col, row)`, i.e. `(x, y)`.
    pub fn coords(&self, c: Cell) -> (usize, usize) {
        (c % self.width, c / self.width)
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.open.len()).filter(|&c| self.open[c])
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// Open neighbour in direction `d` of [`DIRECTIONS`].
    pub fn step(&self, c: Cell, d: usize) -> Option<Cell> {
        let (x, y) = self.coords(c);
        let (dx, dy) = DIRECTIONS[d];
        let nx = x.checked_add_signed(dx).filter(|&v| v < self.width)?;
        let ny = y.checked_add_signed(dy).filter(|&v| v < self.height)?;
        let n = self.cell(nx, ny);
        self.open[n].then_some(n)
    }

    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        (0..4).filter_map(move |d| self.step(c, d))
    }

    /// BFS hop distances from `sources` through open cells.
    pub fn bfs(&self, sources: &[Cell]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.open.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.is_open(s) && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(c) = queue.pop_front() {
            let d = dist[c].expect("queued cells have a distance");
            for n in self.neighbors(c) {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Connected component label per open cell; labels follow the smallest
    /// cell index of each component.
    pub fn components(&self) -> Vec<Option<usize>> {
        let mut label = vec![None; self.open.len()];
        let mut next = 0;
        for c in self.open_cells() {
            if label[c].is_some() {
                continue;
            }
            let mut queue = VecDeque::from([c]);
            label[c] = Some(next);
            while let Some(u) = queue.pop_front() {
                for n in self.neighbors(u) {
                    if label[n].is_none() {
                        label[n] = Some(next);
                        queue.push_back(n);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// The map in MovingAI format.
    pub fn to_text(&self) -> String {
        let mut out = format!("type octile\nheight {}\nwidth {}\nmap\n", self.height, self.width);
        for row in self.open.chunks(self.width) {
            for &o in row {
                out.push(if o { '.' } else { '@' });
            }
            out.push('\n');
        }
        out
    }

    /// Map drawing with one character per cell, `marks` overriding.
    pub fn render(&self, marks: &[(Cell, char)]) -> String {
        let mut chars: Vec<char> = self.open.iter().map(|&o| if o { '.' } else { '@' }).collect();
        for &(c, ch) in marks {
            chars[c] = ch;
        }
        let mut out = String::new();
        for row in chars.chunks(self.width) {
            let _ = writeln!(out, "{}", row.iter().collect::<String>());
        }
        out
    }
}

/// Parses a MovingAI `.map`. `.` and `G` are open; `@`, `T` and `O` are blocked.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut header = |key: &str| -> Result<String> {
        let (n, line) = lines.next().ok_or(SimError::Parse { line: 0, message: format!("missing `{key}` header") })?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(SimError::Parse { line: n, message: format!("expected `{key}`") });
        }
        Ok(parts.collect::<Vec<_>>().join(" "))
    };
    header("type")?;
    let dim = |s: String, key: &str| {
        s.parse::<usize>().map_err(|_| SimError::Parse { line: 0, message: format!("bad {key} `{s}`") })
    };
    let height = dim(header("height")?, "height").map_err(|e| e.at_line(2))?;
    let width = dim(header("width")?, "width").map_err(|e| e.at_line(3))?;
    header("map")?;

    let mut open = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (n, line) in lines {
        if rows == height {
            if line.trim().is_empty() {
                continue;
            }
            return Err(SimError::Parse { line: n, message: "more rows than the declared height".into() });
        }
        if line.chars().count() != width {
            return Err(SimError::Parse {
                line: n,
                message: format!("row has {} cells, expected {width}", line.chars().count()),
            });
        }
        for ch in line.chars() {
            open.push(match ch {
                '.' | 'G' => true,
                '@' | 'T' | 'O' => false,
                other => {
                    return Err(SimError::Parse { line: n, message: format!("unknown cell `{other}`") });
                }
            });
        }
        rows += 1;
    }
    if rows != height {
        return Err(SimError::Parse {
            line: text.lines().count(),
            message: format!("found {rows} rows, expected {height}"),
        });
    }
    GridMap::new(width, height, open)
}

/// One task of a MovingAI `.scen` (version 1) file; coordinates are `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenEntry {
    pub bucket: u32,
    pub map: String,
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub optimal_length: f64,
}

pub fn parse_scen(text: &str) -> Result<Vec<ScenEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || (n == 1 && line.starts_with("version")) {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(SimError::Parse { line: n, message: format!("expected 9 fields, found {}", f.len()) });
        }
        let bad = |what: &str| SimError::Parse { line: n, message: format!("bad {what}") };
        let int = |s: &str, what: &str| s.trim().parse::<usize>().map_err(|_| bad(what));
        entries.push(ScenEntry {
            bucket: f[0].trim().parse().map_err(|_| bad("bucket"))?,
            map: f[1].to_string(),
            width: int(f[2], "width")?,
            height: int(f[3], "height")?,
            start: (int(f[4], "start x")?, int(f[5], "start y")?),
            goal: (int(f[6], "goal x")?, int(f[7], "goal y")?),
            optimal_length: f[8].trim().parse().map_err(|_| bad("optimal length"))?,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_open_map() {
        let g = parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n..\n").unwrap();
        assert_eq!(g.open_count(), 4);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn blocked_cells() {
        let g = parse_map("type octile\nheight 2\nwidth 3\nmap\n.@T\nGO.\n").unwrap();
        assert_eq!(g.open_cells().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(g.to_text(), "type octile\nheight 2\nwidth 3\nmap\n.@@\n.@.\n");
    }

    #[test]
    fn short_row_reports_its_line() {
        let err = parse_map("type octile\nheight 2\nwidth 3\nmap\n...\n..\n").unwrap_err();
        assert!(matches!(err, SimError::Parse { line: 6, .. }), "{err}");
        let err = parse_map("type octile\nheight 1\nwidth 2\nmap\n.x\n").unwrap_err();
        assert!(matches!(err, SimError::Parse { line: 5, .. }));
        let err = parse_map("type octile\nheight two\nwidth 2\nmap\n").unwrap_err();
        assert!(matches!(err, SimError::Parse { line: 2, .. }));
        assert!(parse_map("type octile\nheight 2\nwidth 1\nmap\n.\n").is_err());
    }

    #[test]
    fn steps_respect_borders_and_walls() {
        let g = parse_map("type octile\nheight 2\nwidth 2\nmap\n.@\n..\n").unwrap();
        assert_eq!(g.step(0, 0), None);
        assert_eq!(g.step(0, 1), None);
        assert_eq!(g.step(0, 2), Some(2));
        assert_eq!(g.bfs(&[0])[3], Some(2));
        assert_eq!(g.components()[3], Some(0));
    }

    #[test]
    fn scenario_lines() {
        let text = "version 1\n0\tm.map\t8\t8\t1\t2\t3\t4\t4.00000000\n";
        let s = parse_scen(text).unwrap();
        assert_eq!(s[0].start, (1, 2));
        assert_eq!(s[0].goal, (3, 4));
        assert!(parse_scen("version 1\n0\tm.map\t8\n").is_err());
    }
}
