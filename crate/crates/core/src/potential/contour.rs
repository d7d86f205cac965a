//! Marching-squares extraction of the boundary of `E_rho`.
//!
//! The traced field is `log L(z) + 2 log rho`, non-negative exactly on the
//! level set. Components are counted on grid nodes (4-connectivity, plus
//! the diagonal of a saddle cell whose centre lies inside). The level
//! function has logarithmic poles at the charged points `a`, `b`; when the
//! pole bubble is smaller than a grid cell it is resolved on a local grid
//! centred on the pole and counted as a component of its own.

use num_complex::Complex64;
use rayon::prelude::*;

use super::LevelSetSpec;
use crate::error::{Error, Result};

/// Finite stand-in for the value at a pole.
const LOG_CEILING: f64 = 700.0;
const MIN_RESOLUTION: usize = 64;
const LOCAL_HALF_NODES: usize = 16;
const LOCAL_MIN_NODES: usize = 50;
const LOCAL_MAX_ZOOMS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Window {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// One isoline. Closed polylines repeat their first point at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub component: usize,
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub rho: f64,
    pub polylines: Vec<Polyline>,
    pub component_count: usize,
    pub warnings: Vec<String>,
}

impl ContourSet {
    pub fn has_warning(&self) -> bool {
        !self.warnings.is_empty()
    }
}

struct Grid {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    values: Vec<f64>,
}

impl Grid {
    fn eval(
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        field: &(impl Fn(f64, f64) -> f64 + Sync),
    ) -> Self {
        let rows: Vec<Vec<f64>> = (0..ny)
            .into_par_iter()
            .map(|j| {
                let y = y0 + j as f64 * dy;
                (0..nx).map(|i| field(x0 + i as f64 * dx, y)).collect()
            })
            .collect();
        Grid {
            nx,
            ny,
            x0,
            y0,
            dx,
            dy,
            values: rows.concat(),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn inside(&self, i: usize, j: usize) -> bool {
        self.at(i, j) >= 0.0
    }

    fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.0[hi] = lo;
        }
    }
}

/// Edge identifiers: horizontal edge `(i, j)-(i+1, j)` and vertical edge `(i, j)-(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

struct Segment {
    from: Edge,
    to: Edge,
    /// node index of an inside corner of the cell
    anchor: usize,
}

/// Segments of all cells; saddle cells are resolved by `centre_inside`.
fn march(
    grid: &Grid,
    centre_inside: &impl Fn(usize, usize) -> bool,
    uf: &mut UnionFind,
) -> Vec<Segment> {
    let mut segments = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let inside: Vec<bool> = corners
                .iter()
                .map(|&(ci, cj)| grid.inside(ci, cj))
                .collect();
            let count = inside.iter().filter(|&&b| b).count();
            if count == 0 || count == 4 {
                continue;
            }
            let edges = [
                Edge::H(i, j),
                Edge::V(i + 1, j),
                Edge::H(i, j + 1),
                Edge::V(i, j),
            ];
            // edge k joins corners k and k+1, so corner k touches edges k-1 and k
            let incident = |k: usize| (edges[(k + 3) % 4], edges[k]);
            let node = |k: usize| corners[k].1 * grid.nx + corners[k].0;
            let saddle = count == 2 && inside[0] == inside[2];
            if saddle {
                let centre = centre_inside(i, j);
                if centre {
                    let (p, q) = if inside[0] { (0, 2) } else { (1, 3) };
                    uf.union(node(p), node(q));
                }
                for k in 0..4 {
                    if inside[k] != centre {
                        let (e1, e2) = incident(k);
                        let anchor = if inside[k] {
                            node(k)
                        } else {
                            node((k + 1) % 4)
                        };
                        segments.push(Segment {
                            from: e1,
                            to: e2,
                            anchor,
                        });
                    }
                }
                continue;
            }
            // a single corner differs from the other three, or two adjacent corners are inside
            let minority = count == 1 || count == 3;
            if minority {
                let odd = (0..4).find(|&k| inside[k] == (count == 1)).unwrap_or(0);
                let (e1, e2) = incident(odd);
                let anchor = node((0..4).find(|&k| inside[k]).unwrap_or(0));
                segments.push(Segment {
                    from: e1,
                    to: e2,
                    anchor,
                });
            } else {
                let crossing: Vec<Edge> = (0..4)
                    .filter(|&k| inside[k] != inside[(k + 1) % 4])
                    .map(|k| edges[k])
                    .collect();
                let anchor = node((0..4).find(|&k| inside[k]).unwrap_or(0));
                segments.push(Segment {
                    from: crossing[0],
                    to: crossing[1],
                    anchor,
                });
            }
        }
    }
    segments
}

fn crossing_point(grid: &Grid, e: Edge) -> (f64, f64) {
    let ((i0, j0), (i1, j1)) = match e {
        Edge::H(i, j) => ((i, j), (i + 1, j)),
        Edge::V(i, j) => ((i, j), (i, j + 1)),
    };
    let (f0, f1) = (grid.at(i0, j0), grid.at(i1, j1));
    let t = if f0 == f1 {
        0.5
    } else {
        (f0 / (f0 - f1)).clamp(0.0, 1.0)
    };
    let (x0, y0) = grid.point(i0, j0);
    let (x1, y1) = grid.point(i1, j1);
    (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
}

/// Links segments sharing edges into polylines; returns (points, closed, anchor).
fn link(grid: &Grid, segments: &[Segment]) -> Vec<(Vec<(f64, f64)>, bool, usize)> {
    use std::collections::HashMap;
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, s) in segments.iter().enumerate() {
        by_edge.entry(s.from).or_default().push(k);
        by_edge.entry(s.to).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut chain = vec![segments[start].from, segments[start].to];
        let mut closed = false;
        // extend forward, then backward
        for direction in 0..2 {
            loop {
                let tip = if direction == 0 {
                    *chain.last().unwrap()
                } else {
                    chain[0]
                };
                let next = by_edge[&tip].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let s = &segments[k];
                let other = if s.from == tip { s.to } else { s.from };
                if direction == 0 {
                    if other == chain[0] {
                        closed = true;
                        break;
                    }
                    chain.push(other);
                } else {
                    chain.insert(0, other);
                }
            }
            if closed {
                break;
            }
        }
        let mut points: Vec<(f64, f64)> = chain.iter().map(|&e| crossing_point(grid, e)).collect();
        if closed {
            points.push(points[0]);
        }
        out.push((points, closed, segments[start].anchor));
    }
    out
}

struct Bubble {
    points: Vec<Vec<(f64, f64)>>,
    min_x: f64,
    resolved: bool,
}

/// Resolves the level-set bubble around a pole at `(cx, 0)` whose
/// neighbouring grid nodes are all outside.
fn resolve_bubble(cx: f64, cell: f64, field: &(impl Fn(f64, f64) -> f64 + Sync)) -> Bubble {
    let n = 2 * LOCAL_HALF_NODES + 1;
    let mut half = 0.5 * cell;
    let mut last = None;
    for _ in 0..LOCAL_MAX_ZOOMS {
        let h = half / LOCAL_HALF_NODES as f64;
        let mut grid = Grid::eval(n, n, cx - half, -half, h, h, field);
        let centre = LOCAL_HALF_NODES * n + LOCAL_HALF_NODES;
        grid.values[centre] = LOG_CEILING;
        // flood fill from the pole
        let mut member = vec![false; n * n];
        let mut stack = vec![centre];
        member[centre] = true;
        let mut touches = false;
        let mut count = 0;
        while let Some(k) = stack.pop() {
            count += 1;
            let (i, j) = (k % n, k / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                touches = true;
            }
            let neighbours = [
                (i > 0).then(|| k - 1),
                (i + 1 < n).then(|| k + 1),
                (j > 0).then(|| k - n),
                (j + 1 < n).then(|| k + n),
            ];
            for m in neighbours.into_iter().flatten() {
                if !member[m] && grid.values[m] >= 0.0 {
                    member[m] = true;
                    stack.push(m);
                }
            }
        }
        for k in 0..n * n {
            if !member[k] {
                grid.values[k] = grid.values[k].min(-1e-300);
            }
        }
        let mut uf = UnionFind::new(n * n);
        let segments = march(&grid, &|_, _| false, &mut uf);
        let polylines: Vec<Vec<(f64, f64)>> = link(&grid, &segments)
            .into_iter()
            .map(|(p, _, _)| p)
            .collect();
        let min_x = polylines.iter().flatten().map(|p| p.0).fold(cx, f64::min);
        let bubble = Bubble {
            points: polylines,
            min_x,
            resolved: !touches,
        };
        if touches || count >= LOCAL_MIN_NODES {
            return bubble;
        }
        last = Some(bubble);
        half /= 8.0;
        if half < f64::EPSILON * cx.abs().max(1.0) {
            break;
        }
    }
    last.unwrap_or(Bubble {
        points: Vec::new(),
        min_x: cx,
        resolved: true,
    })
}

/// Traces `{z : L(z) = rho^-2}` on a `resolution.0 x resolution.1` node grid.
pub fn trace_contours(
    spec: &LevelSetSpec,
    rho: f64,
    window: Window,
    resolution: (usize, usize),
) -> Result<ContourSet> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::domain(format!("rho must exceed 1, got {rho}")));
    }
    let Window {
        x_min,
        x_max,
        y_min,
        y_max,
    } = window;
    if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite())
        || x_min >= x_max
        || y_min >= y_max
    {
        return Err(Error::domain(
            "window must be a non-degenerate finite rectangle",
        ));
    }
    let (nx, ny) = resolution;
    if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}"
        )));
    }
    let mut warnings = Vec::new();
    let mut must_contain = vec![(-1.0, "-1"), (1.0, "1")];
    if spec.alpha > 0.0 {
        must_contain.push((spec.a, "a"));
    }
    if spec.beta > 0.0 {
        must_contain.push((spec.b, "b"));
    }
    for (x, name) in must_contain {
        if !window.contains(x, 0.0) {
            warnings.push(format!("window does not contain {name} = {x}"));
        }
    }

    let shift = 2.0 * rho.ln();
    let field = |x: f64, y: f64| {
        let v = spec.log_level(Complex64::new(x, y)) + shift;
        if v.is_nan() {
            LOG_CEILING
        } else {
            v.min(LOG_CEILING)
        }
    };
    let dx = (x_max - x_min) / (nx - 1) as f64;
    let dy = (y_max - y_min) / (ny - 1) as f64;
    let grid = Grid::eval(nx, ny, x_min, y_min, dx, dy, &field);

    let mut uf = UnionFind::new(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if !grid.inside(i, j) {
                continue;
            }
            let k = j * nx + i;
            if i + 1 < nx && grid.inside(i + 1, j) {
                uf.union(k, k + 1);
            }
            if j + 1 < ny && grid.inside(i, j + 1) {
                uf.union(k, k + nx);
            }
        }
    }
    let centre_inside = |i: usize, j: usize| {
        field(x_min + (i as f64 + 0.5) * dx, y_min + (j as f64 + 0.5) * dy) >= 0.0
    };
    let segments = march(&grid, &centre_inside, &mut uf);

    let on_border = (0..nx).any(|i| grid.inside(i, 0) || grid.inside(i, ny - 1))
        || (0..ny).any(|j| grid.inside(0, j) || grid.inside(nx - 1, j));
    if on_border {
        warnings.push("level set reaches the window boundary; isolines are cut open".into());
    }

    // components in left-to-right discovery order: (min x, key)
    enum Key {
        Grid(usize),
        Bubble(usize),
    }
    let mut order: Vec<(f64, f64, Key)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for i in 0..nx {
        for j in 0..ny {
            if grid.inside(i, j) {
                let root = uf.find(j * nx + i);
                if seen.insert(root) {
                    let (x, y) = grid.point(i, j);
                    order.push((x, y, Key::Grid(root)));
                }
            }
        }
    }

    let mut bubbles = Vec::new();
    for (c, e) in [(spec.a, spec.alpha), (spec.b, spec.beta)] {
        if e <= 0.0 || !window.contains(c, 0.0) {
            continue;
        }
        let i = (((c - x_min) / dx).floor() as usize).min(nx - 2);
        let j = (((0.0 - y_min) / dy).floor() as usize).min(ny - 2);
        let near = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
        if near.iter().any(|&(ci, cj)| grid.inside(ci, cj)) {
            continue;
        }
        let bubble = resolve_bubble(c, dx.min(dy), &field);
        if !bubble.resolved {
            warnings.push(format!(
                "level-set bubble around {c} is comparable to the grid cell"
            ));
        }
        order.push((bubble.min_x, 0.0, Key::Bubble(bubbles.len())));
        bubbles.push(bubble);
    }
    order.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let mut component_of_root = std::collections::HashMap::new();
    let mut component_of_bubble = vec![0; bubbles.len()];
    for (index, (_, _, key)) in order.iter().enumerate() {
        match key {
            Key::Grid(root) => {
                component_of_root.insert(*root, index);
            }
            Key::Bubble(b) => component_of_bubble[*b] = index,
        }
    }

    let mut polylines: Vec<Polyline> = link(&grid, &segments)
        .into_iter()
        .map(|(points, closed, anchor)| Polyline {
            component: component_of_root[&uf.find(anchor)],
            points,
            closed,
        })
        .collect();
    for (b, bubble) in bubbles.into_iter().enumerate() {
        for points in bubble.points {
            polylines.push(Polyline {
                component: component_of_bubble[b],
                closed: points.first() == points.last() && points.len() > 2,
                points,
            });
        }
    }
    polylines.sort_by_key(|p| p.component);

    Ok(ContourSet {
        rho,
        polylines,
        component_count: order.len(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::solve_support;

    #[test]
    fn ellipse_case() {
        let spec = solve_support(-1.0, 0.0, 1.0, 0.0).unwrap();
        let window = Window::new(-2.0, 2.0, -1.5, 1.5);
        let set = trace_contours(&spec, 2.0, window, (512, 512)).unwrap();
        assert_eq!(set.component_count, 1);
        assert!(!set.has_warning());
        assert_eq!(set.polylines.len(), 1);
        assert!(set.polylines[0].closed);
        let worst = set.polylines[0]
            .points
            .iter()
            .map(|&(x, y)| (spec.level_value(Complex64::new(x, y)) - 0.25).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
    }

    #[test]
    fn small_window_warns() {
        let spec = solve_support(-1.0, 0.0, 1.0, 0.0).unwrap();
        let set = trace_contours(&spec, 2.0, Window::new(-1.1, 1.1, -0.5, 0.5), (64, 64)).unwrap();
        assert!(set.has_warning());
        assert!(set.polylines.iter().any(|p| !p.closed));
    }

    #[test]
    fn invalid_inputs() {
        let spec = solve_support(-1.0, 0.0, 1.0, 0.0).unwrap();
        let w = Window::new(-2.0, 2.0, -1.0, 1.0);
        assert!(trace_contours(&spec, 1.0, w, (64, 64)).is_err());
        assert!(trace_contours(&spec, 2.0, w, (32, 64)).is_err());
        assert!(trace_contours(&spec, 2.0, Window::new(1.0, 1.0, -1.0, 1.0), (64, 64)).is_err());
    }

    #[test]
    fn two_components_when_a_is_pinned() {
        let spec = solve_support(-1.5, 1.0, 1.0, 1.0).unwrap();
        let set =
            trace_contours(&spec, 1.05, Window::new(-2.5, 2.5, -1.5, 1.5), (512, 512)).unwrap();
        assert_eq!(set.component_count, 2);
        // components are numbered left to right: the one around a comes first
        let first = set.polylines.iter().find(|p| p.component == 0).unwrap();
        assert!(first.points.iter().all(|p| p.0 < -1.0));
    }
}
