//! Exact nearest-neighbor index over a fixed point set.
//!
//! Squared distances are computed with [`squared_distance`] for both the
//! index and any brute-force scan, so both return bit-identical minima.

use nalgebra::Point3;

const LEAF_SIZE: usize = 8;

/// Hint meaning "no earlier result".
pub const NO_HINT: usize = usize::MAX;

#[inline]
pub fn squared_distance(a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Point3<f64>>,
    nodes: Vec<Node>,
}

impl PointIndex {
    pub fn build(points: &[Point3<f64>]) -> Self {
        let mut points = points.to_vec();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let n = points.len();
            build_node(&mut points, 0, n, &mut nodes);
        }
        PointIndex { points, nodes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared distance from `q` to its nearest indexed point (`+inf` when empty).
    pub fn nearest_squared(&self, q: &Point3<f64>) -> f64 {
        self.nearest_from(q, NO_HINT).0
    }

    /// Nearest indexed point as `(squared distance, slot)`, starting the
    /// search from the bound given by slot `hint` (an earlier result, or
    /// [`NO_HINT`]). The distance is the same as without a hint.
    pub fn nearest_from(&self, q: &Point3<f64>, hint: usize) -> (f64, usize) {
        let mut best = match self.points.get(hint) {
            Some(p) => (squared_distance(q, p), hint),
            None => (f64::INFINITY, NO_HINT),
        };
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: &Point3<f64>, best: &mut (f64, usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for (i, p) in self.points[start..end].iter().enumerate() {
                    let d = squared_distance(q, p);
                    if d < best.0 {
                        *best = (d, start + i);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // Far-side points are at least |diff| away along `axis`.
                if diff * diff < best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn build_node(points: &mut [Point3<f64>], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut points[start..end];
    let axis = widest_axis(slice);
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let value = slice[mid][axis];
    nodes.push(Node::Leaf { start, end });
    let left = build_node(points, start, start + mid, nodes);
    let right = build_node(points, start + mid, end, nodes);
    nodes[id] = Node::Split { axis, value, left, right };
    id
}

fn widest_axis(points: &[Point3<f64>]) -> usize {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let spread = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    if spread[0] >= spread[1] && spread[0] >= spread[2] {
        0
    } else if spread[1] >= spread[2] {
        1
    } else {
        2
    }
}
