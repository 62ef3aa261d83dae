use super::{DistanceKind, TopTwo};

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { left: usize, right: usize },
}

/// Static kd-tree over row-major points with tight per-node bounding boxes.
#[derive(Clone, Debug)]
pub struct KdTree {
    arity: usize,
    points: Vec<f64>,
    /// Point indices, permuted so every leaf owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl KdTree {
    pub fn build(points: &[f64], arity: usize) -> Self {
        let n = points.len().checked_div(arity).unwrap_or(0);
        let mut tree = KdTree {
            arity,
            points: points.to_vec(),
            order: (0..n).collect(),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.arity..(i + 1) * self.arity]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        let a = self.arity;
        let mut lo = vec![f64::INFINITY; a];
        let mut hi = vec![f64::NEG_INFINITY; a];
        for &i in &self.order[start..end] {
            for (k, &v) in self.point(i).iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        let (axis, spread) =
            (0..a)
                .map(|k| (k, hi[k] - lo[k]))
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, c| if c.1 > best.1 { c } else { best },
                );
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        let (points, arity) = (&self.points, self.arity);
        self.order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
            points[x * arity + axis].total_cmp(&points[y * arity + axis])
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { left, right };
        id
    }

    fn bound(&self, node: usize, q: &[f64], kind: DistanceKind) -> f64 {
        let r = node * self.arity..(node + 1) * self.arity;
        kind.box_bound(q, &self.lo[r.clone()], &self.hi[r])
    }

    pub(crate) fn nearest_two(&self, q: &[f64], kind: DistanceKind) -> TopTwo {
        let mut top = TopTwo::new();
        if !self.nodes.is_empty() {
            self.visit(0, q, kind, &mut top);
        }
        top
    }

    fn visit(&self, node: usize, q: &[f64], kind: DistanceKind, top: &mut TopTwo) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    top.offer(kind.distance(q, self.point(i)), i);
                }
            }
            Node::Split { left, right } => {
                let (bl, br) = (self.bound(left, q, kind), self.bound(right, q, kind));
                let near_first = if bl <= br {
                    [(left, bl), (right, br)]
                } else {
                    [(right, br), (left, bl)]
                };
                for (child, b) in near_first {
                    // equal bounds may still hide a lower-index tie
                    if b <= top.worst() {
                        self.visit(child, q, kind, top);
                    }
                }
            }
        }
    }
}
