//! Balanced trees and their Sarkar embedding in the Poincaré disk.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::manifold::{mobius_add, PoincarePoint};
use crate::sliced::DiscreteMeasure;

/// Largest tree [`balanced_tree`] will build.
pub const MAX_TREE_NODES: usize = 1_000_000;

/// A balanced `r`-ary tree of depth `h`.
///
/// Nodes are numbered in breadth-first order from the root `0`, so the
/// children of node `i` are `r·i + 1 ..= r·i + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    branching: usize,
    depth: usize,
}

/// Build the complete `r`-ary tree of depth `h`.
pub fn balanced_tree(r: usize, h: usize) -> Result<Tree> {
    if r < 2 || h < 1 {
        return Err(Error::domain(format!("need r >= 2 and h >= 1, got r = {r}, h = {h}")));
    }
    // Σ_{k ≤ h} r^k with an overflow guard.
    let mut total: usize = 0;
    let mut level: usize = 1;
    for k in 0..=h {
        total = total
            .checked_add(level)
            .filter(|&t| t <= MAX_TREE_NODES)
            .ok_or(Error::TooLarge { size: total.saturating_add(level), cap: MAX_TREE_NODES })?;
        if k < h {
            level = level.checked_mul(r).ok_or(Error::TooLarge { size: usize::MAX, cap: MAX_TREE_NODES })?;
        }
    }
    let internal = total - level;
    let mut children = vec![Vec::new(); total];
    let mut parent = vec![None; total];
    for (i, c) in children.iter_mut().enumerate().take(internal) {
        *c = (r * i + 1..=r * i + r).collect();
        for &k in c.iter() {
            parent[k] = Some(i);
        }
    }
    Ok(Tree { children, parent, branching: r, depth: h })
}

impl Tree {
    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    /// Edges `(parent, child)` in breadth-first order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (p, c)))
    }

    /// Number of edges from the root.
    pub fn level(&self, mut u: usize) -> usize {
        let mut k = 0;
        while let Some(p) = self.parent[u] {
            u = p;
            k += 1;
        }
        k
    }
}

/// Hyperbolic length given to every edge for scale `τ`: `2·artanh(τ)`, so a
/// child of the root sits at Euclidean radius `τ`.
pub fn edge_length(tau: f64) -> f64 {
    2.0 * tau.atanh()
}

/// A tree placed in the Poincaré disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEmbedding {
    tree: Tree,
    points: Vec<PoincarePoint>,
    tau: f64,
}

impl TreeEmbedding {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn points(&self) -> &[PoincarePoint] {
        &self.points
    }

    pub fn point(&self, u: usize) -> &PoincarePoint {
        &self.points[u]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Write `node_id,parent_id,x,y` (the root's parent is `-1`).
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "node_id,parent_id,x,y")?;
        for (u, z) in self.points.iter().enumerate() {
            let parent = self.tree.parent(u).map_or(-1, |p| p as i64);
            let c = z.coords();
            writeln!(out, "{u},{parent},{},{}", fmt_float(c[0]), fmt_float(c[1]))?;
        }
        Ok(())
    }
}

/// Sarkar's construction in two dimensions.
///
/// Nodes are visited breadth-first. For node `u` with parent `p`, the disk is
/// translated so that `u` sits at the origin; the children are then spread
/// at angles `2πk/deg(u)` from the image of `p` (or from angle 0 at the
/// root), each at hyperbolic distance `2·artanh(τ)`, and translated back.
pub fn sarkar_embed(tree: &Tree, tau: f64) -> Result<TreeEmbedding> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    // Radius of a point at hyperbolic distance ℓ = 2 artanh τ from the origin.
    let radius = tau;
    let mut z: Vec<Vec<f64>> = vec![Vec::new(); tree.len()];
    z[tree.root()] = vec![0.0, 0.0];
    for u in 0..tree.len() {
        let kids = tree.children(u);
        if kids.is_empty() {
            continue;
        }
        let neg_u: Vec<f64> = z[u].iter().map(|c| -c).collect();
        let (base, deg) = match tree.parent(u) {
            Some(p) => {
                let q = mobius_add(&neg_u, &z[p]);
                (q[1].atan2(q[0]), kids.len() + 1)
            }
            None => (0.0, kids.len()),
        };
        for (k, &c) in kids.iter().enumerate() {
            // The parent occupies slot 0 of the fan around a non-root node.
            let slot = if tree.parent(u).is_some() { k + 1 } else { k };
            let theta = base + 2.0 * PI * slot as f64 / deg as f64;
            let local = [radius * theta.cos(), radius * theta.sin()];
            z[c] = mobius_add(&z[u], &local);
        }
    }
    let points = z.into_iter().map(PoincarePoint::from_raw).collect();
    Ok(TreeEmbedding { tree: tree.clone(), points, tau })
}

/// Uniform measure over the embedded nodes.
pub fn embedding_to_measure(e: &TreeEmbedding) -> Result<DiscreteMeasure> {
    DiscreteMeasure::uniform_poincare(&e.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{lorentz_distance, norm_sq, poincare_distance, to_lorentz};

    fn max_edge_error(e: &TreeEmbedding) -> f64 {
        let l = edge_length(e.tau());
        e.tree().edges().map(|(p, c)| (poincare_distance(e.point(p), e.point(c)) - l).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn node_counts() {
        assert_eq!(balanced_tree(2, 1).unwrap().len(), 3);
        assert_eq!(balanced_tree(2, 3).unwrap().len(), 15);
        assert_eq!(balanced_tree(3, 2).unwrap().len(), 13);
        for (r, h) in [(2usize, 6usize), (4, 3), (5, 4)] {
            let n = (r.pow(h as u32 + 1) - 1) / (r - 1);
            assert_eq!(balanced_tree(r, h).unwrap().len(), n);
        }
        assert!(matches!(balanced_tree(2, 25), Err(Error::TooLarge { .. })));
        assert!(matches!(balanced_tree(1000, 3), Err(Error::TooLarge { .. })));
        assert!(balanced_tree(1, 3).is_err());
        assert!(balanced_tree(2, 0).is_err());
    }

    #[test]
    fn tree_structure() {
        let t = balanced_tree(3, 2).unwrap();
        assert_eq!(t.children(0), &[1, 2, 3]);
        assert_eq!(t.children(2), &[7, 8, 9]);
        assert_eq!(t.parent(9), Some(2));
        assert_eq!(t.parent(0), None);
        assert_eq!(t.edges().count(), 12);
        assert_eq!(t.level(12), 2);
        assert!((4..13).all(|u| t.children(u).is_empty()));
    }

    #[test]
    fn single_edge_radius() {
        let t = balanced_tree(2, 1).unwrap();
        for tau in [0.05, 0.5, 0.9] {
            let e = sarkar_embed(&t, tau).unwrap();
            assert_eq!(e.point(0).coords(), &[0.0, 0.0]);
            let r = norm_sq(e.point(1).coords()).sqrt();
            assert!((r - (edge_length(tau) / 2.0).tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn star_is_symmetric() {
        let t = balanced_tree(5, 1).unwrap();
        let e = sarkar_embed(&t, 0.6).unwrap();
        let d0 = poincare_distance(e.point(0), e.point(1));
        let d12 = poincare_distance(e.point(1), e.point(2));
        for k in 1..=5 {
            assert!((poincare_distance(e.point(0), e.point(k)) - d0).abs() < 1e-12);
            let next = if k == 5 { 1 } else { k + 1 };
            assert!((poincare_distance(e.point(k), e.point(next)) - d12).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_lengths_are_exact() {
        for (r, h) in [(2, 5), (3, 3), (4, 2)] {
            let t = balanced_tree(r, h).unwrap();
            for tau in [0.05, 0.25, 0.5, 0.8] {
                let e = sarkar_embed(&t, tau).unwrap();
                assert!(max_edge_error(&e) < 1e-6, "r={r} h={h} tau={tau}");
                assert!(e.points().iter().all(|z| z.norm_sq() < 1.0));
            }
        }
    }

    #[test]
    fn children_are_equally_spaced_around_each_node() {
        let t = balanced_tree(3, 3).unwrap();
        let e = sarkar_embed(&t, 0.5).unwrap();
        for u in 1..t.len() {
            if t.children(u).is_empty() {
                continue;
            }
            let neg: Vec<f64> = e.point(u).coords().iter().map(|c| -c).collect();
            let mut angles: Vec<f64> = t
                .children(u)
                .iter()
                .chain(std::iter::once(&t.parent(u).unwrap()))
                .map(|&v| {
                    let q = mobius_add(&neg, e.point(v).coords());
                    q[1].atan2(q[0])
                })
                .collect();
            angles.sort_by(f64::total_cmp);
            for w in angles.windows(2) {
                assert!((w[1] - w[0] - PI / 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn monotone_in_tau() {
        let t = balanced_tree(2, 4).unwrap();
        let radii: Vec<f64> = [0.05, 0.25, 0.5, 0.8]
            .iter()
            .map(|&tau| {
                let e = sarkar_embed(&t, tau).unwrap();
                e.points().iter().map(|z| z.norm_sq().sqrt()).fold(0.0, f64::max)
            })
            .collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn path_distances() {
        // Tree distance bounds the embedded distance; straight chains (the
        // slot opposite the parent exists when r is odd) are geodesic.
        let t = balanced_tree(3, 4).unwrap();
        let tau = 0.5;
        let e = sarkar_embed(&t, tau).unwrap();
        let l = edge_length(tau);
        for u in 0..t.len() {
            let k = t.level(u) as f64;
            assert!(poincare_distance(e.point(0), e.point(u)) <= k * l + 1e-9);
        }
        // Root → 1 → middle child (slot 2 of 4, opposite the parent) → …
        let mut u = 1;
        for depth in 2..=4 {
            u = t.children(u)[1];
            let d = poincare_distance(e.point(0), e.point(u));
            assert!((d - depth as f64 * l).abs() < 0.05 * depth as f64 * l);
        }
    }

    #[test]
    fn deterministic_and_measure() {
        let t = balanced_tree(2, 3).unwrap();
        assert_eq!(sarkar_embed(&t, 0.3).unwrap(), sarkar_embed(&t, 0.3).unwrap());
        assert!(sarkar_embed(&t, 0.0).is_err());
        assert!(sarkar_embed(&t, 1.0).is_err());

        let e = sarkar_embed(&balanced_tree(2, 1).unwrap(), 0.4).unwrap();
        let m = embedding_to_measure(&e).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.weights(), &[1.0 / 3.0; 3]);

        let e = sarkar_embed(&t, 0.7).unwrap();
        let lor: Vec<_> = e.points().iter().map(to_lorentz).collect();
        for i in 0..e.len() {
            for j in 0..e.len() {
                let a = poincare_distance(e.point(i), e.point(j));
                assert!((a - lorentz_distance(&lor[i], &lor[j])).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn csv_export() {
        let e = sarkar_embed(&balanced_tree(2, 1).unwrap(), 0.5).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "node_id,parent_id,x,y");
        assert!(lines[1].starts_with("0,-1,"));
        assert!(lines[2].starts_with("1,0,"));
        assert_eq!(lines.len(), 4);
    }
}
