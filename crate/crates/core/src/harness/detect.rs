//! Coordinate-block decomposition read off from boundary normals.

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::linalg::Vector;

/// Normal coordinates at or below this are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Smooth normals sampled for quadric bodies.
pub const NORMAL_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Zero-based coordinate blocks, each sorted, ordered by first element.
    pub blocks: Vec<Vec<usize>>,
    pub normals_used: usize,
    /// Quadric bodies only: largest `|u_i u_j|` over sampled normals and
    /// coordinate pairs that share no constraint.
    pub cross_product: Option<f64>,
}

impl Partition {
    pub fn irreducible(&self) -> bool {
        self.blocks.len() == 1
    }

    /// `{1,2}{3}` style, one-based; `irreducible` for a single block.
    pub fn describe(&self) -> String {
        if self.irreducible() {
            return "irreducible".into();
        }
        self.blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect()
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// Connected components of the graph joining `i` and `j` whenever some
/// normal has both coordinates above [`SUPPORT_TOL`] in absolute value.
pub fn blocks_from_normals(n: usize, normals: &[Vector]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    for u in normals {
        let support: Vec<usize> = (0..n).filter(|&i| u[i].abs() > SUPPORT_TOL).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

pub fn detect_direct_sum(body: &Body, seed: u64) -> Result<Partition> {
    match body {
        Body::Polytope(p) => {
            let normals: Vec<Vector> = p.facets()?.into_iter().map(|f| f.normal).collect();
            Ok(Partition {
                blocks: blocks_from_normals(p.dim(), &normals),
                normals_used: normals.len(),
                cross_product: None,
            })
        }
        Body::Quadric(q) => {
            let n = q.dim();
            let normals: Vec<Vector> = q.sample_smooth_normals(NORMAL_SAMPLES, seed).into_iter().map(|(_, u)| u).collect();
            let shares = |i: usize, j: usize| q.constraints().iter().any(|c| c.indices.contains(&i) && c.indices.contains(&j));
            let mut cross: f64 = 0.0;
            for u in &normals {
                for i in 0..n {
                    for j in i + 1..n {
                        if !shares(i, j) {
                            cross = cross.max((u[i] * u[j]).abs());
                        }
                    }
                }
            }
            Ok(Partition {
                blocks: blocks_from_normals(n, &normals),
                normals_used: normals.len(),
                cross_product: Some(cross),
            })
        }
        Body::Oracle(_) => Err(Error::Precondition(
            "block detection needs a polytope or a quadric body".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::parse_body_spec;

    #[test]
    fn cube_splits_into_singletons() {
        let b = parse_body_spec(r#"{kind:"named", name:"cube", n:3}"#).unwrap();
        let p = detect_direct_sum(&b, 0).unwrap();
        assert_eq!(p.blocks, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(p.describe(), "{1}{2}{3}");
    }

    #[test]
    fn cross_polytope_is_irreducible() {
        let b = parse_body_spec(r#"{kind:"named", name:"cross-polytope", n:3}"#).unwrap();
        assert!(detect_direct_sum(&b, 0).unwrap().irreducible());
    }

    #[test]
    fn prism_blocks() {
        let b = parse_body_spec(
            r#"{kind:"direct-sum", children:[{kind:"named", name:"segment"}, {kind:"named", name:"hexagon"}]}"#,
        )
        .unwrap();
        assert_eq!(detect_direct_sum(&b, 0).unwrap().blocks, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn two_cylinders_irreducible_with_split_normals() {
        let b = parse_body_spec(r#"{kind:"quadric", constraints:[{I:[1,2],rho:1},{I:[2,3],rho:1}]}"#).unwrap();
        let p = detect_direct_sum(&b, 3).unwrap();
        assert!(p.irreducible());
        assert!(p.normals_used >= 1000);
        assert!(p.cross_product.unwrap() <= 1e-8);
    }
}
