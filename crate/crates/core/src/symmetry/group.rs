//! Finite groups generated by linear reflections.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use rand::Rng;

use super::reflection::{canonical_sign, is_reflection_matrix, LinearReflection};
use crate::error::{Error, Result};
use crate::linalg::{dedup_points, max_abs_diff, null_space, stream_rng, LinearMap, Vector};

/// Default bound on the number of group elements.
pub const GROUP_CAP: usize = 100_000;
/// Max-norm distance under which two matrices are the same element.
pub const MATRIX_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ReflectionGroup {
    dim: usize,
    elements: Vec<LinearMap>,
    generators: Vec<LinearReflection>,
}

/// Orthonormal basis of a linear subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub basis: Vec<Vector>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Approximate membership index for matrices: a random linear functional of
/// the entries, bucketed so near-equal matrices land in adjacent buckets.
struct MatrixIndex {
    weights: Vec<f64>,
    buckets: BTreeMap<i64, Vec<usize>>,
}

const BUCKET: f64 = 1e-6;

impl MatrixIndex {
    fn new(n: usize) -> Self {
        let mut rng = stream_rng(0x6709, 0);
        MatrixIndex {
            weights: (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            buckets: BTreeMap::new(),
        }
    }

    fn key(&self, m: &LinearMap) -> i64 {
        let k: f64 = m.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
        (k / BUCKET).floor() as i64
    }

    fn find(&self, m: &LinearMap, elements: &[LinearMap]) -> Option<usize> {
        let k = self.key(m);
        (k - 1..=k + 1)
            .filter_map(|b| self.buckets.get(&b))
            .flatten()
            .copied()
            .find(|&i| max_abs_diff(&elements[i], m) < MATRIX_TOL)
    }

    fn insert(&mut self, m: &LinearMap, idx: usize) {
        self.buckets.entry(self.key(m)).or_default().push(idx);
    }
}

/// Breadth-first closure of the generators under left multiplication.
pub fn generate_group(generators: &[LinearReflection], cap: usize) -> Result<ReflectionGroup> {
    if cap == 0 {
        return Err(Error::argument("group cap must be at least 1"));
    }
    let n = generators
        .first()
        .map(|g| g.dim())
        .ok_or_else(|| Error::argument("no generators"))?;
    if let Some(g) = generators.iter().find(|g| g.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.dim(),
        });
    }
    let mut index = MatrixIndex::new(n);
    let mut elements = vec![DMatrix::identity(n, n)];
    index.insert(&elements[0], 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let h = g.map() * &elements[i];
            if index.find(&h, &elements).is_none() {
                if elements.len() >= cap {
                    return Err(Error::GroupTooLarge { cap });
                }
                index.insert(&h, elements.len());
                queue.push_back(elements.len());
                elements.push(h);
            }
        }
    }
    Ok(ReflectionGroup {
        dim: n,
        elements,
        generators: generators.to_vec(),
    })
}

impl ReflectionGroup {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[LinearMap] {
        &self.elements
    }

    pub fn generators(&self) -> &[LinearReflection] {
        &self.generators
    }

    pub fn position(&self, m: &LinearMap) -> Option<usize> {
        self.elements.iter().position(|e| max_abs_diff(e, m) < MATRIX_TOL)
    }

    /// Checks closure under products and inverses.
    pub fn check_closed(&self) -> Result<()> {
        for a in &self.elements {
            let inv = a.clone().try_inverse().ok_or_else(|| Error::Internal("singular group element".into()))?;
            if self.position(&inv).is_none() {
                return Err(Error::Internal("group not closed under inverses".into()));
            }
            for b in &self.elements {
                if self.position(&(a * b)).is_none() {
                    return Err(Error::Internal("group not closed under products".into()));
                }
            }
        }
        Ok(())
    }

    /// Elements that are linear reflections.
    pub fn reflections(&self) -> Vec<LinearReflection> {
        self.elements
            .iter()
            .filter(|a| is_reflection_matrix(a, MATRIX_TOL))
            .filter_map(|a| LinearReflection::from_map(a.clone()).ok())
            .collect()
    }

    /// Distinct mirror normals (unit, sign-normalized) of all reflections.
    pub fn mirror_normals(&self) -> Vec<Vector> {
        let normals: Vec<Vector> = self
            .reflections()
            .iter()
            .map(|r| canonical_sign(r.normal().clone()))
            .collect();
        dedup_points(&normals, MATRIX_TOL)
    }

    /// Points fixed by every element.
    pub fn fix_space(&self) -> Subspace {
        fix_space(self)
    }
}

/// Null space of the stacked `g - Id`.
pub fn fix_space(group: &ReflectionGroup) -> Subspace {
    let n = group.dim;
    let id = DMatrix::<f64>::identity(n, n);
    let rows = group.elements.len() * n;
    let mut stacked = DMatrix::zeros(rows, n);
    for (k, g) in group.elements.iter().enumerate() {
        stacked.view_mut((k * n, 0), (n, n)).copy_from(&(g - &id));
    }
    Subspace {
        basis: null_space(&stacked, 1e-8),
    }
}
