//! Small dense linear-algebra helpers shared by the geometry code.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Points and directions in R^n.
pub type Vector = DVector<f64>;
/// Linear maps R^n -> R^n.
pub type LinearMap = DMatrix<f64>;

/// Largest dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 6;

pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// Determinant of a small row-major square matrix, destroying its contents.
pub(crate) fn det_in_place(a: &mut [f64], d: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..d {
        let mut piv = col;
        let mut best = a[col * d + col].abs();
        for r in col + 1..d {
            let v = a[r * d + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..d {
                a.swap(piv * d + c, col * d + c);
            }
            det = -det;
        }
        let p = a[col * d + col];
        det *= p;
        for r in col + 1..d {
            let f = a[r * d + col] / p;
            if f != 0.0 {
                for c in col..d {
                    a[r * d + c] -= f * a[col * d + c];
                }
            }
        }
    }
    det
}

/// Generalized cross product: a vector orthogonal to the `d - 1` rows of a
/// `(d-1) x d` row-major matrix, with components given by signed cofactors.
/// Not normalized.
pub(crate) fn cofactor_normal(rows: &[f64], d: usize) -> Vec<f64> {
    debug_assert_eq!(rows.len(), (d - 1) * d);
    if d == 1 {
        return vec![1.0];
    }
    if d == 2 {
        return vec![rows[1], -rows[0]];
    }
    if d == 3 {
        let (a, b) = (&rows[0..3], &rows[3..6]);
        return vec![
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
    }
    let m = d - 1;
    let mut minor = vec![0.0; m * m];
    let mut out = vec![0.0; d];
    for (skip, o) in out.iter_mut().enumerate() {
        for r in 0..m {
            let mut cc = 0;
            for c in 0..d {
                if c != skip {
                    minor[r * m + cc] = rows[r * d + c];
                    cc += 1;
                }
            }
        }
        let sign = if (skip + m) % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * det_in_place(&mut minor, m);
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Numerical rank of a set of vectors (as rows) by singular values relative to
/// the largest one.
pub fn rank(vectors: &[Vector], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let m = DMatrix::from_fn(vectors.len(), n, |r, c| vectors[r][c]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top.max(1.0)).count()
}

/// Orthonormal basis of the null space of `m` (columns of the returned list),
/// using an absolute singular-value threshold.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vector> {
    let n = m.ncols();
    // Work with the n x n Gram matrix so the SVD always has n right vectors.
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let mut out = Vec::new();
    for i in 0..n {
        // Singular value of m is sqrt of the Gram eigenvalue.
        if eig.eigenvalues[i].max(0.0).sqrt() <= tol {
            out.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    orthonormalize(&out, 1e-12)
}

/// Gram-Schmidt with re-orthogonalization; drops vectors that become tiny.
pub fn orthonormalize(vs: &[Vector], tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
        }
        let nn = w.norm();
        if nn > tol {
            basis.push(w / nn);
        }
    }
    basis
}

/// Symmetric positive semidefinite square root.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Deduplicates points that agree within `tol` in max-norm, keeping the
/// first of each cluster in input order.
pub fn dedup_points(points: &[Vector], tol: f64) -> Vec<Vector> {
    let width = (4.0 * tol).max(f64::MIN_POSITIVE);
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let home: Vec<i64> = p.iter().map(|x| (x / width).floor() as i64).collect();
        // a point within tol sits in the home cell or in the neighbor across
        // a nearby cell wall
        let options: Vec<Vec<i64>> = p
            .iter()
            .zip(&home)
            .map(|(x, &b)| {
                let frac = x / width - b as f64;
                let mut o = vec![b];
                if frac * width <= tol {
                    o.push(b - 1);
                }
                if (1.0 - frac) * width <= tol {
                    o.push(b + 1);
                }
                o
            })
            .collect();
        let duplicate = options
            .iter()
            .map(|o| o.iter().copied())
            .multi_cartesian_product()
            .filter_map(|cell| buckets.get(&cell))
            .flatten()
            .any(|&j| max_norm_dist(&points[j], p) <= tol);
        if !duplicate {
            buckets.entry(home).or_default().push(i);
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| points[i].clone()).collect()
}

pub fn max_norm_dist(a: &Vector, b: &Vector) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Lexicographic comparison of coordinate vectors; `-0.0` equals `0.0`.
pub fn lex_cmp(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y).unwrap_or_else(|| x.total_cmp(y)) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Deterministic generator for one sub-stream of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let nn = v.norm();
        if nn > 1e-12 {
            return v / nn;
        }
    }
}

/// `count` seeded uniform directions on S^{n-1}.
pub fn sphere_sample(n: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = stream_rng(seed, 0);
    (0..count).map(|_| random_unit(n, &mut rng)).collect()
}

/// Quasi-uniform Fibonacci-style directions on S^2, or uniform angles on S^1;
/// falls back to seeded random directions in other dimensions.
pub fn spread_directions(n: usize, count: usize) -> Vec<Vector> {
    match n {
        1 => vec![vector(&[1.0]), vector(&[-1.0])],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                vector(&[t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    vector(&[r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => sphere_sample(n, count, 0x5EED),
    }
}

pub fn is_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}
