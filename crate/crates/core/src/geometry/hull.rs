//! Incremental quickhull for point sets in R^d, 1 <= d <= MAX_DIM.
//!
//! The hull is kept as a triangulated boundary (simplicial facets with
//! neighbor links). Points within `eps` of a facet plane are treated as
//! inside, so coplanar input never produces outside sets; coplanar simplices
//! are merged into faces afterwards by walking neighbor links.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{cofactor_normal, dot, norm, rank, Vector, MAX_DIM};

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
    /// `neighbors[i]` shares every vertex except `vertices[i]`.
    pub neighbors: Vec<usize>,
    /// (d-1)-volume of the simplex.
    pub area: f64,
}

/// A maximal face: a group of coplanar simplices.
#[derive(Debug, Clone)]
pub(crate) struct Face {
    pub normal: Vector,
    pub offset: f64,
    pub area: f64,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Hull {
    pub dim: usize,
    pub simplices: Vec<Simplex>,
    pub faces: Vec<Face>,
    /// Indices of points that are vertices of the hull (not merely on a face).
    pub extreme: Vec<usize>,
    pub eps: f64,
}

struct Work {
    d: usize,
    pts: Vec<f64>,
    center: Vec<f64>,
    eps: f64,
    facets: Vec<WFacet>,
}

struct WFacet {
    vertices: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
    neighbors: Vec<usize>,
    outside: Vec<usize>,
    alive: bool,
}

impl Work {
    fn p(&self, i: usize) -> &[f64] {
        &self.pts[i * self.d..(i + 1) * self.d]
    }

    fn dist(&self, f: usize, i: usize) -> f64 {
        let fa = &self.facets[f];
        dot(&fa.normal, self.p(i)) - fa.offset
    }

    fn plane(&self, vertices: &[usize]) -> (Vec<f64>, f64) {
        let d = self.d;
        let base = self.p(vertices[0]);
        let mut rows = Vec::with_capacity((d - 1) * d);
        for &v in &vertices[1..] {
            let q = self.p(v);
            rows.extend(q.iter().zip(base).map(|(a, b)| a - b));
        }
        let mut n = cofactor_normal(&rows, d);
        let len = norm(&n);
        if len > 0.0 {
            n.iter_mut().for_each(|x| *x /= len);
        }
        let mut off =
            vertices.iter().map(|&v| dot(&n, self.p(v))).sum::<f64>() / vertices.len() as f64;
        if dot(&n, &self.center) > off {
            n.iter_mut().for_each(|x| *x = -*x);
            off = -off;
        }
        (n, off)
    }

    fn push_facet(&mut self, vertices: Vec<usize>, neighbors: Vec<usize>) -> usize {
        let (normal, offset) = self.plane(&vertices);
        self.facets.push(WFacet {
            vertices,
            normal,
            offset,
            neighbors,
            outside: Vec::new(),
            alive: true,
        });
        self.facets.len() - 1
    }
}

/// Convex hull of `points`. `tol` is the tolerance for inputs whose largest
/// coordinate magnitude is 1.
pub(crate) fn convex_hull(points: &[Vector], tol: f64) -> Result<Hull> {
    if points.is_empty() {
        return Err(Error::LowerDimensional { dim: -1 });
    }
    let d = points[0].len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::argument(format!("unsupported dimension {d}")));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::argument("points of mixed dimension"));
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::argument("non-finite coordinate"));
    }
    // Tolerances are relative to the coordinate scale, which is equivalent to
    // pre-scaling the input to O(1) coordinates.
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::LowerDimensional { dim: 0 });
    }
    let eps = tol * scale;
    if d == 1 {
        return hull_1d(points, eps);
    }

    let mut pts = Vec::with_capacity(points.len() * d);
    for p in points {
        pts.extend(p.iter());
    }
    let mut w = Work {
        d,
        pts,
        center: vec![0.0; d],
        eps,
        facets: Vec::new(),
    };

    let simplex = initial_simplex(&w, points.len())?;
    for &v in &simplex {
        for k in 0..d {
            w.center[k] += w.pts[v * d + k] / (d + 1) as f64;
        }
    }
    for k in 0..=d {
        let verts: Vec<usize> = simplex.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &v)| v).collect();
        let nbs: Vec<usize> = (0..=d).filter(|&i| i != k).collect();
        w.push_facet(verts, nbs);
    }

    let in_simplex: std::collections::HashSet<usize> = simplex.iter().copied().collect();
    for i in 0..points.len() {
        if in_simplex.contains(&i) {
            continue;
        }
        for f in 0..w.facets.len() {
            if w.dist(f, i) > eps {
                w.facets[f].outside.push(i);
                break;
            }
        }
    }

    let mut pending: Vec<usize> = (0..w.facets.len()).filter(|&f| !w.facets[f].outside.is_empty()).collect();
    let mut mark: Vec<u64> = vec![0; w.facets.len()];
    let mut epoch: u64 = 0;

    while let Some(start) = pending.pop() {
        if !w.facets[start].alive || w.facets[start].outside.is_empty() {
            continue;
        }
        // furthest outside point
        let apex = {
            let f = &w.facets[start];
            let mut best = f.outside[0];
            let mut bd = f64::NEG_INFINITY;
            for &q in &f.outside {
                let dq = w.dist(start, q);
                if dq > bd {
                    bd = dq;
                    best = q;
                }
            }
            best
        };

        epoch += 1;
        mark.resize(w.facets.len(), 0);
        let vis = 2 * epoch;
        let invis = 2 * epoch + 1;
        let mut visible = Vec::new();
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut stack = vec![start];
        mark[start] = vis;
        while let Some(g) = stack.pop() {
            visible.push(g);
            for i in 0..d {
                let nb = w.facets[g].neighbors[i];
                if mark[nb] == vis {
                    continue;
                }
                if mark[nb] == invis {
                    horizon.push((g, i));
                    continue;
                }
                if w.dist(nb, apex) > eps {
                    mark[nb] = vis;
                    stack.push(nb);
                } else {
                    mark[nb] = invis;
                    horizon.push((g, i));
                }
            }
        }

        let first_new = w.facets.len();
        let mut ridge_map: HashMap<Vec<usize>, (usize, usize)> = HashMap::with_capacity(horizon.len() * d);
        for &(g, i) in &horizon {
            let nb = w.facets[g].neighbors[i];
            let mut verts: Vec<usize> = w.facets[g]
                .vertices
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, &v)| v)
                .collect();
            verts.push(apex);
            let mut nbs = vec![usize::MAX; d];
            nbs[d - 1] = nb;
            let id = w.push_facet(verts, nbs);
            if let Some(slot) = w.facets[nb].neighbors.iter_mut().find(|s| **s == g) {
                *slot = id;
            }
            for j in 0..d - 1 {
                let mut key: Vec<usize> = w.facets[id]
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, &v)| v)
                    .collect();
                key.sort_unstable();
                if let Some((other, oj)) = ridge_map.remove(&key) {
                    w.facets[id].neighbors[j] = other;
                    w.facets[other].neighbors[oj] = id;
                } else {
                    ridge_map.insert(key, (id, j));
                }
            }
        }
        if !ridge_map.is_empty() {
            return Err(Error::Internal("open horizon in hull construction".into()));
        }

        let mut orphans = Vec::new();
        for &g in &visible {
            w.facets[g].alive = false;
            orphans.append(&mut w.facets[g].outside);
        }
        let new_ids: Vec<usize> = (first_new..w.facets.len()).collect();
        for q in orphans {
            if q == apex {
                continue;
            }
            for &nf in &new_ids {
                if w.dist(nf, q) > eps {
                    w.facets[nf].outside.push(q);
                    break;
                }
            }
        }
        for &nf in &new_ids {
            if !w.facets[nf].outside.is_empty() {
                pending.push(nf);
            }
        }
    }

    finish(w, points)
}

fn initial_simplex(w: &Work, count: usize) -> Result<Vec<usize>> {
    let d = w.d;
    let mut i0 = 0;
    for i in 1..count {
        if w.p(i)[0] < w.p(i0)[0] {
            i0 = i;
        }
    }
    let mut chosen = vec![i0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 1..=d {
        let mut best = usize::MAX;
        let mut best_r = -1.0;
        let mut best_vec = Vec::new();
        for i in 0..count {
            let mut r: Vec<f64> = w.p(i).iter().zip(w.p(i0)).map(|(a, b)| a - b).collect();
            for b in &basis {
                let c = dot(b, &r);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let rn = norm(&r);
            if rn > best_r {
                best_r = rn;
                best = i;
                best_vec = r;
            }
        }
        if best_r <= w.eps {
            return Err(Error::LowerDimensional { dim: k as isize - 1 });
        }
        best_vec.iter_mut().for_each(|x| *x /= best_r);
        basis.push(best_vec);
        chosen.push(best);
    }
    Ok(chosen)
}

fn hull_1d(points: &[Vector], eps: f64) -> Result<Hull> {
    let (mut lo, mut hi) = (0, 0);
    for (i, p) in points.iter().enumerate() {
        if p[0] < points[lo][0] {
            lo = i;
        }
        if p[0] > points[hi][0] {
            hi = i;
        }
    }
    if points[hi][0] - points[lo][0] <= eps {
        return Err(Error::LowerDimensional { dim: 0 });
    }
    let simplices = vec![
        Simplex {
            vertices: vec![lo],
            normal: vec![-1.0],
            offset: -points[lo][0],
            neighbors: vec![1],
            area: 1.0,
        },
        Simplex {
            vertices: vec![hi],
            normal: vec![1.0],
            offset: points[hi][0],
            neighbors: vec![0],
            area: 1.0,
        },
    ];
    let faces = simplices
        .iter()
        .map(|s| Face {
            normal: Vector::from_vec(s.normal.clone()),
            offset: s.offset,
            area: 1.0,
            vertices: s.vertices.clone(),
        })
        .collect();
    let mut extreme = vec![lo, hi];
    extreme.sort_unstable();
    Ok(Hull {
        dim: 1,
        simplices,
        faces,
        extreme,
        eps,
    })
}

fn finish(w: Work, points: &[Vector]) -> Result<Hull> {
    let d = w.d;
    let mut remap = vec![usize::MAX; w.facets.len()];
    let mut next = 0;
    for (i, f) in w.facets.iter().enumerate() {
        if f.alive {
            remap[i] = next;
            next += 1;
        }
    }
    let factorial: f64 = (1..d).map(|k| k as f64).product();
    let mut simplices = Vec::with_capacity(next);
    for f in w.facets.iter().filter(|f| f.alive) {
        let base = w.p(f.vertices[0]);
        let mut rows = Vec::with_capacity((d - 1) * d);
        for &v in &f.vertices[1..] {
            rows.extend(w.p(v).iter().zip(base).map(|(a, b)| a - b));
        }
        let area = norm(&cofactor_normal(&rows, d)) / factorial;
        let neighbors = f.neighbors.iter().map(|&g| remap[g]).collect::<Vec<_>>();
        if neighbors.iter().any(|&g| g == usize::MAX) {
            return Err(Error::Internal("dangling neighbor in hull".into()));
        }
        simplices.push(Simplex {
            vertices: f.vertices.clone(),
            normal: f.normal.clone(),
            offset: f.offset,
            neighbors,
            area,
        });
    }

    // union coplanar neighbors
    let mut parent: Vec<usize> = (0..simplices.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let coplanar = |a: &Simplex, b: &Simplex| -> bool {
        let far_b = b.vertices.iter().find(|v| !a.vertices.contains(v));
        let far_a = a.vertices.iter().find(|v| !b.vertices.contains(v));
        match (far_a, far_b) {
            (Some(&fa), Some(&fb)) => {
                (dot(&a.normal, w.p(fb)) - a.offset).abs() <= w.eps
                    && (dot(&b.normal, w.p(fa)) - b.offset).abs() <= w.eps
                    && dot(&a.normal, &b.normal) > 0.0
            }
            _ => true,
        }
    };
    for s in 0..simplices.len() {
        for &t in &simplices[s].neighbors {
            if t > s && coplanar(&simplices[s], &simplices[t]) {
                let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
                if rs != rt {
                    parent[rt.max(rs)] = rs.min(rt);
                }
            }
        }
    }
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for s in 0..simplices.len() {
        let r = find(&mut parent, s);
        let g = *group_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(s);
    }
    let mut faces = Vec::with_capacity(groups.len());
    for members in groups {
        let lead = *members
            .iter()
            .max_by(|&&a, &&b| simplices[a].area.total_cmp(&simplices[b].area).then(b.cmp(&a)))
            .expect("nonempty group");
        let normal = Vector::from_vec(simplices[lead].normal.clone());
        let mut vertices: Vec<usize> = members.iter().flat_map(|&s| simplices[s].vertices.iter().copied()).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let offset = vertices.iter().map(|&v| normal.dot(&points[v])).sum::<f64>() / vertices.len() as f64;
        let area = members.iter().map(|&s| simplices[s].area).sum();
        faces.push(Face {
            normal,
            offset,
            area,
            vertices,
        });
    }

    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for &v in &f.vertices {
            incident.entry(v).or_default().push(fi);
        }
    }
    let mut extreme: Vec<usize> = incident
        .iter()
        .filter(|(_, fs)| {
            fs.len() >= d && rank(&fs.iter().map(|&f| faces[f].normal.clone()).collect::<Vec<_>>(), 1e-9) == d
        })
        .map(|(&v, _)| v)
        .collect();
    extreme.sort_unstable();

    Ok(Hull {
        dim: d,
        simplices,
        faces,
        extreme,
        eps: w.eps,
    })
}

impl Hull {
    /// Volume as a fan of simplices from `apex`, which must lie inside.
    pub fn volume_from(&self, apex: &Vector) -> f64 {
        let d = self.dim as f64;
        self.simplices
            .iter()
            .map(|s| (s.offset - dot(&s.normal, apex.as_slice())) * s.area / d)
            .sum()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.faces.iter().all(|f| f.normal.dot(x) <= f.offset + tol)
    }
}
