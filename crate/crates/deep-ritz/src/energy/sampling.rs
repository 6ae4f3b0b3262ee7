use rayon::prelude::*;

use super::problem::{BoxDomain, EllipticProblem};
use crate::error::{invalid, Result};
use crate::rng::{SplitRng, GENERATOR_NAME};

const CHUNK: usize = 1024;

/// Fixed Monte Carlo points: interior points and boundary points with face ids.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    d: usize,
    interior: Vec<f64>,
    boundary: Vec<f64>,
    faces: Vec<usize>,
    seed: u64,
}

impl SampleSet {
    /// Interior and boundary streams are children 0 and 1 of `seed`.
    pub fn draw(problem: &EllipticProblem, n_interior: usize, n_boundary: usize, seed: u64) -> Result<Self> {
        let root = SplitRng::new(seed);
        let interior = interior_points(problem.domain(), n_interior, &root.split(0))?;
        let (boundary, faces) = boundary_points(problem.domain(), n_boundary, &root.split(1))?;
        Ok(Self { d: problem.dim(), interior, boundary, faces, seed })
    }

    pub fn from_points(d: usize, interior: Vec<f64>, boundary: Vec<f64>, faces: Vec<usize>, seed: u64) -> Result<Self> {
        if !interior.len().is_multiple_of(d) || boundary.len() != faces.len() * d {
            return Err(invalid("point arrays do not match the dimension"));
        }
        Ok(Self { d, interior, boundary, faces, seed })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator_name(&self) -> &'static str {
        GENERATOR_NAME
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len() / self.d
    }

    pub fn n_boundary(&self) -> usize {
        self.faces.len()
    }

    pub fn interior(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.interior.chunks_exact(self.d)
    }

    pub fn interior_point(&self, i: usize) -> &[f64] {
        &self.interior[i * self.d..(i + 1) * self.d]
    }

    pub fn boundary(&self) -> impl ExactSizeIterator<Item = (&[f64], usize)> {
        self.boundary.chunks_exact(self.d).zip(self.faces.iter().copied())
    }

    pub fn boundary_point(&self, i: usize) -> (&[f64], usize) {
        (&self.boundary[i * self.d..(i + 1) * self.d], self.faces[i])
    }

    /// CSV with columns `kind,x1..xd,face`; `face` is empty for interior points.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let cols: Vec<String> = (1..=self.d).map(|i| format!("x{i}")).collect();
        writeln!(w, "kind,{},face", cols.join(","))?;
        let join = |p: &[f64]| p.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",");
        for p in self.interior() {
            writeln!(w, "interior,{},", join(p))?;
        }
        for (p, f) in self.boundary() {
            writeln!(w, "boundary,{},{f}", join(p))?;
        }
        Ok(())
    }
}

fn chunked<T: Send>(n: usize, rng: &SplitRng, f: impl Fn(&mut SplitRng, usize) -> Vec<T> + Sync) -> Vec<T> {
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.split(c as u64);
            f(&mut r, CHUNK.min(n - c * CHUNK))
        })
        .collect();
    parts.into_iter().flatten().collect()
}

fn interior_points(b: &BoxDomain, n: usize, rng: &SplitRng) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(b.volume() > 0.0) {
        return Err(invalid("degenerate box"));
    }
    let d = b.dim();
    Ok(chunked(n, rng, |r, len| {
        let mut out = Vec::with_capacity(len * d);
        let mut p = vec![0.0; d];
        for _ in 0..len {
            loop {
                for (i, v) in p.iter_mut().enumerate() {
                    *v = b.lo[i] + b.side(i) * r.uniform_open();
                }
                if b.contains_strictly(&p) {
                    break;
                }
            }
            out.extend_from_slice(&p);
        }
        out
    }))
}

/// Draws `n` i.i.d. uniform points strictly inside the box.
pub fn sample_interior(problem: &EllipticProblem, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let flat = interior_points(problem.domain(), n, &SplitRng::new(seed))?;
    Ok(flat.chunks_exact(problem.dim()).map(<[f64]>::to_vec).collect())
}

/// Points uniform over the boundary measure, with their face ids.
pub fn sample_boundary(problem: &EllipticProblem, n: usize, seed: u64) -> Result<Vec<(Vec<f64>, usize)>> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let (flat, faces) = boundary_points(problem.domain(), n, &SplitRng::new(seed))?;
    Ok(flat.chunks_exact(problem.dim()).map(<[f64]>::to_vec).zip(faces).collect())
}

pub(crate) fn sample_boundary_in(b: &BoxDomain, n: usize, rng: &SplitRng) -> Result<Vec<(Vec<f64>, usize)>> {
    let (flat, faces) = boundary_points(b, n, rng)?;
    Ok(flat.chunks_exact(b.dim()).map(<[f64]>::to_vec).zip(faces).collect())
}

fn boundary_points(b: &BoxDomain, n: usize, rng: &SplitRng) -> Result<(Vec<f64>, Vec<usize>)> {
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if !(b.volume() > 0.0) {
        return Err(invalid("degenerate box"));
    }
    let d = b.dim();
    let total = b.boundary_measure();
    let mut cumulative = Vec::with_capacity(2 * d);
    let mut acc = 0.0;
    for f in 0..2 * d {
        acc += b.face_measure(f) / total;
        cumulative.push(acc);
    }
    let pairs = chunked(n, rng, |r, len| {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let u = r.uniform();
            let face = cumulative.iter().position(|&c| u < c).unwrap_or(2 * d - 1);
            let axis = face / 2;
            let mut p = vec![0.0; d];
            for (i, v) in p.iter_mut().enumerate() {
                *v = if i == axis {
                    if face.is_multiple_of(2) {
                        b.lo[i]
                    } else {
                        b.hi[i]
                    }
                } else {
                    loop {
                        let v = b.lo[i] + b.side(i) * r.uniform_open();
                        if b.lo[i] < v && v < b.hi[i] {
                            break v;
                        }
                    }
                };
            }
            out.push((p, face));
        }
        out
    });
    let mut flat = Vec::with_capacity(n * d);
    let mut faces = Vec::with_capacity(n);
    for (p, f) in pairs {
        flat.extend(p);
        faces.push(f);
    }
    Ok((flat, faces))
}
