//! Planar distance-geometry least squares with known ground truth.
//!
//! Instances are built backwards: particle positions are drawn first, then
//! target distances are measured from them, so the generated objective has a
//! known global minimum of zero. Particles 1 and 2 stay fixed at their truth
//! positions to remove the rigid-motion gauge freedom; the unknowns are the
//! remaining particle coordinates, stored flat as (x3, y3, x4, y4, ...).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::objective::ObjectiveOracle;
use crate::rng::SeededRng;

pub const DIM_SPACE: usize = 2;
const FIXED_PARTICLES: usize = 2;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("need at least 3 particles, got {0}")]
    TooFewParticles(usize),
    #[error("edge ({i}, {j}) is invalid for {n} particles")]
    InvalidEdge { i: usize, j: usize, n: usize },
    #[error("edge graph is not connected")]
    Disconnected,
    #[error("free particle {index} has degree {degree}, need at least {required}")]
    LowDegree {
        index: usize,
        degree: usize,
        required: usize,
    },
    #[error("edge ({i}, {j}) has non-positive distance {d}")]
    BadDistance { i: usize, j: usize, d: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Undirected edge between particles `i < j` (0-based) with target
/// distance `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub d: f64,
}

/// `f(x) = sum over edges (||x_i - x_j||^2 - d_ij^2)^2` on the free
/// particle coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGeometryInstance {
    n_particles: usize,
    truth: Vec<[f64; DIM_SPACE]>,
    edges: Vec<Edge>,
    seed: u64,
}

/// Minimum edge count at any free particle. Three independent distance
/// constraints pin a point in the plane generically; with fewer particles
/// the complete graph is the best available.
fn required_degree(n_particles: usize) -> usize {
    3.min(n_particles - 1)
}

impl DistanceGeometryInstance {
    /// Builds an instance from ground-truth positions, measuring every edge
    /// distance from them. Validates the graph invariants.
    pub fn from_truth(
        truth: Vec<[f64; DIM_SPACE]>,
        edges: &[(usize, usize)],
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let n = truth.len();
        if n < 3 {
            return Err(ProblemError::TooFewParticles(n));
        }
        let mut canonical = BTreeSet::new();
        for &(a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if i == j || j >= n {
                return Err(ProblemError::InvalidEdge { i: a, j: b, n });
            }
            canonical.insert((i, j));
        }
        let edges: Vec<Edge> = canonical
            .into_iter()
            .map(|(i, j)| {
                let dx = truth[i][0] - truth[j][0];
                let dy = truth[i][1] - truth[j][1];
                Edge {
                    i,
                    j,
                    d: (dx * dx + dy * dy).sqrt(),
                }
            })
            .collect();
        Self::assemble(truth, edges, seed)
    }

    fn assemble(
        truth: Vec<[f64; DIM_SPACE]>,
        edges: Vec<Edge>,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let n = truth.len();
        for e in &edges {
            if !(e.d > 0.0) {
                return Err(ProblemError::BadDistance {
                    i: e.i,
                    j: e.j,
                    d: e.d,
                });
            }
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let required = required_degree(n);
        for (index, &d) in degree.iter().enumerate().skip(FIXED_PARTICLES) {
            if d < required {
                return Err(ProblemError::LowDegree {
                    index,
                    degree: d,
                    required,
                });
            }
        }

        let mut reached = vec![false; n];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(v) = stack.pop() {
            for e in &edges {
                let other = if e.i == v {
                    e.j
                } else if e.j == v {
                    e.i
                } else {
                    continue;
                };
                if !reached[other] {
                    reached[other] = true;
                    stack.push(other);
                }
            }
        }
        if !reached.iter().all(|&r| r) {
            return Err(ProblemError::Disconnected);
        }

        Ok(Self {
            n_particles: n,
            truth,
            edges,
            seed,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn truth(&self) -> &[[f64; DIM_SPACE]] {
        &self.truth
    }

    /// Positions of the two gauge-fixing particles.
    pub fn fixed(&self) -> [[f64; DIM_SPACE]; FIXED_PARTICLES] {
        [self.truth[0], self.truth[1]]
    }

    /// Ground-truth values of the free coordinates, flat and interleaved.
    pub fn truth_free_coordinates(&self) -> Vec<f64> {
        self.truth[FIXED_PARTICLES..]
            .iter()
            .flat_map(|p| p.iter().copied())
            .collect()
    }

    /// Largest interparticle distance in the truth configuration.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n_particles {
            for j in (i + 1)..self.n_particles {
                let dx = self.truth[i][0] - self.truth[j][0];
                let dy = self.truth[i][1] - self.truth[j][1];
                best = best.max((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }

    /// Truth free coordinates plus componentwise Gaussian noise with
    /// standard deviation `noise_scale` times the configuration diameter.
    pub fn initial_point(&self, noise_scale: f64, seed: u64) -> Vec<f64> {
        assert!(noise_scale >= 0.0);
        let sigma = noise_scale * self.diameter();
        let mut rng = SeededRng::new(seed);
        self.truth_free_coordinates()
            .into_iter()
            .map(|c| c + sigma * rng.standard_normal())
            .collect()
    }

    fn position(&self, x: &[f64], particle: usize) -> [f64; DIM_SPACE] {
        if particle < FIXED_PARTICLES {
            self.truth[particle]
        } else {
            let base = DIM_SPACE * (particle - FIXED_PARTICLES);
            [x[base], x[base + 1]]
        }
    }

    /// Line-oriented text form: `distg <n_particles> <n_edges> <seed>`,
    /// then `P <index> <x> <y>` per particle and `E <i> <j> <d>` per edge,
    /// 1-based indices, floats at full round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "distg {} {} {}",
            self.n_particles,
            self.edges.len(),
            self.seed
        );
        for (idx, p) in self.truth.iter().enumerate() {
            let _ = writeln!(out, "P {} {:.16e} {:.16e}", idx + 1, p[0], p[1]);
        }
        for e in &self.edges {
            let _ = writeln!(out, "E {} {} {:.16e}", e.i + 1, e.j + 1, e.d);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProblemError> {
        let parse_err = |line: usize, message: &str| ProblemError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();

        let (line_no, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "distg" {
            return Err(parse_err(line_no + 1, "expected header `distg <n_particles> <n_edges> <seed>`"));
        }
        let n_particles: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(line_no + 1, "bad particle count"))?;
        let n_edges: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(line_no + 1, "bad edge count"))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err(line_no + 1, "bad seed"))?;

        let mut truth = Vec::with_capacity(n_particles);
        for expected in 1..=n_particles {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(expected + 1, "missing particle line"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "P" {
                return Err(parse_err(line_no + 1, "expected `P <index> <x> <y>`"));
            }
            let idx: usize = f[1]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad particle index"))?;
            if idx != expected {
                return Err(parse_err(line_no + 1, "particle lines out of order"));
            }
            let x: f64 = f[2]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad x coordinate"))?;
            let y: f64 = f[3]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad y coordinate"))?;
            truth.push([x, y]);
        }

        let mut edges = Vec::with_capacity(n_edges);
        for count in 0..n_edges {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(n_particles + count + 2, "missing edge line"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "E" {
                return Err(parse_err(line_no + 1, "expected `E <i> <j> <d>`"));
            }
            let i: usize = f[1]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad edge endpoint"))?;
            let j: usize = f[2]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad edge endpoint"))?;
            if i == 0 || j == 0 || i > n_particles || j > n_particles {
                return Err(parse_err(line_no + 1, "edge endpoint out of range"));
            }
            let d: f64 = f[3]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad distance"))?;
            edges.push(Edge {
                i: (i - 1).min(j - 1),
                j: (i - 1).max(j - 1),
                d,
            });
        }
        if let Some((line_no, line)) = lines.next() {
            if !line.trim().is_empty() {
                return Err(parse_err(line_no + 1, "trailing content after edges"));
            }
        }

        edges.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        Self::assemble(truth, edges, seed)
    }
}

impl ObjectiveOracle for DistanceGeometryInstance {
    fn dimension(&self) -> usize {
        DIM_SPACE * (self.n_particles - FIXED_PARTICLES)
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let a = self.position(x, e.i);
                let b = self.position(x, e.j);
                let dx = a[0] - b[0];
                let dy = a[1] - b[1];
                let r = dx * dx + dy * dy - e.d * e.d;
                r * r
            })
            .sum()
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dimension()];
        for e in &self.edges {
            let a = self.position(x, e.i);
            let b = self.position(x, e.j);
            let dx = a[0] - b[0];
            let dy = a[1] - b[1];
            let coeff = 4.0 * (dx * dx + dy * dy - e.d * e.d);
            if e.i >= FIXED_PARTICLES {
                let base = DIM_SPACE * (e.i - FIXED_PARTICLES);
                grad[base] += coeff * dx;
                grad[base + 1] += coeff * dy;
            }
            if e.j >= FIXED_PARTICLES {
                let base = DIM_SPACE * (e.j - FIXED_PARTICLES);
                grad[base] -= coeff * dx;
                grad[base + 1] -= coeff * dy;
            }
        }
        grad
    }
}

/// Generates an instance with truth positions uniform in the unit square.
///
/// The edge set is a random spanning tree, plus each remaining pair included
/// independently with probability `edge_fraction`, plus further edges from
/// any under-constrained free particle to random non-neighbors until every
/// free particle has degree >= min(3, n_particles - 1). With 3 particles this
/// always produces the complete graph.
pub fn generate_distg(
    n_particles: usize,
    edge_fraction: f64,
    seed: u64,
) -> DistanceGeometryInstance {
    assert!(n_particles >= 3, "need at least 3 particles");
    assert!(
        edge_fraction > 0.0 && edge_fraction <= 1.0,
        "edge_fraction must lie in (0, 1]"
    );
    let mut rng = SeededRng::new(seed);

    let truth: Vec<[f64; DIM_SPACE]> = (0..n_particles)
        .map(|_| {
            let x = rng.uniform();
            let y = rng.uniform();
            [x, y]
        })
        .collect();

    let mut set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n_particles {
        let u = rng.below(v);
        set.insert((u, v));
    }
    for i in 0..n_particles {
        for j in (i + 1)..n_particles {
            if !set.contains(&(i, j)) && rng.chance(edge_fraction) {
                set.insert((i, j));
            }
        }
    }

    let required = required_degree(n_particles);
    for v in FIXED_PARTICLES..n_particles {
        loop {
            let degree = set.iter().filter(|&&(i, j)| i == v || j == v).count();
            if degree >= required {
                break;
            }
            let candidates: Vec<usize> = (0..n_particles)
                .filter(|&u| u != v && !set.contains(&(u.min(v), u.max(v))))
                .collect();
            let u = candidates[rng.below(candidates.len())];
            set.insert((u.min(v), u.max(v)));
        }
    }

    let edges: Vec<(usize, usize)> = set.into_iter().collect();
    DistanceGeometryInstance::from_truth(truth, &edges, seed)
        .expect("generated edge sets satisfy the graph invariants")
}
