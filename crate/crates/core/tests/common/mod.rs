//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use qet_core::{ObservableSum, Pauli, PauliString, StateVector};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn letter_matrix(p: Pauli) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => CMat::from_row_slice(2, 2, &[one, z, z, one]),
        Pauli::X => CMat::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// Kronecker product with qubit 0 as the least significant factor.
pub fn word_matrix(w: &PauliString) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0, 0.0));
    for q in 0..w.n_qubits() {
        m = letter_matrix(w.letter(q)).kronecker(&m);
    }
    m
}

pub fn obs_matrix(obs: &ObservableSum) -> CMat {
    let dim = 1usize << obs.n_qubits();
    let mut m = CMat::identity(dim, dim) * c(obs.offset(), 0.0);
    for (coef, w) in obs.terms() {
        m += word_matrix(w) * c(coef, 0.0);
    }
    m
}

pub fn column(s: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

pub fn density(s: &StateVector) -> CMat {
    let v = column(s);
    &v * v.adjoint()
}

/// Reduced density matrix of one qubit.
pub fn reduce_to_qubit(rho: &CMat, qubit: usize) -> CMat {
    let mut out = CMat::zeros(2, 2);
    let bit = 1usize << qubit;
    for a in 0..rho.nrows() {
        for b in 0..rho.ncols() {
            if a & !bit == b & !bit {
                out[((a >> qubit) & 1, (b >> qubit) & 1)] += rho[(a, b)];
            }
        }
    }
    out
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn i_pow(k: u8) -> Complex64 {
    [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][(k % 4) as usize]
}

/// `{3,q}` triangulation grown by completing vertex fans in creation order
/// with oriented triangles. Returns ring sizes out to `depth`.
pub fn fan_completion_rings(q: usize, depth: usize) -> Vec<usize> {
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); q + 1];
    let mut ring = vec![0usize; q + 1];
    for i in 0..q {
        let t = [0, 1 + i, 1 + (i + 1) % q];
        for &v in &t {
            incident[v].push(tris.len());
        }
        tris.push(t);
    }
    ring[1..=q].fill(1);
    let mut queue: VecDeque<usize> = (1..=q).collect();
    while let Some(v) = queue.pop_front() {
        if ring[v] >= depth {
            continue;
        }
        // ccw successor of each neighbour around v
        let mut next = BTreeMap::new();
        for &t in &incident[v] {
            let [a, b, c] = tris[t];
            let (p, r) = if a == v {
                (b, c)
            } else if b == v {
                (c, a)
            } else {
                (a, b)
            };
            next.insert(p, r);
        }
        let targets: BTreeSet<usize> = next.values().copied().collect();
        let Some(&start) = next.keys().find(|p| !targets.contains(p)) else {
            continue;
        };
        let mut end = start;
        while let Some(&r) = next.get(&end) {
            end = r;
        }
        let missing = q - incident[v].len();
        assert!(missing >= 1, "fan of {v} cannot close");
        let mut prev = end;
        for step in 0..missing {
            let w = if step + 1 == missing {
                start
            } else {
                let w = ring.len();
                ring.push(ring[v] + 1);
                incident.push(Vec::new());
                queue.push_back(w);
                w
            };
            let t = [v, prev, w];
            for &u in &t {
                incident[u].push(tris.len());
            }
            tris.push(t);
            prev = w;
        }
    }
    // BFS distances from the centre on the final edge set
    let n = ring.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for t in &tris {
        for k in 0..3 {
            adj[t[k]].insert(t[(k + 1) % 3]);
            adj[t[(k + 1) % 3]].insert(t[k]);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut bfs = VecDeque::from([0usize]);
    while let Some(v) = bfs.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                bfs.push_back(u);
            }
        }
    }
    let mut sizes = vec![0usize; depth + 1];
    for d in dist {
        if d <= depth {
            sizes[d] += 1;
        }
    }
    sizes
}

/// Ring sizes from the two-type vertex recurrence.
pub fn recurrence_rings(q: usize, depth: usize) -> Vec<usize> {
    let mut sizes = vec![1usize];
    let (mut a, mut b) = (q as i64, 0i64);
    for _ in 1..=depth {
        sizes.push((a + b) as usize);
        let q = q as i64;
        (a, b) = ((q - 5) * a + (q - 6) * b, a + b);
    }
    sizes
}
