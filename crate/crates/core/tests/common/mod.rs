//! Independent oracles shared by the integration tests. Nothing here calls
//! the eigensolver, the propagator or the chain builder.

#![allow(clippy::needless_range_loop, dead_code)]

use num_complex::Complex64 as C;
use qheat::linalg::{CMatrix, HermitianMatrix};
use rand::Rng;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Dense complex matrix as rows, for oracle arithmetic.
pub type Dense = Vec<Vec<C>>;

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn adjoint(a: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn to_cmatrix(a: &Dense) -> CMatrix {
    CMatrix::from_rows(a).unwrap()
}

/// Unitary from modified Gram-Schmidt on a matrix with uniform entries.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> Dense {
    let mut cols: Vec<Vec<C>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C> = (0..n)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for u in &cols {
            let proj: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(u).for_each(|(x, a)| *x -= proj * a);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect()
}

/// Sorted levels with gaps of at least `min_gap`.
pub fn random_levels<R: Rng>(rng: &mut R, n: usize, span: f64, min_gap: f64) -> Vec<f64> {
    loop {
        let mut e: Vec<f64> = (0..n).map(|_| rng.random_range(-span..span)).collect();
        e.sort_by(f64::total_cmp);
        if e.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return e;
        }
    }
}

/// `W diag(values) W†`.
pub fn with_spectrum(w: &Dense, values: &[f64]) -> Dense {
    let n = w.len();
    let d: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { c(values[i]) } else { c(0.0) })
                .collect()
        })
        .collect();
    let mut m = matmul(&matmul(w, &d), &adjoint(w));
    // exact Hermitian symmetry
    for i in 0..n {
        m[i][i] = c(m[i][i].re);
        for j in 0..i {
            m[i][j] = m[j][i].conj();
        }
    }
    m
}

pub fn hermitian(m: &Dense) -> HermitianMatrix {
    HermitianMatrix::new(to_cmatrix(m)).unwrap()
}

/// `e^{-iHτ}` by its Taylor series, summed until terms fall below 1e-18.
pub fn taylor_propagator(h: &Dense, tau: f64) -> Dense {
    let n = h.len();
    let a: Dense = h
        .iter()
        .map(|r| r.iter().map(|x| x * C::new(0.0, -tau)).collect())
        .collect();
    let mut sum: Dense = (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut term = sum.clone();
    for k in 1..200 {
        term = matmul(&term, &a)
            .into_iter()
            .map(|r| r.into_iter().map(|x| x / k as f64).collect())
            .collect();
        let size: f64 = term.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if size < 1e-18 {
            break;
        }
    }
    sum
}

fn amplitude(bra: &[C], op: &Dense, ket: &[C]) -> C {
    let n = bra.len();
    (0..n)
        .map(|i| bra[i].conj() * (0..n).map(|j| op[i][j] * ket[j]).sum::<C>())
        .sum()
}

fn column(m: &Dense, k: usize) -> Vec<C> {
    m.iter().map(|r| r[k]).collect()
}

/// Joint distribution `p[m][n]` by summing every outcome path. `energy` and
/// `obs` hold eigenvectors as columns in the computational basis; `U(τ1)`
/// acts before the first observable measurement.
pub fn brute_force_joint(
    h: &Dense,
    energy: &Dense,
    obs: &Dense,
    c: &[f64],
    taus: &[f64],
) -> Vec<Vec<f64>> {
    let n = h.len();
    let m = taus.len();
    let us: Vec<Dense> = taus.iter().map(|&t| taylor_propagator(h, t)).collect();
    let id: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| self::c(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let mut p = vec![vec![0.0; n]; n];
    let paths = n.pow(m as u32);
    for first in 0..n {
        for code in 0..paths {
            let mut js = Vec::with_capacity(m);
            let mut x = code;
            for _ in 0..m {
                js.push(x % n);
                x /= n;
            }
            let mut w = c[first];
            let mut prev = column(energy, first);
            for (i, &j) in js.iter().enumerate() {
                let next = column(obs, j);
                w *= amplitude(&next, &us[i], &prev).norm_sqr();
                prev = next;
            }
            for last in 0..n {
                let amp = amplitude(&column(energy, last), &id, &prev).norm_sqr();
                p[last][first] += w * amp;
            }
        }
    }
    p
}

/// A random `n`-level instance: Hamiltonian with known eigenvectors, an
/// observable with a random eigenbasis, and both operators as matrices.
pub struct Instance {
    pub h: Dense,
    pub levels: Vec<f64>,
    pub energy: Dense,
    pub obs_basis: Dense,
    pub obs: Dense,
}

pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> Instance {
    let levels = random_levels(rng, n, 2.0, 0.2);
    let energy = random_unitary(rng, n);
    let obs_basis = random_unitary(rng, n);
    let outcomes: Vec<f64> = (0..n).map(|k| k as f64 - 1.0).collect();
    Instance {
        h: with_spectrum(&energy, &levels),
        obs: with_spectrum(&obs_basis, &outcomes),
        levels,
        energy,
        obs_basis,
    }
}
