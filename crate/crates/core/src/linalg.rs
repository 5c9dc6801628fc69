//! Linear algebra over the chain ring Z/ℓ^K: Howell forms for submodule membership and
//! Smith forms for invariant factors.

use crate::coeff_rings::{Valuation, Zl};

/// Dense row-major matrix with entries reduced mod ℓ^K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    pub ring: Zl,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u128>,
}

impl ModMatrix {
    pub fn zeros(ring: Zl, rows: usize, cols: usize) -> Self {
        ModMatrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: Zl, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(ring: Zl, rows: &[Vec<u128>], cols: usize) -> Self {
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, ring.reduce(x));
            }
        }
        m
    }

    pub fn from_i64_rows(ring: Zl, rows: &[Vec<i64>], cols: usize) -> Self {
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, ring.from_i128(x as i128));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u128) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u128] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u128> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let r = &self.ring;
        let mut out = ModMatrix::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let cur = out.get(i, j);
                        out.set(i, j, r.add(cur, r.mul(a, b)));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[u128]) -> Vec<u128> {
        assert_eq!(v.len(), self.cols);
        let r = &self.ring;
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(0u128, |acc, (&a, &x)| r.add(acc, r.mul(a, x)))
            })
            .collect()
    }

    pub fn add(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = &self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect();
        ModMatrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = &self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.sub(a, b)).collect();
        ModMatrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u128) -> ModMatrix {
        let r = &self.ring;
        let data = self.data.iter().map(|&a| r.mul(a, c)).collect();
        ModMatrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        assert_eq!(self.rows, self.cols);
        let mut result = ModMatrix::identity(self.ring, self.rows);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        result
    }

    pub fn transpose(&self) -> ModMatrix {
        let mut out = ModMatrix::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = ModMatrix::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    /// Same entries read in another Z/ℓ^K.
    pub fn with_ring(&self, ring: Zl) -> ModMatrix {
        ModMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| ring.reduce(a)).collect(),
        }
    }
}

fn unit_part(ring: &Zl, x: u128, v: u32) -> u128 {
    x / (ring.ell() as u128).pow(v)
}

/// Echelon basis with saturation rows; decides membership in a row span over Z/ℓ^K.
#[derive(Clone, Debug)]
pub struct HowellForm {
    ring: Zl,
    cols: usize,
    /// One optional pivot row per column, pivot entry normalized to ℓ^v.
    pivots: Vec<Option<(u32, Vec<u128>)>>,
}

impl HowellForm {
    pub fn new(ring: Zl, cols: usize, rows: impl IntoIterator<Item = Vec<u128>>) -> Self {
        let mut pool: Vec<Vec<u128>> = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                r.into_iter().map(|x| ring.reduce(x)).collect::<Vec<_>>()
            })
            .filter(|r: &Vec<u128>| r.iter().any(|&x| x != 0))
            .collect();
        let mut pivots = vec![None; cols];
        for c in 0..cols {
            let best = pool
                .iter()
                .enumerate()
                .filter(|(_, r)| r[c] != 0)
                .min_by_key(|(_, r)| ring.valuation(r[c]).lower_bound())
                .map(|(i, _)| i);
            let Some(bi) = best else { continue };
            let mut pivot = pool.swap_remove(bi);
            let v = ring.valuation(pivot[c]).lower_bound();
            let inv = ring.inv(unit_part(&ring, pivot[c], v)).expect("unit part");
            for x in pivot.iter_mut() {
                *x = ring.mul(*x, inv);
            }
            let lv = (ring.ell() as u128).pow(v);
            for r in pool.iter_mut() {
                if r[c] != 0 {
                    let factor = r[c] / lv;
                    for j in 0..cols {
                        r[j] = ring.sub(r[j], ring.mul(factor, pivot[j]));
                    }
                }
            }
            let sat_factor = ring.ell_power(ring.precision() - v);
            let sat: Vec<u128> = pivot.iter().map(|&x| ring.mul(x, sat_factor)).collect();
            pool.retain(|r| r.iter().any(|&x| x != 0));
            if sat.iter().any(|&x| x != 0) {
                pool.push(sat);
            }
            pivots[c] = Some((v, pivot));
        }
        HowellForm { ring, cols, pivots }
    }

    pub fn contains(&self, w: &[u128]) -> bool {
        assert_eq!(w.len(), self.cols);
        let ring = &self.ring;
        let mut w: Vec<u128> = w.iter().map(|&x| ring.reduce(x)).collect();
        for c in 0..self.cols {
            if w[c] == 0 {
                continue;
            }
            let Some((v, pivot)) = &self.pivots[c] else { return false };
            if ring.valuation(w[c]).lower_bound() < *v {
                return false;
            }
            let factor = w[c] / (ring.ell() as u128).pow(*v);
            for j in c..self.cols {
                w[j] = ring.sub(w[j], ring.mul(factor, pivot[j]));
            }
        }
        w.iter().all(|&x| x == 0)
    }

    pub fn basis(&self) -> impl Iterator<Item = &Vec<u128>> {
        self.pivots.iter().flatten().map(|(_, r)| r)
    }

    /// log_ℓ of the span's cardinality.
    pub fn log_size(&self) -> u32 {
        self.pivots.iter().flatten().map(|(v, _)| self.ring.precision() - v).sum()
    }

    pub fn contains_all<'a>(&self, rows: impl IntoIterator<Item = &'a Vec<u128>>) -> bool {
        rows.into_iter().all(|r| self.contains(r))
    }

    pub fn same_span(&self, other: &HowellForm) -> bool {
        self.contains_all(other.basis()) && other.contains_all(self.basis())
    }
}

/// Valuations of the Smith invariants of a matrix over Z/ℓ^K (length min(rows, cols)).
pub fn smith_valuations(m: &ModMatrix) -> Vec<Valuation> {
    let ring = m.ring;
    let mut a = m.clone();
    let steps = a.rows.min(a.cols);
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..a.rows {
            for j in t..a.cols {
                let x = a.get(i, j);
                if x != 0 {
                    let v = ring.valuation(x).lower_bound();
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, bi, bj)) = best else {
            out.extend(std::iter::repeat_n(Valuation::AtLeast(ring.precision()), steps - t));
            break;
        };
        for j in 0..a.cols {
            let tmp = a.get(t, j);
            a.set(t, j, a.get(bi, j));
            a.set(bi, j, tmp);
        }
        for i in 0..a.rows {
            let tmp = a.get(i, t);
            a.set(i, t, a.get(i, bj));
            a.set(i, bj, tmp);
        }
        let inv = ring.inv(unit_part(&ring, a.get(t, t), v)).expect("unit part");
        for j in t..a.cols {
            a.set(t, j, ring.mul(a.get(t, j), inv));
        }
        let lv = (ring.ell() as u128).pow(v);
        for i in t + 1..a.rows {
            let x = a.get(i, t);
            if x != 0 {
                let factor = x / lv;
                for j in t..a.cols {
                    let y = ring.sub(a.get(i, j), ring.mul(factor, a.get(t, j)));
                    a.set(i, j, y);
                }
            }
        }
        for j in t + 1..a.cols {
            a.set(t, j, 0);
        }
        out.push(Valuation::Finite(v));
    }
    out
}

/// Rank over F_ℓ of the matrix reduced mod ℓ.
pub fn rank_mod_ell(m: &ModMatrix) -> usize {
    let f = m.ring.residue_field();
    smith_valuations(&m.with_ring(f)).iter().filter(|v| **v == Valuation::Finite(0)).count()
}
