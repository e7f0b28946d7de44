//! The group `G` of invertible upper-triangular `r × r` matrices over `Z_n`
//! acting on `X = Z_n^r` by matrix-vector multiplication.
//!
//! Elements of `G` are enumerated in a fixed order so that sweeps can be
//! sharded by index: the diagonal entries `a_11, ..., a_rr` are the most
//! significant digits (each running over the units of `Z_n` ascending),
//! followed by the strict-upper entries in row-major order (each running over
//! `0..n`). Index 0 is therefore the matrix with every diagonal entry equal to
//! the smallest unit and zeros above the diagonal.

use std::fmt;
use std::ops::Range;

use crate::arith::{self, gcd};
use crate::budget::{cost_mul, Budget};
use crate::error::{Error, Result};
use crate::identity;
use crate::sweep::sharded_sum;
use crate::union_find::DisjointSets;

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Element of `G`: upper-triangular, unit diagonal, entries in `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpperTriangularMatrix {
    n: u64,
    r: usize,
    // dense row-major r*r; strict lower triangle is always 0
    entries: Vec<u64>,
}

impl UpperTriangularMatrix {
    /// Validates and builds a matrix from its rows.
    pub fn new(n: u64, rows: &[Vec<u64>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0u64, ">= 1"));
        }
        let r = rows.len();
        if r == 0 {
            return Err(Error::out_of_range("r", 0u64, ">= 1"));
        }
        let mut entries = Vec::with_capacity(r * r);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::Mismatch(format!(
                    "row {} has {} entries, expected {r}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::Mismatch(format!(
                        "entry ({}, {}) = {v} is not reduced mod {n}",
                        i + 1,
                        j + 1
                    )));
                }
                if j < i && v != 0 {
                    return Err(Error::Mismatch(format!(
                        "entry ({}, {}) below the diagonal is nonzero",
                        i + 1,
                        j + 1
                    )));
                }
                if j == i && gcd(n, v) != 1 {
                    return Err(Error::Mismatch(format!(
                        "diagonal entry ({}, {}) = {v} is not a unit mod {n}",
                        i + 1,
                        i + 1
                    )));
                }
                entries.push(v);
            }
        }
        Ok(UpperTriangularMatrix { n, r, entries })
    }

    pub fn identity(n: u64, r: usize) -> Self {
        assert!(n >= 1 && r >= 1);
        let one = 1 % n;
        let mut entries = vec![0; r * r];
        for i in 0..r {
            entries[i * r + i] = one;
        }
        UpperTriangularMatrix { n, r, entries }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    /// Entry `a_{i+1, j+1}` (zero-based indices).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.r + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.r).map(<[u64]>::to_vec).collect()
    }

    /// Matrix product `self · other` mod `n`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.r != other.r {
            return Err(Error::Mismatch(format!(
                "cannot multiply (n={}, r={}) by (n={}, r={})",
                self.n, self.r, other.n, other.r
            )));
        }
        let (n, r) = (self.n, self.r);
        let mut entries = vec![0; r * r];
        for i in 0..r {
            for j in i..r {
                let mut acc = 0u64;
                for k in i..=j {
                    acc = (acc + mul_mod(self.get(i, k), other.get(k, j), n)) % n;
                }
                entries[i * r + j] = acc;
            }
        }
        Ok(UpperTriangularMatrix { n, r, entries })
    }
}

impl fmt::Display for UpperTriangularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.entries.chunks(self.r).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{row:?}")?;
        }
        f.write_str("]")
    }
}

/// Element `(x_1, ..., x_r)` of `Z_n^r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueVector {
    n: u64,
    coords: Vec<u64>,
}

impl ResidueVector {
    pub fn new(n: u64, coords: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0u64, ">= 1"));
        }
        if coords.is_empty() {
            return Err(Error::out_of_range("r", 0u64, ">= 1"));
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= n) {
            return Err(Error::Mismatch(format!(
                "coordinate {bad} is not reduced mod {n}"
            )));
        }
        Ok(ResidueVector { n, coords })
    }

    pub fn zero(n: u64, r: usize) -> Self {
        assert!(n >= 1 && r >= 1);
        ResidueVector {
            n,
            coords: vec![0; r],
        }
    }

    /// Vector whose base-`n` digits (x_1 most significant) spell `index`.
    pub fn from_index(n: u64, r: usize, mut index: u64) -> Self {
        let mut coords = vec![0; r];
        for c in coords.iter_mut().rev() {
            *c = index % n;
            index /= n;
        }
        ResidueVector { n, coords }
    }

    pub fn index(&self) -> u64 {
        encode(&self.coords, self.n)
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

fn encode(coords: &[u64], n: u64) -> u64 {
    coords.iter().fold(0, |acc, &c| acc * n + c)
}

/// `|G| = n^{r(r-1)/2} φ(n)^r`.
pub fn group_size(n: u64, r: u32) -> Result<u128> {
    check_nr(n, r)?;
    let r = r as u64;
    let upper = arith::checked_pow(n as u128, r * (r - 1) / 2, "group size")?;
    let diag = arith::checked_pow(arith::euler_phi(n) as u128, r, "group size")?;
    upper.checked_mul(diag).ok_or(Error::Overflow("group size"))
}

fn check_nr(n: u64, r: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::out_of_range("n", 0u64, ">= 1"));
    }
    if r == 0 {
        return Err(Error::out_of_range("r", 0u64, ">= 1"));
    }
    Ok(())
}

/// `n^r`, the size of `X`.
pub fn space_size(n: u64, r: u32) -> Result<u128> {
    arith::checked_pow(n as u128, r as u64, "n^r")
}

/// Indexed enumeration of `G` in the documented order.
#[derive(Debug, Clone)]
pub struct GroupEnumeration {
    n: u64,
    r: usize,
    units: Vec<u64>,
    // strict-upper positions, row-major
    upper: Vec<(usize, usize)>,
    len: u64,
}

impl GroupEnumeration {
    /// Enumeration of `G(n, r)` without a budget check. `|G|` must fit `u64`.
    pub fn new(n: u64, r: u32) -> Result<Self> {
        let size = group_size(n, r)?;
        let len = u64::try_from(size).map_err(|_| Error::Overflow("group enumeration index"))?;
        let r = r as usize;
        let upper = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .collect();
        Ok(GroupEnumeration {
            n,
            r,
            units: arith::units(n),
            upper,
            len,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    // digit state: unit positions for the diagonal, raw values above it
    fn digits_at(&self, mut index: u64) -> (Vec<usize>, Vec<u64>) {
        let mut upper = vec![0u64; self.upper.len()];
        for v in upper.iter_mut().rev() {
            *v = index % self.n;
            index /= self.n;
        }
        let base = self.units.len() as u64;
        let mut diag = vec![0usize; self.r];
        for d in diag.iter_mut().rev() {
            *d = (index % base) as usize;
            index /= base;
        }
        (diag, upper)
    }

    fn build(&self, diag: &[usize], upper: &[u64]) -> UpperTriangularMatrix {
        let r = self.r;
        let mut entries = vec![0; r * r];
        for (i, &u) in diag.iter().enumerate() {
            entries[i * r + i] = self.units[u];
        }
        for (&(i, j), &v) in self.upper.iter().zip(upper) {
            entries[i * r + j] = v;
        }
        UpperTriangularMatrix {
            n: self.n,
            r,
            entries,
        }
    }

    pub fn element_at(&self, index: u64) -> UpperTriangularMatrix {
        assert!(
            index < self.len,
            "index {index} out of range 0..{}",
            self.len
        );
        let (diag, upper) = self.digits_at(index);
        self.build(&diag, &upper)
    }

    /// Calls `visit` on every element with index in `range`, in order. The
    /// same matrix buffer is updated in place between calls.
    pub fn try_visit_range<F>(&self, range: Range<u64>, mut visit: F) -> Result<()>
    where
        F: FnMut(&UpperTriangularMatrix) -> Result<()>,
    {
        let end = range.end.min(self.len);
        if range.start >= end {
            return Ok(());
        }
        let (mut diag, mut upper) = self.digits_at(range.start);
        let mut g = self.build(&diag, &upper);
        let r = self.r;
        let base = self.units.len();
        for index in range.start..end {
            visit(&g)?;
            if index + 1 == end {
                break;
            }
            // odometer step: least significant digit is the last upper entry
            let mut carried = true;
            for (pos, &(i, j)) in self.upper.iter().enumerate().rev() {
                upper[pos] += 1;
                if upper[pos] == self.n {
                    upper[pos] = 0;
                    g.entries[i * r + j] = 0;
                } else {
                    g.entries[i * r + j] = upper[pos];
                    carried = false;
                    break;
                }
            }
            if carried {
                for i in (0..r).rev() {
                    diag[i] += 1;
                    if diag[i] == base {
                        diag[i] = 0;
                        g.entries[i * r + i] = self.units[0];
                    } else {
                        g.entries[i * r + i] = self.units[diag[i]];
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = UpperTriangularMatrix> + '_ {
        let mut next = 0u64;
        let mut state = (self.len > 0).then(|| self.digits_at(0));
        std::iter::from_fn(move || {
            let (diag, upper) = state.as_mut()?;
            let g = self.build(diag, upper);
            next += 1;
            if next == self.len {
                state = None;
            } else {
                step_digits(diag, upper, self.units.len(), self.n);
            }
            Some(g)
        })
    }
}

fn step_digits(diag: &mut [usize], upper: &mut [u64], base: usize, n: u64) {
    for v in upper.iter_mut().rev() {
        *v += 1;
        if *v < n {
            return;
        }
        *v = 0;
    }
    for d in diag.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// Enumerates `G(n, r)` after checking `|G| · r²` against the budget.
pub fn enumerate_group(n: u64, r: u32, budget: &Budget) -> Result<GroupEnumeration> {
    let size = group_size(n, r)?;
    budget.check(sweep_cost(size, r), size)?;
    GroupEnumeration::new(n, r)
}

/// Cost model for a sweep evaluating something `O(r²)` per group element.
pub fn sweep_cost(group_size: u128, r: u32) -> u128 {
    cost_mul(group_size, (r as u128) * (r as u128))
}

/// Cost model for a sweep that also enumerates all of `X` per element.
pub fn full_cross_check_cost(n: u64, r: u32) -> Result<(u128, u128)> {
    let size = group_size(n, r)?;
    let space = space_size(n, r).unwrap_or(u128::MAX);
    Ok((cost_mul(sweep_cost(size, r), space), size))
}

#[inline]
fn apply_into(g: &UpperTriangularMatrix, x: &[u64], out: &mut [u64]) {
    let (n, r) = (g.n as u128, g.r);
    for (i, slot) in out.iter_mut().enumerate().take(r) {
        let row = &g.entries[i * r + i..(i + 1) * r];
        let acc = row
            .iter()
            .zip(&x[i..r])
            .fold(0u128, |acc, (&a, &v)| (acc + a as u128 * v as u128) % n);
        *slot = acc as u64;
    }
}

/// `g · x`, i.e. `y_i = Σ_{j >= i} a_ij x_j mod n`.
pub fn apply(g: &UpperTriangularMatrix, x: &ResidueVector) -> Result<ResidueVector> {
    if g.n != x.n || g.r != x.coords.len() {
        return Err(Error::Mismatch(format!(
            "matrix (n={}, r={}) cannot act on vector (n={}, r={})",
            g.n,
            g.r,
            x.n,
            x.coords.len()
        )));
    }
    let mut coords = vec![0; g.r];
    apply_into(g, &x.coords, &mut coords);
    Ok(ResidueVector { n: g.n, coords })
}

fn count_fixed_by_enumeration(g: &UpperTriangularMatrix) -> u128 {
    let (n, r) = (g.n, g.r);
    let mut x = vec![0u64; r];
    let mut y = vec![0u64; r];
    let mut fixed = 0u128;
    loop {
        apply_into(g, &x, &mut y);
        if x == y {
            fixed += 1;
        }
        // next x in base-n order
        let mut pos = r;
        loop {
            if pos == 0 {
                return fixed;
            }
            pos -= 1;
            x[pos] += 1;
            if x[pos] < n {
                break;
            }
            x[pos] = 0;
        }
    }
}

/// `|X^g|` by testing every `x ∈ Z_n^r`.
pub fn fixed_points_direct(g: &UpperTriangularMatrix, budget: &Budget) -> Result<u128> {
    let space = space_size(g.n, g.r as u32)?;
    let r2 = (g.r * g.r) as u128;
    budget.check(cost_mul(space, r2), 1)?;
    Ok(count_fixed_by_enumeration(g))
}

/// `Π_k d_k`, the fixed-point count claimed by the gcd tower.
///
/// Agrees with [`fixed_points_direct`] for `r <= 2`. For `r >= 3` the tower
/// can overcount: with `n = 3` and `g = [[1,1,0],[0,2,1],[0,0,1]]` it gives
/// `3·1·3 = 9` while only the 3 vectors `(t, 0, 0)` are fixed.
pub fn fixed_point_count_formula(g: &UpperTriangularMatrix) -> Result<u128> {
    identity::gcd_tower(g)
        .into_iter()
        .try_fold(1u128, |acc, d| {
            acc.checked_mul(d as u128)
                .ok_or(Error::Overflow("product of d_k"))
        })
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

// Bezout coefficients for (a, b); exact multiples keep the pivot row fixed
fn combine_coeffs(a: i128, b: i128) -> (i128, i128, i128) {
    if b % a == 0 {
        (a, 1, 0)
    } else {
        ext_gcd(a, b)
    }
}

fn residue(v: i128, n: u64) -> u64 {
    v.rem_euclid(n as i128) as u64
}

/// Number of solutions of `M x = 0` over `Z_n`.
///
/// `M` is brought to diagonal form by unimodular row and column operations,
/// which preserve the kernel size; a diagonal matrix has
/// `Π gcd(n, m_ii)` solutions. `m` is square, row-major, entries in `[0, n)`.
pub fn kernel_size_mod(n: u64, r: usize, mut m: Vec<u64>) -> Result<u128> {
    assert_eq!(m.len(), r * r);
    let at = |i: usize, j: usize| i * r + j;
    let mut size = 1u128;
    let overflow = || Error::Overflow("kernel size");
    for t in 0..r {
        let pivot = (t..r)
            .flat_map(|i| (t..r).map(move |j| (i, j)))
            .find(|&(i, j)| m[at(i, j)] != 0);
        let Some((pi, pj)) = pivot else {
            // remaining block is zero: each coordinate is free
            for _ in t..r {
                size = size.checked_mul(n as u128).ok_or_else(overflow)?;
            }
            return Ok(size);
        };
        for j in 0..r {
            m.swap(at(t, j), at(pi, j));
        }
        for i in 0..r {
            m.swap(at(i, t), at(i, pj));
        }
        loop {
            for i in t + 1..r {
                let b = m[at(i, t)];
                if b == 0 {
                    continue;
                }
                let a = m[at(t, t)];
                let (g, s, u) = combine_coeffs(a as i128, b as i128);
                let (ca, cb) = (a as i128 / g, b as i128 / g);
                for j in t..r {
                    let (x, y) = (m[at(t, j)] as i128, m[at(i, j)] as i128);
                    m[at(t, j)] = residue(s * x + u * y, n);
                    m[at(i, j)] = residue(ca * y - cb * x, n);
                }
            }
            for j in t + 1..r {
                let b = m[at(t, j)];
                if b == 0 {
                    continue;
                }
                let a = m[at(t, t)];
                let (g, s, u) = combine_coeffs(a as i128, b as i128);
                let (ca, cb) = (a as i128 / g, b as i128 / g);
                for i in t..r {
                    let (x, y) = (m[at(i, t)] as i128, m[at(i, j)] as i128);
                    m[at(i, t)] = residue(s * x + u * y, n);
                    m[at(i, j)] = residue(ca * y - cb * x, n);
                }
            }
            // column operations may refill column t; repeat until clean.
            // The pivot only changes when it shrinks, so this terminates.
            if (t + 1..r).all(|i| m[at(i, t)] == 0) {
                break;
            }
        }
        size = size
            .checked_mul(gcd(n, m[at(t, t)]) as u128)
            .ok_or_else(overflow)?;
    }
    Ok(size)
}

/// `|X^g| = |ker(g - I)|` computed exactly by diagonalization over `Z_n`.
pub fn fixed_point_count_kernel(g: &UpperTriangularMatrix) -> Result<u128> {
    let (n, r) = (g.n, g.r);
    let mut m = g.entries.clone();
    for i in 0..r {
        m[i * r + i] = (m[i * r + i] + n - 1 % n) % n;
    }
    kernel_size_mod(n, r, m)
}

/// How [`orbit_count_burnside`] obtains `|X^g|` for each group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FixedPointMethod {
    /// Kernel of `g - I` over `Z_n`; exact for every `r`.
    #[default]
    Kernel,
    /// Product of the gcd tower `d_k`.
    GcdTower,
    /// Enumerate all of `X` for every element.
    Direct,
}

impl FixedPointMethod {
    pub fn count(self, g: &UpperTriangularMatrix) -> Result<u128> {
        match self {
            FixedPointMethod::Kernel => fixed_point_count_kernel(g),
            FixedPointMethod::GcdTower => fixed_point_count_formula(g),
            FixedPointMethod::Direct => Ok(count_fixed_by_enumeration(g)),
        }
    }
}

/// Result of a Burnside orbit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BurnsideCount {
    pub orbits: u128,
    pub fixed_point_sum: u128,
    pub group_size: u128,
}

/// Orbit count `N = |G|^{-1} Σ_g |X^g|`, swept over `shards` threads.
///
/// A fixed-point sum not divisible by `|G|` means the per-element counts are
/// wrong and is reported as [`Error::Inconsistent`].
pub fn orbit_count_burnside(
    n: u64,
    r: u32,
    method: FixedPointMethod,
    shards: usize,
    budget: &Budget,
) -> Result<BurnsideCount> {
    let size = group_size(n, r)?;
    let cost = match method {
        FixedPointMethod::Direct => full_cross_check_cost(n, r)?.0,
        _ => sweep_cost(size, r),
    };
    budget.check(cost, size)?;
    let group = GroupEnumeration::new(n, r)?;
    let total = sharded_sum(group.len(), shards, |range| {
        let mut acc = 0u128;
        group.try_visit_range(range, |g| {
            acc = acc
                .checked_add(method.count(g)?)
                .ok_or(Error::Overflow("fixed-point sum"))?;
            Ok(())
        })?;
        Ok(acc)
    })?;
    if total % size != 0 {
        return Err(Error::Inconsistent(format!(
            "fixed-point sum {total} over G(n={n}, r={r}) is not divisible by |G| = {size}"
        )));
    }
    Ok(BurnsideCount {
        orbits: total / size,
        fixed_point_sum: total,
        group_size: size,
    })
}

/// A partition of `Z_n^r`, vectors indexed in base-`n` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition {
    n: u64,
    r: usize,
    // block label per vector index, numbered by first occurrence
    labels: Vec<u32>,
    blocks: usize,
}

impl OrbitPartition {
    fn from_labels(n: u64, r: usize, labels: Vec<u32>) -> Self {
        let blocks = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        OrbitPartition {
            n,
            r,
            labels,
            blocks,
        }
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn label_of(&self, x: &ResidueVector) -> u32 {
        self.labels[x.index() as usize]
    }

    pub fn same_block(&self, x: &ResidueVector, y: &ResidueVector) -> bool {
        self.label_of(x) == self.label_of(y)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Blocks in label order, members ascending by index.
    pub fn blocks(&self) -> Vec<Vec<ResidueVector>> {
        let mut blocks = vec![Vec::new(); self.blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(ResidueVector::from_index(self.n, self.r, i as u64));
        }
        blocks
    }
}

fn space_len(n: u64, r: u32) -> Result<usize> {
    let space = space_size(n, r)?;
    usize::try_from(space)
        .ok()
        .filter(|&s| s <= u32::MAX as usize)
        .ok_or(Error::Overflow("vector index"))
}

/// Orbits of `G` on `X` from a union-find pass joining `x` with `g · x`.
///
/// Vectors already reached from an earlier vector are not expanded again:
/// their images lie in the same orbit because `G` is closed under products.
/// The budget is charged the full `|G| · n^r · r²` regardless.
pub fn orbits_brute_force(n: u64, r: u32, budget: &Budget) -> Result<OrbitPartition> {
    let (cost, size) = full_cross_check_cost(n, r)?;
    budget.check(cost, size)?;
    let len = space_len(n, r)?;
    let group = GroupEnumeration::new(n, r)?;
    let ru = r as usize;
    let mut sets = DisjointSets::new(len);
    let mut reached = vec![false; len];
    let mut y = vec![0u64; ru];
    for xi in 0..len {
        if reached[xi] {
            continue;
        }
        reached[xi] = true;
        let x = ResidueVector::from_index(n, ru, xi as u64);
        group.try_visit_range(0..group.len(), |g| {
            apply_into(g, &x.coords, &mut y);
            let yi = encode(&y, n) as usize;
            reached[yi] = true;
            sets.union(xi, yi);
            Ok(())
        })?;
    }
    Ok(OrbitPartition::from_labels(n, ru, sets.labels()))
}

/// Orbit invariant `(δ_1, ..., δ_r)` with `δ_1 | n` and
/// `δ_i | n / (δ_1 ⋯ δ_{i-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorChain {
    n: u64,
    values: Vec<u64>,
}

impl DivisorChain {
    pub fn new(n: u64, values: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0u64, ">= 1"));
        }
        let mut rest = n;
        for (i, &d) in values.iter().enumerate() {
            if d == 0 || !rest.is_multiple_of(d) {
                return Err(Error::Mismatch(format!(
                    "chain entry {} = {d} does not divide {rest}",
                    i + 1
                )));
            }
            rest /= d;
        }
        Ok(DivisorChain { n, values })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

impl fmt::Display for DivisorChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

fn chain_values(n: u64, coords: &[u64], out: &mut Vec<u64>) {
    out.clear();
    // h generates H = <x_{r-k+2}, ..., x_r>; Z_n / H is cyclic of order h
    let mut h = n;
    for &x in coords.iter().rev() {
        let next = gcd(h, x);
        out.push(h / next);
        h = next;
    }
}

/// Orders of `x_r` in `Z_n`, then of `x_{r-1}` modulo `⟨x_r⟩`, and so on down
/// to `x_1` modulo `⟨x_2, ..., x_r⟩`.
pub fn divisor_chain(x: &ResidueVector) -> DivisorChain {
    let mut values = Vec::with_capacity(x.coords.len());
    chain_values(x.n, &x.coords, &mut values);
    DivisorChain { n: x.n, values }
}

/// Partition of `Z_n^r` into the fibers of [`divisor_chain`].
pub fn chain_partition(n: u64, r: u32, budget: &Budget) -> Result<OrbitPartition> {
    check_nr(n, r)?;
    let space = space_size(n, r)?;
    budget.check(cost_mul(space, r as u128), 1)?;
    let len = space_len(n, r)?;
    let ru = r as usize;
    let mut seen: std::collections::HashMap<Vec<u64>, u32> = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(len);
    let mut chain = Vec::with_capacity(ru);
    for xi in 0..len {
        let x = ResidueVector::from_index(n, ru, xi as u64);
        chain_values(n, &x.coords, &mut chain);
        let next = seen.len() as u32;
        labels.push(*seen.entry(chain.clone()).or_insert(next));
    }
    Ok(OrbitPartition::from_labels(n, ru, labels))
}

/// Visits every valid divisor chain of length `r` for `n`, in lexicographic
/// order of `(δ_1, ..., δ_r)`.
pub fn for_each_chain<F: FnMut(&[u64])>(n: u64, r: u32, mut visit: F) -> Result<()> {
    check_nr(n, r)?;
    let divs = arith::divisors(n);
    let mut chain = Vec::with_capacity(r as usize);
    fn walk<F: FnMut(&[u64])>(
        divs: &[u64],
        rest: u64,
        depth: usize,
        chain: &mut Vec<u64>,
        visit: &mut F,
    ) {
        if chain.len() == depth {
            visit(chain);
            return;
        }
        for &d in divs.iter().take_while(|&&d| d <= rest) {
            if rest.is_multiple_of(d) {
                chain.push(d);
                walk(divs, rest / d, depth, chain, visit);
                chain.pop();
            }
        }
    }
    walk(&divs, n, r as usize, &mut chain, &mut visit);
    Ok(())
}

/// Number of divisor chains, by nested divisor enumeration.
pub fn count_chains(n: u64, r: u32) -> Result<u128> {
    let mut count = 0u128;
    for_each_chain(n, r, |_| count += 1)?;
    Ok(count)
}

pub fn enumerate_chains(n: u64, r: u32) -> Result<Vec<DivisorChain>> {
    let mut chains = Vec::new();
    for_each_chain(n, r, |c| {
        chains.push(DivisorChain {
            n,
            values: c.to_vec(),
        })
    })?;
    Ok(chains)
}

/// Outcome of comparing fixed-point counts on a set of group elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixedPointComparison {
    pub checked: u64,
    /// Indices where `Π d_k` differs from the enumerated count.
    pub tower_mismatches: Vec<u64>,
    /// Indices where the kernel count differs from the enumerated count.
    pub kernel_mismatches: Vec<u64>,
}

/// Compares the gcd tower and the kernel count against direct enumeration
/// on the given element indices.
pub fn compare_fixed_points(
    group: &GroupEnumeration,
    indices: &[u64],
    budget: &Budget,
) -> Result<FixedPointComparison> {
    let r = group.r as u32;
    let space = space_size(group.n, r).unwrap_or(u128::MAX);
    let cost = cost_mul(sweep_cost(indices.len() as u128, r), space);
    budget.check(cost, group.len() as u128)?;
    let mut out = FixedPointComparison::default();
    for &index in indices {
        let g = group.element_at(index);
        let direct = count_fixed_by_enumeration(&g);
        if fixed_point_count_formula(&g)? != direct {
            out.tower_mismatches.push(index);
        }
        if fixed_point_count_kernel(&g)? != direct {
            out.kernel_mismatches.push(index);
        }
        out.checked += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u64, rows: &[&[u64]]) -> UpperTriangularMatrix {
        UpperTriangularMatrix::new(n, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn v(n: u64, c: &[u64]) -> ResidueVector {
        ResidueVector::new(n, c.to_vec()).unwrap()
    }

    #[test]
    fn matrix_validation() {
        assert!(UpperTriangularMatrix::new(4, &[vec![2, 0], vec![0, 1]]).is_err());
        assert!(UpperTriangularMatrix::new(4, &[vec![1, 4], vec![0, 1]]).is_err());
        assert!(UpperTriangularMatrix::new(4, &[vec![1, 0], vec![1, 1]]).is_err());
        assert!(UpperTriangularMatrix::new(4, &[vec![1, 0]]).is_err());
        assert!(UpperTriangularMatrix::new(1, &[vec![0, 0], vec![0, 0]]).is_ok());
        assert!(ResidueVector::new(3, vec![3]).is_err());
    }

    #[test]
    fn group_size_examples() {
        assert_eq!(group_size(5, 1).unwrap(), 4);
        assert_eq!(group_size(2, 2).unwrap(), 2);
        assert_eq!(group_size(4, 2).unwrap(), 16);
        assert_eq!(group_size(4, 3).unwrap(), 512);
        assert_eq!(group_size(1, 7).unwrap(), 1);
        assert!(matches!(group_size(1 << 40, 8), Err(Error::Overflow(_))));
    }

    #[test]
    fn enumeration_examples() {
        let b = Budget::default();
        let g: Vec<_> = enumerate_group(2, 2, &b).unwrap().iter().collect();
        assert_eq!(
            g,
            vec![m(2, &[&[1, 0], &[0, 1]]), m(2, &[&[1, 1], &[0, 1]])]
        );
        let g: Vec<_> = enumerate_group(3, 1, &b).unwrap().iter().collect();
        assert_eq!(g, vec![m(3, &[&[1]]), m(3, &[&[2]])]);
        let g: Vec<_> = enumerate_group(1, 2, &b).unwrap().iter().collect();
        assert_eq!(g, vec![m(1, &[&[0, 0], &[0, 0]])]);
    }

    #[test]
    fn enumeration_order_is_diagonal_major() {
        let group = GroupEnumeration::new(3, 2).unwrap();
        let all: Vec<_> = group.iter().collect();
        assert_eq!(all.len(), 12);
        assert_eq!(all[0], m(3, &[&[1, 0], &[0, 1]]));
        assert_eq!(all[1], m(3, &[&[1, 1], &[0, 1]]));
        assert_eq!(all[3], m(3, &[&[1, 0], &[0, 2]]));
        assert_eq!(all[6], m(3, &[&[2, 0], &[0, 1]]));
        assert_eq!(all[11], m(3, &[&[2, 2], &[0, 2]]));
        for (i, g) in all.iter().enumerate() {
            assert_eq!(&group.element_at(i as u64), g);
        }
    }

    #[test]
    fn visit_range_matches_element_at() {
        let group = GroupEnumeration::new(4, 3).unwrap();
        let mut seen = Vec::new();
        group
            .try_visit_range(37..301, |g| {
                seen.push(g.clone());
                Ok(())
            })
            .unwrap();
        assert_eq!(seen.len(), 264);
        for (k, g) in seen.iter().enumerate() {
            assert_eq!(&group.element_at(37 + k as u64), g);
        }
    }

    #[test]
    fn enumeration_refuses_over_budget() {
        let err = enumerate_group(100, 4, &Budget::new(1000)).unwrap_err();
        let size = group_size(100, 4).unwrap();
        assert!(matches!(err, Error::BudgetExceeded { group_size, .. } if group_size == size));
    }

    #[test]
    fn apply_examples() {
        let x = v(5, &[1, 2, 3]);
        assert_eq!(
            apply(&UpperTriangularMatrix::identity(5, 3), &x).unwrap(),
            x
        );
        let g = m(2, &[&[1, 1], &[0, 1]]);
        assert_eq!(apply(&g, &v(2, &[0, 1])).unwrap(), v(2, &[1, 1]));
        let g = m(4, &[&[3, 2], &[0, 3]]);
        assert_eq!(apply(&g, &v(4, &[1, 2])).unwrap(), v(4, &[3, 2]));
        assert!(apply(&g, &v(5, &[1, 2])).is_err());
        assert!(apply(&g, &v(4, &[1, 2, 3])).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let b = Budget::default();
        let id = UpperTriangularMatrix::identity(3, 2);
        assert_eq!(fixed_points_direct(&id, &b).unwrap(), 9);
        assert_eq!(fixed_point_count_formula(&id).unwrap(), 9);
        let g = m(2, &[&[1, 1], &[0, 1]]);
        assert_eq!(fixed_points_direct(&g, &b).unwrap(), 2);
        assert_eq!(fixed_point_count_formula(&g).unwrap(), 2);
        let g = m(4, &[&[3, 2], &[0, 3]]);
        assert_eq!(fixed_points_direct(&g, &b).unwrap(), 4);
        assert_eq!(fixed_point_count_formula(&g).unwrap(), 4);
        assert_eq!(fixed_point_count_kernel(&g).unwrap(), 4);
    }

    #[test]
    fn gcd_tower_overcounts_at_rank_three() {
        let g = m(3, &[&[1, 1, 0], &[0, 2, 1], &[0, 0, 1]]);
        let b = Budget::default();
        assert_eq!(fixed_points_direct(&g, &b).unwrap(), 3);
        assert_eq!(fixed_point_count_kernel(&g).unwrap(), 3);
        assert_eq!(fixed_point_count_formula(&g).unwrap(), 9);
    }

    #[test]
    fn kernel_size_of_explicit_matrices() {
        // diag(2, 0) over Z_6: 2 * 6
        assert_eq!(kernel_size_mod(6, 2, vec![2, 0, 0, 0]).unwrap(), 12);
        // [[2, 3], [0, 0]] over Z_6: 2x + 3y = 0 has 6 solutions
        assert_eq!(kernel_size_mod(6, 2, vec![2, 3, 0, 0]).unwrap(), 6);
        assert_eq!(kernel_size_mod(1, 3, vec![0; 9]).unwrap(), 1);
        assert_eq!(kernel_size_mod(7, 2, vec![0; 4]).unwrap(), 49);
    }

    #[test]
    fn burnside_examples() {
        let b = Budget::default();
        let count = |n, r| {
            orbit_count_burnside(n, r, FixedPointMethod::Kernel, 1, &b)
                .unwrap()
                .orbits
        };
        assert_eq!(count(6, 1), 4);
        assert_eq!(count(2, 2), 3);
        assert_eq!(count(12, 2), 18);
        let c = orbit_count_burnside(2, 2, FixedPointMethod::GcdTower, 1, &b).unwrap();
        assert_eq!(c.fixed_point_sum, 6);
        assert_eq!(c.group_size, 2);
    }

    #[test]
    fn burnside_with_tower_is_inconsistent_at_rank_three() {
        let err = orbit_count_burnside(3, 3, FixedPointMethod::GcdTower, 2, &Budget::default())
            .unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)), "{err}");
    }

    #[test]
    fn brute_force_orbit_examples() {
        let b = Budget::default();
        let p = orbits_brute_force(2, 2, &b).unwrap();
        let blocks: Vec<Vec<Vec<u64>>> = p
            .blocks()
            .into_iter()
            .map(|blk| blk.into_iter().map(|x| x.coords().to_vec()).collect())
            .collect();
        assert_eq!(
            blocks,
            vec![
                vec![vec![0, 0]],
                vec![vec![0, 1], vec![1, 1]],
                vec![vec![1, 0]]
            ]
        );
        for r in 1..4 {
            assert_eq!(orbits_brute_force(1, r, &b).unwrap().block_count(), 1);
        }
        let p = orbits_brute_force(3, 1, &b).unwrap();
        assert_eq!(p.block_count(), 2);
        assert!(p.same_block(&v(3, &[1]), &v(3, &[2])));
        assert!(!p.same_block(&v(3, &[0]), &v(3, &[2])));
    }

    #[test]
    fn divisor_chain_examples() {
        assert_eq!(
            divisor_chain(&ResidueVector::zero(9, 4)).values(),
            &[1, 1, 1, 1]
        );
        assert_eq!(divisor_chain(&v(4, &[1, 2])).values(), &[2, 2]);
        assert_eq!(divisor_chain(&v(4, &[2, 0])).values(), &[1, 2]);
        assert!(DivisorChain::new(12, vec![4, 2]).is_err());
        assert!(DivisorChain::new(12, vec![4, 3]).is_ok());
    }

    #[test]
    fn chain_count_examples() {
        assert_eq!(count_chains(12, 1).unwrap(), 6);
        assert_eq!(count_chains(2, 2).unwrap(), 3);
        assert_eq!(count_chains(12, 2).unwrap(), 18);
        let chains: Vec<Vec<u64>> = enumerate_chains(2, 2)
            .unwrap()
            .into_iter()
            .map(|c| c.values().to_vec())
            .collect();
        assert_eq!(chains, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn chain_partition_matches_orbits_small() {
        let b = Budget::default();
        for (n, r) in [(2, 2), (4, 2), (6, 2), (4, 3), (3, 3)] {
            assert_eq!(
                chain_partition(n, r, &b).unwrap(),
                orbits_brute_force(n, r, &b).unwrap(),
                "n={n} r={r}"
            );
        }
    }
}
