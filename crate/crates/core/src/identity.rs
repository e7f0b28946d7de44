//! The generalized Menon sum
//!
//! ```text
//! Σ_{g ∈ G}  Π_{k=1}^{r} d_k(g)   =   n^{r(r-1)/2} φ(n)^r τ_r(n)
//! ```
//!
//! where `d_k = gcd(n, n a_1k / G_1, ..., n a_{k-1,k} / G_{k-1}, a_kk - 1)` and
//! `G_j = gcd(n, a_jj - 1, a_{j,j+1}, ..., a_{j,k-1})`.
//!
//! The left side is evaluated by an exhaustive sharded sweep over `G`, the
//! right side in closed form. For `r = 1` this is Menon's identity and for
//! `r = 2` both sides agree for every `n`. For `r >= 3` and `n >= 3` the sweep
//! exceeds the closed form because `Π d_k` overcounts `|X^g|` on some
//! elements; [`verify_star`] reports that as an unmatched report rather than
//! hiding it.

use std::time::{Duration, Instant};

use crate::arith::{self, gcd, gcd_many};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group_action::{self, compare_fixed_points, GroupEnumeration, UpperTriangularMatrix};
use crate::sweep::{sample_indices, sharded_sum};

#[inline]
fn minus_one(a: u64, n: u64) -> u64 {
    (a + n - 1 % n) % n
}

/// `n · a / div mod n`, forming the product before the exact division.
#[inline]
fn scaled_term(n: u64, a: u64, div: u64) -> u64 {
    ((n as u128 * a as u128 / div as u128) % n as u128) as u64
}

/// `d_k` for `k` in `1..=r`.
pub fn compute_dk(g: &UpperTriangularMatrix, k: usize) -> u64 {
    let (n, r) = (g.modulus(), g.dim());
    assert!((1..=r).contains(&k), "k = {k} outside 1..={r}");
    let col = k - 1;
    let mut terms = Vec::with_capacity(k);
    for j in 0..col {
        // G_j = gcd(n, a_jj - 1, a_{j,j+1}, ..., a_{j,k-1})
        let mut row = vec![minus_one(g.get(j, j), n)];
        row.extend((j + 1..col).map(|l| g.get(j, l)));
        let interior = gcd_many(n, &row);
        terms.push(scaled_term(n, g.get(j, col), interior));
    }
    terms.push(minus_one(g.get(col, col), n));
    gcd_many(n, &terms)
}

/// `(d_1, ..., d_r)`, sharing the interior gcds between columns.
pub fn gcd_tower(g: &UpperTriangularMatrix) -> Vec<u64> {
    let mut scratch = vec![0; g.dim()];
    let mut out = vec![0; g.dim()];
    tower_into(g, &mut scratch, &mut out);
    out
}

// row_gcd[j] holds gcd(n, a_jj - 1, a_{j,j+1}, ..., a_{j,k-1}) while column k
// is being processed.
#[inline]
fn tower_into(g: &UpperTriangularMatrix, row_gcd: &mut [u64], out: &mut [u64]) {
    let (n, r) = (g.modulus(), g.dim());
    for k in 0..r {
        let diag = minus_one(g.get(k, k), n);
        let mut d = gcd(n, diag);
        for (j, &gj) in row_gcd[..k].iter().enumerate() {
            if d == 1 {
                break;
            }
            d = gcd(d, scaled_term(n, g.get(j, k), gj));
        }
        out[k] = d;
        for (j, gj) in row_gcd[..k].iter_mut().enumerate() {
            *gj = gcd(*gj, g.get(j, k));
        }
        row_gcd[k] = gcd(n, diag);
    }
}

/// Record of one identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub n: u64,
    pub r: u32,
    pub lhs: u128,
    pub rhs: u128,
    pub group_size: u128,
    pub matched: bool,
    pub elapsed: Duration,
    pub shards: usize,
    /// Seed of the sampled fixed-point check, when one was run.
    pub seed: Option<u64>,
    pub linkage: Option<LinkageCheck>,
}

/// Sampled comparison of `Π d_k` against the enumerated `|X^g|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkageCheck {
    pub checked: u64,
    pub tower_mismatches: u64,
    pub kernel_mismatches: u64,
    /// First element (in enumeration order) where `Π d_k != |X^g|`.
    pub first_tower_mismatch: Option<UpperTriangularMatrix>,
}

/// Menon's identity `Σ_{a ∈ U(Z_n)} gcd(n, a - 1) = φ(n) τ(n)` by direct
/// summation over the units.
pub fn menon_classic(n: u64) -> IdentityReport {
    assert!(n >= 1);
    let start = Instant::now();
    let lhs: u128 = arith::units(n)
        .into_iter()
        .map(|a| gcd_many(n, &[minus_one(a, n)]) as u128)
        .sum();
    let phi = arith::euler_phi(n) as u128;
    let rhs = phi * arith::tau(n) as u128;
    IdentityReport {
        n,
        r: 1,
        lhs,
        rhs,
        group_size: phi,
        matched: lhs == rhs,
        elapsed: start.elapsed(),
        shards: 1,
        seed: None,
        linkage: None,
    }
}

/// `Σ_{g ∈ G} Π_k d_k(g)`, swept over `shards` threads. The result does not
/// depend on the shard count.
pub fn lhs_star(n: u64, r: u32, shards: usize, budget: &Budget) -> Result<u128> {
    let group = group_action::enumerate_group(n, r, budget)?;
    sharded_sum(group.len(), shards, |range| {
        let ru = group.dim();
        let mut row_gcd = vec![0u64; ru];
        let mut tower = vec![0u64; ru];
        let mut acc = 0u128;
        group.try_visit_range(range, |g| {
            tower_into(g, &mut row_gcd, &mut tower);
            let prod = tower
                .iter()
                .try_fold(1u128, |p, &d| p.checked_mul(d as u128));
            acc = prod
                .and_then(|p| acc.checked_add(p))
                .ok_or(Error::Overflow("left-hand sum"))?;
            Ok(())
        })?;
        Ok(acc)
    })
}

/// `n^{r(r-1)/2} φ(n)^r τ_r(n)`.
pub fn rhs_star(n: u64, r: u32) -> Result<u128> {
    let size = group_action::group_size(n, r)?;
    size.checked_mul(arith::tau_r_recursive(n, r)?)
        .ok_or(Error::Overflow("right-hand side"))
}

/// Knobs for [`verify_star`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub shards: usize,
    pub budget: Budget,
    /// Number of group elements on which `Π d_k` is compared with the
    /// enumerated fixed-point count; 0 disables the check.
    pub linkage_samples: u64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            shards: 1,
            budget: Budget::default(),
            linkage_samples: 0,
            seed: 0,
        }
    }
}

/// Compares `Π d_k` with `|X^g|` on `samples` seeded elements of `G(n, r)`.
pub fn sample_linkage(
    n: u64,
    r: u32,
    samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<LinkageCheck> {
    let group = GroupEnumeration::new(n, r)?;
    let indices = sample_indices(group.len(), samples, seed);
    let cmp = compare_fixed_points(&group, &indices, budget)?;
    Ok(LinkageCheck {
        checked: cmp.checked,
        tower_mismatches: cmp.tower_mismatches.len() as u64,
        kernel_mismatches: cmp.kernel_mismatches.len() as u64,
        first_tower_mismatch: cmp.tower_mismatches.first().map(|&i| group.element_at(i)),
    })
}

/// Runs both sides of the identity for `(n, r)`.
///
/// An unmatched report is a result, not an error: callers decide how to
/// surface it. Errors are reserved for budget refusals and overflow.
pub fn verify_star(n: u64, r: u32, opts: &SweepOptions) -> Result<IdentityReport> {
    let start = Instant::now();
    let group_size = group_action::group_size(n, r)?;
    let rhs = rhs_star(n, r)?;
    let lhs = lhs_star(n, r, opts.shards, &opts.budget)?;
    let linkage = if opts.linkage_samples > 0 {
        Some(sample_linkage(
            n,
            r,
            opts.linkage_samples,
            opts.seed,
            &opts.budget,
        )?)
    } else {
        None
    };
    Ok(IdentityReport {
        n,
        r,
        lhs,
        rhs,
        group_size,
        matched: lhs == rhs,
        elapsed: start.elapsed(),
        shards: opts.shards,
        seed: linkage.as_ref().map(|_| opts.seed),
        linkage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u64, rows: &[&[u64]]) -> UpperTriangularMatrix {
        UpperTriangularMatrix::new(n, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn dk_examples() {
        for n in [1, 2, 7, 12] {
            assert_eq!(compute_dk(&UpperTriangularMatrix::identity(n, 3), 1), n);
        }
        let g = m(4, &[&[3, 2], &[0, 3]]);
        assert_eq!(compute_dk(&g, 1), 2);
        assert_eq!(compute_dk(&g, 2), 2);
        let g = m(2, &[&[1, 1], &[0, 1]]);
        assert_eq!(compute_dk(&g, 1), 2);
        assert_eq!(compute_dk(&g, 2), 1);
    }

    #[test]
    fn tower_matches_per_column_definition() {
        for (n, r) in [(6, 3), (4, 4), (5, 2)] {
            let group = GroupEnumeration::new(n, r).unwrap();
            for g in group.iter().step_by(7) {
                let expected: Vec<u64> = (1..=r as usize).map(|k| compute_dk(&g, k)).collect();
                assert_eq!(gcd_tower(&g), expected, "{g}");
            }
        }
    }

    #[test]
    fn menon_examples() {
        let rep = menon_classic(1);
        assert_eq!((rep.lhs, rep.rhs), (1, 1));
        let rep = menon_classic(3);
        assert_eq!((rep.lhs, rep.rhs), (4, 4));
        let rep = menon_classic(12);
        assert_eq!((rep.lhs, rep.rhs), (24, 24));
        assert!(rep.matched);
    }

    #[test]
    fn lhs_examples() {
        let b = Budget::default();
        for n in 1..40 {
            assert_eq!(lhs_star(n, 1, 1, &b).unwrap(), menon_classic(n).lhs);
        }
        assert_eq!(lhs_star(2, 2, 1, &b).unwrap(), 6);
        assert_eq!(lhs_star(4, 2, 3, &b).unwrap(), 96);
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs_star(7, 1).unwrap(), 6 * 2);
        assert_eq!(rhs_star(2, 2).unwrap(), 6);
        assert_eq!(rhs_star(12, 2).unwrap(), 3456);
        assert!(matches!(rhs_star(1 << 40, 9), Err(Error::Overflow(_))));
    }

    #[test]
    fn verify_examples() {
        let opts = SweepOptions::default();
        let rep = verify_star(5, 1, &opts).unwrap();
        assert!(rep.matched);
        assert_eq!(rep.lhs, 8);
        let rep = verify_star(2, 2, &opts).unwrap();
        assert!(rep.matched);
        assert_eq!(rep.lhs, 6);
        let rep = verify_star(2, 3, &opts).unwrap();
        assert!(rep.matched);
        assert_eq!((rep.lhs, rep.rhs, rep.group_size), (32, 32, 8));
        assert_eq!(rep.seed, None);
    }

    #[test]
    fn verify_reports_rank_three_gap() {
        let opts = SweepOptions {
            linkage_samples: 1000,
            seed: 3,
            ..SweepOptions::default()
        };
        let rep = verify_star(3, 3, &opts).unwrap();
        assert!(!rep.matched);
        assert_eq!((rep.lhs, rep.rhs), (936, 864));
        let link = rep.linkage.unwrap();
        assert_eq!(link.checked, 216);
        assert_eq!(link.tower_mismatches, 12);
        assert_eq!(link.kernel_mismatches, 0);
        assert_eq!(rep.seed, Some(3));
        assert_eq!(
            link.first_tower_mismatch.unwrap(),
            m(3, &[&[1, 1, 0], &[0, 2, 1], &[0, 0, 1]])
        );
    }

    #[test]
    fn verify_refuses_over_budget() {
        let opts = SweepOptions {
            budget: Budget::new(1000),
            ..SweepOptions::default()
        };
        let err = verify_star(100, 4, &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
