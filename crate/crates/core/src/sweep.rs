//! Deterministic sharding of an enumeration index space.
//!
//! The index space `0..total` is cut into contiguous shards whose lengths
//! differ by at most one. Each shard is folded independently and the partial
//! results are combined in shard order with exact addition, so the total does
//! not depend on the shard count or on thread scheduling.

use std::ops::Range;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub fn shard_ranges(total: u64, shards: usize) -> Vec<Range<u64>> {
    assert!(shards >= 1, "shard count must be at least 1");
    let shards = shards as u64;
    let base = total / shards;
    let extra = total % shards;
    let mut start = 0;
    (0..shards)
        .map(|i| {
            let len = base + u64::from(i < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

/// Runs `fold` on every shard and adds the results exactly.
///
/// With one shard the fold runs on the calling thread; otherwise each shard
/// gets a scoped thread. Errors are reported for the lowest failing shard.
pub fn sharded_sum<F>(total: u64, shards: usize, fold: F) -> Result<u128>
where
    F: Fn(Range<u64>) -> Result<u128> + Sync,
{
    let ranges = shard_ranges(total, shards);
    let partials: Vec<Result<u128>> = if ranges.len() == 1 {
        vec![fold(ranges[0].clone())]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|range| {
                    let fold = &fold;
                    let range = range.clone();
                    scope.spawn(move || fold(range))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("shard worker panicked"))
                .collect()
        })
    };
    partials.into_iter().try_fold(0u128, |acc, part| {
        acc.checked_add(part?).ok_or(Error::Overflow("sharded sum"))
    })
}

/// `count` distinct indices from `0..total`, ascending, chosen by a ChaCha8
/// stream seeded with `seed`. Returns every index when `count >= total`.
pub fn sample_indices(total: u64, count: u64, seed: u64) -> Vec<u64> {
    if count >= total {
        return (0..total).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<u64> = rand::seq::index::sample(&mut rng, total as usize, count as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    picked.sort_unstable();
    picked
}
