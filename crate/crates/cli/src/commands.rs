use std::time::Instant;

use menon_core::arith::{tau2_explicit, tau_r_closed, tau_r_recursive};
use menon_core::group_action::{
    chain_partition, compare_fixed_points, count_chains, enumerate_chains, group_size,
    orbit_count_burnside, orbits_brute_force, FixedPointMethod, GroupEnumeration,
};
use menon_core::identity::{lhs_star, verify_star, SweepOptions};
use menon_core::sweep::sample_indices;
use menon_core::{Budget, Error};

use crate::args::{Command, RunArgs};
use crate::output::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

/// Fixed-point spot checks per modulus in `burnside`.
const BURNSIDE_SAMPLES: u64 = 1000;

#[derive(Debug, Default)]
struct Status {
    mismatch: bool,
    refused: bool,
    overflow: bool,
}

impl Status {
    fn exit_code(&self) -> i32 {
        if self.overflow {
            EXIT_OVERFLOW
        } else if self.mismatch {
            EXIT_MISMATCH
        } else if self.refused {
            EXIT_REFUSED
        } else {
            EXIT_OK
        }
    }
}

struct Run {
    records: Vec<Box<dyn Record>>,
    status: Status,
    header: &'static [&'static str],
    group_size_col: Option<usize>,
}

impl Run {
    fn new(header: &'static [&'static str]) -> Self {
        Run {
            records: Vec::new(),
            status: Status::default(),
            header,
            group_size_col: header.iter().position(|&h| h == "group_size"),
        }
    }

    fn push(&mut self, rec: impl Record + 'static) {
        self.records.push(Box::new(rec));
    }

    fn mismatch(&mut self, n: u64, r: u32, what: &str) {
        eprintln!("menon: n={n} r={r}: {what}");
        self.status.mismatch = true;
    }

    /// Records a failed (n, r) in place of its result.
    fn fail(&mut self, n: u64, r: u32, err: Error) {
        eprintln!("menon: n={n} r={r}: {err}");
        let mut rec = FailureRecord {
            n: int(n),
            r,
            refused: false,
            overflow: false,
            group_size: group_size(n, r).ok().map(int),
            estimated_cost: None,
            budget: None,
            message: err.to_string(),
            csv_width: self.header.len(),
            csv_group_size_col: self.group_size_col,
        };
        match err {
            Error::BudgetExceeded {
                estimated_cost,
                budget,
                group_size,
            } => {
                self.status.refused = true;
                rec.refused = true;
                rec.group_size = Some(int(group_size));
                rec.estimated_cost = Some(int(estimated_cost));
                rec.budget = Some(int(budget));
            }
            Error::Overflow(_) => {
                self.status.overflow = true;
                rec.overflow = true;
            }
            // anything else means the computation contradicted itself
            _ => self.status.mismatch = true,
        }
        self.push(rec);
    }
}

/// Runs a subcommand to completion and returns the process exit code.
pub fn run(command: Command) -> i32 {
    let (run, args, default_style) = match command {
        Command::Verify { run, timing } => (verify(&run, timing), run, Style::JsonLines),
        Command::Burnside { run } => (burnside(&run), run, Style::JsonLines),
        Command::Tau { run } => (tau(&run), run, Style::Plain),
        Command::Chains { run, list } => (chains(&run, list), run, Style::JsonLines),
        Command::Bench { run } => (bench(&run), run, Style::JsonLines),
    };
    let style = args.format.map(Style::from).unwrap_or(default_style);
    if let Err(e) = write_records(args.out.as_deref(), style, run.header, &run.records) {
        eprintln!("menon: cannot write output: {e}");
        return EXIT_IO;
    }
    run.status.exit_code()
}

fn verify(args: &RunArgs, timing: bool) -> Run {
    let mut run = Run::new(VERIFY_HEADER);
    let opts = SweepOptions {
        shards: args.shards,
        budget: args.budget(),
        linkage_samples: 0,
        seed: args.seed,
    };
    for n in args.range.iter() {
        match verify_star(n, args.r, &opts) {
            Ok(rep) => {
                if !rep.matched {
                    run.mismatch(n, args.r, &format!("lhs {} != rhs {}", rep.lhs, rep.rhs));
                }
                run.push(VerifyRecord {
                    n: int(n),
                    r: args.r,
                    lhs: int(rep.lhs),
                    rhs: int(rep.rhs),
                    group_size: int(rep.group_size),
                    matched: rep.matched,
                    elapsed_s: if timing {
                        rep.elapsed.as_secs_f64()
                    } else {
                        0.0
                    },
                    shards: rep.shards,
                });
            }
            Err(e) => run.fail(n, args.r, e),
        }
    }
    run
}

struct OrbitCounts {
    burnside: u128,
    unionfind: u128,
    chains: u128,
    tau_r: u128,
    fibers_match: bool,
    sample_mismatches: usize,
}

fn orbit_counts(n: u64, r: u32, args: &RunArgs, budget: &Budget) -> Result<OrbitCounts, Error> {
    let tau_r = tau_r_recursive(n, r)?;
    let burnside = orbit_count_burnside(n, r, FixedPointMethod::Kernel, args.shards, budget)?;
    let orbits = orbits_brute_force(n, r, budget)?;
    let fibers = chain_partition(n, r, budget)?;
    let group = GroupEnumeration::new(n, r)?;
    let sample = sample_indices(group.len(), BURNSIDE_SAMPLES, args.seed);
    let spot = compare_fixed_points(&group, &sample, budget)?;
    Ok(OrbitCounts {
        burnside: burnside.orbits,
        unionfind: orbits.block_count() as u128,
        chains: count_chains(n, r)?,
        tau_r,
        fibers_match: fibers == orbits,
        sample_mismatches: spot.kernel_mismatches.len(),
    })
}

fn burnside(args: &RunArgs) -> Run {
    let mut run = Run::new(BURNSIDE_HEADER);
    let budget = args.budget();
    for n in args.range.iter() {
        match orbit_counts(n, args.r, args, &budget) {
            Ok(c) => {
                let counts_agree =
                    c.burnside == c.tau_r && c.unionfind == c.tau_r && c.chains == c.tau_r;
                let agree = counts_agree && c.fibers_match && c.sample_mismatches == 0;
                if !counts_agree {
                    run.mismatch(n, args.r, "orbit counts disagree");
                }
                if !c.fibers_match {
                    run.mismatch(n, args.r, "divisor-chain fibers differ from orbits");
                }
                if c.sample_mismatches > 0 {
                    run.mismatch(
                        n,
                        args.r,
                        &format!(
                            "{} sampled fixed-point counts disagree",
                            c.sample_mismatches
                        ),
                    );
                }
                run.push(BurnsideRecord {
                    n: int(n),
                    r: args.r,
                    burnside_count: int(c.burnside),
                    unionfind_count: int(c.unionfind),
                    chain_count: int(c.chains),
                    tau_r: int(c.tau_r),
                    agree,
                });
            }
            Err(e) => run.fail(n, args.r, e),
        }
    }
    run
}

fn tau_values(n: u64, r: u32) -> Result<(u128, bool), Error> {
    let recursive = tau_r_recursive(n, r)?;
    let closed = tau_r_closed(n, r)?;
    let explicit_ok = r != 2 || tau2_explicit(n) == recursive;
    Ok((recursive, recursive == closed && explicit_ok))
}

fn tau(args: &RunArgs) -> Run {
    let mut run = Run::new(TAU_HEADER);
    for n in args.range.iter() {
        match tau_values(n, args.r) {
            Ok((value, agree)) => {
                if !agree {
                    run.mismatch(n, args.r, "tau_r formulas disagree");
                }
                run.push(TauRecord {
                    n: int(n),
                    r: args.r,
                    tau_r: int(value),
                    agree,
                });
            }
            Err(e) => run.fail(n, args.r, e),
        }
    }
    run
}

fn chains(args: &RunArgs, list: bool) -> Run {
    let mut run = Run::new(if list {
        CHAIN_HEADER
    } else {
        CHAIN_COUNT_HEADER
    });
    let budget = args.budget();
    let r = args.r;
    for n in args.range.iter() {
        let counted = tau_r_closed(n, r).and_then(|expected| {
            budget.check(expected.saturating_mul(r as u128), 0)?;
            Ok((expected, tau_r_recursive(n, r)?))
        });
        let (_, tau_r) = match counted {
            Ok(v) => v,
            Err(e) => {
                run.fail(n, r, e);
                continue;
            }
        };
        if list {
            match enumerate_chains(n, r) {
                Ok(all) => {
                    if all.len() as u128 != tau_r {
                        run.mismatch(n, r, "chain count differs from tau_r");
                    }
                    for c in all {
                        run.push(ChainRecord {
                            n: int(n),
                            r,
                            chain: c.values().iter().map(int).collect(),
                        });
                    }
                }
                Err(e) => run.fail(n, r, e),
            }
        } else {
            match count_chains(n, r) {
                Ok(count) => {
                    if count != tau_r {
                        run.mismatch(n, r, "chain count differs from tau_r");
                    }
                    run.push(ChainCountRecord {
                        n: int(n),
                        r,
                        chain_count: int(count),
                        tau_r: int(tau_r),
                        matched: count == tau_r,
                    });
                }
                Err(e) => run.fail(n, r, e),
            }
        }
    }
    run
}

fn bench(args: &RunArgs) -> Run {
    let mut run = Run::new(BENCH_HEADER);
    let budget = args.budget();
    for n in args.range.iter() {
        let timed = group_size(n, args.r).and_then(|size| {
            let start = Instant::now();
            let lhs = lhs_star(n, args.r, args.shards, &budget)?;
            Ok((size, lhs, start.elapsed().as_secs_f64()))
        });
        match timed {
            Ok((size, lhs, secs)) => run.push(BenchRecord {
                n: int(n),
                r: args.r,
                group_size: int(size),
                lhs: int(lhs),
                elapsed_s: secs,
                elements_per_s: size as f64 / secs.max(1e-9),
                shards: args.shards,
            }),
            Err(e) => run.fail(n, args.r, e),
        }
    }
    run
}
