//! Depth-first lifting of residues `mod p^k` to `mod p^{k+1}`.
//!
//! Children of a node `x mod p^k` are `x + p^k t` for digit vectors
//! `t in [0, p)^n`, visited in increasing lexicographic order of `t`. A child
//! survives when every constraint vanishes modulo `p^{k+1}` (for levels up to
//! the configured constraint depth). Work is split over the level-one
//! subtrees; results come back in subtree order regardless of worker count.

use rayon::prelude::*;

use crate::error::Result;
use crate::modring::ipow;
use crate::mpoly::{CompiledPoly, MPoly};
use crate::system::Budget;

/// What to do after visiting a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Descend,
    /// Skip this node's subtree.
    Prune,
}

pub struct Lifter<'a> {
    p: u64,
    n: usize,
    depth: u32,
    constraints: Vec<CompiledPoly>,
    constraint_depth: u32,
    budget: &'a Budget,
    workers: usize,
}

impl<'a> Lifter<'a> {
    /// Enumerates points modulo `p^depth` satisfying `constraints` at every level.
    pub fn new(p: u64, n: usize, constraints: &[MPoly], depth: u32, budget: &'a Budget) -> Self {
        let modulus = ipow(p, depth.max(1));
        Lifter {
            p,
            n,
            depth,
            constraints: constraints.iter().map(|f| f.compile(modulus)).collect(),
            constraint_depth: depth,
            budget,
            workers: 1,
        }
    }

    /// Constraints are only enforced at levels `<= k`; deeper digits are free.
    pub fn constraint_depth(mut self, k: u32) -> Self {
        self.constraint_depth = k;
        self
    }

    pub fn workers(mut self, w: usize) -> Self {
        self.workers = w.max(1);
        self
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn satisfies(&self, x: &[u64], k: u32) -> bool {
        if k > self.constraint_depth {
            return true;
        }
        let m = ipow(self.p, k);
        self.constraints.iter().all(|f| f.eval(x) % m == 0)
    }

    /// Runs the search. `visit` sees every surviving node at levels `1..=depth`
    /// (as residues in `[0, p^level)`); one accumulator per level-one subtree is
    /// returned, in lexicographic order of the subtree roots.
    pub fn run<A, I, F>(&self, init: I, visit: F) -> Result<Vec<A>>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, u32, &[u64]) -> Step + Sync,
    {
        if self.depth == 0 {
            return Ok(Vec::new());
        }
        let roots: Vec<Vec<u64>> = digit_vectors(self.p, self.n)
            .filter(|x| self.satisfies(x, 1))
            .collect();
        self.budget.charge(ipow(self.p, self.n as u32))?;
        let work = |root: &Vec<u64>| -> Result<A> {
            let mut acc = init();
            let mut point = root.clone();
            if visit(&mut acc, 1, &point) == Step::Descend {
                self.descend(&mut acc, &mut point, 1, &visit)?;
            }
            Ok(acc)
        };
        if self.workers <= 1 {
            roots.iter().map(work).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            pool.install(|| roots.par_iter().map(work).collect())
        }
    }

    /// Sequential streaming visit of the level-`depth` points, in
    /// lexicographic lifting order. Only the current path is held in memory.
    pub fn for_each_leaf<F: FnMut(&[u64])>(&self, mut f: F) -> Result<()> {
        if self.depth == 0 {
            return Ok(());
        }
        let mut point = vec![0u64; self.n];
        self.stream(&mut point, 0, &mut f)
    }

    fn stream<F: FnMut(&[u64])>(&self, point: &mut Vec<u64>, k: u32, f: &mut F) -> Result<()> {
        if k == self.depth {
            f(point);
            return Ok(());
        }
        let pk = ipow(self.p, k);
        self.budget.charge(ipow(self.p, self.n as u32))?;
        let base = point.clone();
        for digits in digit_vectors(self.p, self.n) {
            for j in 0..self.n {
                point[j] = base[j] + pk * digits[j];
            }
            if self.satisfies(point, k + 1) {
                self.stream(point, k + 1, f)?;
            }
        }
        point.copy_from_slice(&base);
        Ok(())
    }

    fn descend<A, F>(&self, acc: &mut A, point: &mut Vec<u64>, k: u32, visit: &F) -> Result<()>
    where
        F: Fn(&mut A, u32, &[u64]) -> Step,
    {
        if k >= self.depth {
            return Ok(());
        }
        let pk = ipow(self.p, k);
        self.budget.charge(ipow(self.p, self.n as u32))?;
        let base = point.clone();
        for digits in digit_vectors(self.p, self.n) {
            for j in 0..self.n {
                point[j] = base[j] + pk * digits[j];
            }
            if !self.satisfies(point, k + 1) {
                continue;
            }
            if visit(acc, k + 1, point) == Step::Descend {
                self.descend(acc, point, k + 1, visit)?;
            }
        }
        point.copy_from_slice(&base);
        Ok(())
    }
}

/// All vectors in `[0, p)^n`, lexicographic with the first coordinate most
/// significant.
pub fn digit_vectors(p: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = ipow(p, n as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0u64; n];
        for j in (0..n).rev() {
            v[j] = idx % p;
            idx /= p;
        }
        v
    })
}

/// All residue vectors modulo `p^k`, in lexicographic order.
pub fn grid(p: u64, n: usize, k: u32) -> impl Iterator<Item = Vec<u64>> {
    digit_vectors(ipow(p, k), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_order() {
        let v: Vec<_> = digit_vectors(2, 2).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn leaves_match_grid_filter() {
        let f = MPoly::parse("x1 - x2^2", 2).unwrap();
        let budget = Budget::default();
        let lifter = Lifter::new(3, 2, std::slice::from_ref(&f), 3, &budget);
        let leaves: usize = lifter
            .run(|| 0usize, |acc, k, _| {
                if k == 3 {
                    *acc += 1;
                }
                Step::Descend
            })
            .unwrap()
            .into_iter()
            .sum();
        let c = f.compile(27);
        let brute = grid(3, 2, 3).filter(|x| c.eval(x) == 0).count();
        assert_eq!(leaves, brute);
    }

    #[test]
    fn parallel_is_order_stable() {
        let f = MPoly::parse("x1 - x2*x3", 3).unwrap();
        let budget = Budget::default();
        let collect = |w| {
            Lifter::new(3, 3, std::slice::from_ref(&f), 2, &budget)
                .workers(w)
                .run(Vec::new, |acc: &mut Vec<Vec<u64>>, k, x| {
                    if k == 2 {
                        acc.push(x.to_vec());
                    }
                    Step::Descend
                })
                .unwrap()
                .concat()
        };
        assert_eq!(collect(1), collect(4));
    }
}
