//! Deterministic instance generators, one ChaCha stream per (suite, case).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::amalgam::{Cell, StepFunction};
use crate::seqcore::{GrandSequence, IndexSet};
use crate::smallnorm::Decomposition;

use super::ParamRanges;

pub struct Gen {
    rng: ChaCha8Rng,
    pub ranges: ParamRanges,
}

impl Gen {
    pub fn new(seed: u64, suite: &str, case: usize, ranges: ParamRanges) -> Self {
        let h = Sha256::digest(suite.as_bytes());
        let salt = u64::from_le_bytes(h[..8].try_into().expect("8 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
        rng.set_stream(case as u64);
        Self { rng, ranges }
    }

    pub fn uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform((lo.ln(), hi.ln())).exp()
    }

    pub fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub fn q(&mut self) -> f64 {
        self.uniform(self.ranges.q)
    }

    pub fn p(&mut self) -> f64 {
        self.uniform(self.ranges.p)
    }

    pub fn theta(&mut self) -> f64 {
        self.log_uniform(self.ranges.theta.0, self.ranges.theta.1)
    }

    pub fn eps0(&mut self) -> f64 {
        self.log_uniform(self.ranges.eps0.0, self.ranges.eps0.1)
    }

    pub fn delta(&mut self) -> f64 {
        self.log_uniform(self.ranges.delta.0, self.ranges.delta.1)
    }

    /// `sigma` as a fraction of its admissible range `(0, 1/q')`.
    pub fn sigma(&mut self, q: f64) -> f64 {
        self.uniform(self.ranges.sigma_fraction) * (1.0 - 1.0 / q)
    }

    fn magnitude(&mut self) -> f64 {
        self.log_uniform(1e-3, 1e3)
    }

    fn signed(&mut self, signed: bool) -> f64 {
        let m = self.magnitude();
        if signed && self.coin(0.5) {
            -m
        } else {
            m
        }
    }

    /// Finite sequence over `N` with 1 to `max_support` entries among the first 64 indices.
    pub fn sequence(&mut self, max_support: usize, signed: bool) -> GrandSequence {
        let n = self.int(1, max_support);
        let mut idx = sample(&mut self.rng, 64, n).into_vec();
        idx.sort_unstable();
        let entries: Vec<(i64, f64)> = idx.into_iter().map(|i| (i as i64 + 1, self.signed(signed))).collect();
        GrandSequence::finite(IndexSet::Naturals, entries).expect("generated sequence is valid")
    }

    /// Entrywise `0 <= y <= x` with random ratios, some entries zero and some equal.
    pub fn dominated(&mut self, x: &GrandSequence) -> GrandSequence {
        let entries: Vec<(i64, f64)> = x
            .entries()
            .map(|(k, v)| {
                let r = match self.int(0, 5) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => self.uniform((0.0, 1.0)),
                };
                (k, v.abs() * r)
            })
            .collect();
        GrandSequence::finite(x.index_set(), entries).expect("dominated sequence is valid")
    }

    /// Random decomposition of `|x|` into up to `max_parts` parts with random splits.
    pub fn decomposition(&mut self, x: &GrandSequence, max_parts: usize) -> Decomposition {
        let parts_n = self.int(1, max_parts);
        let mut parts: Vec<Vec<(i64, f64)>> = vec![Vec::new(); parts_n];
        for (k, v) in x.entries() {
            let w: Vec<f64> = (0..parts_n).map(|_| if self.coin(0.4) { 0.0 } else { self.uniform((0.0, 1.0)) }).collect();
            let total: f64 = w.iter().sum();
            let v = v.abs();
            if total == 0.0 {
                parts[self.int(0, parts_n - 1)].push((k, v));
                continue;
            }
            // last nonzero weight absorbs rounding so that rows sum exactly
            let last = w.iter().rposition(|&x| x > 0.0).expect("some weight positive");
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                if *wj == 0.0 {
                    continue;
                }
                let share = if j == last { (v - acc).max(0.0) } else { v * wj / total };
                acc += share;
                parts[j].push((k, share));
            }
        }
        let parts = parts
            .into_iter()
            .map(|p| GrandSequence::finite(x.index_set(), p).expect("valid part"))
            .collect();
        Decomposition::new(x.abs(), parts).expect("generated decomposition is valid")
    }

    /// Cells of one unit interval: up to `max_cells` random widths.
    pub fn cells(&mut self, max_cells: usize, signed: bool) -> Vec<Cell> {
        let n = self.int(1, max_cells);
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| self.uniform((0.0, 1.0))).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(1.0);
        let mut pos = 0.0;
        let mut cells = Vec::with_capacity(n);
        for c in cuts {
            if c > pos {
                let value = if self.coin(0.15) { 0.0 } else { self.signed(signed) };
                cells.push(Cell::new(c - pos, value));
                pos = c;
            }
        }
        cells
    }

    /// Step function over `Z` on up to `max_intervals` intervals inside `[-8, 8)`.
    pub fn step_function(&mut self, max_intervals: usize, max_cells: usize, signed: bool) -> StepFunction {
        let n = self.int(1, max_intervals);
        let mut ks = sample(&mut self.rng, 16, n).into_vec();
        ks.sort_unstable();
        let pieces: Vec<(i64, Vec<Cell>)> = ks.into_iter().map(|k| (k as i64 - 8, self.cells(max_cells, signed))).collect();
        StepFunction::new(IndexSet::Integers, pieces).expect("generated step function is valid")
    }

    /// Union of random subintervals of `[-m, m)`.
    pub fn bounded_set(&mut self, m: u64) -> StepFunction {
        let mf = m as f64;
        let n = self.int(1, 4);
        let intervals: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let a = self.uniform((-mf, mf));
                let b = self.uniform((a, mf));
                (a, b.max(a + 1e-3).min(mf))
            })
            .collect();
        StepFunction::indicator(IndexSet::Integers, &intervals).expect("valid indicator")
    }

    /// Multiplier with a few plateaus on up to `max_intervals` intervals.
    pub fn plateau_multiplier(&mut self, max_intervals: usize) -> StepFunction {
        let levels: Vec<f64> = (0..self.int(1, 3)).map(|_| self.log_uniform(0.1, 10.0)).collect();
        let n = self.int(1, max_intervals);
        let mut ks = sample(&mut self.rng, 16, n).into_vec();
        ks.sort_unstable();
        let pieces: Vec<(i64, Vec<Cell>)> = ks
            .into_iter()
            .map(|k| {
                let mut cells = self.cells(3, false);
                for c in cells.iter_mut() {
                    let l = levels[self.int(0, levels.len() - 1)];
                    c.value = if self.coin(0.5) { -l } else { l };
                }
                (k as i64 - 8, cells)
            })
            .collect();
        StepFunction::new(IndexSet::Integers, pieces).expect("valid multiplier")
    }

    /// Symbol with `|g| = 1` on its intervals, or the same with one cell changed.
    pub fn unimodular_or_dented(&mut self, max_intervals: usize) -> (StepFunction, bool) {
        let n = self.int(1, max_intervals);
        let mut ks = sample(&mut self.rng, 16, n).into_vec();
        ks.sort_unstable();
        let mut pieces: Vec<(i64, Vec<Cell>)> = ks
            .into_iter()
            .map(|k| {
                let mut cells = self.cells(3, false);
                for c in cells.iter_mut() {
                    c.value = if self.coin(0.5) { -1.0 } else { 1.0 };
                }
                (k as i64 - 8, cells)
            })
            .collect();
        let unimodular = self.coin(0.5);
        if !unimodular {
            let i = self.int(0, pieces.len() - 1);
            let j = self.int(0, pieces[i].1.len() - 1);
            let factor = if self.coin(0.5) { self.uniform((0.0, 0.9)) } else { self.uniform((1.1, 3.0)) };
            pieces[i].1[j].value *= factor;
        }
        (StepFunction::new(IndexSet::Integers, pieces).expect("valid multiplier"), unimodular)
    }

    /// Random function supported on the intervals of `g`.
    pub fn supported_on(&mut self, g: &StepFunction) -> StepFunction {
        let keys: Vec<i64> = g.pieces().keys().copied().collect();
        let mut pieces: Vec<(i64, Vec<Cell>)> = Vec::new();
        for k in keys {
            if self.coin(0.7) {
                pieces.push((k, self.cells(4, true)));
            }
        }
        StepFunction::new(g.index_set(), pieces).expect("valid trial")
    }
}
