//! Platt-style sequential minimal optimization.
//!
//! The dual is solved by repeatedly picking a pair of multipliers and
//! optimizing it analytically under the box and equality constraints. The
//! first example of a pair is a KKT violator found while sweeping all
//! examples or only the non-bound ones (the sweeps alternate); the second is
//! chosen to maximize |E₁−E₂|, falling back to randomized sweeps. Error
//! values E_i are updated incrementally after every accepted step, so pair
//! selection never works from stale data.
//!
//! The sweep phase alone can stop short of the KKT conditions on degenerate
//! data, so a maximal-violating-pair phase with second-order partner
//! selection runs afterwards and carries the convergence guarantee; see
//! [`Solver::finish_max_violating_pairs`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::SparseVector;

use super::{kernel_raw, ClassWeight, GammaSpec, LabelMap, SvmError, SvmModel, SvmParams};

/// Invariant snapshot taken after one accepted optimization step.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    /// Σᵢ αᵢyᵢ (zero up to rounding at every step).
    pub sum_alpha_y: f64,
    /// Dual objective W(α) = Σαᵢ − ½ΣΣ αᵢαⱼyᵢyⱼKᵢⱼ.
    pub objective: f64,
    /// Smallest multiplier (never below 0).
    pub min_alpha: f64,
    /// Largest overshoot of a multiplier past its box bound (never above 0).
    pub max_alpha_excess: f64,
}

/// Per-step invariant records plus convergence information.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub steps: Vec<StepRecord>,
    pub passes: usize,
    pub converged: bool,
    /// Worst final KKT violation max(0, violation) over all examples.
    pub kkt_violation: f64,
}

/// Full Gram cache below this size; larger problems recompute rows.
const FULL_GRAM_LIMIT: usize = 4096;

/// Relative distance (to the box bound C) below which a multiplier is pinned
/// onto the bound during a pair step.
const SNAP: f64 = 1e-12;

/// Last-resort unilateral pin distance. Equality-constraint rounding can
/// strand ulp-scale residue on a multiplier; segments that narrow also fall
/// below the resolution of the lo/hi corner arithmetic, so no pair step can
/// clear them. Pinning breaks sum(alpha*y) by at most this much per
/// multiplier, far inside the 1e-9 the solver promises.
const PIN_DUST: f64 = 1e-13;

enum Gram {
    Full(Vec<f64>),
    OnDemand,
}

struct Solver<'a> {
    x: &'a [SparseVector],
    y: &'a [f64],
    c: Vec<f64>,
    gamma: f64,
    kernel: super::KernelKind,
    tol: f64,
    eps: f64,
    alpha: Vec<f64>,
    bias: f64,
    /// E_i = f(xᵢ) − yᵢ for every example.
    errors: Vec<f64>,
    gram: Gram,
    rng: ChaCha8Rng,
    trace: Option<Vec<StepRecord>>,
}

pub(super) fn solve(
    xs: &[SparseVector],
    ys: &[f64],
    params: &SvmParams,
    traced: bool,
) -> Result<(SvmModel, Option<TrainTrace>), SvmError> {
    params.validate()?;
    if xs.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    if xs.len() != ys.len() {
        return Err(SvmError::DimensionMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if let Some(&bad) = ys.iter().find(|y| **y != 1.0 && **y != -1.0) {
        return Err(SvmError::InvalidLabel(bad));
    }
    if !(ys.contains(&1.0) && ys.iter().any(|&y| y == -1.0)) {
        return Err(SvmError::SingleClass);
    }
    let dim = xs[0].dim();
    if dim == 0 {
        return Err(SvmError::ZeroDimension);
    }
    if let Some(bad) = xs.iter().find(|x| x.dim() != dim) {
        return Err(SvmError::DimensionMismatch {
            left: dim,
            right: bad.dim(),
        });
    }

    let n = xs.len();
    let c = per_example_c(params, ys);
    let gamma = params.gamma.resolve(dim);
    let kernel = params.kernel;

    let gram = if n <= FULL_GRAM_LIMIT {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = kernel_raw(&xs[i], &xs[j], kernel, gamma);
                if !k.is_finite() {
                    return Err(SvmError::NonFiniteKernel(i, j));
                }
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Gram::Full(data)
    } else {
        if let Some((i, _)) = xs
            .iter()
            .enumerate()
            .find(|(_, x)| !x.squared_norm().is_finite())
        {
            return Err(SvmError::NonFiniteKernel(i, i));
        }
        Gram::OnDemand
    };

    let mut solver = Solver {
        x: xs,
        y: ys,
        c,
        gamma,
        kernel,
        tol: params.tol,
        eps: params.eps,
        alpha: vec![0.0; n],
        bias: 0.0,
        // with all alphas zero, f(x) = 0 and E_i = -y_i
        errors: ys.iter().map(|y| -y).collect(),
        gram,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        trace: traced.then(Vec::new),
    };

    let (passes, converged) = solver.run(params.max_passes);

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if solver.alpha[i] > 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(solver.alpha[i] * ys[i]);
        }
    }
    let kkt_violation = solver.worst_kkt_violation();
    let trace = solver.trace.take().map(|steps| TrainTrace {
        steps,
        passes,
        converged,
        kkt_violation,
    });

    let model = SvmModel {
        support_vectors,
        dual_coefs,
        bias: solver.bias,
        dim,
        params: SvmParams {
            gamma: GammaSpec::Fixed(gamma),
            ..params.clone()
        },
        label_map: LabelMap::default(),
    };
    Ok((model, trace))
}

fn per_example_c(params: &SvmParams, ys: &[f64]) -> Vec<f64> {
    let (pos_mult, neg_mult) = match params.class_weight {
        None => (1.0, 1.0),
        Some(ClassWeight::Custom { positive, negative }) => (positive, negative),
        Some(ClassWeight::Balanced) => {
            let n = ys.len() as f64;
            let n_pos = ys.iter().filter(|&&y| y == 1.0).count() as f64;
            let n_neg = n - n_pos;
            (n / (2.0 * n_pos), n / (2.0 * n_neg))
        }
    };
    ys.iter()
        .map(|&y| {
            if y == 1.0 {
                params.c * pos_mult
            } else {
                params.c * neg_mult
            }
        })
        .collect()
}

impl Solver<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        match &self.gram {
            Gram::Full(data) => data[i * self.x.len() + j],
            Gram::OnDemand => kernel_raw(&self.x[i], &self.x[j], self.kernel, self.gamma),
        }
    }

    fn run(&mut self, max_passes: usize) -> (usize, bool) {
        let n = self.x.len();
        let mut examine_all = true;
        let mut passes = 0;
        while passes < max_passes {
            let mut num_changed = 0;
            if examine_all {
                for i in 0..n {
                    num_changed += usize::from(self.examine(i));
                }
            } else {
                for i in 0..n {
                    if self.is_non_bound(i) {
                        num_changed += usize::from(self.examine(i));
                    }
                }
            }
            passes += 1;
            if examine_all {
                if num_changed == 0 {
                    break;
                }
                examine_all = false;
            } else if num_changed == 0 {
                examine_all = true;
            }
        }
        // The sweeps above stall on degenerate data (duplicate points pin
        // whole constraint faces, and single-threshold violation checks go
        // stale when every multiplier is at a bound), so finish with
        // maximal-violating-pair steps, which are guaranteed to move while
        // any tolerable violation remains.
        let converged = self.finish_max_violating_pairs(100_000.max(20 * n * n));
        self.recenter_bias();
        (passes, converged)
    }

    /// u_i = y_i − g_i with g the threshold-free decision value; KKT within
    /// tol is exactly max_{I_up} u ≤ min_{I_low} u + 2·tol.
    fn u(&self, i: usize) -> f64 {
        self.bias - self.errors[i]
    }

    fn in_up_set(&self, i: usize) -> bool {
        if self.y[i] == 1.0 {
            self.alpha[i] < self.c[i]
        } else {
            self.alpha[i] > 0.0
        }
    }

    fn in_low_set(&self, i: usize) -> bool {
        if self.y[i] == 1.0 {
            self.alpha[i] > 0.0
        } else {
            self.alpha[i] < self.c[i]
        }
    }

    fn finish_max_violating_pairs(&mut self, step_cap: usize) -> bool {
        let n = self.x.len();
        for _ in 0..step_cap {
            let mut ups: Vec<usize> = (0..n).filter(|&i| self.in_up_set(i)).collect();
            let mut lows: Vec<usize> = (0..n).filter(|&i| self.in_low_set(i)).collect();
            ups.sort_by(|&a, &b| self.u(b).partial_cmp(&self.u(a)).expect("u is finite"));
            lows.sort_by(|&a, &b| self.u(a).partial_cmp(&self.u(b)).expect("u is finite"));

            let gap = match (ups.first(), lows.first()) {
                (Some(&i), Some(&j)) => self.u(i) - self.u(j),
                _ => return true,
            };
            if gap <= 2.0 * self.tol {
                return true;
            }

            // second-order partner choice for the most violating example:
            // maximize the pair subproblem's gain (u_i - u_j)^2 / 2eta, which
            // converges far faster than the raw gap on ill-conditioned duals
            let i_top = ups[0];
            let u_top = self.u(i_top);
            let mut second_order: Option<(usize, f64)> = None;
            for &j in &lows {
                let diff = u_top - self.u(j);
                if j == i_top || diff <= 0.0 {
                    continue;
                }
                let eta = (self.k(i_top, i_top) + self.k(j, j) - 2.0 * self.k(i_top, j)).max(1e-12);
                let pair_gain = diff * diff / (2.0 * eta);
                if second_order.is_none_or(|(_, g)| pair_gain > g) {
                    second_order = Some((j, pair_gain));
                }
            }
            let mut stepped = match second_order {
                Some((j, _)) => self.take_step(i_top, j, true),
                None => false,
            };

            // fall back to scanning violating pairs until one moves
            if !stepped {
                'pairs: for &i in &ups {
                    for &j in &lows {
                        if self.u(i) - self.u(j) <= 2.0 * self.tol {
                            break;
                        }
                        if i != j && self.take_step(i, j, true) {
                            stepped = true;
                            break 'pairs;
                        }
                    }
                }
            }
            if !stepped {
                // pair arithmetic is out of moves; shed any bound dust and
                // re-evaluate before giving up
                if self.pin_bound_dust() {
                    continue;
                }
                return self.worst_gap() <= 2.0 * self.tol;
            }
        }
        false
    }

    /// Pin multipliers stranded within [`PIN_DUST`] of a box bound and
    /// rebuild the error cache. Returns whether anything moved.
    fn pin_bound_dust(&mut self) -> bool {
        let mut pinned = false;
        for i in 0..self.x.len() {
            let c = self.c[i];
            let a = self.alpha[i];
            let dust = PIN_DUST * c;
            if a > 0.0 && a < dust {
                self.alpha[i] = 0.0;
                pinned = true;
            } else if a < c && a > c - dust {
                self.alpha[i] = c;
                pinned = true;
            }
        }
        if pinned {
            self.recompute_errors();
        }
        pinned
    }

    fn recompute_errors(&mut self) {
        let n = self.x.len();
        for i in 0..n {
            let mut f = self.bias;
            for j in 0..n {
                if self.alpha[j] != 0.0 {
                    f += self.alpha[j] * self.y[j] * self.k(i, j);
                }
            }
            self.errors[i] = f - self.y[i];
        }
    }

    fn worst_gap(&self) -> f64 {
        let n = self.x.len();
        let up = (0..n)
            .filter(|&i| self.in_up_set(i))
            .map(|i| self.u(i))
            .fold(f64::NEG_INFINITY, f64::max);
        let low = (0..n)
            .filter(|&i| self.in_low_set(i))
            .map(|i| self.u(i))
            .fold(f64::INFINITY, f64::min);
        up - low
    }

    /// Reset the threshold to the midpoint of the interval the current
    /// alphas admit, which minimizes the worst per-example KKT violation.
    fn recenter_bias(&mut self) {
        let n = self.x.len();
        let b_lo = (0..n)
            .filter(|&i| self.in_up_set(i))
            .map(|i| self.u(i))
            .fold(f64::NEG_INFINITY, f64::max);
        let b_hi = (0..n)
            .filter(|&i| self.in_low_set(i))
            .map(|i| self.u(i))
            .fold(f64::INFINITY, f64::min);
        // both classes are present, so neither side can be unbounded
        debug_assert!(b_lo.is_finite() && b_hi.is_finite());
        let new_bias = (b_lo + b_hi) / 2.0;
        let db = new_bias - self.bias;
        if db != 0.0 {
            self.bias = new_bias;
            for e in &mut self.errors {
                *e += db;
            }
        }
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c[i]
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.y[i2];
        let alph2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;

        let violates = (r2 < -self.tol && alph2 < self.c[i2]) || (r2 > self.tol && alph2 > 0.0);
        if !violates {
            return false;
        }

        // second choice: the non-bound example with the largest |E1 - E2|
        let mut best: Option<(usize, f64)> = None;
        for i1 in 0..self.x.len() {
            if i1 != i2 && self.is_non_bound(i1) {
                let gap = (self.errors[i1] - e2).abs();
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((i1, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2, false) {
                return true;
            }
        }

        // fallbacks: sweep non-bound, then all, from a random start
        let n = self.x.len();
        let start = self.rng.gen_range(0..n);
        for offset in 0..n {
            let i1 = (start + offset) % n;
            if i1 != i2 && self.is_non_bound(i1) && self.take_step(i1, i2, false) {
                return true;
            }
        }
        let start = self.rng.gen_range(0..n);
        for offset in 0..n {
            let i1 = (start + offset) % n;
            if i1 != i2 && self.take_step(i1, i2, false) {
                return true;
            }
        }
        false
    }

    /// Optimize the (i1, i2) pair analytically. With `strict` set (the
    /// maximal-violating-pair finisher), arbitrarily small moves are
    /// accepted; the normal sweeps skip moves below the `eps` gate.
    fn take_step(&mut self, i1: usize, i2: usize, strict: bool) -> bool {
        debug_assert_ne!(i1, i2);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (alph1, alph2) = (self.alpha[i1], self.alpha[i2]);
        let (c1, c2) = (self.c[i1], self.c[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        // feasible segment for alpha2 under the box and equality constraints
        let (lo, hi) = if s < 0.0 {
            ((alph2 - alph1).max(0.0), (c1 + alph2 - alph1).min(c2))
        } else {
            ((alph1 + alph2 - c1).max(0.0), (alph1 + alph2).min(c2))
        };
        if lo >= hi {
            return false;
        }

        let k11 = self.k(i1, i1);
        let k12 = self.k(i1, i2);
        let k22 = self.k(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;

        let mut a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // objective is linear (or degenerate) along the segment: the gain
            // at a2 = t is y2(E1-E2)(t - alph2) - eta(t - alph2)^2 / 2
            let gain = |t: f64| {
                let d = t - alph2;
                y2 * (e1 - e2) * d - 0.5 * eta * d * d
            };
            let (lo_gain, hi_gain) = (gain(lo), gain(hi));
            let margin = if strict { 0.0 } else { self.eps };
            if lo_gain > hi_gain + margin {
                lo
            } else if hi_gain > lo_gain + margin {
                hi
            } else {
                return false;
            }
        };

        // pin a value that lands within rounding distance of the box bound
        // it is moving toward; the partner follows the constraint line, so
        // sum(alpha*y) is unaffected. Left alone, such dust keeps a
        // multiplier classified as movable forever. The pin is one-sided on
        // purpose: a genuine move away from a bound may be dust-sized when
        // it hands the equality constraint's rounding residue to another
        // multiplier, and snapping it back would veto that hand-off.
        let snap2 = SNAP * c2;
        if a2 < alph2 {
            if a2 < snap2 {
                a2 = 0.0;
            }
        } else if a2 > c2 - snap2 {
            a2 = c2;
        }
        a2 = a2.clamp(lo, hi);

        if strict {
            if a2 == alph2 {
                return false;
            }
        } else if (a2 - alph2).abs() < self.eps * (a2 + alph2 + self.eps) {
            return false;
        }

        let mut a1 = alph1 + s * (alph2 - a2);
        let snap1 = SNAP * c1;
        if a1 < alph1 {
            if a1 < snap1 {
                a1 = 0.0;
                a2 = (alph2 + s * alph1).clamp(lo, hi);
            }
        } else if a1 > c1 - snap1 {
            a1 = c1;
            a2 = (alph2 + s * (alph1 - c1)).clamp(lo, hi);
        }
        let a1 = a1.clamp(0.0, c1);
        if a1 == alph1 && a2 == alph2 {
            return false;
        }

        let d1 = a1 - alph1;
        let d2 = a2 - alph2;

        let b1 = self.bias - e1 - y1 * d1 * k11 - y2 * d2 * k12;
        let b2 = self.bias - e2 - y1 * d1 * k12 - y2 * d2 * k22;
        let new_bias = if a1 > 0.0 && a1 < c1 {
            b1
        } else if a2 > 0.0 && a2 < c2 {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = new_bias - self.bias;

        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        for j in 0..self.x.len() {
            self.errors[j] += y1 * d1 * self.k(i1, j) + y2 * d2 * self.k(i2, j) + db;
        }

        let record = self.trace.is_some().then(|| self.step_record());
        if let (Some(trace), Some(record)) = (self.trace.as_mut(), record) {
            trace.push(record);
        }
        true
    }

    fn step_record(&self) -> StepRecord {
        let n = self.x.len();
        let sum_alpha_y: f64 = (0..n).map(|i| self.alpha[i] * self.y[i]).sum();
        let mut objective: f64 = self.alpha.iter().sum();
        for i in 0..n {
            if self.alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if self.alpha[j] == 0.0 {
                    continue;
                }
                objective -=
                    0.5 * self.alpha[i] * self.alpha[j] * self.y[i] * self.y[j] * self.k(i, j);
            }
        }
        let min_alpha = self.alpha.iter().copied().fold(f64::INFINITY, f64::min);
        let max_alpha_excess = self
            .alpha
            .iter()
            .zip(&self.c)
            .map(|(a, c)| a - c)
            .fold(f64::NEG_INFINITY, f64::max);
        StepRecord {
            sum_alpha_y,
            objective,
            min_alpha,
            max_alpha_excess,
        }
    }

    /// max over examples of how far y·f(x) strays past its KKT bound.
    fn worst_kkt_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.x.len() {
            let r = self.y[i] * self.errors[i]; // y f(x) - 1
            if self.alpha[i] == 0.0 {
                worst = worst.max(-r);
            } else if self.alpha[i] == self.c[i] {
                worst = worst.max(r);
            } else {
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}
