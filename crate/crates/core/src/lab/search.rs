//! Sampled extrema over the Grassmannian or the sphere.
//!
//! Candidates are coordinate frames followed by Haar-random frames.
//! Every candidate is screened with a few samples, the candidate count is
//! doubled until the best value stabilizes, and the winner is re-estimated
//! on an independent stream so that its estimate is not biased by the
//! selection.

use crate::error::Result;
use crate::geometry::{Direction, Subspace};
use crate::par;
use crate::rng::RngStream;
use crate::sphere::{haar_frame, random_direction};
use crate::stats::{Joint, Propagator, SampleEstimate};

use super::{Extremal, VerifyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Max,
    Min,
}

impl Goal {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Goal::Max => a > b,
            Goal::Min => a < b,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Goal::Max => "max",
            Goal::Min => "min",
        }
    }
}

pub(crate) trait Candidate: Clone + Send + Sync {
    fn columns(&self) -> Vec<Vec<f64>>;
}

impl Candidate for Subspace {
    fn columns(&self) -> Vec<Vec<f64>> {
        Subspace::columns(self)
    }
}

impl Candidate for Direction {
    fn columns(&self) -> Vec<Vec<f64>> {
        vec![self.coords().to_vec()]
    }
}

/// Lexicographic `m`-subsets of `0..n`.
fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..m).rev().find(|&i| idx[i] < n - m + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Candidate `i` among `m`-dimensional subspaces of `R^n`.
pub(crate) fn frame_generator(n: usize, m: usize, stream: RngStream) -> impl Fn(usize) -> Subspace + Sync {
    let coords = if n <= 12 { combinations(n, m) } else { Vec::new() };
    move |i| match coords.get(i) {
        Some(axes) => Subspace::coordinate(n, axes).expect("valid axes"),
        None => haar_frame(n, m, &mut stream.item_rng((i - coords.len()) as u64)),
    }
}

/// Candidate `i` among directions of `R^n` (axes first).
pub(crate) fn direction_generator(n: usize, stream: RngStream) -> impl Fn(usize) -> Direction + Sync {
    move |i| {
        if i < n {
            Direction::axis(n, i)
        } else {
            random_direction(n, &mut stream.item_rng((i - n) as u64))
        }
    }
}

pub(crate) struct Found<C> {
    pub candidate: C,
    /// Objective components at the winner, on the re-estimation stream.
    pub joint: Joint,
    pub frames_used: usize,
}

impl<C: Candidate> Found<C> {
    pub fn extremal(&self, goal: Goal, value: SampleEstimate) -> Extremal {
        Extremal { goal: goal.name().into(), frame: self.candidate.columns(), value, frames_used: self.frames_used }
    }
}

pub(crate) fn score_estimate<S: Fn(&[f64]) -> f64>(joint: &Joint, score: S) -> SampleEstimate {
    let mut p = Propagator::new();
    p.add(joint);
    p.estimate(score)
}

/// Sampled extremum of `score(objective(C))` over generated candidates.
pub(crate) fn extremum<C, G, O, S>(goal: Goal, cfg: &VerifyConfig, stream: RngStream, generate: G, objective: O, score: S) -> Result<Found<C>>
where
    C: Candidate,
    G: Fn(usize) -> C + Sync,
    O: Fn(&C, usize, RngStream) -> Result<Joint> + Sync,
    S: Fn(&[f64]) -> f64 + Sync,
{
    let screen = stream.child(1);
    let evaluate = |lo: usize, hi: usize| -> Result<Vec<(f64, f64, bool)>> {
        par::map_indexed(hi - lo, |j| {
            let i = lo + j;
            let joint = objective(&generate(i), cfg.screen_samples, screen.child(i as u64))?;
            let s = score_estimate(&joint, &score);
            Ok((s.value, s.std_error, s.is_exact()))
        })
        .into_iter()
        .collect()
    };
    let pick = |vals: &[(f64, f64, bool)], offset: usize, best: Option<(usize, f64, f64)>| {
        vals.iter().enumerate().fold(best, |acc, (j, (v, se, _))| match acc {
            Some((_, b, _)) if !goal.better(*v, b) => acc,
            _ => Some((offset + j, *v, *se)),
        })
    };

    let first = evaluate(0, cfg.frames)?;
    let exact = first.iter().all(|x| x.2);
    let mut best = pick(&first, 0, None).expect("at least one frame");
    let mut used = cfg.frames;
    while 2 * used <= cfg.max_frames {
        let more = evaluate(used, 2 * used)?;
        let next = pick(&more, used, Some(best)).expect("non-empty");
        let change = (next.1 - best.1).abs();
        best = next;
        used *= 2;
        if change <= 0.5 * best.2 + 1e-9 * best.1.abs() {
            break;
        }
    }

    let candidate = generate(best.0);
    let joint = if exact {
        objective(&candidate, cfg.screen_samples, screen.child(best.0 as u64))?
    } else {
        objective(&candidate, cfg.samples, stream.child(2))?
    };
    Ok(Found { candidate, joint, frames_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn finds_known_maximum_of_exact_objective() {
        let cfg = VerifyConfig::default().with_frames(64).with_stream(RngStream::new(1, 2));
        let gen = direction_generator(3, cfg.stream.child(9));
        let found = extremum(
            Goal::Max,
            &cfg,
            cfg.stream,
            gen,
            |d: &Direction, _, _| Ok(Joint::exact(vec![d.coords()[2].abs()])),
            |x| x[0],
        )
        .unwrap();
        assert_eq!(found.candidate, Direction::axis(3, 2));
        assert_eq!(found.frames_used, 128);
    }
}
