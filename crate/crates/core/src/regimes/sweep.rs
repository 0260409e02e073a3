//! Status-quo sweeps and their step-function shape.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::model::Economy;

use super::{solve, MechanismSolution, SolveOptions};

/// Tolerance for "same level" and "on the diagonal".
pub const SHAPE_TOL: f64 = 1e-9;
/// Bisection steps when refining a breakpoint between grid points.
const REFINE_STEPS: usize = 60;
/// Membership tolerance while refining; tighter than `SHAPE_TOL` so the
/// located breakpoint does not drift by the grouping tolerance.
const REFINE_TOL: f64 = 1e-12;

/// Re-solves at every status quo in `grid` (ascending), in parallel.
pub fn sweep_outside_option(econ: &Economy, grid: &[f64], opts: SolveOptions) -> Result<Vec<(f64, MechanismSolution)>> {
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(MechError::Precondition("status-quo grid must be sorted ascending".into()));
    }
    grid.par_iter()
        .map(|&g0| solve(&econ.at_outside_g(g0), opts).map(|s| (g0, s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    Flat { level: f64 },
    /// Provision equals the status quo.
    Diagonal,
    Varying,
}

impl SegmentKind {
    fn contains(&self, g0: f64, g: f64, tol: f64) -> bool {
        match self {
            SegmentKind::Flat { level } => (g - level).abs() < tol,
            SegmentKind::Diagonal => (g - g0).abs() < tol,
            SegmentKind::Varying => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub from: f64,
    pub to: f64,
}

/// Downward discontinuity of provision at status quo `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepShape {
    pub segments: Vec<Segment>,
    pub jumps: Vec<Jump>,
}

/// Groups `(g°, g*)` rows into flat, diagonal and varying runs.
fn runs(rows: &[(f64, f64)]) -> Vec<(SegmentKind, usize, usize)> {
    let mut out: Vec<(SegmentKind, usize, usize)> = Vec::new();
    let mut k = 0;
    while k < rows.len() {
        let (g0, g) = rows[k];
        let kind = match rows.get(k + 1) {
            Some(&(_, g1)) if (g1 - g).abs() < SHAPE_TOL => SegmentKind::Flat { level: g },
            Some(&(h0, g1)) if (g - g0).abs() < SHAPE_TOL && (g1 - h0).abs() < SHAPE_TOL => SegmentKind::Diagonal,
            _ if (g - g0).abs() < SHAPE_TOL => SegmentKind::Diagonal,
            _ => SegmentKind::Varying,
        };
        let mut end = k;
        while end + 1 < rows.len() {
            let (h0, h) = rows[end + 1];
            let fits = match kind {
                SegmentKind::Varying => {
                    let next = rows.get(end + 2).map(|r| r.1);
                    (h - h0).abs() >= SHAPE_TOL && next.is_none_or(|n| (n - h).abs() >= SHAPE_TOL)
                }
                _ => kind.contains(h0, h, SHAPE_TOL),
            };
            if !fits {
                break;
            }
            end += 1;
        }
        out.push((kind, k, end));
        k = end + 1;
    }
    out
}

/// Segments and downward jumps of a sweep, with every breakpoint refined by
/// bisection on the status quo between the neighbouring grid points.
pub fn step_segments(econ: &Economy, opts: SolveOptions, rows: &[(f64, f64)]) -> Result<StepShape> {
    let rs = runs(rows);
    let mut shape = StepShape::default();
    let mut from = rows.first().map_or(0.0, |r| r.0);
    for (idx, &(kind, _, end)) in rs.iter().enumerate() {
        let Some(&(next_kind, start_next, _)) = rs.get(idx + 1) else {
            shape.segments.push(Segment { kind, from, to: rows[end].0 });
            break;
        };
        let (mut a, mut b) = (rows[end].0, rows[start_next].0);
        let left_has = |g0: f64, g: f64| match kind {
            SegmentKind::Varying => !next_kind.contains(g0, g, REFINE_TOL),
            _ => kind.contains(g0, g, REFINE_TOL),
        };
        if kind != SegmentKind::Varying || next_kind != SegmentKind::Varying {
            for _ in 0..REFINE_STEPS {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let g = solve(&econ.at_outside_g(mid), opts)?.g_star;
                if left_has(mid, g) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
        }
        let at = 0.5 * (a + b);
        shape.segments.push(Segment { kind, from, to: at });
        let (left_g, right_g) = (rows[end].1, rows[start_next].1);
        let left_at = match kind {
            SegmentKind::Diagonal => at,
            _ => left_g,
        };
        let right_at = match next_kind {
            SegmentKind::Diagonal => at,
            _ => right_g,
        };
        if left_at - right_at > SHAPE_TOL {
            shape.jumps.push(Jump { at, from: left_at, to: right_at });
        }
        from = at;
    }
    Ok(shape)
}
