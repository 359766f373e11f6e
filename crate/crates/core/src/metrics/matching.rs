//! Minimum-cost assignment (Hungarian algorithm, potentials formulation).

use std::ops::{Add, AddAssign, Sub, SubAssign};

/// Azimuth costs are compared on this grid (degrees) so that equal-cost
/// matchings tie exactly instead of by rounding noise.
pub const AZIMUTH_TIE_RESOLUTION_DEG: f64 = 1e-6;

trait Cost: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + AddAssign + SubAssign {
    const ZERO: Self;
    const INF: Self;
}

impl Cost for f64 {
    const ZERO: Self = 0.0;
    const INF: Self = f64::INFINITY;
}

// total absolute difference first, total squared difference second, both
// in grid steps
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Lex(i64, i64);

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        Lex(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, o: Lex) -> Lex {
        Lex(self.0 - o.0, self.1 - o.1)
    }
}

impl AddAssign for Lex {
    fn add_assign(&mut self, o: Lex) {
        *self = *self + o;
    }
}

impl SubAssign for Lex {
    fn sub_assign(&mut self, o: Lex) {
        *self = *self - o;
    }
}

impl Cost for Lex {
    const ZERO: Self = Lex(0, 0);
    const INF: Self = Lex(i64::MAX / 4, i64::MAX / 4);
}

/// Minimum-cost assignment on a rectangular cost matrix. Every row is
/// matched when `rows <= cols`, every column otherwise. Returns
/// `(row, col)` pairs sorted by row.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    solve(cost)
}

fn solve<C: Cost>(cost: &[Vec<C>]) -> Vec<(usize, usize)> {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|r| r.len() == m));
    if n > m {
        let transposed: Vec<Vec<C>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
        let mut pairs: Vec<(usize, usize)> = hungarian(&transposed).into_iter().map(|(j, i)| (i, j)).collect();
        pairs.sort_unstable();
        return pairs;
    }
    hungarian(cost)
}

// Requires rows <= cols. Indices are 1-based internally; row/col 0 is the
// virtual start of each augmenting path.
fn hungarian<C: Cost>(a: &[Vec<C>]) -> Vec<(usize, usize)> {
    let n = a.len();
    let m = a[0].len();
    let mut u = vec![C::ZERO; n + 1];
    let mut v = vec![C::ZERO; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![C::INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = C::INF;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m).filter(|&j| p[j] != 0).map(|j| (p[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    pairs
}

/// Pairs predicted and reference azimuths (folded, degrees) of one class in
/// one frame, minimizing the total absolute azimuth difference. Returns
/// `(pred_index, ref_index)` pairs; the larger side keeps unmatched items.
///
/// Equal totals are common (whenever every prediction lies on the same side
/// of every reference, all pairings cost the same), so totals are compared on
/// the [`AZIMUTH_TIE_RESOLUTION_DEG`] grid and ties go to the smaller sum of
/// squared differences, i.e. the non-crossing pairing.
pub fn match_frame(pred_az: &[f64], ref_az: &[f64]) -> Vec<(usize, usize)> {
    let steps = |az: f64| (az / AZIMUTH_TIE_RESOLUTION_DEG).round() as i64;
    let cost: Vec<Vec<Lex>> = pred_az
        .iter()
        .map(|&p| {
            ref_az
                .iter()
                .map(|&r| {
                    let d = (steps(p) - steps(r)).abs();
                    Lex(d, d * d)
                })
                .collect()
        })
        .collect();
    solve(&cost)
}
