//! Exact Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::poly::Rational;

/// Solution of `A x = b`: one particular solution (free variables set to zero)
/// and the dimension of the null space.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<Rational>,
    pub nullity: usize,
}

/// Returns `None` when the system is inconsistent.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, ncols: usize) -> Option<Solution> {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].recip();
        for c in col..ncols {
            a[row][c] = &a[row][c] * &inv;
        }
        b[row] = &b[row] * &inv;
        for r in 0..nrows {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..ncols {
                let d = &f * &a[row][c];
                a[r][c] -= d;
            }
            let d = &f * &b[row];
            b[r] -= d;
        }
        pivots.push(col);
        row += 1;
        if row == nrows {
            break;
        }
    }
    if b[row..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = b[r].clone();
    }
    Some(Solution { x, nullity: ncols - pivots.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn unique_and_underdetermined() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(-1)]];
        let s = solve(a, vec![int(3), int(0)], 2).unwrap();
        assert_eq!(s, Solution { x: vec![int(1), int(1)], nullity: 0 });
        let a = vec![vec![int(1), int(1)]];
        assert_eq!(solve(a, vec![rat(1, 2)], 2).unwrap().nullity, 1);
        let a = vec![vec![int(1)], vec![int(1)]];
        assert!(solve(a, vec![int(1), int(2)], 1).is_none());
    }
}
