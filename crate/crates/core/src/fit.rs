//! Least-squares fits used to classify runtimes.

/// Coefficients of the least-squares polynomial of `degree` through the
/// points, lowest power first. `None` if the system is singular.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let m = degree + 1;
    if xs.len() < m {
        return None;
    }
    // normal equations on x scaled into [0, 1] for conditioning
    let scale = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let x = x / scale;
        let powers: Vec<f64> = (0..m).map(|p| x.powi(p as i32)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += powers[i] * powers[j];
            }
            a[i][m] += powers[i] * y;
        }
    }
    let mut coeffs = solve(a)?;
    for (p, c) in coeffs.iter_mut().enumerate() {
        *c /= scale.powi(p as i32);
    }
    Some(coeffs)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower {
            let f = row[col] / pivot_row[col];
            for (r, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *r -= f * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}

pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficient of determination of `predicted` against `ys`. A constant
/// series fitted exactly scores 1.
pub fn r_squared(ys: &[f64], predicted: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(predicted).map(|(y, p)| (y - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// R² penalized for the number of fitted parameters.
pub fn adjusted(r2: f64, points: usize, params: usize) -> f64 {
    if points <= params {
        return r2;
    }
    1.0 - (1.0 - r2) * (points as f64 - 1.0) / (points as f64 - params as f64)
}

/// Slope and intercept of the least-squares line.
pub fn line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let c = polyfit(xs, ys, 1)?;
    Some((c[1], c[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - x + 0.5 * x * x + 0.25 * x * x * x).collect();
        let c = polyfit(&xs, &ys, 3).unwrap();
        for (got, want) in c.iter().zip([2.0, -1.0, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-8, "{c:?}");
        }
        let pred: Vec<f64> = xs.iter().map(|&x| eval(&c, x)).collect();
        assert!((r_squared(&ys, &pred) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_through_points() {
        let (slope, intercept) = line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((slope - 2.0).abs() < 1e-12 && (intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined() {
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], 2).is_none());
        assert!(polyfit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1).is_none());
    }
}
