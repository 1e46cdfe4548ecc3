//! Small dense-vector helpers shared across modules.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// out += s * a
pub fn axpy(out: &mut [f64], s: f64, a: &[f64]) {
    debug_assert_eq!(out.len(), a.len());
    for (o, x) in out.iter_mut().zip(a) {
        *o += s * x;
    }
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Matrix-vector product for a row-major `rows x cols` matrix.
pub fn matvec(m: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    (0..rows)
        .map(|r| dot(&m[r * cols..(r + 1) * cols], x))
        .collect()
}

/// Transposed matrix-vector product: `m^T q` for row-major `rows x cols` m.
pub fn matvec_t(m: &[f64], rows: usize, cols: usize, q: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.len(), rows * cols);
    debug_assert_eq!(q.len(), rows);
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        axpy(&mut out, q[r], row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_roundtrip() {
        // m = [[3,4],[0,1]], x = (1,2)
        let m = [3.0, 4.0, 0.0, 1.0];
        assert_eq!(matvec(&m, 2, 2, &[1.0, 2.0]), vec![11.0, 2.0]);
        assert_eq!(matvec_t(&m, 2, 2, &[1.0, 2.0]), vec![3.0, 6.0]);
    }

    #[test]
    fn norms() {
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0, 0.0], &[0.0, 0.0]), 1.0);
    }
}
