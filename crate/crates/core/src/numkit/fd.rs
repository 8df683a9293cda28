use crate::numkit::{Jet, NumError};
use crate::scalar::Real;

// Central stencils (offset, weight) for derivatives of order 0..=3, all O(h^2).
const STENCILS: [&[(i32, f64)]; 4] = [
    &[(0, 1.0)],
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
];

fn raw_partial<T: Real>(
    f: &impl Fn(&[T]) -> Result<Vec<T>, NumError>,
    point: &[T],
    di: usize,
    dj: usize,
    h: T,
    dim: usize,
) -> Result<Vec<T>, NumError> {
    let mut acc = vec![T::zero(); dim];
    let sj: &[(i32, f64)] = if point.len() > 1 { STENCILS[dj] } else { STENCILS[0] };
    let mut x = point.to_vec();
    for &(oi, wi) in STENCILS[di] {
        for &(oj, wj) in sj {
            x[0] = point[0] + h * T::lit(oi as f64);
            if point.len() > 1 {
                x[1] = point[1] + h * T::lit(oj as f64);
            }
            let y = f(&x)?;
            let w = T::lit(wi * wj);
            for (a, v) in acc.iter_mut().zip(y) {
                *a = *a + w * v;
            }
        }
    }
    let scale = h.powi((di + dj) as i32);
    Ok(acc.into_iter().map(|a| a / scale).collect())
}

/// Jet of an opaque map by central differences, one Richardson level deep.
/// Step for a derivative of total order k is `eps^(1/(k+2)) * max(1, |x|)`,
/// which is `cbrt(eps)` for first derivatives.
pub fn fd_jet<T: Real>(
    f: impl Fn(&[T]) -> Result<Vec<T>, NumError>,
    point: &[T],
    order: usize,
) -> Result<Vec<Jet<T>>, NumError> {
    let n = point.len();
    if n == 0 || n > 2 {
        return Err(NumError::Arity { expected: 2, got: n });
    }
    let value = f(point)?;
    let dim = value.len();
    let scale = point
        .iter()
        .fold(T::one(), |m, x| m.max(x.abs()));
    let mut jets: Vec<Jet<T>> = value
        .iter()
        .map(|&v| {
            let mut j = Jet::variable(T::zero(), 0, n, order);
            j.set_coeff(0, 0, v);
            if order >= 1 {
                j.set_coeff(1, 0, T::zero());
            }
            j
        })
        .collect();
    for total in 1..=order {
        let h = T::epsilon().powf(T::one() / T::lit((total + 4) as f64)) * scale;
        for dj in 0..=total {
            if n == 1 && dj > 0 {
                continue;
            }
            let di = total - dj;
            let coarse = raw_partial(&f, point, di, dj, h, dim)?;
            let fine = raw_partial(&f, point, di, dj, h * T::lit(0.5), dim)?;
            let fact = T::lit(
                (1..=di).product::<usize>() as f64 * (1..=dj).product::<usize>() as f64,
            );
            for k in 0..dim {
                let d = (fine[k] * T::lit(4.0) - coarse[k]) / T::lit(3.0);
                jets[k].set_coeff(di, dj, d / fact);
            }
        }
    }
    Ok(jets)
}
