//! One-dimensional discrete Fourier transforms of arbitrary length.
//!
//! Conventions: the forward transform is unnormalized,
//! `X[k] = sum_j exp(-2 pi i jk / n) x[j]`, and the inverse carries the `1/n`
//! factor, `x[j] = (1/n) sum_k exp(+2 pi i jk / n) X[k]`. The multidimensional
//! transform is the tensor product of these, so the inverse is scaled by
//! `1 / (n_1 ... n_d)`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Transform direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match direction {
            Direction::Forward => p.plan_fft_forward(len),
            Direction::Inverse => p.plan_fft_inverse(len),
        }
    })
}

/// Transforms `v` and returns the result.
pub fn dft_1d(v: &[C64], direction: Direction) -> Result<Vec<C64>> {
    if v.is_empty() {
        return Err(Error::invalid("DFT of an empty vector"));
    }
    let mut out = v.to_vec();
    dft_batch_in_place(&mut out, v.len(), direction);
    Ok(out)
}

/// Transforms consecutive length-`len` chunks of `buf` in place.
///
/// `buf.len()` must be a multiple of `len`.
pub(crate) fn dft_batch_in_place(buf: &mut [C64], len: usize, direction: Direction) {
    debug_assert!(len > 0 && buf.len().is_multiple_of(len));
    let fft = plan(len, direction);
    fft.process(buf);
    if direction == Direction::Inverse {
        let scale = 1.0 / len as f64;
        buf.iter_mut().for_each(|x| *x *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(v: &[C64], sign: f64) -> Vec<C64> {
        let n = v.len();
        (0..n)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let t = sign * 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                        x * C64::new(t.cos(), t.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn constant_maps_to_scaled_delta() {
        let out = dft_1d(&[c(1.0), c(1.0)], Direction::Forward).unwrap();
        assert!((out[0] - c(2.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
    }

    #[test]
    fn delta_maps_to_constant() {
        let out = dft_1d(&[c(1.0), c(0.0), c(0.0)], Direction::Forward).unwrap();
        for x in out {
            assert!((x - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_naive_agreement() {
        for n in [1usize, 2, 5, 7, 15, 31, 64, 127] {
            let v: Vec<C64> = (0..n)
                .map(|j| C64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let f = dft_1d(&v, Direction::Forward).unwrap();
            let reference = naive(&v, -1.0);
            let scale: f64 = reference.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let diff: f64 = f
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-12 * scale.max(1.0), "n={n}");
            let back = dft_1d(&f, Direction::Inverse).unwrap();
            let vn: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let err: f64 = back
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-13 * vn, "n={n} err={err}");
            // Parseval under the unnormalized forward convention.
            let fnorm: f64 = f.iter().map(|x| x.norm_sqr()).sum();
            assert!((fnorm - n as f64 * vn * vn).abs() <= 1e-12 * fnorm.max(1.0));
        }
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(
            dft_1d(&[], Direction::Forward),
            Err(Error::InvalidArgument(_))
        ));
    }
}
