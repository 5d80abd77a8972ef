//! Thin wrappers over rustfft: cached plans, linear convolution, and
//! coefficient<->sample transforms for periodic data.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

pub fn ifft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(buf);
    });
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Linear convolution of two real sequences (zero padded, FFT based).
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let m = next_pow2(out_len);
    let mut fa: Vec<Complex64> = a
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut fb: Vec<Complex64> = b
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    fft_in_place(&mut fa);
    fft_in_place(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft_in_place(&mut fa);
    fa.truncate(out_len);
    fa.into_iter().map(|c| c.re).collect()
}

/// DFT analysis of `samples` of a real periodic function: returns the
/// complex Fourier coefficients c_0..c_kmax (c_k multiplies e^{i k theta}).
pub fn fourier_coeffs(samples: &[f64], k_max: usize) -> Vec<Complex64> {
    let m = samples.len();
    assert!(2 * k_max < m, "need > 2*k_max samples to avoid aliasing");
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf);
    let scale = 1.0 / m as f64;
    (0..=k_max).map(|k| buf[k] * scale).collect()
}

/// Synthesis: evaluate sum_k c_k e^{i k theta} + conj-part on `m` equispaced
/// theta in [0, 2pi), given Hermitian half-spectrum c_0..c_K (c_0 real).
pub fn synthesize_real(coeffs: &[Complex64], m: usize) -> Vec<f64> {
    assert!(m >= 2 * coeffs.len(), "synthesis grid must oversample");
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = Complex64::new(coeffs[0].re, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        buf[k] = c;
        buf[m - k] = c.conj();
    }
    // inverse DFT without the 1/m scale: values = sum_k c_k e^{+i k theta}
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(m);
        fft.process(&mut buf);
    });
    buf.into_iter().map(|c| c.re).collect()
}
