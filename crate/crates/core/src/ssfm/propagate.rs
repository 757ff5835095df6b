use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::signal::{bin_frequency, FieldBuffer};
use crate::system::FiberParams;

/// Step boundaries uniform in the fraction of effective length already
/// traversed: z_j = -(1/alpha) ln(1 - (j/J)(1 - exp(-alpha L))).
pub fn log_step_boundaries(alpha: f64, length: f64, steps: usize) -> Vec<f64> {
    let j = steps as f64;
    (0..=steps)
        .map(|i| {
            if i == steps {
                length
            } else if alpha == 0.0 {
                length * i as f64 / j
            } else {
                -(1.0 - (i as f64 / j) * (1.0 - (-alpha * length).exp())).ln() / alpha
            }
        })
        .collect()
}

/// Symmetric split-step propagator with reusable FFT plans.
pub struct Propagator {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// beta(f) per FFT bin, rad/m.
    beta: Vec<f64>,
    alpha: f64,
    gamma: f64,
    steps: Vec<f64>,
}

/// Manakov polarization-averaged Kerr factor.
const MANAKOV: f64 = 8.0 / 9.0;

impl Propagator {
    pub fn new(fiber: &FiberParams, samples: usize, sample_rate: f64, steps_per_span: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(samples);
        let ifft = planner.plan_fft_inverse(samples);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let beta = (0..samples)
            .map(|i| {
                let w = 2.0 * PI * bin_frequency(i, samples, sample_rate);
                0.5 * fiber.beta2 * w * w + fiber.beta3 * w * w * w / 6.0
            })
            .collect();
        let z = log_step_boundaries(fiber.alpha, fiber.span_length, steps_per_span);
        Propagator {
            fft,
            ifft,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            beta,
            alpha: fiber.alpha,
            gamma: fiber.gamma,
            steps: z.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    pub fn forward(&mut self, field: &mut FieldBuffer) {
        self.fft.process_with_scratch(&mut field.x, &mut self.scratch);
        self.fft.process_with_scratch(&mut field.y, &mut self.scratch);
    }

    pub fn inverse(&mut self, field: &mut FieldBuffer) {
        self.ifft.process_with_scratch(&mut field.x, &mut self.scratch);
        self.ifft.process_with_scratch(&mut field.y, &mut self.scratch);
        let norm = 1.0 / field.len() as f64;
        for v in field.x.iter_mut().chain(field.y.iter_mut()) {
            *v *= norm;
        }
    }

    /// Applies dispersion and loss over `h` metres to a field in the
    /// frequency domain. Negative `h` with zero loss undoes dispersion.
    pub fn linear_spectrum(&self, spectrum: &mut FieldBuffer, h: f64, with_loss: bool) {
        let att = if with_loss { (-0.5 * self.alpha * h).exp() } else { 1.0 };
        for ((x, y), &b) in spectrum.x.iter_mut().zip(spectrum.y.iter_mut()).zip(&self.beta) {
            let k = Complex64::from_polar(att, -b * h);
            *x *= k;
            *y *= k;
        }
    }

    fn linear(&mut self, field: &mut FieldBuffer, h: f64) {
        self.forward(field);
        self.linear_spectrum(field, h, true);
        self.inverse(field);
    }

    fn nonlinear(&self, field: &mut FieldBuffer, h: f64) {
        // Exact path integral of exp(-alpha z) about the step midpoint.
        let h_eff = if self.alpha * h > 1e-12 {
            2.0 * (0.5 * self.alpha * h).sinh() / self.alpha
        } else {
            h
        };
        let k = -self.gamma * MANAKOV * h_eff;
        for (x, y) in field.x.iter_mut().zip(field.y.iter_mut()) {
            let rot = Complex64::from_polar(1.0, k * (x.norm_sqr() + y.norm_sqr()));
            *x *= rot;
            *y *= rot;
        }
    }

    /// One fiber span (no amplification).
    pub fn span(&mut self, field: &mut FieldBuffer) {
        let steps = self.steps.clone();
        if self.gamma == 0.0 {
            let total: f64 = steps.iter().sum();
            self.linear(field, total);
            return;
        }
        let mut pending = 0.5 * steps[0];
        for (j, &h) in steps.iter().enumerate() {
            self.linear(field, pending);
            self.nonlinear(field, h);
            pending = 0.5 * h + steps.get(j + 1).map_or(0.0, |n| 0.5 * n);
        }
        self.linear(field, pending);
    }

    /// Step sizes of one span, m.
    pub fn step_sizes(&self) -> &[f64] {
        &self.steps
    }
}

/// Propagates `field` through one span of `fiber` with `steps` logarithmic
/// steps.
pub fn propagate_span(mut field: FieldBuffer, fiber: &FiberParams, steps: usize) -> FieldBuffer {
    let mut p = Propagator::new(fiber, field.len(), field.sample_rate, steps.max(1));
    p.span(&mut field);
    field
}
