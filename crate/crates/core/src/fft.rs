//! Multi-dimensional FFTs over row-major cubes of side `M`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanKey = (usize, bool);

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((m, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(m)
            } else {
                planner.plan_fft_forward(m)
            }
        })
        .clone()
}

fn transform(data: &mut [Complex64], d: usize, m: usize, inverse: bool) {
    let n = m.pow(d as u32);
    assert_eq!(data.len() % n, 0);
    let fft = plan(m, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for cube in data.chunks_mut(n) {
        // last axis is contiguous
        fft.process_with_scratch(cube, &mut scratch);
        let mut lines = vec![Complex64::default(); n];
        for axis in 0..d - 1 {
            let stride = m.pow((d - 1 - axis) as u32);
            let outer = n / (stride * m);
            // gather lines along `axis` into contiguous storage
            let mut pos = 0;
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * stride * m + s;
                    for i in 0..m {
                        lines[pos + i] = cube[base + i * stride];
                    }
                    pos += m;
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            let mut pos = 0;
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * stride * m + s;
                    for i in 0..m {
                        cube[base + i * stride] = lines[pos + i];
                    }
                    pos += m;
                }
            }
        }
    }
}

/// Unnormalized forward transform of every `M^d` block in `data`.
pub fn forward(data: &mut [Complex64], d: usize, m: usize) {
    transform(data, d, m, false);
}

/// Unnormalized inverse transform of every `M^d` block in `data`.
pub fn inverse(data: &mut [Complex64], d: usize, m: usize) {
    transform(data, d, m, true);
}
