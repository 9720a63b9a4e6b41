//! Rough wall-clock timings of the dense kernels at a few sizes. Handy when
//! judging how large a study grid a machine can take.
//!
//! Run with `cargo run --release -p scnlab --example kernel_timing`.

use scnlab::numkit::{self, CholFactor, Matrix};
use std::time::Instant;

fn main() {
    for &n in &[200usize, 500, 1000, 2000] {
        let a = Matrix::from_fn(4000.min(2 * n), n, |i, j| {
            ((i * 31 + j * 17) % 101) as f64 / 101.0 - 0.5
        });
        let t = Instant::now();
        let mut g = a.gram();
        let t_gram = t.elapsed().as_secs_f64();
        g.add_diag(0.1);
        let t = Instant::now();
        let f = CholFactor::new(&g).unwrap();
        let t_chol = t.elapsed().as_secs_f64();
        let rhs: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
        let _ = f.solve(&rhs);
        let t = Instant::now();
        let eig = numkit::eigh(&g).unwrap();
        let t_eigh = t.elapsed().as_secs_f64();
        println!(
            "n={n:5}  gram {:8.3}s  chol {:8.3}s  eigh {:8.3}s  (lambda_max {:.3e})",
            t_gram,
            t_chol,
            t_eigh,
            eig.values.last().unwrap()
        );
    }
}
