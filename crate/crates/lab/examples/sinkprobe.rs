use otlab_kernel::Rng;
use otlab_ot::{exact_ot, sinkhorn, SinkhornConfig, SinkhornEpsilon};

fn main() {
    // iterations needed to bring the marginal violation under 1e-6 at eps = 0.01 * mean
    let mut worst = (0usize, 0u64);
    for seed in 0..100 {
        let mut rng = Rng::new(seed);
        let c = rng.gaussian_matrix(8, 8, 1.0).map(f64::abs);
        let cfg = SinkhornConfig {
            epsilon: SinkhornEpsilon::MeanScaled(0.01),
            max_iters: 400_000,
            tol: 1e-6,
        };
        let r = sinkhorn(&c, &cfg).unwrap();
        if r.iterations > worst.0 {
            worst = (r.iterations, seed);
        }
        if !r.converged {
            println!("seed {seed}: NOT within 1e-6 after {} iters (err {:.2e})", r.iterations, r.marginal_error);
        }
    }
    println!("worst iterations to 1e-6: {} (seed {})", worst.0, worst.1);

    // value accuracy when stopping at tol 1e-9 with a 400k budget
    let mut bad = 0;
    let mut max_rel = 0.0f64;
    for seed in 0..100 {
        let mut rng = Rng::new(seed);
        let c = rng.gaussian_matrix(8, 8, 1.0).map(f64::abs);
        let cfg = SinkhornConfig {
            epsilon: SinkhornEpsilon::MeanScaled(0.01),
            max_iters: 400_000,
            tol: 1e-9,
        };
        let r = sinkhorn(&c, &cfg).unwrap();
        let (_, ex) = exact_ot(&c).unwrap();
        let rel = (r.value - ex).abs() / ex.abs().max(1e-12);
        max_rel = max_rel.max(rel);
        if rel > 0.05 { bad += 1; }
        if r.plan.max_marginal_violation() > 1e-6 {
            println!("seed {seed}: marginal {:.2e} too large", r.plan.max_marginal_violation());
        }
    }
    println!("rel>5%: {bad}/100, max_rel={max_rel:.4}");

    use std::time::Instant;
    let mut rng = Rng::new(3);
    let c = rng.gaussian_matrix(8, 8, 1.0).map(f64::abs);
    let cfg = SinkhornConfig { epsilon: SinkhornEpsilon::MeanScaled(0.01), max_iters: 100_000, tol: 1e-30 };
    let t = Instant::now();
    let r = sinkhorn(&c, &cfg).unwrap();
    println!("100k iters in {:?} ({} iters done)", t.elapsed(), r.iterations);
}
