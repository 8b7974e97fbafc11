use otlab::train::{adapt, harmonic_mean, pretrain_zero_shot, PretrainConfig, TrainConfig};
use otlab_model::{evaluate, generate, SyntheticSpec};
use otlab_ot::ConstraintKind;

fn run(pre: &otlab_model::ModelPair, ds: &otlab_model::SplitDataset, kind: ConstraintKind, lambda: f64, seed: u64) -> (f64, f64, f64) {
    let mut m = pre.clone();
    let cfg = TrainConfig { constraint: kind, lambda, seed, ..Default::default() };
    let rec = adapt(&mut m, ds, &cfg).unwrap();
    let last = rec.final_row();
    (last.base_acc, last.novel_acc, harmonic_mean(last.base_acc, last.novel_acc))
}

fn main() {
    let ds = generate(&SyntheticSpec::default()).unwrap();
    let all: Vec<usize> = (0..8).collect();
    let seeds: Vec<u64> = (0..5).collect();

    for (shift, pre_epochs) in [(4.8, 30), (4.8, 45), (4.8, 60), (4.9, 60), (4.7, 45)] {
        let mut pres = vec![];
        let mut alls = vec![];
        for &seed in &seeds {
            let pcfg = PretrainConfig { seed, domain_shift: shift, epochs: pre_epochs, ..Default::default() };
            let pre = pretrain_zero_shot(&ds, &pcfg).unwrap();
            alls.push(evaluate(&pre, &ds.eval.features, &ds.eval.labels, &ds.class_embeddings, &all).unwrap());
            pres.push(pre);
        }
        let mut c7a = 0; let mut c7b = 0; let mut c9b = 0;
        let (mut hm_j, mut hm_v, mut hm_t) = (0.0, 0.0, 0.0);
        let (mut b0, mut b1000) = (0.0, 0.0);
        for (i, &seed) in seeds.iter().enumerate() {
            let none = run(&pres[i], &ds, ConstraintKind::None, 0.0, seed);
            let jot = run(&pres[i], &ds, ConstraintKind::JointOt, 10.0, seed);
            let l2 = run(&pres[i], &ds, ConstraintKind::L2, 10.0, seed);
            let otv = run(&pres[i], &ds, ConstraintKind::OtVision, 10.0, seed);
            let ott = run(&pres[i], &ds, ConstraintKind::OtText, 10.0, seed);
            let j1000 = run(&pres[i], &ds, ConstraintKind::JointOt, 1000.0, seed);
            if jot.1 >= none.1 { c7a += 1; }
            if jot.2 >= l2.2 { c7b += 1; }
            if jot.1 >= none.1 { c9b += 1; }
            hm_j += jot.2 / 5.0; hm_v += otv.2 / 5.0; hm_t += ott.2 / 5.0;
            b0 += none.0 / 5.0; b1000 += j1000.0 / 5.0;
        }
        let all_min = alls.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "shift={shift} preE={pre_epochs}: all_acc min {all_min:.3} {alls:?} | 7a {c7a}/5 7b {c7b}/5 9b {c9b}/5 | hm j/v/t {hm_j:.4}/{hm_v:.4}/{hm_t:.4} | base λ0 {b0:.3} λ1000 {b1000:.3}"
        );
    }
}
