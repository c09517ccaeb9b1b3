use fdnoma::model::{sample_channels, substream, SystemParams};
use fdnoma::optimizer::{algorithm1, delta_ps_for_steps};
use fdnoma::oracle::grid_search;
use std::time::Instant;

fn main() {
    let p = SystemParams::defaults();
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().unwrap();
    let mut t_oracle = 0.0;
    let mut max_gap: f64 = 0.0;
    let mut agree = 0;
    let mut total = 0;
    let mut worst = (0u64, 0.0f64);
    for seed in 0..12u64 {
        let ch = sample_channels(&p, &mut substream(2024, seed));
        for rbar in [0.5, 1.0, 1.5] {
            let delta = delta_ps_for_steps(&p, &ch, rbar, 200).unwrap();
            let alg = algorithm1(&p, &ch, rbar, delta).unwrap();
            let t1 = Instant::now();
            let orc = grid_search(&p, &ch, rbar, 64, 64, 60, 60).unwrap();
            t_oracle += t1.elapsed().as_secs_f64();
            total += 1;
            if alg.feasible == orc.feasible { agree += 1; }
            if alg.feasible && orc.feasible {
                let gap = (alg.near_rate - orc.near_rate).abs() / orc.near_rate;
                if gap > max_gap { max_gap = gap; worst = (seed, rbar); }
            }
        }
    }
    println!("agreement {agree}/{total}, max gap {max_gap:.5} at seed {} rbar {}", worst.0, worst.1);
    println!("oracle avg {:.3}s per search", t_oracle / total as f64);
}
