use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textkernel::losses::{
    dice_loss, dice_loss_grad, ohem_select, total_loss, training_loss_and_grad, LossWeights,
    SelectionMask, DEFAULT_OHEM_RATIO,
};
use textkernel::postprocess::training_forward;
use textkernel::{BitMask, DilationSize, ScalarMap};

use crate::failure::{CliResult, Failure};

/// Verify the Dice losses, hard example mining and gradients.
#[derive(Debug, Args)]
pub struct LossCheck {
    /// Random instances per gradient check.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_bits(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BitMask {
    BitMask::from_fn(w, h, |_, _| rng.gen_bool(p))
}

/// Distinct values in (0.05, 0.95), shuffled, so no window max is tied.
fn tie_free(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<f64> {
    let n = w * h;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 0.05 + 0.9 * (i as f64 + 0.5) / n as f64)
        .collect();
    for i in (1..n).rev() {
        v.swap(i, rng.gen_range(0..=i));
    }
    v
}

fn central_difference(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

impl LossCheck {
    pub fn run(self) -> CliResult<()> {
        let checks = [
            worked_example(),
            dice_gradient(self.instances, self.seed),
            chained_gradient(self.instances, self.seed),
            ohem_budget(self.seed),
            total_arithmetic(),
        ];
        let mut failed = 0;
        for c in &checks {
            println!(
                "{} {} {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
            failed += usize::from(!c.pass);
        }
        if failed > 0 {
            return Err(Failure::Verification(format!(
                "{failed} of {} loss checks failed",
                checks.len()
            )));
        }
        Ok(())
    }
}

fn worked_example() -> Check {
    let p = ScalarMap::from_values(2, 2, vec![1.0, 0.5, 0.0, 0.0]).expect("finite");
    let g = BitMask::from_bits(2, 2, vec![1, 1, 0, 0]).expect("binary");
    let l = dice_loss(&p, &g, &SelectionMask::full(2, 2)).expect("same dims");
    Check {
        name: "dice-worked-example",
        pass: (l - 1.0 / 13.0).abs() < 1e-9 && format!("{l:.6}") == "0.076923",
        detail: format!("loss={l:.10}"),
    }
}

fn dice_gradient(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < instances {
        let (w, h) = (rng.gen_range(1..12), rng.gen_range(1..12));
        let p = ScalarMap::from_fn(w, h, |_, _| rng.gen_range(0.0..1.0));
        let g = random_bits(&mut rng, w, h, 0.4);
        let sel = SelectionMask::from_mask(random_bits(&mut rng, w, h, 0.7));
        let Ok(analytic) = dice_loss_grad(&p, &g, &sel) else {
            continue;
        };
        let numeric = central_difference(p.as_slice(), 1e-5, |v| {
            let m = ScalarMap::from_values(w, h, v.to_vec()).expect("finite");
            dice_loss(&m, &g, &sel).expect("same dims")
        });
        worst = worst.max(relative_error(analytic.as_slice(), &numeric));
        checked += 1;
    }
    Check {
        name: "dice-gradient",
        pass: worst < 1e-4,
        detail: format!("instances={instances} max_rel_err={worst:.3e}"),
    }
}

fn chained_gradient(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let weights = LossWeights::default();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (w, h) = (rng.gen_range(2..10), rng.gen_range(2..10));
        let s = DilationSize::new([1, 3, 5][rng.gen_range(0..3)]).expect("odd");
        let values = tie_free(&mut rng, w, h);
        let g_tex = random_bits(&mut rng, w, h, 0.5);
        let g_ker = random_bits(&mut rng, w, h, 0.3);
        let p = ScalarMap::from_values(w, h, values.clone()).expect("finite");
        let (_, analytic) =
            training_loss_and_grad(&p, &g_ker, &g_tex, s, weights, DEFAULT_OHEM_RATIO)
                .expect("valid inputs");
        let numeric = central_difference(&values, 1e-5, |v| {
            let m = ScalarMap::from_values(w, h, v.to_vec()).expect("finite");
            total_loss(
                &m,
                &g_ker,
                &training_forward(&m, s),
                &g_tex,
                weights,
                DEFAULT_OHEM_RATIO,
            )
            .expect("valid inputs")
        });
        worst = worst.max(relative_error(analytic.as_slice(), &numeric));
    }
    Check {
        name: "training-gradient",
        pass: worst < 1e-4,
        detail: format!("instances={instances} max_rel_err={worst:.3e}"),
    }
}

fn ohem_budget(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = BitMask::from_fn(11, 10, |x, _| x == 0);
    let p = ScalarMap::from_fn(11, 10, |_, _| rng.gen_range(0.0..1.0));
    let sel = ohem_select(&p, &g, DEFAULT_OHEM_RATIO).expect("valid ratio");
    let negatives = sel.count() - g.count_ones();
    Check {
        name: "ohem-selection",
        pass: g.is_subset_of(sel.mask()) && negatives == 30,
        detail: format!("positives=10 negatives_selected={negatives}"),
    }
}

fn total_arithmetic() -> Check {
    let total = LossWeights::default().combine(0.2, 0.4);
    Check {
        name: "total-loss",
        pass: total == 0.4,
        detail: format!("kernel=0.2 text=0.4 alpha=0.5 total={total}"),
    }
}
