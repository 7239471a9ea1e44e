//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use pauc::bench::{growth_ratios, run_bench, BenchOptions};
use pauc::data::{generate_synthetic, BatchSpec, SampleSet};
use pauc::loss::{HyperParams, Task};
use pauc::model::{ModelKind, ModelParams};
use pauc::optim::{train, write_trace_csv, LearnParams, TrainOptions, TrainOutput};
use pauc::oracle::{self, CheckOutcome};
use std::process::ExitCode;
use std::time::{Duration, Instant};

const SEED: u64 = 20240607;

struct Verdict {
    pass: bool,
    detail: String,
}

fn within(out: CheckOutcome, tol: f64, elapsed: Duration, budget: Option<Duration>) -> Verdict {
    let fast = budget.is_none_or(|b| elapsed < b);
    let budget_txt = budget.map(|b| format!(" < {:.0} s", b.as_secs_f64())).unwrap_or_default();
    Verdict {
        pass: out.max_error <= tol && fast,
        detail: format!(
            "max error {:.3e} (tol {tol:.0e}) over {} instances in {:.2} s{budget_txt}",
            out.max_error,
            out.instances,
            elapsed.as_secs_f64()
        ),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn lemma1() -> Verdict {
    let (out, t) = timed(|| oracle::check_lemma1(SEED, 1000).unwrap());
    within(out, 1e-12, t, Some(Duration::from_secs(5)))
}

fn opauc_equivalence() -> Verdict {
    let (out, t) = timed(|| oracle::check_opauc_equivalence(SEED, 500).unwrap());
    within(out, 1e-10, t, Some(Duration::from_secs(10)))
}

fn tpauc_equivalence() -> Verdict {
    let (out, t) = timed(|| oracle::check_tpauc_equivalence(SEED, 500).unwrap());
    within(out, 1e-10, t, Some(Duration::from_secs(10)))
}

fn constrained_reformulation() -> Verdict {
    let (nested, t1) = timed(|| oracle::check_nested_solver(SEED, 50, Task::Opauc).unwrap());
    let (sweep, t2) = timed(|| oracle::check_lagrangian_sweep(SEED, 50, Task::Opauc).unwrap());
    let a = within(nested, 1e-6, t1, None);
    let b = within(sweep, 1e-5, t2, None);
    Verdict { pass: a.pass && b.pass, detail: format!("nested: {}; multiplier sweep: {}", a.detail, b.detail) }
}

fn smoothing_bias() -> Verdict {
    let bias = within(oracle::check_softplus_bias(), 1e-9, Duration::ZERO, None);
    let ratio = within(oracle::check_bias_ratio(), 1e-6, Duration::ZERO, None);
    Verdict {
        pass: bias.pass && ratio.pass,
        detail: format!("sup vs ln2/k: {}; halving ratio: {}", bias.detail, ratio.detail),
    }
}

fn gradients() -> Verdict {
    let loss = oracle::check_loss_gradients(SEED, 100).unwrap();
    let model = oracle::check_model_gradients(SEED, 100).unwrap();
    let a = within(loss, 1e-5, Duration::ZERO, None);
    let b = within(model, 1e-5, Duration::ZERO, None);
    Verdict { pass: a.pass && b.pass, detail: format!("loss partials: {}; model backward: {}", a.detail, b.detail) }
}

fn monotonicity() -> Verdict {
    let out = oracle::check_monotonicity(50).unwrap();
    Verdict {
        pass: out.max_error == 0.0,
        detail: format!("{} violations over {} sign evaluations", out.max_error, out.instances),
    }
}

fn gamma_concavity() -> Verdict {
    let p = oracle::probe_gamma_concavity(SEED, 1000).unwrap();
    Verdict {
        pass: p.max_excess <= 1e-6,
        detail: format!(
            "max of second difference + 2(1+omega) = {:.3e} (bound 1e-6) over {} probes; largest raw second difference {:.3e}; excess over the smoothing curvature {:.3e}",
            p.max_excess, p.probes, p.max_second_difference, p.max_excess_over_smoothing
        ),
    }
}

struct Run {
    out: TrainOutput<f64>,
    heldout_metric: f64,
    elapsed: Duration,
    trace_csv: String,
}

fn end_to_end(task: Task) -> Run {
    let train_set: SampleSet<f64> = generate_synthetic(50, 950, 2, 3.0, 1).unwrap();
    let heldout: SampleSet<f64> = generate_synthetic(50, 950, 2, 3.0, 2).unwrap();
    let (alpha, beta) = match task {
        Task::Opauc => (1.0, 0.3),
        Task::Tpauc => (0.5, 0.5),
    };
    let hp = HyperParams::with_defaults(task, alpha, beta, train_set.prior_p()).unwrap();
    let batch = BatchSpec::new(128, 1).stratified(true);
    let lp = LearnParams::defaults(200 * batch.batches_per_epoch(train_set.len()));
    let model = ModelParams::init(ModelKind::Linear, 2, 0, 1).unwrap();
    let opts = TrainOptions { batch, warmup_epochs: 0, heldout: Some(&heldout) };
    let (out, elapsed) = timed(|| train(&train_set, &model, &hp, &lp, &opts).unwrap());
    let last = out.trace.last().unwrap();
    let heldout_metric = match task {
        Task::Opauc => last.heldout_opauc.unwrap(),
        Task::Tpauc => last.heldout_tpauc.unwrap(),
    };
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &out.trace).unwrap();
    Run { out, heldout_metric, elapsed, trace_csv: String::from_utf8(buf).unwrap() }
}

fn training(op: &Run, tp: &Run) -> Verdict {
    let fast = op.elapsed + tp.elapsed < Duration::from_secs(120);
    Verdict {
        pass: op.heldout_metric >= 0.95 && tp.heldout_metric >= 0.90 && fast,
        detail: format!(
            "held-out OPAUC {:.4} (>= 0.95), held-out TPAUC {:.4} (>= 0.90), {:.2} s total",
            op.heldout_metric,
            tp.heldout_metric,
            (op.elapsed + tp.elapsed).as_secs_f64()
        ),
    }
}

fn tail_ratio(norms: &[f64]) -> f64 {
    let w = (norms.len() / 10).max(1);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    mean(&norms[norms.len() - w..]) / mean(&norms[..w])
}

fn convergence_trend(op: &Run, tp: &Run) -> Verdict {
    let r_op = tail_ratio(&op.out.step_grad_map_norms);
    let r_tp = tail_ratio(&tp.out.step_grad_map_norms);
    Verdict {
        pass: r_op <= 0.2 && r_tp <= 0.2,
        detail: format!("last/first decile mean gradient-mapping norm: opauc {r_op:.4}, tpauc {r_tp:.4} (<= 0.2)"),
    }
}

fn scaling() -> Verdict {
    let hp = HyperParams::with_defaults(Task::Opauc, 1.0, 1.0, 0.5).unwrap();
    let rows = run_bench(&hp, &BenchOptions::default()).unwrap();
    let (inst, pair) = growth_ratios(&rows).unwrap();
    let linear = 2048.0 / 64.0;
    Verdict {
        pass: inst <= 1.5 * linear && pair >= 0.5 * linear * linear,
        detail: format!(
            "t(2048)/t(64): instance-wise {inst:.1} (<= {:.0}), pairwise {pair:.1} (>= {:.0})",
            1.5 * linear,
            0.5 * linear * linear
        ),
    }
}

fn without_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(first: &Run) -> Verdict {
    let second = end_to_end(Task::Opauc);
    let same = without_timing(&first.trace_csv) == without_timing(&second.trace_csv);
    Verdict {
        pass: same && first.out.model == second.out.model,
        detail: format!(
            "{} trace rows; traces {} with timing column removed",
            first.out.trace.len(),
            if same { "identical" } else { "differ" }
        ),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Verdict)> = vec![
        (1, "top-k average equals the shift minimization", lemma1()),
        (2, "OPAUC closed form + 1 equals the pairwise risk", opauc_equivalence()),
        (3, "TPAUC closed form + 1 equals the pairwise risk", tpauc_equivalence()),
        (4, "constrained nested solve and multiplier sweep match the closed form", constrained_reformulation()),
        (5, "softplus bias equals ln2/kappa and halves with kappa", smoothing_bias()),
        (6, "analytic gradients match finite differences", gradients()),
        (7, "branch monotonicity on the feasible grid", monotonicity()),
        (8, "strong concavity in gamma", gamma_concavity()),
    ];
    let op = end_to_end(Task::Opauc);
    let tp = end_to_end(Task::Tpauc);
    results.push((9, "end-to-end training on synthetic data", training(&op, &tp)));
    results.push((10, "gradient-mapping norm decreases", convergence_trend(&op, &tp)));
    results.push((11, "per-iteration cost scaling", scaling()));
    results.push((12, "identical seeds give identical traces", determinism(&op)));

    let mut failed = 0;
    for (id, name, v) in &results {
        println!("[{}] criterion {id:>2}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
