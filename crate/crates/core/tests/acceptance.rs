//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use lcn::analysis::{cost_report, match_params, matched_configs, param_spread, BudgetOptions, Family};
use lcn::backprop::{gradient_check, sample_gradient};
use lcn::data::{gen_symbolic, load_csv, load_idx, split, SymbolicFn, SymbolicTask, Targets};
use lcn::network::{read_network, write_network, Activation, ArchSpec, LayerSpec};
use lcn::spline::{eval_basis, eval_basis_derivative, eval_nonzero_basis, KnotVector};
use lcn::training::{evaluate, train, Loss, Target, TrainConfig};
use lcn::{init_network, Dataset, Matrix, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = (bool, String);

const PARTITION_TOL: f64 = 1e-12;
const SPLINE_POINTS: usize = 10_000;
const SPLINE_BUDGET_S: f64 = 10.0;
const DERIV_H: f64 = 1e-5;
const DERIV_TOL: f64 = 1e-6;
const DERIV_POINTS: usize = 1_000;
const GRAD_NETS: usize = 20;
const GRAD_H: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-5;
const GRAD_BUDGET_S: f64 = 120.0;
const SPARSITY_SAMPLES: usize = 100;
const SYMBOLIC_STEPS: usize = 5_000;
const F1_MSE: f64 = 1e-3;
const F4_MSE: f64 = 5e-3;
const MATCH_SPREAD: f64 = 0.02;
const MNIST_ACC: f64 = 0.90;
const MNIST_EPOCHS: usize = 5;
const MNIST_BUDGET_S: f64 = 300.0;
const MNIST_MAX_PARAMS: usize = 30_000;

fn domain_configs() -> impl Iterator<Item = (usize, usize)> {
    (0..=5).flat_map(|p| (p + 1..=32).map(move |n| (p, n)))
}

fn spline_identities() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sum: f64 = 0.0;
    let mut worst_jump: f64 = 0.0;
    let mut violations = Vec::new();
    let mut configs = 0;
    for (p, n) in domain_configs() {
        configs += 1;
        let kv = KnotVector::clamped_uniform(-1.0, 1.0, n, p).unwrap();
        let k = kv.knots().to_vec();
        let basis = |x: f64| -> Vec<f64> { (0..n).map(|i| eval_basis(&kv, i, x).unwrap()).collect() };

        for x in (0..SPLINE_POINTS).map(|_| rng.random_range(-1.0..=1.0)) {
            let b = basis(x);
            worst_sum = worst_sum.max((b.iter().sum::<f64>() - 1.0).abs());
            let support = eval_nonzero_basis(&kv, x).unwrap();
            for (i, &v) in b.iter().enumerate() {
                let on_right_end = x == 1.0 && i == n - 1;
                let in_half_open = k[i] <= x && x < k[i + p + 1];
                let in_open = k[i] < x && x < k[i + p + 1];
                if v < 0.0 {
                    violations.push(format!("p{p} N{n} B{i}({x}) < 0"));
                }
                if !(in_half_open || on_right_end) && v != 0.0 {
                    violations.push(format!("p{p} N{n} B{i}({x}) = {v} outside support"));
                }
                if in_open && v <= 0.0 {
                    violations.push(format!("p{p} N{n} B{i}({x}) = 0 inside support"));
                }
                if support.value(i) != v {
                    violations.push(format!("p{p} N{n} B{i}({x}) local vs full evaluation"));
                }
            }
        }

        for (x, hot) in [(-1.0, 0), (1.0, n - 1)] {
            let b = basis(x);
            if b.iter().enumerate().any(|(i, &v)| v != if i == hot { 1.0 } else { 0.0 }) {
                violations.push(format!("p{p} N{n} endpoint {x} not one-hot"));
            }
        }

        // degree 0 basis functions are step functions
        if p >= 1 {
            let delta = 1e-10;
            for &t in k.iter().filter(|&&t| t > -1.0 && t < 1.0) {
                let (left, at, right) = (basis(t - delta), basis(t), basis(t + delta));
                for i in 0..n {
                    worst_jump = worst_jump
                        .max((left[i] - right[i]).abs())
                        .max((at[i] - right[i]).abs());
                }
            }
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    // one-sided limits over 1e-10 may differ by the slope bound times 2e-10
    let pass = violations.is_empty() && worst_sum <= PARTITION_TOL && worst_jump < 1e-7 && seconds < SPLINE_BUDGET_S;
    let mut detail = format!(
        "{configs} configs x {SPLINE_POINTS} points, max |sum - 1| = {worst_sum:.2e}, max knot jump = {worst_jump:.2e}, {seconds:.1}s"
    );
    if let Some(v) = violations.first() {
        detail.push_str(&format!(", {} violations (first: {v})", violations.len()));
    }
    (pass, detail)
}

fn derivative_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut where_worst = String::new();
    let mut worst_pointwise: f64 = 0.0;
    // degree 0 basis functions are piecewise constant and have no derivative
    for (p, n) in domain_configs().filter(|&(p, _)| p >= 1) {
        let kv = KnotVector::clamped_uniform(-1.0, 1.0, n, p).unwrap();
        let knots = kv.knots().to_vec();
        let b = |i: usize, x: f64| eval_basis(&kv, i, x).unwrap();
        // derivative scale of this basis, for points where B' itself crosses zero
        let scale = (p as f64) * (n - p) as f64 / 2.0;
        let mut drawn = 0;
        while drawn < DERIV_POINTS {
            let x: f64 = rng.random_range(-1.0..1.0);
            if knots.iter().any(|&t| (t - x).abs() < 10.0 * DERIV_H) {
                continue;
            }
            drawn += 1;
            for i in 0..n {
                let analytic = eval_basis_derivative(&kv, i, x).unwrap();
                let numeric = (b(i, x + DERIV_H) - b(i, x - DERIV_H)) / (2.0 * DERIV_H);
                let err = (analytic - numeric).abs() / numeric.abs().max(scale).max(1.0);
                if numeric.abs() > 1.0 {
                    worst_pointwise = worst_pointwise.max((analytic - numeric).abs() / numeric.abs());
                }
                if err > worst {
                    worst = err;
                    where_worst = format!("p{p} N{n} B'{i}({x:.6})");
                }
            }
        }
    }
    (
        worst <= DERIV_TOL,
        format!(
            "max error relative to derivative scale {worst:.2e} at {where_worst}, pointwise where |B'| > 1: {worst_pointwise:.2e}, h = {DERIV_H:e}"
        ),
    )
}

fn random_layer(rng: &mut ChaCha8Rng, family: usize) -> LayerSpec {
    let width = rng.random_range(1..=8);
    let p = rng.random_range(1..=3);
    let n = p + 1 + rng.random_range(0..=8);
    match family {
        0 => LayerSpec::lcn(width, n, p),
        1 => LayerSpec::mlp(
            width,
            [Activation::Relu, Activation::Sigmoid, Activation::Tanh][rng.random_range(0..3)],
        ),
        _ => LayerSpec::kan(width, n, p),
    }
}

fn gradient_gate() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut failures = Vec::new();
    for k in 0..GRAD_NETS {
        let depth = rng.random_range(1..=3);
        // every net carries at least one layer of family k % 3
        let anchor = rng.random_range(0..depth);
        let hidden: Vec<LayerSpec> = (0..depth)
            .map(|l| {
                let family = if l == anchor { k % 3 } else { rng.random_range(0..3) };
                random_layer(&mut rng, family)
            })
            .collect();
        let d = rng.random_range(1..=4);
        let o = rng.random_range(1..=3);
        let arch = ArchSpec::new(d, hidden, o);
        let net = init_network(&arch, k as u64).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
        let y: Vec<f64> = (0..o).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let class = rng.random_range(0..o);
        let (target, loss) = if k % 2 == 0 {
            (Target::Values(&y), Loss::Mse)
        } else {
            (Target::Class(class), Loss::SoftmaxXent)
        };
        let check = gradient_check(&net, &x, target, loss, GRAD_H).unwrap();
        compared += check.compared;
        worst = worst.max(check.max_rel_error);
        if check.max_rel_error > GRAD_TOL {
            failures.push(format!("net {k} ({:.2e})", check.max_rel_error));
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let mut detail = format!(
        "{GRAD_NETS} nets, {compared} gradients, max relative error {worst:.2e}, {seconds:.1}s"
    );
    if !failures.is_empty() {
        detail.push_str(&format!(", over tolerance: {}", failures.join(" ")));
    }
    (failures.is_empty() && seconds < GRAD_BUDGET_S, detail)
}

fn sparsity() -> Outcome {
    let arch = ArchSpec::new(
        4,
        vec![LayerSpec::lcn(6, 12, 3), LayerSpec::lcn(5, 9, 1), LayerSpec::lcn(4, 7, 2)],
        3,
    );
    let degrees = [3, 1, 2];
    let net = init_network(&arch, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_excess = 0i64;
    let mut max_nnz = [0usize; 3];
    for _ in 0..SPARSITY_SAMPLES {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..=1.0)).collect();
        let (_, tape, _) = sample_gradient(&net, &x, Target::Class(rng.random_range(0..3)), Loss::SoftmaxXent, 1).unwrap();
        for (l, &p) in degrees.iter().enumerate() {
            let g = tape.lcn_coeff_grads(l).unwrap();
            for r in 0..g.rows() {
                let nnz = g.row(r).iter().filter(|v| **v != 0.0).count();
                max_nnz[l] = max_nnz[l].max(nnz);
                worst_excess = worst_excess.max(nnz as i64 - (p as i64 + 1));
            }
        }
    }
    (
        worst_excess <= 0,
        format!(
            "{SPARSITY_SAMPLES} samples, max non-zeros per neuron {max_nnz:?} for degrees {degrees:?}"
        ),
    )
}

fn fit(arch: &ArchSpec, train_set: &Dataset, test_set: &Dataset, cfg: &TrainConfig) -> (f64, f64, f64, Network) {
    let mut net = init_network(arch, cfg.seed).unwrap();
    let history = train(&mut net, train_set, None, cfg).unwrap();
    let first = history.first().unwrap().train_loss;
    let last = history.last().unwrap().train_loss;
    (evaluate(&net, test_set).unwrap().value(), first, last, net)
}

fn symbolic_regression() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (f, limit) in [(SymbolicFn::F1, F1_MSE), (SymbolicFn::F4, F4_MSE)] {
        let ds = gen_symbolic(&SymbolicTask::new(f, 2000), 0).unwrap();
        let (train_set, test_set) = split(&ds, 0.8, 0).unwrap();
        let batch_size = 16;
        let cfg = TrainConfig {
            epochs: SYMBOLIC_STEPS * batch_size / train_set.len() + 1,
            batch_size,
            learning_rate: 3e-3,
            max_steps: Some(SYMBOLIC_STEPS),
            ..TrainConfig::default()
        };
        let lcn_arch = ArchSpec::new(f.input_dim(), vec![LayerSpec::lcn(8, 16, 3)], 1);
        let lcn_params = cost_report(&lcn_arch).params;
        let mlp = match_params(Family::Mlp, f.input_dim(), 1, lcn_params, &BudgetOptions::default()).unwrap();
        let spread = param_spread(&[lcn_params, mlp.params]);
        let (lcn_mse, first, last, _) = fit(&lcn_arch, &train_set, &test_set, &cfg);
        let (mlp_mse, _, _, _) = fit(&mlp.arch, &train_set, &test_set, &cfg);
        pass &= lcn_mse <= limit && last < first && spread < MATCH_SPREAD;
        parts.push(format!(
            "{}: LCN({lcn_params}) mse {lcn_mse:.2e} (limit {limit:e}), MLP({}) mse {mlp_mse:.2e}",
            f.id(),
            mlp.params
        ));
    }
    (pass, parts.join("; "))
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn mnist_subset() -> Outcome {
    let dir = data_dir().join("mnist-10k");
    let ds = match load_idx(dir.join("images-idx3-ubyte.gz"), dir.join("labels-idx1-ubyte.gz")) {
        Ok(ds) => ds,
        Err(e) => return (false, format!("cannot load {}: {e}", dir.display())),
    };
    let (train_set, test_set) = split(&ds, 0.8, 0).unwrap();
    let cfg = TrainConfig {
        epochs: MNIST_EPOCHS,
        batch_size: 32,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let lcn_arch = ArchSpec::new(784, vec![LayerSpec::lcn(35, 13, 3)], 10);
    let lcn_params = cost_report(&lcn_arch).params;
    let started = Instant::now();
    let (lcn_acc, first, last, _) = fit(&lcn_arch, &train_set, &test_set, &cfg);
    let seconds = started.elapsed().as_secs_f64();

    let opts = BudgetOptions::default();
    let mut baselines = Vec::new();
    let mut counts = vec![lcn_params];
    for family in [Family::Mlp, Family::Kan] {
        let c = match_params(family, 784, 10, lcn_params, &opts).unwrap();
        let (acc, _, _, _) = fit(&c.arch, &train_set, &test_set, &cfg);
        counts.push(c.params);
        baselines.push((family, c.params, acc));
    }
    let kan_acc = baselines[1].2;
    let ordering = if lcn_acc > kan_acc { "LCN > KAN" } else { "LCN <= KAN" };
    let pass = lcn_acc >= MNIST_ACC
        && lcn_params <= MNIST_MAX_PARAMS
        && seconds < MNIST_BUDGET_S
        && last < first
        && param_spread(&counts) < MATCH_SPREAD;
    let others: Vec<String> = baselines
        .iter()
        .map(|(f, p, a)| format!("{f}({p}) {a:.4}"))
        .collect();
    (
        pass,
        format!(
            "10k subset, {MNIST_EPOCHS} epochs: LCN({lcn_params}) acc {lcn_acc:.4} in {seconds:.1}s; {}; {ordering}",
            others.join(", ")
        ),
    )
}

fn cost_accounting() -> Outcome {
    // hand counts: affine 2*M*Mprev + M, relu M, cubic spline 26 per neuron
    let fixtures = [
        (ArchSpec::new(4, vec![LayerSpec::mlp(3, Activation::Relu)], 2), 23, 27 + 3 + 14),
        (ArchSpec::new(4, vec![LayerSpec::lcn(3, 8, 3)], 2), 47, 27 + 3 * 26 + 14),
        (ArchSpec::new(4, vec![], 2), 10, 18),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (arch, params, flops) in &fixtures {
        let r = cost_report(arch);
        let net = init_network(arch, 0).unwrap();
        pass &= r.params == *params && r.flops == *flops && net.num_params() == *params;
        parts.push(format!("{}/{}", r.params, r.flops));
    }
    let opts = BudgetOptions::default();
    let mut worst: f64 = 0.0;
    for (d, o, budget) in [(784, 10, 25_000), (784, 10, 12_000), (16, 2, 2_000), (4, 3, 500)] {
        match matched_configs(&Family::ALL, d, o, budget, &opts) {
            Ok(picks) => {
                let counts: Vec<usize> = picks.iter().map(|c| c.params).collect();
                worst = worst.max(param_spread(&counts));
            }
            Err(_) => pass = false,
        }
    }
    pass &= worst < MATCH_SPREAD;
    (
        pass,
        format!("fixtures params/flops {}, worst matched spread {:.3}%", parts.join(" "), worst * 100.0),
    )
}

fn checkpoint_bytes(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    write_network(&mut out, net).unwrap();
    out
}

fn determinism_and_persistence() -> Outcome {
    let mut failures = Vec::new();
    let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F4, 400), 9).unwrap();
    let arch = ArchSpec::new(
        2,
        vec![LayerSpec::lcn(5, 8, 3), LayerSpec::kan(3, 6, 2), LayerSpec::mlp(4, Activation::Tanh)],
        1,
    );
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 16,
        learning_rate: 1e-2,
        seed: 9,
        ..TrainConfig::default()
    };
    let run = || {
        let mut net = init_network(&arch, 9).unwrap();
        train(&mut net, &ds, None, &cfg).unwrap();
        checkpoint_bytes(&net)
    };
    let first = run();
    if run() != first {
        failures.push("same seed gave different checkpoints");
    }
    let loaded = read_network(&first[..]).unwrap();
    if checkpoint_bytes(&loaded) != first {
        failures.push("checkpoint round trip changed bytes");
    }
    let original = read_network(&first[..]).unwrap();
    let bits = |n: &Network| -> Vec<u64> {
        n.param_segments().iter().flat_map(|s| s.iter().map(|v| v.to_bits())).collect()
    };
    if bits(&loaded) != bits(&original) {
        failures.push("checkpoint round trip changed parameters");
    }

    let dir = tempfile::tempdir().unwrap();
    let images = [0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 64, 1, 2, 3, 4];
    let labels = [0, 0, 8, 1, 0, 0, 0, 2, 7, 3];
    std::fs::write(dir.path().join("img"), images).unwrap();
    std::fs::write(dir.path().join("lbl"), labels).unwrap();
    let idx = load_idx(dir.path().join("img"), dir.path().join("lbl")).unwrap();
    let expected = [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0, 1.0 / 255.0, 2.0 / 255.0, 3.0 / 255.0, 4.0 / 255.0];
    if idx.features.data() != expected {
        failures.push("IDX pixels");
    }
    if !matches!(&idx.targets, Targets::Classes { labels, .. } if labels == &[7, 3]) {
        failures.push("IDX labels");
    }

    std::fs::write(dir.path().join("t.csv"), "a,color,label\n1.5,red,yes\n-2,blue,no\n").unwrap();
    std::fs::write(
        dir.path().join("t.toml"),
        "[columns]\na = \"numeric\"\ncolor = \"categorical\"\nlabel = \"target\"\n",
    )
    .unwrap();
    let csv = load_csv(dir.path().join("t.csv"), dir.path().join("t.toml")).unwrap();
    if csv.features != Matrix::new(2, 3, vec![1.5, 0.0, 1.0, -2.0, 1.0, 0.0]).unwrap() {
        failures.push("CSV features");
    }
    if !matches!(&csv.targets, Targets::Classes { labels, .. } if labels == &[1, 0]) {
        failures.push("CSV labels");
    }
    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("bit-identical reruns and round trip ({} checkpoint bytes), IDX and CSV fixtures exact", first.len())
        } else {
            failures.join(", ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 spline identities", spline_identities),
        ("2 basis derivative oracle", derivative_oracle),
        ("3 gradient gate", gradient_gate),
        ("4 sparse coefficient gradients", sparsity),
        ("5 symbolic regression", symbolic_regression),
        ("6 MNIST subset", mnist_subset),
        ("7 cost accounting", cost_accounting),
        ("8 determinism and persistence", determinism_and_persistence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            });
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
