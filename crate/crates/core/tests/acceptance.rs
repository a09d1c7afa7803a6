//! Acceptance criteria, one test per criterion. Each test prints a single
//! `ACCEPTANCE <id> <name>: PASS|FAIL (<detail>)` line and then asserts.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothkm::data::zscore_normalize;
use smoothkm::datagen::{case_study, imbalanced_suite, Suite};
use smoothkm::engine::{
    alpha_scan, auto_alpha, descent_bound, descent_check, ekm_step, fkm_step, kmeanspp_init, lloyd_step,
    mefc_step, relative_shift, run, skm_step, SkmConfig,
};
use smoothkm::metrics::{acc, ari, nmi};
use smoothkm::minibatch::{stream_run, StreamMode};
use smoothkm::objectives::{evaluate_objective, landscape_scan_1d, linear_grid, objective_gradient};
use smoothkm::smoothmin::influence;
use smoothkm::{CentroidSet, DataMatrix, SmootherSpec};

fn report(id: u32, name: &str, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {id:02} {name}: {verdict} ({})", detail.as_ref());
    assert!(pass, "criterion {id} ({name}) failed: {}", detail.as_ref());
}

fn all_specs(param: f64) -> [SmootherSpec; 4] {
    [
        SmootherSpec::hard(),
        SmootherSpec::log_sum_exp(param).unwrap(),
        SmootherSpec::p_norm(param).unwrap(),
        SmootherSpec::boltzmann(param).unwrap(),
    ]
}

fn normalized(x: &DataMatrix) -> DataMatrix {
    zscore_normalize(x).unwrap().0
}

#[test]
fn criterion_01_landscape_boltzmann_finds_minority() {
    let start = Instant::now();
    let (x, _) = case_study(3).unwrap();
    let grid = linear_grid(-10.0, 10.0, 0.01).unwrap();
    let specs = all_specs(1.0);
    let curve = landscape_scan_1d(&x, &[-5.0], 1, &grid, &specs).unwrap();
    let arg = curve.argmins();
    let gap = |a: f64| (a - 5.0).abs();
    let boltz = gap(arg[3]);
    let closer = arg[..3].iter().all(|&a| boltz < gap(a));
    let elapsed = start.elapsed();
    // informational: the same comparison on a 1e-5 grid around the hard argmin
    let fine: Vec<f64> = (0..=2000).map(|i| arg[0] - 0.01 + i as f64 * 1e-5).collect();
    let refined = landscape_scan_1d(&x, &[-5.0], 1, &fine, &[specs[0], specs[3]]).unwrap().argmins();
    report(
        1,
        "landscape",
        boltz <= 0.5 && closer && elapsed < Duration::from_secs(30),
        format!(
            "argmins hard={:.2} lse={:.2} pnorm={:.2} boltz={:.2}; |boltz-5|={boltz:.3} <= 0.5; \
             boltz strictly closer than all others: {closer}; {elapsed:.2?} < 30s; \
             1e-5 grid: hard={:.5} boltz={:.5}",
            arg[0], arg[1], arg[2], arg[3], refined[0], refined[1]
        ),
    );
}

#[test]
fn criterion_02_repulsion_sign() {
    let d = [0.0, 2.0];
    let [hard, lse, pnorm, boltz] = all_specs(1.0);
    let wb = influence(boltz, &d).unwrap();
    let others_nonneg = [hard, lse, pnorm]
        .iter()
        .all(|&s| influence(s, &d).unwrap()[1] >= 0.0);
    let sum: f64 = wb.iter().sum();
    report(
        2,
        "repulsion sign",
        wb[1] < 0.0 && others_nonneg && (sum - 1.0).abs() <= 1e-9,
        format!("boltzmann influence {wb:?}, sum {sum}"),
    );
}

#[test]
fn criterion_03_imbalance_gap_on_suite_a() {
    let start = Instant::now();
    let seeds = 10u64;
    let (mut hkm_nmi, mut ekm_nmi, mut ekm_acc) = (0.0, 0.0, 0.0);
    for seed in 0..seeds {
        let (x, labels) = imbalanced_suite(Suite::A, seed).unwrap();
        let x = normalized(&x);
        let hard = run(&x, 3, &SkmConfig::new(SmootherSpec::hard()).with_restarts(20).with_seed(seed)).unwrap();
        let ekm_cfg = SkmConfig::new(SmootherSpec::boltzmann(1.0).unwrap())
            .with_restarts(20)
            .with_seed(seed);
        let ekm = run(&x, 3, &ekm_cfg).unwrap();
        hkm_nmi += nmi(&labels, &hard.labels).unwrap() / seeds as f64;
        ekm_nmi += nmi(&labels, &ekm.labels).unwrap() / seeds as f64;
        ekm_acc += acc(&labels, &ekm.labels).unwrap() / seeds as f64;
    }
    let elapsed = start.elapsed();
    report(
        3,
        "imbalance gap",
        ekm_nmi - hkm_nmi >= 0.2 && ekm_acc >= 0.9 && elapsed < Duration::from_secs(120),
        format!(
            "EKM NMI {ekm_nmi:.4} - HKM NMI {hkm_nmi:.4} = {:.4} >= 0.2; EKM ACC {ekm_acc:.4} >= 0.9; {elapsed:.2?} < 120s",
            ekm_nmi - hkm_nmi
        ),
    );
}

#[test]
fn criterion_04_alpha_scan_shape() {
    let (x, labels) = imbalanced_suite(Suite::A, 1).unwrap();
    let x = normalized(&x);
    let base = SkmConfig::new(SmootherSpec::hard()).with_restarts(20).with_seed(1);
    let hard = nmi(&labels, &run(&x, 3, &base).unwrap().labels).unwrap();
    let alphas = [10.0, 8.0, 5.0, 2.0, 1.0, 0.8, 0.5, 0.2, 0.1];
    let rows = alpha_scan(&x, 3, &alphas, &base, Some(&labels)).unwrap();
    let score = |i: usize| rows[i].nmi.unwrap();
    let aligned = (score(0) - hard).abs() <= 0.05 && (score(1) - hard).abs() <= 0.05;
    let best = (0..rows.len()).map(score).fold(f64::NEG_INFINITY, f64::max);
    let aligned_value = score(0).max(score(1));
    report(
        4,
        "alpha scan shape",
        aligned && best - aligned_value >= 0.2,
        format!(
            "HKM NMI {hard:.4}; NMI@10 {:.4}, NMI@8 {:.4} (within 0.05); max {best:.4} exceeds {aligned_value:.4} by {:.4} >= 0.2",
            score(0),
            score(1),
            best - aligned_value
        ),
    );
}

/// Instance with all point-centroid half squared distances above 1e-3.
fn random_instance(rng: &mut ChaCha8Rng) -> (DataMatrix, CentroidSet) {
    loop {
        let n = rng.gen_range(1..=20);
        let p = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=4);
        let x: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let c: Vec<f64> = (0..k * p).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x = DataMatrix::new(n, p, x).unwrap();
        let c = CentroidSet::new(k, p, c).unwrap();
        let d = smoothkm::data::squared_distances(&x, &c).unwrap();
        if d.to_rows().iter().flatten().all(|&v| v > 1e-3) {
            return (x, c);
        }
    }
}

#[test]
fn criterion_05_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, c) = random_instance(&mut rng);
        for spec in all_specs(1.0) {
            let g: Vec<f64> = objective_gradient(&x, &c, spec).unwrap().concat();
            let mut fd = Vec::with_capacity(g.len());
            for i in 0..c.as_slice().len() {
                let shifted = |delta: f64| {
                    let mut v = c.as_slice().to_vec();
                    v[i] += delta;
                    let cc = CentroidSet::new(c.n_clusters(), c.n_cols(), v).unwrap();
                    evaluate_objective(&x, &cc, spec).unwrap().value
                };
                fd.push((shifted(h) - shifted(-h)) / (2.0 * h));
            }
            let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(fd.iter().map(|v| v * v).sum::<f64>().sqrt());
            let rel = if scale > 0.0 { diff / scale } else { diff };
            worst = worst.max(rel);
        }
    }
    report(
        5,
        "gradient check",
        worst < 1e-6,
        format!("worst relative error {worst:.3e} < 1e-6 over 50 instances x 4 specs"),
    );
}

#[test]
fn criterion_06_equivalences_and_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut mefc_err, mut ekm_err, mut fkm_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let (x, c0) = random_instance(&mut rng);
        let lambda = rng.gen_range(0.2..3.0);
        let alpha = rng.gen_range(0.2..3.0);
        let m = rng.gen_range(1.2..4.0);
        let (mut a, mut b) = (c0.clone(), c0.clone());
        let (mut e1, mut e2) = (c0.clone(), c0.clone());
        let (mut f1, mut f2) = (c0.clone(), c0);
        for _ in 0..10 {
            a = mefc_step(&x, &a, lambda).unwrap();
            b = skm_step(&x, &b, SmootherSpec::log_sum_exp(lambda).unwrap()).unwrap().centroids;
            mefc_err = mefc_err.max(a.max_abs_diff(&b));
            e1 = ekm_step(&x, &e1, alpha).unwrap();
            e2 = skm_step(&x, &e2, SmootherSpec::boltzmann(alpha).unwrap()).unwrap().centroids;
            ekm_err = ekm_err.max(e1.max_abs_diff(&e2));
            // FKM with fuzzifier m is the p-Norm smoother with p = 1/(m-1)
            f1 = fkm_step(&x, &f1, m).unwrap();
            f2 = skm_step(&x, &f2, SmootherSpec::p_norm(1.0 / (m - 1.0)).unwrap()).unwrap().centroids;
            fkm_err = fkm_err.max(f1.max_abs_diff(&f2));
        }
    }
    // well separated: two tight groups with centroids near each
    let x = DataMatrix::from_rows(&[vec![0.0, 0.1], vec![0.2, -0.1], vec![10.0, 10.0], vec![10.3, 9.8]]).unwrap();
    let c = CentroidSet::from_rows(&[vec![0.5, 0.5], vec![9.5, 9.5]]).unwrap();
    let lloyd = lloyd_step(&x, &c).unwrap();
    let limit_err = all_specs(1e3)[1..]
        .iter()
        .map(|&s| skm_step(&x, &c, s).unwrap().centroids.max_abs_diff(&lloyd))
        .fold(0.0, f64::max);
    report(
        6,
        "equivalence and limits",
        mefc_err <= 1e-12 && ekm_err <= 1e-12 && fkm_err <= 1e-12 && limit_err <= 1e-6,
        format!(
            "MEFC {mefc_err:.1e}, EKM {ekm_err:.1e}, FKM {fkm_err:.1e} (<= 1e-12); param 1e3 vs Lloyd {limit_err:.1e} (<= 1e-6)"
        ),
    );
}

fn datagen_corpus() -> Vec<(String, DataMatrix, usize)> {
    let mut out: Vec<(String, DataMatrix, usize)> = Suite::ALL
        .iter()
        .map(|&s| (format!("suite {s}"), normalized(&imbalanced_suite(s, 1).unwrap().0), s.n_classes()))
        .collect();
    for id in 1..=4 {
        out.push((format!("case {id}"), normalized(&case_study(id).unwrap().0), 2));
    }
    out
}

#[test]
fn criterion_07_concave_descent_and_bound() {
    let mut failures = Vec::new();
    let mut worst_slack = f64::INFINITY;
    let mut steps = 0usize;
    for (name, x, k) in datagen_corpus() {
        for spec in [SmootherSpec::log_sum_exp(1.0).unwrap(), SmootherSpec::p_norm(1.0).unwrap()] {
            let mut c = kmeanspp_init(&x, k, 7).unwrap();
            let mut trace = vec![evaluate_objective(&x, &c, spec).unwrap().value];
            for _ in 0..500 {
                let (b, next) = descent_bound(&x, &c, spec).unwrap();
                steps += 1;
                worst_slack = worst_slack.min(b.decrease - b.bound);
                if b.decrease < b.bound - 1e-7 {
                    failures.push(format!("{name}/{spec}: decrease {} < bound {}", b.decrease, b.bound));
                }
                trace.push(b.after);
                let shift = relative_shift(&c, &next);
                c = next;
                if shift <= 1e-3 {
                    break;
                }
            }
            let r = descent_check(&trace, spec).unwrap();
            if !r.passed {
                failures.push(format!("{name}/{spec}: increases {:?}", r.increases));
            }
        }
    }
    report(
        7,
        "concave descent",
        failures.is_empty(),
        format!("{steps} steps, min(decrease - bound) = {worst_slack:.3e} >= -1e-7; {failures:?}"),
    );
}

#[test]
fn criterion_08_ekm_convergence_protocol() {
    let mut iterations = Vec::new();
    let mut failures = Vec::new();
    for (name, x, k) in datagen_corpus() {
        let alpha = auto_alpha(&x).unwrap();
        let cfg = SkmConfig::new(SmootherSpec::boltzmann(alpha).unwrap())
            .with_restarts(10)
            .with_seed(8)
            .with_tol(1e-3)
            .with_max_iter(500);
        let r = run(&x, k, &cfg).unwrap();
        if !r.converged {
            failures.push(name.clone());
        }
        iterations.push(r.iterations);
    }
    let mut sorted = iterations.clone();
    sorted.sort_unstable();
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    };
    report(
        8,
        "EKM convergence",
        failures.is_empty() && median <= 100.0,
        format!("iterations {iterations:?}, median {median} <= 100; not converged: {failures:?}"),
    );
}

fn brute_nmi(r: &[usize], p: &[usize]) -> f64 {
    let n = r.len() as f64;
    let classes: std::collections::BTreeSet<usize> = r.iter().copied().collect();
    let clusters: std::collections::BTreeSet<usize> = p.iter().copied().collect();
    let count = |f: &dyn Fn(usize) -> bool| (0..r.len()).filter(|&i| f(i)).count() as f64;
    let h = |set: &std::collections::BTreeSet<usize>, v: &[usize]| -> f64 {
        set.iter()
            .map(|&a| {
                let q = count(&|i| v[i] == a) / n;
                -q * q.ln()
            })
            .sum()
    };
    let (hr, hp) = (h(&classes, r), h(&clusters, p));
    if hr == 0.0 && hp == 0.0 {
        return 1.0;
    }
    if hr == 0.0 || hp == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for &a in &classes {
        for &b in &clusters {
            let joint = count(&|i| r[i] == a && p[i] == b) / n;
            if joint > 0.0 {
                let pa = count(&|i| r[i] == a) / n;
                let pb = count(&|i| p[i] == b) / n;
                mi += joint * (joint / (pa * pb)).ln();
            }
        }
    }
    mi / (0.5 * (hr + hp))
}

fn brute_ari(r: &[usize], p: &[usize]) -> f64 {
    let n = r.len();
    let (mut both, mut same_r, mut same_p) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let a = r[i] == r[j];
            let b = p[i] == p[j];
            both += (a && b) as u8 as f64;
            same_r += a as u8 as f64;
            same_p += b as u8 as f64;
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let expected = same_r * same_p / total;
    let max = 0.5 * (same_r + same_p);
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in permutations(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Labels are in 0..4; every cluster-to-class bijection of 0..4 is tried.
fn brute_acc(r: &[usize], p: &[usize]) -> f64 {
    permutations((0..4).collect())
        .iter()
        .map(|perm| r.iter().zip(p).filter(|(&a, &b)| perm[b] == a).count())
        .max()
        .unwrap() as f64
        / r.len() as f64
}

#[test]
fn criterion_09_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut invariant = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..=40);
        let kr = rng.gen_range(1..=4);
        let kp = rng.gen_range(1..=4);
        let r: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kr)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kp)).collect();
        let (a, b, c) = (nmi(&r, &p).unwrap(), ari(&r, &p).unwrap(), acc(&r, &p).unwrap());
        worst = worst
            .max((a - brute_nmi(&r, &p)).abs())
            .max((b - brute_ari(&r, &p)).abs())
            .max((c - brute_acc(&r, &p)).abs());
        // relabel predicted clusters by a random permutation of 0..4
        let perms = permutations((0..4).collect());
        let perm = &perms[rng.gen_range(0..perms.len())];
        let q: Vec<usize> = p.iter().map(|&l| perm[l] + 10).collect();
        invariant &= nmi(&r, &q).unwrap() == a && ari(&r, &q).unwrap() == b && acc(&r, &q).unwrap() == c;
    }
    report(
        9,
        "metric oracles",
        worst <= 1e-9 && invariant,
        format!("max |fast - brute| = {worst:.2e} <= 1e-9; permutation invariant: {invariant}"),
    );
}

#[test]
fn criterion_10_streaming_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rows = Vec::new();
    for center in [0.0, 10.0] {
        for _ in 0..200 {
            rows.push(vec![center + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        }
    }
    let x = DataMatrix::from_rows(&rows).unwrap();
    let alpha = 1.0;
    let cfg = SkmConfig::new(SmootherSpec::boltzmann(alpha).unwrap()).with_restarts(5).with_seed(3);
    let batch = run(&x, 2, &cfg).unwrap();
    let c0 = kmeanspp_init(&x, 2, 3).unwrap();
    let (state, _) = stream_run(&x, c0, StreamMode::Ekm { alpha }, 5, 3, true).unwrap();
    // match streamed centroids to batch centroids by nearest
    let gap = state
        .centroids
        .rows()
        .map(|s| {
            batch
                .centroids
                .rows()
                .map(|b| s.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let distinct = state.centroids.min_pairwise_distance() > 5.0;

    // one cluster: c_n = (c_0 + Σ x_i) / (n + 1)
    let values: Vec<f64> = (0..500).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let single = DataMatrix::from_column(&values).unwrap();
    let c0 = 3.0;
    let expected = (c0 + values.iter().sum::<f64>()) / (values.len() as f64 + 1.0);
    let mut mean_err: f64 = 0.0;
    for mode in [StreamMode::Hkm, StreamMode::Ekm { alpha: 0.7 }] {
        let (s, _) = stream_run(&single, CentroidSet::from_column(&[c0]).unwrap(), mode, 1, 0, false).unwrap();
        mean_err = mean_err.max((s.centroids.as_slice()[0] - expected).abs());
    }
    report(
        10,
        "streaming consistency",
        gap <= 0.5 && distinct && mean_err <= 1e-9,
        format!("stream vs batch centroid gap {gap:.4} <= 0.5; running-mean error {mean_err:.2e} <= 1e-9"),
    );
}
