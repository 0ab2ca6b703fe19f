//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the output.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use survey_ml::classifiers::{
    knn_fit, nb_fit, rf_fit, svm_fit, Algorithm, BayesParams, ForestParams, KnnParams, Metric, SvmParams,
};
use survey_ml::config::{PipelineConfig, SynthInput, Task};
use survey_ml::data_model::{
    AnemiaInput, Cell, ColumnMeta, ColumnTag, EncodedMatrix, Label, LabelRule, LabelVector, Matrix, Role, Schema,
    VariableSpec,
};
use survey_ml::feature_select::{jacobi_eigen, pca_fit, rfe_rank, rfe_select, RankerConfig};
use survey_ml::fixtures::{ReductionProfile, ANEMIA_REDUCTION, MALARIA_REDUCTION};
use survey_ml::ingest::{encode, ReductionStage};
use survey_ml::labeling::{anemia_level, binarize_anemia, AnemiaLevel};
use survey_ml::pipeline::{run_on_table, run_pipeline};
use survey_ml::synthgen::{generate, planted_schema, SignalSpec};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

// A1 -------------------------------------------------------------------------

fn a1_svm_oracle() -> Check {
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let instances = 60u64;
    for seed in 0..instances {
        let n = 4 + (seed % 9) as usize;
        let d = 1 + (seed % 3) as usize;
        let c = if seed % 2 == 0 { 1.0 } else { 10.0 };
        let (x, y) = common::svm_instance(1000 + seed, n, d);
        let labels = LabelVector::from_signs(&y.iter().map(|&v| v as i8).collect::<Vec<_>>());
        let model = svm_fit(&x, &labels, &SvmParams { c, ..SvmParams::default() }).map_err(|e| e.to_string())?;
        let (oracle, _) = common::svm_qp_oracle(&x, &y, c);
        let got = common::primal(&model.w, model.b, c, &x, &y);
        ensure(got >= oracle * (1.0 - 1e-9) - 1e-12, || {
            format!("seed {seed}: SMO objective {got} below oracle {oracle}")
        })?;
        let rel = (got - oracle).abs() / oracle.abs().max(1e-12);
        let kkt = common::kkt_violation(&model.w, model.b, &model.alpha, c, &x, &y);
        worst_rel = worst_rel.max(rel);
        worst_kkt = worst_kkt.max(kkt);
        ensure(rel <= 1e-3, || format!("seed {seed} (n={n}, d={d}, C={c}): relative gap {rel:.3e}"))?;
        ensure(kkt <= 1e-3, || format!("seed {seed} (n={n}, d={d}, C={c}): KKT violation {kkt:.3e}"))?;
    }
    within(Duration::from_secs(10), start.elapsed())?;
    Ok(format!(
        "{instances} instances, max relative gap {worst_rel:.2e}, max KKT violation {worst_kkt:.2e}"
    ))
}

// A2 -------------------------------------------------------------------------

fn planted_config(rows: usize, columns: usize, informative: usize, seed: u64) -> PipelineConfig {
    let mut c = PipelineConfig {
        task: Some(Task::Custom),
        seed: Some(seed),
        ..PipelineConfig::default()
    };
    c.input.synth = Some(SynthInput {
        rows,
        columns: Some(columns),
        signal: SignalSpec::new((1..=informative).map(|j| (format!("x{j}"), 1.0))).with_noise(0.05),
    });
    c.select.rfe.keep = Some(informative);
    c
}

fn a2_planted_benchmark() -> Check {
    let start = Instant::now();
    let config = planted_config(600, 20, 3, 7);
    let first = run_pipeline(&config).map_err(|e| e.to_string())?;
    let second = run_pipeline(&config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(first.to_json() == second.to_json(), || "reports differ between reruns".into())?;
    for e in &first.algorithms {
        ensure(e.accuracy.is_some(), || format!("{} failed: {:?}", e.display_name, e.error))?;
    }
    ensure(first.algorithms.len() == 4, || "not all four algorithms ran".into())?;
    let svm = first.entry(Algorithm::Svm).and_then(|e| e.accuracy).unwrap_or(0.0);
    ensure(svm >= 0.90, || format!("SVM accuracy {svm:.4} < 0.90"))?;
    within(Duration::from_secs(30), took)?;
    let all: Vec<String> = first
        .algorithms
        .iter()
        .map(|e| format!("{} {}", e.name.key(), e.accuracy_percent.as_deref().unwrap_or("-")))
        .collect();
    Ok(format!("SVM accuracy {svm:.4}; {}; deterministic; two runs in {took:.2?}", all.join(", ")))
}

// A3 -------------------------------------------------------------------------

fn sorted_eigs(m: &Matrix) -> Result<Vec<f64>, String> {
    let mut v = jacobi_eigen(m, 1e-12, 100).map_err(|e| e.to_string())?.values;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn a3_pca_oracle() -> Check {
    let range = -2i64..=2;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for a in range.clone() {
        for b in range.clone() {
            for c in range.clone() {
                let m = Matrix::from_rows(&[vec![a as f64, b as f64], vec![b as f64, c as f64]]).unwrap();
                let got = sorted_eigs(&m)?;
                let want = common::eig2(a, b, c);
                for (g, w) in got.iter().zip(want) {
                    worst = worst.max((g - w).abs());
                }
                count += 1;
            }
        }
    }
    for code in 0..5i64.pow(6) {
        let mut e = [0i64; 6];
        let mut rest = code;
        for v in &mut e {
            *v = rest % 5 - 2;
            rest /= 5;
        }
        let im = [[e[0], e[1], e[2]], [e[1], e[3], e[4]], [e[2], e[4], e[5]]];
        let m = Matrix::from_rows(&im.map(|r| r.map(|v| v as f64).to_vec())).unwrap();
        let got = sorted_eigs(&m)?;
        let want = common::eig3(im);
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
        count += 1;
    }
    ensure(worst <= 1e-8, || format!("eigenvalue error {worst:.3e} over {count} matrices"))?;

    let mut rng = common::rng(33);
    let mut worst_orth: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let n = rng.random_range(d + 2..40);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|j| rng.random_range(-1.0..1.0) * (j + 1) as f64).collect())
            .collect();
        let model = pca_fit(&EncodedMatrix::from_numeric(Matrix::from_rows(&rows).unwrap())).map_err(|e| e.to_string())?;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = model.components.row(i).iter().zip(model.components.row(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((dot - target).abs());
            }
        }
        worst_sum = worst_sum.max((model.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst_orth <= 1e-8, || format!("orthonormality error {worst_orth:.3e}"))?;
    ensure(worst_sum <= 1e-9, || format!("ratio sum error {worst_sum:.3e}"))?;
    Ok(format!(
        "{count} integer matrices, max eigenvalue error {worst:.2e}; 100 draws: orthonormality {worst_orth:.2e}, ratio sum {worst_sum:.2e}"
    ))
}

// A4 -------------------------------------------------------------------------

fn level_meta(source: &str, levels: &[&str]) -> Vec<ColumnMeta> {
    levels
        .iter()
        .map(|l| ColumnMeta {
            source: source.into(),
            tag: ColumnTag::Level {
                level: l.to_string(),
                level_count: levels.len(),
            },
        })
        .collect()
}

fn a4_nb_exactness() -> Check {
    // +1 has level A in 3 of 4 rows, -1 in 1 of 4: with Laplace α = 1,
    // P(A|+1) = 4/6, P(A|-1) = 2/6, so P(+1|A) = 2/3.
    let a = vec![1.0, 0.0];
    let b = vec![0.0, 1.0];
    let x = Matrix::from_rows(&[a.clone(), a.clone(), a.clone(), b.clone(), a, b.clone(), b.clone(), b]).unwrap();
    let y = LabelVector::from_signs(&[1, 1, 1, 1, -1, -1, -1, -1]);
    let m = nb_fit(&x, &y, &level_meta("f", &["A", "B"]), &BayesParams::default()).map_err(|e| e.to_string())?;
    let p = m.predict_proba(&[1.0, 0.0]).map_err(|e| e.to_string())?;
    ensure((p - 2.0 / 3.0).abs() <= 1e-12, || format!("P(+1|A) = {p}"))?;

    // Mixed model: two numeric columns and a three-level group.
    let mut rng = common::rng(4);
    let n = 200;
    let mut rows = Vec::new();
    let mut signs = Vec::new();
    for i in 0..n {
        let s = if i % 3 == 0 { 1i8 } else { -1 };
        let lvl = rng.random_range(0..3);
        let mut r = vec![rng.random_range(-2.0..2.0) + s as f64, rng.random_range(0.0..5.0), 0.0, 0.0, 0.0];
        r[2 + lvl] = 1.0;
        rows.push(r);
        signs.push(s);
    }
    let mut meta = vec![
        ColumnMeta {
            source: "u".into(),
            tag: ColumnTag::Numeric { standardization: None },
        },
        ColumnMeta {
            source: "v".into(),
            tag: ColumnTag::Numeric { standardization: None },
        },
    ];
    meta.extend(level_meta("g", &["a", "b", "c"]));
    let model = nb_fit(&Matrix::from_rows(&rows).unwrap(), &LabelVector::from_signs(&signs), &meta, &BayesParams::default())
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut q = vec![rng.random_range(-6.0..6.0), rng.random_range(-3.0..8.0), 0.0, 0.0, 0.0];
        q[2 + rng.random_range(0..3)] = 1.0;
        let [lp, ln] = model.log_joint(&q).map_err(|e| e.to_string())?;
        let pos = model.predict_proba(&q).map_err(|e| e.to_string())?;
        let neg = 1.0 / (1.0 + (lp - ln).exp());
        worst = worst.max((pos + neg - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("posterior sum off by {worst:.3e}"))?;
    Ok(format!("P(+1|A) = {p:.15}; 1000 posteriors normalize within {worst:.1e}"))
}

// A5 -------------------------------------------------------------------------

fn a5_label_thresholds() -> Check {
    use AnemiaLevel::*;
    let table = [
        (69, Severe, Label::Positive),
        (70, Moderate, Label::Positive),
        (99, Moderate, Label::Positive),
        (100, Mild, Label::Positive),
        (109, Mild, Label::Positive),
        (110, NotAnemic, Label::Negative),
    ];
    for (tenths, level, label) in table {
        let got = anemia_level(tenths).map_err(|e| e.to_string())?;
        ensure(got == level, || format!("{tenths} tenths → {got:?}, want {level:?}"))?;
        ensure(binarize_anemia(got) == label, || format!("{tenths} tenths → wrong class"))?;
    }
    Ok("69, 70, 99, 100, 109, 110 tenths map to Severe, Moderate, Moderate, Mild, Mild, Not anemic".into())
}

// A6 -------------------------------------------------------------------------

fn a6_rfe_recovery() -> Check {
    let start = Instant::now();
    let schema = planted_schema(20);
    let spec = SignalSpec::new([("x1", 1.0), ("x2", 1.0), ("x3", 1.0)]).with_noise(0.05);
    let mut hits = 0;
    let mut oracle_confirms = 0;
    for seed in 1..=20u64 {
        let (table, y) = generate(&schema, 400, &spec, seed).map_err(|e| e.to_string())?;
        let x = encode(&table, false).map_err(|e| e.to_string())?;
        let ranking = rfe_rank(&x, &y, &RankerConfig::default()).map_err(|e| e.to_string())?;
        let top = rfe_select(&ranking, 3).map_err(|e| e.to_string())?;
        if top.iter().filter(|&&j| j < 3).count() >= 2 {
            hits += 1;
        }
        // Oracle: the planted columns are the three best single-column classifiers.
        let mut acc: Vec<(f64, usize)> = (0..20)
            .map(|j| (common::stump_accuracy(&x.values.column(j), &y.labels), j))
            .collect();
        acc.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best3: Vec<usize> = acc[..3].iter().map(|a| a.1).collect();
        best3.sort_unstable();
        if best3 == [0, 1, 2] {
            oracle_confirms += 1;
        }
    }
    let took = start.elapsed();
    ensure(hits >= 18, || format!("only {hits}/20 runs kept ≥2 informative columns"))?;
    ensure(oracle_confirms == 20, || {
        format!("stump oracle confirmed the planted columns in only {oracle_confirms}/20 runs")
    })?;
    within(Duration::from_secs(60), took)?;
    Ok(format!(
        "{hits}/20 runs kept ≥2 informative columns; stump oracle confirmed planted columns in {oracle_confirms}/20; {took:.2?}"
    ))
}

// A7 -------------------------------------------------------------------------

fn a7_brute_force() -> Check {
    let mut rng = common::rng(77);
    let mut checked = 0;
    for (round, integer_grid) in [(0, false), (1, true)] {
        let n = 120;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..4)
                    .map(|_| {
                        if integer_grid {
                            rng.random_range(-3..=3) as f64
                        } else {
                            rng.random_range(-1.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let signs: Vec<i8> = rows.iter().map(|r| if r[0] + r[1] * 0.5 > 0.0 { 1 } else { -1 }).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = LabelVector::from_signs(&signs);
        let model = knn_fit(&x, &y, &KnnParams { k: 7, metric: Metric::Euclidean }).map_err(|e| e.to_string())?;
        for q in 0..100 {
            let query: Vec<f64> = (0..4)
                .map(|_| {
                    if integer_grid {
                        rng.random_range(-3..=3) as f64
                    } else {
                        rng.random_range(-1.5..1.5)
                    }
                })
                .collect();
            let got = model.predict(&query).map_err(|e| e.to_string())?;
            let want = common::knn_oracle(&x, &y.labels, 7, &query);
            ensure(got == want, || format!("KNN round {round} query {q}: {got:?} vs oracle {want:?}"))?;
            checked += 1;
        }
    }

    let schema = planted_schema(6);
    let spec = SignalSpec::new([("x1", 1.0), ("x2", -0.5)]).with_noise(0.05);
    let (table, y) = generate(&schema, 400, &spec, 7).map_err(|e| e.to_string())?;
    let x = encode(&table, false).map_err(|e| e.to_string())?;
    let forest = rf_fit(
        &x.values,
        &y,
        &ForestParams {
            n_trees: 50,
            seed: 7,
            ..ForestParams::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let mut rows = 0;
    for r in x.values.iter_rows() {
        let got = forest.predict_proba(r).map_err(|e| e.to_string())?;
        let want = common::forest_walk(&forest, r);
        ensure(got == want, || format!("forest posterior {got} vs tree walk {want}"))?;
        rows += 1;
    }
    Ok(format!("{checked} KNN queries match full sort; {rows} forest posteriors match tree walk exactly"))
}

// A8 -------------------------------------------------------------------------

/// 986 candidate variables: 900 marked unimportant, 40 mostly missing, and
/// 46 usable columns of which `copies` are exact linear copies of others.
fn reduction_table(profile: &ReductionProfile, task: Task) -> Result<survey_ml::data_model::RawTable, String> {
    let ignored = 900;
    let sparse = profile.sparse_or_unimportant - ignored;
    let kept = profile.initial_variables - profile.sparse_or_unimportant;
    let copies = profile.correlation;
    let mut vars = Vec::new();
    for j in 0..profile.initial_variables {
        let name = format!("v{j:03}");
        let var = VariableSpec::numeric(name);
        vars.push(if j < ignored { var.with_role(Role::Ignored) } else { var });
    }
    let (label, rule) = match task {
        Task::Anemia => (
            VariableSpec::numeric("Hemoglobin level"),
            LabelRule::Anemia {
                input: AnemiaInput::Hemoglobin,
            },
        ),
        _ => (
            VariableSpec::categorical("Result of malaria test", ["Positive", "Negative"]),
            LabelRule::Malaria,
        ),
    };
    vars.push(label.with_role(Role::LabelSource));
    let schema = Schema::new(vars, rule);
    let first_kept = ignored + sparse;
    let mut spec = SignalSpec::new((0..3).map(|k| (format!("v{:03}", first_kept + k), 1.0))).with_noise(0.05);
    for j in ignored..first_kept {
        spec.column_missing_rates.insert(format!("v{j:03}"), 0.8);
    }
    let (mut table, _) = generate(&schema, 300, &spec, 21).map_err(|e| e.to_string())?;
    for k in 0..copies {
        let src = first_kept + 3 + k;
        let dst = first_kept + kept - copies + k;
        for row in &mut table.rows {
            let v: f64 = row[src].as_str().unwrap().parse().unwrap();
            row[dst] = Cell::Value((2.0 * v + 1.0).to_string());
        }
    }
    Ok(table)
}

fn a8_ledger() -> Check {
    let mut lines = Vec::new();
    for (task, profile) in [(Task::Anemia, ANEMIA_REDUCTION), (Task::Malaria, MALARIA_REDUCTION)] {
        let table = reduction_table(&profile, task)?;
        let mut config = PipelineConfig::reproduction(task, 3);
        config.algorithms.enabled = vec![Algorithm::Svm];
        let report = run_on_table(&config, table).map_err(|e| e.to_string())?;
        let ledger = report.ledger.ok_or("no ledger")?;
        let counts: Vec<(ReductionStage, usize)> = ledger.stages.iter().map(|s| (s.stage, s.count)).collect();
        let want = vec![
            (ReductionStage::SparseOrUnimportant, profile.sparse_or_unimportant),
            (ReductionStage::Correlation, profile.correlation),
            (ReductionStage::Rfe, profile.rfe),
            (ReductionStage::Pca, profile.pca),
        ];
        ensure(counts == want, || format!("{}: stage counts {counts:?}, want {want:?}", task.key()))?;
        ensure(ledger.encoding_expansion == 0, || "numeric schema should not expand".into())?;
        ensure(ledger.initial - ledger.total_removed() == ledger.final_count, || {
            format!("{}: identity broken {:?}", task.key(), ledger)
        })?;
        ensure(ledger.final_count == profile.final_count(), || {
            format!("{}: final {} want {}", task.key(), ledger.final_count, profile.final_count())
        })?;
        ensure(ledger.is_conserved(), || "ledger not conserved".into())?;
        ensure(report.features.len() == ledger.final_count, || "feature count differs from ledger".into())?;
        lines.push(format!(
            "{}: {} − ({} + {} + {} + {}) = {}",
            task.key(),
            ledger.initial,
            profile.sparse_or_unimportant,
            profile.correlation,
            profile.rfe,
            profile.pca,
            ledger.final_count
        ));
    }
    Ok(lines.join("; "))
}

// A9 -------------------------------------------------------------------------

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()
}

fn a9_scale() -> Check {
    let start = Instant::now();
    let config = planted_config(5000, 50, 5, 9);
    let report = run_pipeline(&config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    for e in &report.algorithms {
        ensure(e.accuracy.is_some(), || format!("{} failed: {:?}", e.display_name, e.error))?;
    }
    within(Duration::from_secs(60), took)?;
    let peak = peak_rss_kib().ok_or("cannot read peak memory from /proc/self/status")?;
    let peak_mib = peak as f64 / 1024.0;
    ensure(peak_mib < 1024.0, || format!("peak memory {peak_mib:.0} MiB"))?;
    Ok(format!("5000 × 50 pipeline in {took:.2?}, peak resident memory {peak_mib:.0} MiB"))
}

fn main() {
    let checks: [(&str, &str, fn() -> Check); 9] = [
        ("A1", "SVM oracle equivalence", a1_svm_oracle),
        ("A2", "planted end-to-end benchmark", a2_planted_benchmark),
        ("A3", "PCA eigenvalue oracle", a3_pca_oracle),
        ("A4", "Naive Bayes exactness", a4_nb_exactness),
        ("A5", "anemia label thresholds", a5_label_thresholds),
        ("A6", "RFE signal recovery", a6_rfe_recovery),
        ("A7", "KNN and forest brute-force agreement", a7_brute_force),
        ("A8", "reduction ledger arithmetic", a8_ledger),
        ("A9", "scale smoke test", a9_scale),
    ];
    let mut failed = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail} [{took:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {name}: {detail} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
