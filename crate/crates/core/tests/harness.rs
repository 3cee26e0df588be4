use rcpp::harness::{
    config_from_csv_header, run_experiment, run_suite, theory_report, ExperimentConfig,
    SuiteConfig, CSV_COLUMNS,
};
use rcpp::Error;

const SMALL: &str = r#"
name = "small"

[problem]
p = 6
n = 5
j = 4
rho = 0.05
seed = 3

[graph]
extra_edge_prob = 0.3
seed = 8

[algorithm]
lambda = 0.2
iterations = 60

[run]
record_every = 7
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL, "small").unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn trace_csv_has_the_documented_schema() {
    let result = run_experiment(&small()).unwrap();
    let header = result.csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "k,residual,grad_norm,consensus_err,tracking_err,tracking_gap,bits,s_k,wall_ms"
    );
    assert_eq!(header.split(',').collect::<Vec<_>>(), CSV_COLUMNS);
    let rows = data_rows(&result.csv);
    // k = 0, 7, …, 56 and the final iteration
    assert_eq!(rows.len(), 10);
    let ks: Vec<u64> = rows.iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ks, vec![0, 7, 14, 21, 28, 35, 42, 49, 56, 60]);
    let mut last_bits = 0u64;
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 9);
        for c in &cells[1..6] {
            let v: f64 = c.parse().unwrap();
            assert!(v.is_finite() && v >= 0.0, "{row}");
        }
        let bits: u64 = cells[6].parse().unwrap();
        assert!(bits >= last_bits);
        last_bits = bits;
        assert!(cells[7].parse::<f64>().unwrap() > 0.0);
        assert_eq!(cells[8].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn nonconvex_traces_leave_the_residual_empty() {
    let mut config = small();
    config.problem.regularizer = rcpp::problems::Regularizer::Nonconvex;
    config.run.mode = rcpp::harness::Mode::NonconvexGradnorm;
    config.validate().unwrap();
    let result = run_experiment(&config).unwrap();
    for row in data_rows(&result.csv) {
        assert_eq!(row.split(',').nth(1), Some(""));
    }
}

#[test]
fn record_every_one_gives_k_plus_one_rows() {
    let mut config = small();
    config.algorithm.iterations = 10;
    config.run.record_every = 1;
    let result = run_experiment(&config).unwrap();
    assert_eq!(data_rows(&result.csv).len(), 11);
    assert_eq!(result.records().len(), 11);
}

#[test]
fn reruns_are_byte_identical() {
    let a = run_experiment(&small()).unwrap();
    let b = run_experiment(&small()).unwrap();
    assert_eq!(a.csv, b.csv);
    assert_eq!(a.svg(), b.svg());
}

#[test]
fn traces_do_not_depend_on_the_thread_count() {
    let config = small();
    let csv_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&config).unwrap().csv)
    };
    let one = csv_with(1);
    assert_eq!(one, csv_with(4));
    assert_eq!(one, csv_with(3));
}

#[test]
fn header_regenerates_the_trace() {
    let mut config = small();
    config.compressor.x = "topk(k=2)".parse().unwrap();
    config.compressor.y = "infnorm(b=3,norm=raw)".parse().unwrap();
    config.algorithm.a0 = 2.5;
    let result = run_experiment(&config).unwrap();
    let recovered = config_from_csv_header(&result.csv).unwrap();
    assert_eq!(recovered.to_toml(), config.to_toml());
    assert_eq!(run_experiment(&recovered).unwrap().csv, result.csv);
}

#[test]
fn suite_of_one_matches_a_single_run() {
    let text = format!("name = \"one\"\n{}\n[[runs]]\nlabel = \"only\"\n", SMALL.replace("name = \"small\"", ""));
    let suite = SuiteConfig::parse(&text, "one").unwrap();
    assert_eq!(suite.runs.len(), 1);
    let result = run_suite(&suite).unwrap();
    let member = result.member("only", suite.seeds[0]).unwrap();
    let mut direct = small();
    direct.name = "one_only".into();
    let single = run_experiment(&direct).unwrap();
    assert_eq!(member.result.csv, single.csv);

    let lines: Vec<&str> = result.summary_csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 2);
    let last = single.trace.last();
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "only");
    assert_eq!(cells[1].parse::<f64>().unwrap(), last.residual.unwrap());
    assert_eq!(cells[2].parse::<u64>().unwrap(), last.cumulative_bits);
}

#[test]
fn multi_seed_summary_has_a_column_pair_per_seed() {
    let text = format!(
        "name = \"multi\"\nseeds = [4, 5, 6, 7, 8]\n{}\n[[runs]]\nlabel = \"qn\"\n\n[[runs]]\nlabel = \"top\"\ncompressor.x = \"topk(k=3)\"\n",
        SMALL.replace("name = \"small\"", "")
    );
    let suite = SuiteConfig::parse(&text, "multi").unwrap();
    assert_eq!(suite.members().len(), 10);
    let result = run_suite(&suite).unwrap();
    let mut lines = result.summary_csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut want = vec!["label".to_string()];
    for s in 4..=8 {
        want.push(format!("final_metric_seed{s}"));
        want.push(format!("bits_seed{s}"));
    }
    want.push("final_metric_mean".into());
    want.push("bits_mean".into());
    assert_eq!(header, want);
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), want.len());
        let metrics: Vec<f64> = (0..5).map(|i| cells[1 + 2 * i].parse().unwrap()).collect();
        let mean: f64 = cells[11].parse().unwrap();
        let expect = metrics.iter().sum::<f64>() / 5.0;
        assert!((mean - expect).abs() <= 1e-12 * expect.abs());
    }
    let names: Vec<String> = result.members.iter().map(|m| m.result.config.name.clone()).collect();
    assert!(names.contains(&"multi_top_seed6".to_string()));
}

#[test]
fn config_errors_carry_location_and_cross_field_checks() {
    let err = ExperimentConfig::parse("[problem]\np = \"many\"\n", "bad.toml").unwrap_err();
    let text = err.to_string();
    assert!(matches!(err, Error::Config { .. }));
    assert!(text.contains("bad.toml") && text.contains("line 2"), "{text}");

    let unknown = ExperimentConfig::parse("[algorithm]\nlamda = 0.1\n", "typo.toml").unwrap_err();
    assert!(unknown.to_string().contains("lamda"), "{unknown}");

    let cross = ExperimentConfig::parse(
        "[problem]\nregularizer = \"nonconvex\"\n[run]\nmode = \"convex-residual\"\n",
        "cross.toml",
    )
    .unwrap_err();
    assert!(cross.to_string().contains("convex"), "{cross}");

    let lengths = ExperimentConfig::parse("[algorithm]\nlambda = [0.1, 0.2]\n", "len.toml").unwrap_err();
    assert!(lengths.to_string().contains("lambda"), "{lengths}");
}

#[test]
fn theory_report_names_missing_constants() {
    let config = ExperimentConfig::parse("[theory]\nL = 1.0\nmu = 0.01\n", "t.toml").unwrap();
    let err = theory_report(&config, "t.toml").unwrap_err().to_string();
    for name in ["theta_r", "delta", "sigma2_r", "C"] {
        assert!(err.contains(name), "{err}");
    }
    assert!(!err.contains("mu,") && !err.contains(" L,"), "{err}");
}
