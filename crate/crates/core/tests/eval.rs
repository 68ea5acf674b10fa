mod common;

use std::path::Path;

use common::*;
use mdan::data::{generate, SyntheticSpec};
use mdan::eval::*;
use mdan::nn::Matrix;
use mdan::rng::stream_rng;
use mdan::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Target of a two-domain Gaussian spec shifted along the second axis,
/// orthogonal to the class means.
fn gaussian(shift: f64, n: usize, seed: u64) -> Matrix {
    let spec = SyntheticSpec::gaussian_shift(&[vec![0.0, 0.0], vec![0.0, shift]], n, 0.1, seed);
    generate(&spec).unwrap().target.features().clone()
}

#[test]
fn pad_of_a_split_sample_is_small() {
    let mut pads = Vec::new();
    for seed in 0..5 {
        let x = gaussian(0.0, 400, seed);
        let mut idx: Vec<usize> = (0..x.rows()).collect();
        idx.shuffle(&mut stream_rng(seed, 1));
        let (a, b) = idx.split_at(200);
        pads.push(pad(&x.select_rows(a), &x.select_rows(b), &ProbeConfig { seed, ..Default::default() }).unwrap());
    }
    assert!(median(&pads).unwrap() < 0.3, "{pads:?}");
}

#[test]
fn pad_grows_with_shift() {
    let probe = ProbeConfig::default();
    let base = gaussian(0.0, 200, 1);
    let values: Vec<f64> = [0.0, 0.1, 1.0, 10.0]
        .iter()
        .map(|s| pad(&base, &gaussian(*s, 200, 2), &probe).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    assert!(values[3] > 1.8);
}

#[test]
fn pad_is_deterministic_per_seed() {
    let (a, b) = (gaussian(0.0, 100, 1), gaussian(0.1, 100, 2));
    let probe = ProbeConfig { seed: 4, ..Default::default() };
    assert_eq!(pad(&a, &b, &probe).unwrap(), pad(&a, &b, &probe).unwrap());
}

#[test]
fn pad_report_csv() {
    let r = PadReport::new(vec![0.4, 0.1, 0.9]);
    assert_eq!(r.ranking, vec![1, 0, 2]);
    assert_eq!(r.to_csv(), "source,pad,rank\n0,0.4,1\n1,0.1,0\n2,0.9,2\n");
}

#[test]
fn wilcoxon_tied_fixture() {
    // differences 2, −5, 5, 9, 5, −3: ranks 1, 4, 4, 6, 4, 2 and W+ = 15
    let a = [12.0, 34.0, 22.0, 50.0, 7.0, 41.0];
    let b = [10.0, 39.0, 17.0, 41.0, 2.0, 44.0];
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    assert!(r.exact);
    assert_eq!(r.statistic, 6.0);
    assert!((r.p_value - 0.4375).abs() < 1e-10);
}

#[test]
fn wilcoxon_matches_enumeration() {
    let mut rng = stream_rng(31, 0);
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let p = wilcoxon_signed_rank(&a, &b).unwrap().p_value;
        assert!((p - wilcoxon_enumeration_p(&a, &b)).abs() < 1e-10, "{a:?} {b:?}");
    }
}

#[test]
fn branches_agree_at_the_boundary() {
    let mut rng = stream_rng(32, 0);
    for _ in 0..50 {
        let a: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = wilcoxon_exact_p(&a, &b).unwrap();
        let normal = wilcoxon_normal_p(&a, &b).unwrap();
        assert!((exact - normal).abs() < 0.02, "exact {exact} normal {normal}");
    }
}

#[test]
fn large_samples_use_the_normal_branch() {
    let a: Vec<f64> = (0..30).map(f64::from).collect();
    let b: Vec<f64> = (0..30).map(|i| f64::from(i) - 1.0).collect();
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    assert!(!r.exact);
    assert!(r.p_value > 0.0 && r.p_value < 1e-4);
}

proptest! {
    #[test]
    fn wilcoxon_symmetric_and_in_range(pairs in prop::collection::vec((-5i32..5, -5i32..5), 1..20)) {
        let a: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let b: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        let ab = wilcoxon_signed_rank(&a, &b).unwrap();
        let ba = wilcoxon_signed_rank(&b, &a).unwrap();
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert!(ab.p_value > 0.0 && ab.p_value <= 1.0);
        prop_assert_eq!(wilcoxon_signed_rank(&a, &a).unwrap().p_value, 1.0);
    }

    #[test]
    fn pad_in_range(shift in 0.0f64..3.0, seed in 0u64..1000) {
        let p = pad(&gaussian(0.0, 40, seed), &gaussian(shift, 40, seed + 1), &ProbeConfig { iters: 50, ..Default::default() }).unwrap();
        prop_assert!((0.0..=2.0).contains(&p));
    }

    #[test]
    fn ranking_is_an_ascending_permutation(pads in prop::collection::vec(0.0f64..2.0, 1..10)) {
        let r = rank_sources(&pads);
        let mut sorted = r.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..pads.len()).collect::<Vec<_>>());
        prop_assert!(r.windows(2).all(|w| pads[w[0]] < pads[w[1]] || (pads[w[0]] == pads[w[1]] && w[0] < w[1])));
    }
}

const SMALL: &str = r#"
[data]
family = "rotated_moons"
angles_deg = [0, 20, 30]
n = 60
seed = 3

[model]
hidden = [16, 8]
disc_hidden = [4]

[train]
epochs = 2
batch_size = 16
dropout = 0.0

[experiment]
methods = ["source_only_combined"]
seeds = [0, 1, 2]
"#;

#[test]
fn source_only_config_gives_one_metric_per_seed() {
    let cfg = ExperimentConfig::parse(SMALL, Path::new(".")).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.cells.len(), 3);
    assert_eq!(report.methods(), vec![Method::SourceOnlyCombined]);
    let csv = report.metrics_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("method,seed,metric,value\nsource_only_combined,0,accuracy,"));
    assert_eq!(report.pad.pads.len(), 2);
    assert!(report.bound.is_some());
}

#[test]
fn every_method_runs_and_writes_the_report() {
    let text = SMALL.replace(
        r#"methods = ["source_only_combined"]"#,
        r#"methods = ["source_only_combined", "best_single_source", "dann_single_best", "dann_combined", "mdan_hard", "mdan_soft"]"#,
    );
    let cfg = ExperimentConfig::parse(&text, Path::new(".")).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.methods(), Method::ALL.to_vec());
    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    for f in ["metrics.csv", "summary.csv", "pad.csv", "wilcoxon.csv", "bound.txt", "trace/mdan_soft-2.log"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let wilcoxon = std::fs::read_to_string(dir.path().join("wilcoxon.csv")).unwrap();
    assert_eq!(wilcoxon.lines().count(), 1 + 15);
    let trace = std::fs::read_to_string(dir.path().join("trace/mdan_hard-0.log")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert!(first["choice"]["hard"]["index"].is_u64());
    assert_eq!(run_experiment(&cfg).unwrap().metrics_csv(), report.metrics_csv());
}

#[test]
fn config_errors_surface_before_training() {
    let missing = SMALL.replace(
        "family = \"rotated_moons\"\nangles_deg = [0, 20, 30]",
        "manifest = \"does/not/exist.txt\"",
    );
    assert!(ExperimentConfig::parse(&missing, Path::new(".")).is_err());
    let none = SMALL.replace(r#"["source_only_combined"]"#, "[]");
    assert!(matches!(ExperimentConfig::parse(&none, Path::new(".")), Err(Error::Config(_))));
    let unknown = SMALL.replace("epochs = 2", "epochs = 2\nwarmup = 1");
    assert!(matches!(ExperimentConfig::parse(&unknown, Path::new(".")), Err(Error::Config(_))));
    let no_seeds = SMALL.replace("seeds = [0, 1, 2]", "seeds = []");
    assert!(ExperimentConfig::parse(&no_seeds, Path::new(".")).is_err());
}

#[test]
fn unlabeled_target_cannot_be_scored() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), "x,label\n0,0\n1,1\n2,0\n3,1\n").unwrap();
    std::fs::write(dir.path().join("t.csv"), "x\n0.5\n1.5\n2.5\n3.5\n").unwrap();
    std::fs::write(
        dir.path().join("m.txt"),
        "dim = 1\nsource = s.csv dense_csv labeled\ntarget = t.csv dense_csv unlabeled\n",
    )
    .unwrap();
    let text = SMALL.replace(
        "family = \"rotated_moons\"\nangles_deg = [0, 20, 30]",
        "manifest = \"m.txt\"",
    );
    let cfg = ExperimentConfig::parse(&text, dir.path()).unwrap();
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn bundled_config_regression() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/rotated_moons.toml");
    let report = run_experiment(&ExperimentConfig::load(&path).unwrap()).unwrap();
    // frozen at the first green desk run
    let frozen = [
        (Method::SourceOnlyCombined, 0.926),
        (Method::MdanHard, 0.914),
        (Method::MdanSoft, 0.98),
    ];
    for (m, v) in frozen {
        assert!((report.median(m).unwrap() - v).abs() < 1e-9, "{}", m.name());
    }
}
