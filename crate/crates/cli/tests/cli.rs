use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use factorgm::io::{self, format_real};
use factorgm::{
    BeliefPropagation, BpParameters, Gibbs, GibbsParameters, Inference, LazyFlipper, Oracle,
    SearchParameters,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn factorgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factorgm"))
        .current_dir(fixture(""))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("info_shared_chain", &["info", "shared_chain.ogm"]),
    ("info_empty", &["info", "empty.ogm"]),
    ("info_model_a", &["info", "model_a.ogm"]),
    ("stats_potts_chain", &["stats", "potts_chain_100.ogm"]),
    ("stats_shared_chain", &["stats", "shared_chain.ogm"]),
    ("eval_model_a", &["eval", "model_a.ogm", "--labels", "0,1"]),
    ("eval_empty", &["eval", "empty.ogm", "--labels", ""]),
    (
        "infer_oracle_model_a",
        &["infer", "model_a.ogm", "--algorithm", "oracle"],
    ),
    (
        "infer_bp_model_a",
        &[
            "infer",
            "model_a.ogm",
            "--algorithm",
            "bp",
            "--max-iter",
            "100",
            "--bound",
            "1e-9",
            "--damping",
            "0",
        ],
    ),
    (
        "infer_icm_shared_chain",
        &["infer", "shared_chain.ogm", "--algorithm", "icm"],
    ),
    (
        "infer_lazyflipper_shared_chain",
        &[
            "infer",
            "shared_chain.ogm",
            "--algorithm",
            "lazyflipper",
            "--max-subgraph-size",
            "3",
        ],
    ),
    (
        "infer_alphaexp_chain",
        &["infer", "potts_chain_100.ogm", "--algorithm", "alphaexp"],
    ),
    (
        "infer_gibbs_model_a",
        &[
            "infer",
            "model_a.ogm",
            "--algorithm",
            "gibbs",
            "--boltzmann",
            "--steps",
            "20000",
            "--burn-in",
            "1000",
            "--seed",
            "3",
        ],
    ),
    (
        "infer_oracle_empty",
        &["infer", "empty.ogm", "--algorithm", "oracle"],
    ),
];

#[test]
fn golden_outputs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (name, args) in GOLDEN {
        let out = factorgm(args);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let expected = fs::read_to_string(dir.join(format!("{name}.out"))).unwrap();
        assert_eq!(stdout(&out), expected, "{name}");
    }
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], i32, &str)] = &[
        (
            &["eval", "model_a.ogm", "--labels", "0,5"],
            2,
            "out of range",
        ),
        (&["eval", "model_a.ogm", "--labels", "0"], 2, ""),
        (
            &["eval", "model_a.ogm", "--labels", "a,b"],
            2,
            "invalid label",
        ),
        (&["info", "missing.ogm"], 2, "missing.ogm"),
        (&["stats", "missing.ogm"], 2, "missing.ogm"),
        (
            &["infer", "model_a.ogm", "--algorithm", "gibbs"],
            2,
            "gibbs: sumprod",
        ),
        (
            &[
                "infer",
                "model_a.ogm",
                "--algorithm",
                "icm",
                "--marginals",
                "m.txt",
            ],
            2,
            "--marginals",
        ),
        (
            &[
                "infer",
                "model_a.ogm",
                "--algorithm",
                "oracle",
                "--state-cap",
                "2",
            ],
            2,
            "",
        ),
        (&["infer", "model_a.ogm"], 1, "--algorithm"),
        (
            &["infer", "model_a.ogm", "--algorithm", "simplex"],
            1,
            "simplex",
        ),
        (&["frobnicate"], 1, ""),
        (&[], 1, ""),
        (&["info", "model_a.ogm", "--max-iterations", "3"], 1, ""),
    ];
    for (args, code, needle) in cases {
        let out = factorgm(args);
        assert_eq!(out.status.code(), Some(*code), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
        assert!(stdout(&out).is_empty(), "{args:?} wrote to stdout");
    }
    assert_eq!(factorgm(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_model_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ogm");
    fs::write(&path, "OGMTEXT 1 minsum\nvariables 2 2 2\nfactor 0 1 0\n").unwrap();
    let out = factorgm(&["info", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn eval_matches_library() {
    let m = io::load(fixture("shared_chain.ogm")).unwrap().model;
    factorgm::model::for_each_tuple(m.space().counts(), |x| {
        let labels: Vec<String> = x.iter().map(usize::to_string).collect();
        let out = factorgm(&["eval", "shared_chain.ogm", "--labels", &labels.join(",")]);
        assert_eq!(
            stdout(&out),
            format!("{}\n", format_real(m.evaluate(x).unwrap()))
        );
    });
}

#[test]
fn infer_matches_library() {
    let m = io::load(fixture("shared_chain.ogm")).unwrap().model;
    let summary = |s: &factorgm::InferenceState| {
        let mut text = format!(
            "value={} bound={} termination={} steps={}\n",
            format_real(s.value),
            s.bound.map_or("na".to_string(), format_real),
            s.termination,
            s.step_count
        );
        for l in s.arg.iter().flatten() {
            text += &format!("{l}\n");
        }
        text
    };

    let oracle = Oracle::new(&m).infer().unwrap();
    assert_eq!(
        stdout(&factorgm(&[
            "infer",
            "shared_chain.ogm",
            "--algorithm",
            "oracle"
        ])),
        summary(&oracle)
    );

    let bp = BeliefPropagation::new(&m, BpParameters::new(7, 1e-3, 0.25))
        .unwrap()
        .infer()
        .unwrap();
    let out = factorgm(&[
        "infer",
        "shared_chain.ogm",
        "--algorithm",
        "bp",
        "--max-iter",
        "7",
        "--bound",
        "1e-3",
        "--damping",
        "0.25",
    ]);
    assert_eq!(stdout(&out), summary(&bp));

    let lf = LazyFlipper::new(&m, SearchParameters::default().with_subgraph_size(1))
        .unwrap()
        .infer()
        .unwrap();
    let out = factorgm(&[
        "infer",
        "shared_chain.ogm",
        "--algorithm",
        "lazyflipper",
        "--max-subgraph-size",
        "1",
    ]);
    assert_eq!(stdout(&out), summary(&lf));

    let p = m.boltzmann().unwrap();
    let mut gibbs = Gibbs::new(&p, GibbsParameters::new(5000, 500, 11)).unwrap();
    let state = gibbs.infer().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let marg = dir.path().join("marginals.txt");
    let out = factorgm(&[
        "infer",
        "shared_chain.ogm",
        "--algorithm",
        "gibbs",
        "--boltzmann",
        "--steps",
        "5000",
        "--burn-in",
        "500",
        "--seed",
        "11",
        "--marginals",
        marg.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out), summary(&state));
    let expected: String = gibbs
        .marginals()
        .unwrap()
        .iter()
        .map(|m| io::format_values(m) + "\n")
        .collect();
    assert_eq!(fs::read_to_string(marg).unwrap(), expected);
}

#[test]
fn info_and_stats_match_library() {
    for name in [
        "shared_chain.ogm",
        "model_a.ogm",
        "potts_chain_100.ogm",
        "empty.ogm",
    ] {
        let m = io::load(fixture(name)).unwrap().model;
        let s = m.storage_stats();
        let info = stdout(&factorgm(&["info", name]));
        assert!(info.starts_with(&format!(
            "variables={} factors={} functions={}\n",
            m.num_variables(),
            m.num_factors(),
            m.num_functions()
        )));
        assert!(info.contains(&format!(
            "semiring={} max_arity={}",
            m.semiring(),
            m.max_arity()
        )));
        let stats = stdout(&factorgm(&["stats", name]));
        assert!(stats.contains(&format!(
            "stored_values={} dense_equivalent={} sharing_ratio={}",
            s.num_stored_values,
            s.dense_equivalent_values,
            format_real(s.sharing_ratio())
        )));
    }
}

#[test]
fn output_and_marginal_files() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("x.txt");
    let marg = dir.path().join("m.txt");
    let out = factorgm(&[
        "infer",
        "model_a.ogm",
        "--algorithm",
        "oracle",
        "--output",
        labels.to_str().unwrap(),
        "--marginals",
        marg.to_str().unwrap(),
    ]);
    assert_eq!(
        stdout(&out),
        "value=0.60000000000000009 bound=0.60000000000000009 termination=converged steps=1\n"
    );
    assert_eq!(fs::read_to_string(&labels).unwrap(), "0\n1\n");
    // min-marginals of the two variables
    let m = io::load(fixture("model_a.ogm")).unwrap().model;
    let exact = Oracle::new(&m)
        .with_marginals(true)
        .solve()
        .unwrap()
        .marginals
        .unwrap();
    let expected: String = exact.iter().map(|v| io::format_values(v) + "\n").collect();
    assert_eq!(fs::read_to_string(&marg).unwrap(), expected);

    // a written labeling seeds a later run
    let out = factorgm(&[
        "infer",
        "model_a.ogm",
        "--algorithm",
        "icm",
        "--init",
        labels.to_str().unwrap(),
    ]);
    assert_eq!(
        stdout(&out),
        "value=0.60000000000000009 bound=na termination=fixed_point steps=1\n0\n1\n"
    );
}

#[test]
fn verbose_progress_goes_to_stderr() {
    let quiet = factorgm(&["infer", "model_a.ogm", "--algorithm", "icm"]);
    let loud = factorgm(&["infer", "model_a.ogm", "--algorithm", "icm", "--verbose"]);
    assert_eq!(stdout(&quiet), stdout(&loud));
    assert!(stderr(&quiet).is_empty());
    let lines: Vec<String> = stderr(&loud).lines().map(str::to_string).collect();
    assert!(lines[0].starts_with("begin algorithm=icm value="));
    assert!(lines[1].starts_with("step=1 value="));
    assert!(lines
        .last()
        .unwrap()
        .starts_with("end algorithm=icm termination=fixed_point"));
}

#[test]
fn seeded_gibbs_is_reproducible() {
    let args = [
        "infer",
        "shared_chain.ogm",
        "--algorithm",
        "gibbs",
        "--boltzmann",
        "--steps",
        "3000",
        "--burn-in",
        "100",
        "--seed",
        "5",
    ];
    assert_eq!(stdout(&factorgm(&args)), stdout(&factorgm(&args)));
}

#[test]
fn in_process_run_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let path = fixture("shared_chain.ogm");
    let code = factorgm_cli::run(
        ["factorgm", "info", path.to_str().unwrap()],
        &mut out,
        &mut err,
    );
    assert_eq!(code, factorgm_cli::EXIT_OK);
    assert_eq!(
        String::from_utf8(out).unwrap(),
        stdout(&factorgm(&["info", "shared_chain.ogm"]))
    );
    assert!(err.is_empty());
}
