use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CLAMP: &str = r#"{
  "input_dim": 1,
  "layers": [
    {"activation": "relu", "weights": [["1"], ["1"]], "biases": ["0", "-1"]},
    {"activation": "identity", "weights": [["1", "-1"]], "biases": ["0"]}
  ]
}"#;

const TIE: &str = r#"{
  "input_dim": 1,
  "classifying": true,
  "layers": [{"activation": "identity", "weights": [["1"], ["1"]], "biases": ["0", "0"]}]
}"#;

const HOLDS: &str = r#"[
  {"kind": "propositional",
   "cond": {"op": "atom", "coeffs": ["1"], "rel": ">=", "const": "1"},
   "concl": {"op": "atom", "coeffs": ["1"], "rel": "=", "const": "1"}},
  {"kind": "monotonicity", "A": [["1"]], "i": 1}
]"#;

const FAILS: &str = r#"[
  {"kind": "propositional",
   "cond": {"op": "true"},
   "concl": {"op": "atom", "coeffs": ["1"], "rel": "<", "const": "1"}}
]"#;

const BOXES: &str = r#"[
  {"kind": "propositional",
   "cond": {"op": "and", "args": [
     {"op": "atom", "coeffs": ["1"], "rel": ">=", "const": "0"},
     {"op": "atom", "coeffs": ["1"], "rel": "<=", "const": "1"}]},
   "concl": {"op": "atom", "coeffs": ["1"], "rel": "=", "const": "3"}},
  {"kind": "propositional",
   "cond": {"op": "and", "args": [
     {"op": "atom", "coeffs": ["1"], "rel": ">=", "const": "2"},
     {"op": "atom", "coeffs": ["1"], "rel": "<=", "const": "5/2"}]},
   "concl": {"op": "atom", "coeffs": ["1"], "rel": "=", "const": "-1"}}
]"#;

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn run<P: AsRef<std::ffi::OsStr>>(args: &[P]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rulecheck"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_holding_rules() {
    let d = Dir::new();
    let (net, rules) = (d.file("n.json", CLAMP), d.file("r.json", HOLDS));
    for mode in ["pruned", "exhaustive"] {
        let o = run(&["verify", p(&net), p(&rules), "--mode", mode]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains("ALL RULES HOLD"));
    }
}

#[test]
fn failing_rule_writes_replayable_counterexample() {
    let d = Dir::new();
    let (net, rules) = (d.file("n.json", CLAMP), d.file("r.json", FAILS));
    let (cex, certs) = (d.path("cex.json"), d.path("certs"));
    let o = run(&[
        "verify",
        p(&net),
        p(&rules),
        "--emit-cex",
        p(&cex),
        "--emit-cert",
        p(&certs),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("1 OF 1 RULES FAIL"));

    let o = run(&["eval", p(&net), "--cex", p(&cex), "--rules", p(&rules)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("violates rule 0: yes"));

    let cert = certs.join("cert-0.json");
    let o = run(&["check-cert", p(&net), p(&rules), p(&cert)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("ACCEPTED"));

    // The same certificate against a rule it does not violate.
    let holds = d.file("h.json", HOLDS);
    let o = run(&["check-cert", p(&net), p(&holds), p(&cert)]);
    assert_ne!(code(&o), 0);
}

#[test]
fn bad_inputs_exit_2() {
    let d = Dir::new();
    let net = d.file("n.json", &CLAMP.replace("\"-1\"", "\"1/0\""));
    let rules = d.file("r.json", HOLDS);
    let o = run(&["verify", p(&net), p(&rules)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let net = d.file("ok.json", CLAMP);
    assert_eq!(code(&run(&["eval", p(&net), "1", "2"])), 2);
    assert_eq!(code(&run(&["verify", p(&net), p(&d.path("missing.json"))])), 2);
}

#[test]
fn eval_prints_exact_values() {
    let d = Dir::new();
    let o = run(&["eval", p(&d.file("n.json", CLAMP)), "1/3"]);
    assert_eq!(stdout(&o).trim(), "1/3");
    let o = run(&["eval", p(&d.file("n.json", CLAMP)), "-7"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = run(&["eval", p(&d.file("t.json", TIE)), "2"]);
    assert_eq!(stdout(&o).trim(), "1 1");
}

#[test]
fn reductions_preserve_the_verdict() {
    let d = Dir::new();
    let net = d.file("n.json", CLAMP);
    let holds = d.file("h.json", HOLDS);
    let fails = d.file("f.json", FAILS);
    let cases: [(&str, &PathBuf, usize, i32); 4] = [
        ("mono-to-oblique", &holds, 1, 0),
        (
            "total-to-mono",
            &d.file("t.json", r#"{"kind": "total_monotonicity", "A": [["1"]], "i": 1}"#),
            0,
            0,
        ),
        ("prop-to-oblique", &fails, 0, 1),
        (
            "oblique-to-mofn",
            &d.file(
                "o.json",
                r#"{"kind": "oblique",
            "cond": {"op": "atom", "coeffs": ["2"], "rel": ">=", "const": "1"},
            "concl": {"op": "atom", "coeffs": ["2"], "rel": ">=", "const": "1"}}"#,
            ),
            0,
            0,
        ),
    ];
    for (kind, rules, k, expect) in cases {
        let out = d.path(kind);
        let o = run(&[
            "reduce",
            kind,
            p(&net),
            p(rules),
            "--rule",
            &k.to_string(),
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let n2 = d.path(&format!("{kind}.net.json"));
        let r2 = d.path(&format!("{kind}.rules.json"));
        let o = run(&["verify", p(&n2), p(&r2)]);
        assert_eq!(code(&o), expect, "{kind}: {}", stdout(&o));
    }
}

#[test]
fn generated_instances_match_their_truth_files() {
    let d = Dir::new();
    for seed in 0..4 {
        let prefix = d.path(&format!("sat{seed}"));
        let o = run(&[
            "gen",
            "sat",
            "--out",
            p(&prefix),
            "--with-truth",
            "--seed",
            &seed.to_string(),
            "--vars",
            "4",
            "--clauses",
            "12",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let truth = std::fs::read_to_string(d.path(&format!("sat{seed}.truth.json"))).unwrap();
        let holds = truth.contains("\"rule_holds\": true");
        let o = run(&[
            "verify",
            p(&d.path(&format!("sat{seed}.net.json"))),
            p(&d.path(&format!("sat{seed}.rules.json"))),
        ]);
        assert_eq!(code(&o), if holds { 0 } else { 1 }, "seed {seed}: {}", stdout(&o));
        assert!(d.path(&format!("sat{seed}.cnf")).exists());
    }
}

#[test]
fn gen_from_dimacs_file() {
    let d = Dir::new();
    let cnf = d.file("f.cnf", "p cnf 2 3\n1 2 0\n-1 0\n-2 0\n");
    for kind in ["sat", "consistency", "exhaustiveness"] {
        let prefix = d.path(kind);
        let o = run(&["gen", kind, p(&cnf), "--out", p(&prefix), "--with-truth"]);
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(d.path(&format!("{kind}.rules.json")).exists());
        let truth = std::fs::read_to_string(d.path(&format!("{kind}.truth.json"))).unwrap();
        assert!(truth.contains("\"satisfiable\": false"), "{truth}");
    }
    let prefix = d.path("bm");
    assert_eq!(code(&run(&["gen", "bool-mono", p(&cnf), "--out", p(&prefix)])), 0);
}

#[test]
fn witness_obeys_box_rules() {
    let d = Dir::new();
    let rules = d.file("r.json", BOXES);
    let net = d.path("w.json");
    let o = run(&["witness", p(&rules), "--out", p(&net)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(&["verify", p(&net), p(&rules)])), 0);
    assert_eq!(stdout(&run(&["eval", p(&net), "1/2"])).trim(), "3");
    assert_eq!(stdout(&run(&["eval", p(&net), "9/4"])).trim(), "-1");

    let o = run(&["witness", p(&d.file("bad.json", FAILS)), "--out", p(&net)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn perturb_shifts_the_network() {
    let d = Dir::new();
    let net = d.file("n.json", CLAMP);
    let out = d.path("p.json");
    assert_eq!(code(&run(&["perturb", p(&net), "--out", p(&out)])), 0);
    let o = run(&["eval", p(&out), "1/2"]);
    assert_eq!(code(&o), 0);
    // Away from the cube centre the clamp's value is unchanged.
    assert_eq!(stdout(&run(&["eval", p(&out), "3"])).trim(), "1");
}
