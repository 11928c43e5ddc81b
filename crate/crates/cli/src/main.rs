//! `rulecheck`: verify extracted rules against ReLU and Boolean networks.
//!
//! Exit codes: 0 when every rule holds (or a certificate is accepted), 1
//! when a rule fails (or a certificate is rejected), 2 on usage or input
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulecheck::cnf::{parse_dimacs, CnfFormula, Literal};
use rulecheck::constructions::{
    build_cube_perturbation, embed_oblique_as_mofn, embed_propositional_as_oblique, exhaustiveness_alternative,
    generate_boolean_monotonicity_instance, generate_consistency_instance, generate_exhaustiveness_instance,
    generate_sat_instance, reduce_monotonicity_to_oblique, reduce_total_to_monotonicity, witness_for_rules,
    BooleanMonotonicityInstance,
};
use rulecheck::io::{
    certificate_from_json, certificate_to_json, counterexamples_from_json, counterexamples_to_json, network_from_json,
    network_to_json, parse_vector, rules_from_json, rules_to_json, Counterexample,
};
use rulecheck::network::compose;
use rulecheck::verify::{
    check_certificate, verify_boolean, verify_rule_with, CertificateCheck, Mode, Verdict, VerifyOptions,
};
use rulecheck::{Network, Rational, Rule, Witness};

type Failure = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(
    name = "rulecheck",
    version,
    about = "Exact verification of extracted rules over neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pruned,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    /// Monotonicity or total monotonicity to an oblique rule on the product network.
    MonoToOblique,
    /// Total monotonicity to monotonicity with a pass-through input.
    TotalToMono,
    /// Propositional rule read as an oblique rule.
    PropToOblique,
    /// Oblique rule read as a one-part MofN rule.
    ObliqueToMofn,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Sat,
    BoolMono,
    Consistency,
    Exhaustiveness,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every rule of RULES against NET.
    Verify {
        net: PathBuf,
        rules: PathBuf,
        #[arg(long, value_enum, default_value = "pruned")]
        mode: ModeArg,
        /// Write counterexamples of failing rules to this file.
        #[arg(long)]
        emit_cex: Option<PathBuf>,
        /// Write one certificate per failing rule into this directory.
        #[arg(long)]
        emit_cert: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Largest number of input bits enumerated for Boolean networks.
        #[arg(long, default_value_t = 20)]
        bool_bound: usize,
    },
    /// Evaluate NET at a point, or at the witnesses of a counterexample file.
    Eval {
        net: PathBuf,
        /// Input coordinates as rationals, e.g. `1/2 -3`.
        #[arg(allow_hyphen_values = true)]
        input: Vec<String>,
        #[arg(long, conflicts_with = "input")]
        cex: Option<PathBuf>,
        /// With --cex, also check that each witness violates its rule.
        #[arg(long, requires = "cex")]
        rules: Option<PathBuf>,
    },
    /// Rewrite a rule (and network) into an equivalent rule of another kind.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        net: PathBuf,
        rules: PathBuf,
        /// Index (0-based) of the rule to reduce.
        #[arg(long, default_value_t = 0)]
        rule: usize,
        /// Output prefix; writes PREFIX.net.json and PREFIX.rules.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a hardness instance from a DIMACS file or a random 3-CNF.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// DIMACS CNF input; omit to sample a random 3-CNF.
        cnf: Option<PathBuf>,
        /// Output prefix for the instance files.
        #[arg(long)]
        out: PathBuf,
        /// Also solve the formula by brute force and record the expected outcome.
        #[arg(long)]
        with_truth: bool,
        #[arg(long, default_value_t = 20)]
        bool_bound: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Variables of the random formula.
        #[arg(long, default_value_t = 6)]
        vars: usize,
        /// Clauses of the random formula.
        #[arg(long, default_value_t = 20)]
        clauses: usize,
    },
    /// Build a network that obeys RULES, or explain why none is built.
    Witness {
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output dimension for monotonicity rule sets.
        #[arg(long)]
        output_dim: Option<usize>,
    },
    /// Check a violation certificate for one rule.
    CheckCert {
        net: PathBuf,
        rules: PathBuf,
        cert: PathBuf,
        /// Index (0-based) of the rule the certificate refers to.
        #[arg(long, default_value_t = 0)]
        rule: usize,
    },
    /// Compose NET with the cube perturbation.
    Perturb {
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Coefficient s in x + s·d(x)·e1, where d peaks at 1/2 on the cube centre.
        #[arg(long, default_value = "1/2")]
        shift: String,
    },
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_net(path: &Path) -> Result<Network, Failure> {
    network_from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_rules(path: &Path) -> Result<Vec<Rule>, Failure> {
    rules_from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn show_witness(w: &Witness) -> String {
    match w {
        Witness::Point(x) => format!("x = ({})", join(&x.0)),
        Witness::Pair(x, y) => format!("x = ({}), y = ({})", join(&x.0), join(&y.0)),
    }
}

fn join(v: &[Rational]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn pick(rules: &[Rule], k: usize) -> Result<&Rule, Failure> {
    rules
        .get(k)
        .ok_or_else(|| format!("rule index {k} out of range ({} rules)", rules.len()).into())
}

fn cmd_verify(
    net: &Path,
    rules: &Path,
    mode: ModeArg,
    emit_cex: Option<&Path>,
    emit_cert: Option<&Path>,
    threads: Option<usize>,
    bool_bound: usize,
) -> Result<ExitCode, Failure> {
    let net = load_net(net)?;
    let rules = load_rules(rules)?;
    let opts = VerifyOptions {
        mode: match mode {
            ModeArg::Pruned => Mode::Pruned,
            ModeArg::Exhaustive => Mode::Exhaustive,
        },
        threads,
    };
    let mut cexs = Vec::new();
    let mut certs = Vec::new();
    for (k, rule) in rules.iter().enumerate() {
        let start = Instant::now();
        let (verdict, stats) = if net.is_boolean() {
            let v = verify_boolean(&net, rule, bool_bound)?;
            (v, "enumerated Boolean inputs".to_string())
        } else {
            let (v, s) = verify_rule_with(&net, rule, &opts)?;
            (v, format!("branches {}, lp calls {}", s.branches, s.lp_calls))
        };
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match verdict {
            Verdict::Holds => println!("rule {k} [{}]: HOLDS ({stats}, {ms:.1} ms)", rule.kind_name()),
            Verdict::Fails { witness, certificate } => {
                println!(
                    "rule {k} [{}]: FAILS at {} ({stats}, {ms:.1} ms)",
                    rule.kind_name(),
                    show_witness(&witness)
                );
                cexs.push(Counterexample { rule_index: k, witness });
                certs.push((k, certificate));
            }
        }
    }
    if let Some(path) = emit_cex {
        write(path, &counterexamples_to_json(&cexs))?;
    }
    if let Some(dir) = emit_cert {
        fs::create_dir_all(dir)?;
        for (k, c) in &certs {
            write(&dir.join(format!("cert-{k}.json")), &certificate_to_json(c))?;
        }
    }
    if cexs.is_empty() {
        println!("ALL RULES HOLD");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} OF {} RULES FAIL", cexs.len(), rules.len());
        Ok(ExitCode::from(1))
    }
}

fn cmd_eval(net: &Path, input: &[String], cex: Option<&Path>, rules: Option<&Path>) -> Result<ExitCode, Failure> {
    let net = load_net(net)?;
    let show = |x: &rulecheck::QVector| -> Result<String, Failure> {
        let y = net.evaluate(x)?;
        Ok(y.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
    };
    let Some(cex) = cex else {
        let x = parse_vector(&input.join(" "))?;
        println!("{}", show(&x)?);
        return Ok(ExitCode::SUCCESS);
    };
    let cexs = counterexamples_from_json(&read(cex)?)?;
    let rules = rules.map(load_rules).transpose()?;
    let mut all_valid = true;
    for c in &cexs {
        match &c.witness {
            Witness::Point(x) => println!("rule {}: N({}) = {}", c.rule_index, join(&x.0), show(x)?),
            Witness::Pair(x, y) => println!(
                "rule {}: N({}) = {}; N({}) = {}",
                c.rule_index,
                join(&x.0),
                show(x)?,
                join(&y.0),
                show(y)?
            ),
        }
        if let Some(rules) = &rules {
            let violated = pick(rules, c.rule_index)?.violated_by(&net, &c.witness)?;
            println!(
                "  violates rule {}: {}",
                c.rule_index,
                if violated { "yes" } else { "no" }
            );
            all_valid &= violated;
        }
    }
    Ok(if all_valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_reduce(kind: ReduceKind, net: &Path, rules: &Path, k: usize, out: &Path) -> Result<ExitCode, Failure> {
    let net = load_net(net)?;
    let rules = load_rules(rules)?;
    let rule = pick(&rules, k)?;
    let (net2, rule2) = match kind {
        ReduceKind::MonoToOblique => reduce_monotonicity_to_oblique(&net, rule)?,
        ReduceKind::TotalToMono => reduce_total_to_monotonicity(&net, rule)?,
        ReduceKind::PropToOblique => (net.clone(), embed_propositional_as_oblique(rule)?),
        ReduceKind::ObliqueToMofn => (net.clone(), embed_oblique_as_mofn(rule)?),
    };
    let (np, rp) = (with_suffix(out, ".net.json"), with_suffix(out, ".rules.json"));
    write(&np, &network_to_json(&net2))?;
    write(&rp, &rules_to_json(&[rule2]))?;
    println!("wrote {} and {}", np.display(), rp.display());
    Ok(ExitCode::SUCCESS)
}

fn random_cnf(vars: usize, clauses: usize, seed: u64) -> Result<CnfFormula, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..clauses)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let v = rng.gen_range(0..vars);
                    if rng.gen_bool(0.5) {
                        Literal::pos(v)
                    } else {
                        Literal::neg(v)
                    }
                })
                .collect()
        })
        .collect();
    Ok(CnfFormula::new(vars, clauses)?)
}

struct Truth {
    model: Option<Vec<bool>>,
}

impl Truth {
    fn json(&self, key: &str, value: bool) -> String {
        let model = match &self.model {
            Some(m) => format!("[{}]", m.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")),
            None => "null".into(),
        };
        format!(
            "{{\n  \"satisfiable\": {},\n  \"model\": {model},\n  \"{key}\": {value}\n}}\n",
            self.model.is_some()
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    kind: GenKind,
    cnf: Option<&Path>,
    out: &Path,
    with_truth: bool,
    bound: usize,
    seed: u64,
    vars: usize,
    clauses: usize,
) -> Result<ExitCode, Failure> {
    let formula = match cnf {
        Some(p) => parse_dimacs(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
        None => {
            let f = random_cnf(vars, clauses, seed)?;
            write(&with_suffix(out, ".cnf"), &f.to_dimacs())?;
            f
        }
    };
    let truth = if with_truth {
        if formula.num_vars() > bound {
            return Err(format!("{} variables exceed --bool-bound {bound}", formula.num_vars()).into());
        }
        Some(Truth {
            model: formula.brute_force_model(),
        })
    } else {
        None
    };
    let net_path = with_suffix(out, ".net.json");
    let rules_path = with_suffix(out, ".rules.json");
    let truth_path = with_suffix(out, ".truth.json");
    let unsat = truth.as_ref().map(|t| t.model.is_none());
    match kind {
        GenKind::Sat => {
            let inst = generate_sat_instance(&formula)?;
            write(&net_path, &network_to_json(&inst.net))?;
            write(&rules_path, &rules_to_json(&inst.rules))?;
            if let (Some(t), Some(u)) = (&truth, unsat) {
                write(&truth_path, &t.json("rule_holds", u))?;
            }
        }
        GenKind::BoolMono => {
            match generate_boolean_monotonicity_instance(&formula.to_formula(), formula.num_vars())? {
                BooleanMonotonicityInstance::TriviallyTrue => {
                    println!("formula holds at (1, ..., 1): the monotonicity question is trivially settled; no instance written");
                    return Ok(ExitCode::SUCCESS);
                }
                BooleanMonotonicityInstance::Instance(inst) => {
                    write(&net_path, &network_to_json(&inst.net))?;
                    write(&rules_path, &rules_to_json(&inst.rules))?;
                    if let (Some(t), Some(u)) = (&truth, unsat) {
                        write(&truth_path, &t.json("rule_holds", u))?;
                    }
                }
            }
        }
        GenKind::Consistency => {
            write(&rules_path, &rules_to_json(&generate_consistency_instance(&formula)?))?;
            if let (Some(t), Some(u)) = (&truth, unsat) {
                write(&truth_path, &t.json("consistent", u))?;
            }
        }
        GenKind::Exhaustiveness => {
            write(
                &rules_path,
                &rules_to_json(&generate_exhaustiveness_instance(&formula)?),
            )?;
            if let (Some(t), Some(u)) = (&truth, unsat) {
                write(&truth_path, &t.json("exhaustive", u))?;
                if let Some(model) = &t.model {
                    // Two different networks obey the rules: zero and this bump.
                    write(
                        &with_suffix(out, ".alt.net.json"),
                        &network_to_json(&exhaustiveness_alternative(model)?),
                    )?;
                }
            }
        }
    }
    println!("wrote instance with prefix {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_witness(rules: &Path, out: &Path, output_dim: Option<usize>) -> Result<ExitCode, Failure> {
    let rules = load_rules(rules)?;
    let net = witness_for_rules(&rules, output_dim)?;
    write(out, &network_to_json(&net))?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_cert(net: &Path, rules: &Path, cert: &Path, k: usize) -> Result<ExitCode, Failure> {
    let net = load_net(net)?;
    let rules = load_rules(rules)?;
    let cert = certificate_from_json(&read(cert)?).map_err(|e| format!("{}: {e}", cert.display()))?;
    match check_certificate(&net, pick(&rules, k)?, &cert)? {
        CertificateCheck::Accepted(w) => {
            println!("ACCEPTED: violation at {}", show_witness(&w));
            Ok(ExitCode::SUCCESS)
        }
        CertificateCheck::Rejected(reason) => {
            println!("REJECTED: {reason}");
            Ok(ExitCode::from(1))
        }
        CertificateCheck::Malformed(reason) => Err(format!("certificate shape: {reason}").into()),
    }
}

fn cmd_perturb(net: &Path, out: &Path, shift: &str) -> Result<ExitCode, Failure> {
    let net = load_net(net)?;
    let shift: Rational = shift.parse()?;
    let f = build_cube_perturbation(net.input_dim(), &shift)?;
    write(out, &network_to_json(&compose(&net, &f)?))?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Verify {
            net,
            rules,
            mode,
            emit_cex,
            emit_cert,
            threads,
            bool_bound,
        } => cmd_verify(
            &net,
            &rules,
            mode,
            emit_cex.as_deref(),
            emit_cert.as_deref(),
            threads,
            bool_bound,
        ),
        Command::Eval { net, input, cex, rules } => cmd_eval(&net, &input, cex.as_deref(), rules.as_deref()),
        Command::Reduce {
            kind,
            net,
            rules,
            rule,
            out,
        } => cmd_reduce(kind, &net, &rules, rule, &out),
        Command::Gen {
            kind,
            cnf,
            out,
            with_truth,
            bool_bound,
            seed,
            vars,
            clauses,
        } => cmd_gen(kind, cnf.as_deref(), &out, with_truth, bool_bound, seed, vars, clauses),
        Command::Witness { rules, out, output_dim } => cmd_witness(&rules, &out, output_dim),
        Command::CheckCert { net, rules, cert, rule } => cmd_check_cert(&net, &rules, &cert, rule),
        Command::Perturb { net, out, shift } => cmd_perturb(&net, &out, &shift),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
