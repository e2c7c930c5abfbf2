use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cordcat::dsl::{self, SourceFile};
use cordcat::int_cat::{int_compose, Strategy};
use cordcat::loop_model::{
    check_axioms_fin, check_monad_laws, find_uniformity_counterexample, hom_census, Sizes, Variant,
};
use cordcat::proc_cat::{compose, trace};
use cordcat::protocols::{analyze, Claim};

#[derive(Parser)]
#[command(name = "cordcat", about = "Compose, trace and analyse cord processes")]
struct Cli {
    /// Structured output instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a file in canonical form.
    Print { file: PathBuf },
    /// Sequential composite of two processes.
    Compose { file: PathBuf, p: String, q: String },
    /// Feed the last L outputs of a process back into its last L inputs.
    Trace { file: PathBuf, p: String, l: usize },
    /// Composite of two interactions.
    IntCompose {
        file: PathBuf,
        p: String,
        q: String,
        #[arg(long, default_value = "both")]
        strategy: Strategy,
    },
    /// Agreement and secrecy verdicts of a protocol against a goal.
    Analyze { file: PathBuf, protocol: String, goal: String },
    /// Trace axioms and monad laws in the finite loop models.
    Axioms {
        #[arg(long, default_value = "2,2,2", value_parser = parse_sizes)]
        sizes: Sizes,
    },
    /// Equivalence classes of loop morphisms a -> b with loops up to u_max.
    Census {
        a: usize,
        b: usize,
        u_max: usize,
        #[arg(long)]
        uniform: bool,
    },
}

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let parts: Vec<usize> =
        s.split(',').map(|p| p.trim().parse::<usize>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match parts[..] {
        [a, b, u] => Ok(Sizes { a, b, u }),
        _ => Err("expected a,b,u".into()),
    }
}

enum Failure {
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Outcome {
    text: String,
    json: Value,
    ok: bool,
}

fn load(path: &PathBuf) -> Result<SourceFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    dsl::parse(&text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn claim_json(c: &Claim) -> Value {
    json!({ "claim": c.claim, "pass": c.pass, "witness": c.witness })
}

fn run(cmd: Cmd) -> Result<Outcome, Failure> {
    Ok(match cmd {
        Cmd::Print { file } => {
            let f = load(&file)?;
            let text = dsl::print_canonical(&f);
            Outcome { json: json!({ "source": text }), text, ok: true }
        }
        Cmd::Compose { file, p, q } => {
            let f = load(&file)?;
            let r = compose(&f.process(&p)?, &f.process(&q)?)?;
            let text = format!("process composite =\n{};\n", dsl::print_process(&r, true));
            Outcome { json: json!({ "process": text }), text, ok: true }
        }
        Cmd::Trace { file, p, l } => {
            let f = load(&file)?;
            let r = trace(&f.process(&p)?, l)?;
            let text = format!("process traced =\n{};\n", dsl::print_process(&r, true));
            Outcome { json: json!({ "process": text }), text, ok: true }
        }
        Cmd::IntCompose { file, p, q, strategy } => {
            let f = load(&file)?;
            let r = int_compose(&f.interaction(&p)?, &f.interaction(&q)?, strategy)?;
            let text = dsl::print_interaction("composite", &r, true);
            Outcome {
                json: json!({ "interaction": text, "strategy": strategy.to_string(), "events": r.body.space().len() }),
                text,
                ok: true,
            }
        }
        Cmd::Analyze { file, protocol, goal } => {
            let f = load(&file)?;
            let report = analyze(&f.protocol(&protocol)?, &f.goal(&goal)?)?;
            let section = |cs: &[Claim]| cs.iter().map(claim_json).collect::<Vec<_>>();
            Outcome {
                text: report.to_string(),
                json: json!({
                    "agreement": section(&report.agreement),
                    "secrecy": section(&report.secrecy),
                    "run": section(&report.run),
                    "passed": report.passed(),
                }),
                ok: report.passed(),
            }
        }
        Cmd::Axioms { sizes } => {
            let mut report = check_axioms_fin(sizes);
            report.results.push(check_monad_laws(sizes));
            let max = sizes.a.max(sizes.b).max(1);
            let witness = find_uniformity_counterexample(Variant::Loop, max);
            let mut text = report.to_string();
            match &witness {
                Some(w) => text.push_str(&format!("uniformity [loop]: fails as expected\n{w}\n")),
                None => text.push_str("uniformity [loop]: no counterexample within bounds\n"),
            }
            let ok = report.all_passed() && witness.is_some();
            let results: Vec<Value> = report
                .results
                .iter()
                .map(|r| {
                    json!({
                        "axiom": r.name,
                        "variant": r.variant.to_string(),
                        "instances": r.instances,
                        "pass": r.passed(),
                        "counterexample": r.counterexample,
                    })
                })
                .collect();
            Outcome {
                json: json!({
                    "sizes": [sizes.a, sizes.b, sizes.u],
                    "results": results,
                    "loop_uniformity_counterexample": witness.map(|w| w.to_string()),
                    "passed": ok,
                }),
                text,
                ok,
            }
        }
        Cmd::Census { a, b, u_max, uniform } => {
            let variant = if uniform { Variant::Uniform } else { Variant::Loop };
            let c = hom_census(a, b, u_max, variant);
            let mut text = format!("census {a} {b} {u_max} {variant}\nclasses {}\nformula {}\n", c.class_count, c.formula_count);
            if !c.agrees() {
                text.push_str("discrepancy: formula representatives and classes differ\n");
            }
            text.push_str(&c.fixture());
            Outcome {
                json: json!({
                    "a": a,
                    "b": b,
                    "u_max": u_max,
                    "variant": variant.to_string(),
                    "classes": c.class_count,
                    "formula": c.formula_count,
                    "agrees": c.agrees(),
                    "representatives": c.representatives.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                }),
                text,
                ok: true,
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            let text = if cli.json {
                format!("{}\n", serde_json::to_string_pretty(&out.json).expect("values serialize"))
            } else {
                out.text
            };
            let _ = std::io::stdout().write_all(text.as_bytes());
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            if cli.json {
                println!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}
