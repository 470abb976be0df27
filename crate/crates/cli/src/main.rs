use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use qbmi_core::baker::{count_admissible, enumerate_admissible_with_limit, DEFAULT_ENUMERATION_LIMIT};
use qbmi_core::chaos::{trajectory, ScmParams, ScmState};
use qbmi_core::cipher::{decrypt, encrypt, read_ciphertext, write_ciphertext, MasterKey};
use qbmi_core::circuit::{gate_count, synthesize, synthesize_literal, Circuit};
use qbmi_core::circuit_sim::{equivalence, permutation_csv, to_permutation};
use qbmi_core::image_model::{load_manifest, write_pgm};
use qbmi_core::{analysis, BakerPartition, Equivalence};

#[derive(Parser)]
#[command(
    name = "qbmi",
    version,
    about = "Block bit-plane multi-image cipher and baker-map circuit tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt the images listed in a manifest (one PGM path per line).
    Encrypt {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file into numbered PGMs.
    Decrypt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Synthesize the SWAP/CSWAP circuit of a baker map.
    Synth {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        partition: String,
        /// Emit the D/E/F-family construction instead of the exact one.
        #[arg(long)]
        literal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a circuit file against the baker map named in its header.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        /// Also write the circuit's permutation as CSV.
        #[arg(long)]
        permutation_csv: Option<PathBuf>,
    },
    /// Closed-form and synthesized gate counts of a partition.
    Count {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        partition: String,
    },
    /// List admissible partitions in lexicographic order.
    Enumerate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u64,
        /// Print only how many there are.
        #[arg(long)]
        count: bool,
    },
    /// Reproduce the width/depth comparison table.
    Table1 {
        #[arg(long)]
        csv: bool,
    },
    /// Dump a chaotic trajectory as CSV (step, x1..x5).
    ChaosTrace {
        #[arg(long, default_value_t = 250)]
        steps: usize,
        #[arg(long, default_value = "49,23,58,120,237")]
        lambdas: String,
        #[arg(long, default_value = "0.1,0.5,0.2,-0.8,0.9", allow_hyphen_values = true)]
        init: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Bad flag values; reported like clap's own usage errors.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: qbmi_core::Result<T>) -> Result<T> {
    r.map_err(|e| Usage(e.to_string()).into())
}

fn five(text: &str, what: &str) -> Result<[f64; 5]> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Usage(format!("--{what}: expected 5 comma-separated numbers")))?;
    v.try_into()
        .map_err(|_| Usage(format!("--{what}: expected 5 comma-separated numbers")).into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Encrypt { manifest, key, out } => {
            let key = MasterKey::load(&key)?;
            let set = load_manifest(&manifest)?;
            let ct = encrypt(&set, &key)?;
            fs::write(&out, write_ciphertext(&ct)).with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "encrypted {} images of {}x{} into {}",
                set.len(),
                set.side(),
                set.side(),
                out.display()
            );
        }
        Command::Decrypt { input, key, out_dir } => {
            let key = MasterKey::load(&key)?;
            let data = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let ct = read_ciphertext(&data)?;
            if ct.depth != 8 {
                bail!("PGM output needs 8-bit images, ciphertext has L={}", ct.depth);
            }
            let set = decrypt(&ct, &key)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (i, img) in set.images().iter().enumerate() {
                write_pgm(&out_dir.join(format!("image_{i:03}.pgm")), set.n(), img)?;
            }
            eprintln!("wrote {} images to {}", set.len(), out_dir.display());
        }
        Command::Synth {
            n,
            partition,
            literal,
            out,
        } => {
            let p = usage(BakerPartition::parse(n, &partition))?;
            let c = if literal {
                usage(synthesize_literal(&p))?
            } else {
                usage(synthesize(&p))?
            };
            emit(out.as_deref(), &c.to_text())?;
            eprintln!("{} gates", c.len());
        }
        Command::Verify {
            circuit,
            permutation_csv: csv,
        } => {
            let text = fs::read_to_string(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            let c = Circuit::parse(&text)?;
            if let Some(path) = csv {
                emit(Some(&path), &permutation_csv(&to_permutation(&c)?))?;
            }
            let formula = gate_count(&c.partition).total;
            match equivalence(&c, &c.partition)? {
                Equivalence::Equivalent => {
                    println!("EQUIVALENT, {} gates (closed-form count {formula})", c.len());
                }
                Equivalence::Mismatch { point, circuit, baker } => {
                    println!(
                        "NOT EQUIVALENT, {} gates: ({}, {}) -> circuit ({}, {}), baker ({}, {})",
                        c.len(),
                        point.x,
                        point.y,
                        circuit.x,
                        circuit.y,
                        baker.x,
                        baker.y
                    );
                    bail!("circuit does not implement partition {}", c.partition);
                }
            }
        }
        Command::Count { n, partition } => {
            let p = usage(BakerPartition::parse(n, &partition))?;
            if !p.is_admissible() {
                return Err(Usage(format!("partition {p} is not admissible")).into());
            }
            let g = gate_count(&p);
            let per: Vec<String> = g.per_subfunction.iter().map(u64::to_string).collect();
            println!("per subfunction: {}", per.join(" "));
            println!("closed-form total: {}", g.total);
            println!("exact circuit: {}", synthesize(&p)?.len());
        }
        Command::Enumerate { n, limit, count } => {
            if n > qbmi_core::baker::MAX_N {
                return Err(Usage(format!("--n must be at most {}", qbmi_core::baker::MAX_N)).into());
            }
            if count {
                println!("{}", count_admissible(n));
            } else {
                let mut out = String::new();
                for p in enumerate_admissible_with_limit(n, limit)? {
                    out.push_str(&p.to_string());
                    out.push('\n');
                }
                print!("{out}");
            }
        }
        Command::Table1 { csv } => {
            let t = analysis::table1();
            print!("{}", if csv { t.to_csv() } else { t.to_text() });
        }
        Command::ChaosTrace {
            steps,
            lambdas,
            init,
            out,
        } => {
            let params = usage(ScmParams::new(five(&lambdas, "lambdas")?))?;
            let start = ScmState::new(five(&init, "init")?);
            let mut text = String::from("step,x1,x2,x3,x4,x5\n");
            for (i, s) in trajectory(start, &params, steps).iter().enumerate() {
                let v: Vec<String> = s.v.iter().map(|x| format!("{x:?}")).collect();
                text.push_str(&format!("{i},{}\n", v.join(",")));
            }
            emit(out.as_deref(), &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
