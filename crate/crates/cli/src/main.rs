mod args;
mod files;

use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde::Serialize;

use ellc::channel::{estimate_outputs_equal, prob_outputs_equal, transmit, transmit_with, ChannelKind, ErasurePattern};
use ellc::codec::{decode, encode, extract_info_bits, sic_subtract, CodeRegistry, Codeword, Stitched};
use ellc::gf2::RngStream;
use ellc::metrics::{pdp, php};
use ellc::sim::{self, Experiment, ExperimentSpec, MaxPeResult, Report, RunOptions};

use args::{Cli, Command, Common, Format, Usage, DEFAULT_POPULATIONS, DEFAULT_SWEEP};
use files::ChannelFile;

enum Failure {
    Usage(String),
    Other(anyhow::Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<sim::SimError> for Failure {
    fn from(e: sim::SimError) -> Self {
        Failure::Other(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ArgumentConflict, msg).exit(),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Sweep(common) => {
            let c = common.merged()?;
            let exp = experiment(c.spec(c.single_k(100)?, &DEFAULT_SWEEP, 500))?;
            let report = sim::run_sweep(&exp, &run_options(&c))?;
            emit_report(&report, &c)?;
        }
        Command::Scale(common) => {
            let c = common.merged()?;
            let users = if c.k.is_empty() { DEFAULT_POPULATIONS.to_vec() } else { c.k.clone() };
            let spec = c.spec(users.iter().copied().max().unwrap_or(1), &[0.03], 500);
            if spec.pe.len() != 1 {
                return Err(Usage("scale takes exactly one --pe".into()).into());
            }
            let exp = experiment(spec)?;
            let report = sim::scale(&exp, &users, &run_options(&c))?;
            emit_report(&report, &c)?;
        }
        Command::Maxpe { common, search } => {
            let c = common.merged()?;
            if !c.pe.is_empty() {
                return Err(Usage("maxpe searches over p_e; use --lo and --hi instead of --pe".into()).into());
            }
            let exp = experiment(c.spec(c.single_k(100)?, &[search.lo], 200))?;
            let opts = search.options(exp.spec.trials);
            let result = sim::find_max_pe(&exp, &opts, &run_options(&c))?;
            println!("{}", result.pe);
            if c.out.is_some() {
                emit_max_pe(&exp, result, &c)?;
            }
        }
        Command::Validate { common, q, invariants } => {
            let c = common.merged()?;
            let mut ok = coincidence(&c, q)?;
            if invariants {
                ok &= invariant_suite(&c)?;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Encode { common, input } => {
            let c = common.merged()?;
            encode_file(&c, &input)?;
        }
        Command::Decode { input, out } => decode_file(&input, out.as_deref())?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Configuration problems are usage errors.
fn experiment(spec: ExperimentSpec) -> Result<Experiment, Failure> {
    Experiment::new(spec, &CodeRegistry::builtin()).map_err(|e| Failure::Usage(e.to_string()))
}

fn run_options(c: &Common) -> RunOptions {
    RunOptions {
        workers: c.workers,
        progress: !c.quiet,
    }
}

fn emit_report(report: &Report, c: &Common) -> Result<()> {
    match (&c.out, c.format()) {
        (Some(path), Format::Csv) => sim::write_csv(report, path)?,
        (Some(path), Format::Json) => sim::write_json(report, path)?,
        (None, Format::Csv) => print!("{}", report.to_csv()),
        (None, Format::Json) => println!("{}", serde_json::to_string_pretty(report)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct MaxPeReport {
    spec: ExperimentSpec,
    config_hash: String,
    #[serde(flatten)]
    result: MaxPeResult,
}

fn emit_max_pe(exp: &Experiment, result: MaxPeResult, c: &Common) -> Result<()> {
    let path = c.out.as_deref().expect("caller checked --out");
    match c.format() {
        Format::Json => sim::write_json(
            &MaxPeReport {
                spec: exp.spec.clone(),
                config_hash: exp.spec.config_hash(),
                result,
            },
            path,
        )?,
        Format::Csv => {
            let mut rows: Vec<_> = result.probes.into_iter().map(|p| p.row).collect();
            rows.sort_by(|a, b| a.value.total_cmp(&b.value));
            let report = Report {
                spec: exp.spec.clone(),
                config_hash: exp.spec.config_hash(),
                rows,
            };
            sim::write_csv(&report, path)?;
        }
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Closed-form `Pr[Y_A = Y_B]` against its Monte-Carlo estimate, at 3σ.
fn coincidence(c: &Common, q: u64) -> Result<bool, Failure> {
    if q == 0 {
        return Err(Usage("--Q must be positive".into()).into());
    }
    let users = c.single_k(3)?;
    let trials = c.trials.unwrap_or(100_000);
    if trials == 0 {
        return Err(Usage("--trials must be positive".into()).into());
    }
    let pes = if c.pe.is_empty() { vec![0.1] } else { c.pe.clone() };
    let seed = c.seed.unwrap_or(1);
    let mut ok = true;
    for pe in pes {
        if !(0.0..=1.0).contains(&pe) {
            return Err(Usage(format!("erasure probability {pe} is outside [0, 1]")).into());
        }
        let exact = prob_outputs_equal(users as u64, q as f64, pe);
        let mut stream = RngStream::new(seed, format!("coincidence/{pe}"));
        let est = estimate_outputs_equal(users, q, pe, trials, &mut stream);
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        let pass = (est - exact).abs() <= 3.0 * sigma;
        ok &= pass;
        println!(
            "{} coincidence K={users} Q={q} pe={pe}: closed form {exact:.6}, simulated {est:.6} over {trials} trials (3 sigma {:.6})",
            verdict(pass),
            3.0 * sigma
        );
    }
    Ok(ok)
}

/// Codec invariants on the configured code, over a few seeded trials.
fn invariant_suite(c: &Common) -> Result<bool, Failure> {
    const ROUNDS: u64 = 20;
    let users = c.single_k(10)?;
    let pe = c.pe.first().copied().unwrap_or(0.05);
    let exp = experiment(c.spec(users, &[pe], ROUNDS as usize))?;
    let cfg = &exp.cfg;
    let (mut round_trip, mut complete, mut conserved, mut bounded) = (true, true, true, true);
    for t in 0..ROUNDS {
        let gens = exp.generators(t);
        let payloads = exp.payloads(t, users);
        let cws: Vec<Codeword> = payloads
            .iter()
            .map(|p| encode(p, cfg, &gens))
            .collect::<Result<_, _>>()
            .context("encoding")?;
        round_trip &= cws
            .iter()
            .zip(&payloads)
            .all(|(cw, p)| cw.is_valid(cfg, &gens) && &extract_info_bits(cw, cfg) == p);

        let noiseless = transmit_with(&cws, &ErasurePattern::none(users, cfg.sections), exp.spec.channel);
        let got = decode(&noiseless, cfg, &gens, &exp.policy).codewords;
        if users <= 10 {
            complete &= cws.iter().all(|cw| got.contains(cw));
        }

        let mut stream = RngStream::new(exp.spec.seed, format!("erasure/{t}"));
        let pattern = ErasurePattern::draw(users, cfg.sections, pe, &mut stream);
        let y = transmit_with(&cws, &pattern, ChannelKind::BChannel);
        let kept = users * cfg.sections - pattern.total();
        bounded &= y.total() == kept && y.sections.iter().all(|s| s.cardinality() <= users);
        bounded &= y.flatten().sections.iter().all(|s| s.iter().all(|(_, n)| n == 1));
        let all: Vec<Stitched> = cws
            .iter()
            .enumerate()
            .map(|(k, cw)| Stitched {
                codeword: cw.clone(),
                erased: (0..cfg.sections).filter(|&l| pattern.is_erased(k, l)).collect(),
            })
            .collect();
        conserved &= sic_subtract(&y, &all).total() == 0;
        conserved &= sic_subtract(&y, &all[..users / 2]).total() + all[..users / 2]
            .iter()
            .map(|s| cfg.sections - s.erased.len())
            .sum::<usize>()
            == y.total();
    }
    let mut checks = vec![
        ("encode/extract round trip and parity checks", round_trip),
        ("section cardinality bounds", bounded),
        ("interference cancellation conservation", conserved),
    ];
    if users <= 10 {
        checks.push(("noiseless completeness", complete));
    }
    for (name, pass) in &checks {
        println!("{} {name} ({ROUNDS} trials, K={users}, pe={pe})", verdict(*pass));
    }
    Ok(checks.iter().all(|(_, p)| *p))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

/// Uses the codebook and erasure stream of trial 0.
fn encode_file(c: &Common, input: &Path) -> Result<(), Failure> {
    let pe = match c.pe[..] {
        [] => 0.0,
        [p] => p,
        _ => return Err(Usage("encode takes a single --pe".into()).into()),
    };
    let probe = experiment(c.spec(1, &[pe], 1))?;
    let payloads = files::parse_payloads(&read_input(input)?, probe.cfg.payload_bits())
        .with_context(|| format!("reading {}", input.display()))?;
    if payloads.is_empty() {
        return Err(Failure::Other(anyhow::anyhow!("{}: no payloads", input.display())));
    }
    let exp = experiment(c.spec(payloads.len(), &[pe], 1))?;
    let gens = exp.generators(0);
    let codewords: Vec<Codeword> = payloads
        .iter()
        .map(|p| encode(p, &exp.cfg, &gens))
        .collect::<Result<_, _>>()
        .context("encoding")?;
    let mut stream = RngStream::new(exp.spec.seed, "erasure/0");
    let output = transmit(&codewords, pe, exp.spec.channel, &mut stream);
    let file = ChannelFile {
        spec: exp.spec,
        pe,
        codewords,
        output,
    };
    let mut text = serde_json::to_string_pretty(&file).context("serializing")?;
    text.push('\n');
    write_output(c.out.as_deref(), &text)?;
    Ok(())
}

fn decode_file(input: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let file: ChannelFile = serde_json::from_str(&read_input(input)?).with_context(|| format!("parsing {}", input.display()))?;
    let exp = experiment(file.spec)?;
    if file.output.len() != exp.cfg.sections {
        return Err(Failure::Other(anyhow::anyhow!(
            "{}: {} sections in the output, {} in the code",
            input.display(),
            file.output.len(),
            exp.cfg.sections
        )));
    }
    let gens = exp.generators(0);
    let d = decode(&file.output, &exp.cfg, &gens, &exp.policy);
    let text: String = d.payloads.iter().map(|p| files::format_payload(p) + "\n").collect();
    write_output(out, &text)?;
    if !file.codewords.is_empty() {
        eprintln!(
            "recovered {} codewords for {} users: pdp {:.4} php {:.4}{}",
            d.codewords.len(),
            file.codewords.len(),
            pdp(&file.codewords, &d.codewords).unwrap_or(0.0),
            php(&file.codewords, &d.codewords),
            if d.overloaded { " (list cap hit)" } else { "" }
        );
    }
    Ok(())
}
