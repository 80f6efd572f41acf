use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use patternquest_core::evaluator::{
    evaluate, render_report, Instrument, InterpretationScale, ReportFormat, SurveyResponseSet,
};
use patternquest_core::pattern_bank::generate_batch;
use patternquest_core::simulator::{expected_turns_oracle, run_games, BotPolicy, SimReport, SimSetup};
use patternquest_core::{Difficulty, GameSession, GeneratorConfig, SessionRules, SessionSetup};
use serde::Serialize;

use crate::clock::SystemClock;
use crate::config::{load_board, ServiceConfig};
use crate::service::{SeedPolicy, Service};

#[derive(Debug, Parser)]
#[command(name = "patternquest", version, about = "Number-pattern snakes and ladders: service and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Play one game in the terminal, one answer per line.
    Play(PlayArgs),
    /// Bot simulations and the exact expected game length.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Survey evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Print question cards as JSON.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Base seed for sessions started without a seed header (test mode only).
    #[arg(long, requires = "test_mode")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Accept the x-session-seed header and report session seeds.
    #[arg(long)]
    pub test_mode: bool,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// File with one answer per line (0-3 or a-d); stdin when absent.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value = "easy")]
    pub difficulty: Difficulty,
    #[arg(long, default_value = "default30")]
    pub board: PathBuf,
    /// Print only the final transcript as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Monte Carlo bot games.
    Run {
        #[arg(long)]
        accuracy: f64,
        #[arg(long, default_value_t = 10_000)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "default30")]
        board: PathBuf,
        #[arg(long, default_value = "easy")]
        difficulty: Difficulty,
    },
    /// Exact expected turns for a bot that never answers wrong.
    Oracle {
        #[arg(long, default_value = "default30")]
        board: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Item and driver means with interpretations.
    Report {
        /// Response CSV; the bundled fixture when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Instrument CSV; the bundled 13-item instrument when absent.
        #[arg(long)]
        instrument: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value = "easy")]
    pub difficulty: Difficulty,
    /// Generator TOML with `[easy]`, `[medium]` and `[hard]` tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Serve(args) => serve(args),
        Command::Play(args) => play(args),
        Command::Sim(cmd) => sim(cmd),
        Command::Eval(cmd) => eval(cmd),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), String> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| e.to_string())?;
    writeln!(out).map_err(|e| e.to_string())
}

fn serve(args: ServeArgs) -> Result<(), String> {
    let config = match &args.config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    let seeds = if args.test_mode {
        SeedPolicy::TestMode { base: args.seed }
    } else {
        SeedPolicy::Entropy
    };
    let service = Service::open(&args.data_dir, config, Arc::new(SystemClock), seeds).map_err(|e| e.message)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(crate::http::serve(Arc::new(service), args.bind))
}

fn play(args: PlayArgs) -> Result<(), String> {
    let board = load_board(&args.board)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let mut session = GameSession::start(SessionSetup {
        session_id: format!("local-{seed}"),
        player_id: "local".into(),
        board,
        difficulty: args.difficulty,
        rules: SessionRules::default(),
        seed,
    });
    let input: Box<dyn BufRead> = match &args.script {
        Some(p) => Box::new(std::io::BufReader::new(
            std::fs::File::open(p).map_err(|e| format!("{}: {e}", p.display()))?,
        )),
        None => Box::new(std::io::stdin().lock()),
    };
    let mut answers = input
        .lines()
        .map_while(Result::ok)
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let config = GeneratorConfig::default();
    let say = |line: String| {
        if !args.json {
            println!("{line}");
        }
    };
    say(format!(
        "seed {seed}, board {} ({} tiles), difficulty {}",
        session.board.name(),
        session.board.tile_count(),
        session.difficulty
    ));
    while !session.phase().is_terminal() {
        let turn = session.transcript().len() + 1;
        let pending = session.roll(&config).map_err(|e| e.to_string())?.clone();
        let stem: Vec<String> = pending.card.stem.iter().map(i64::to_string).collect();
        let choices: Vec<String> = pending
            .card
            .choices
            .iter()
            .zip('a'..)
            .map(|(c, l)| format!("{l}) {c}"))
            .collect();
        say(format!("turn {turn}: rolled {}", pending.dice));
        say(format!("  {}, ?", stem.join(", ")));
        say(format!("  {}", choices.join("   ")));
        let Some(line) = answers.next() else {
            eprintln!("input ended before the game finished");
            break;
        };
        let choice = parse_choice(&line).ok_or_else(|| format!("turn {turn}: cannot read answer `{line}`"))?;
        let rec = session.answer(choice).map_err(|e| e.to_string())?;
        say(format!(
            "  {}  position {} -> {}, lifelines {}",
            rec.feedback.message(),
            rec.position_before,
            rec.position_after,
            rec.lifelines_after
        ));
    }
    if args.json {
        print_json(&session.transcript())
    } else {
        say(format!(
            "{:?} after {} turns, {} points",
            session.phase(),
            session.transcript().len(),
            session.total_points()
        ));
        Ok(())
    }
}

/// `0`-`3` or `a`-`d`.
fn parse_choice(s: &str) -> Option<usize> {
    match s.to_ascii_lowercase().as_str() {
        "a" => Some(0),
        "b" => Some(1),
        "c" => Some(2),
        "d" => Some(3),
        other => other.parse().ok(),
    }
}

#[derive(Serialize)]
struct SimOutput<'a> {
    board: &'a str,
    difficulty: Difficulty,
    #[serde(flatten)]
    report: SimReport,
}

fn sim(cmd: SimCommand) -> Result<(), String> {
    match cmd {
        SimCommand::Run {
            accuracy,
            games,
            seed,
            board,
            difficulty,
        } => {
            let board = load_board(&board)?;
            let policy = BotPolicy::new(accuracy, seed).map_err(|e| e.to_string())?;
            let mut setup = SimSetup::new(board, SessionRules::default());
            setup.difficulty = difficulty;
            let report = run_games(&setup, &policy, games).map_err(|e| e.to_string())?;
            print_json(&SimOutput {
                board: setup.board.name(),
                difficulty,
                report,
            })
        }
        SimCommand::Oracle { board } => {
            let board = load_board(&board)?;
            let result = expected_turns_oracle(&board).map_err(|e| e.to_string())?;
            print_json(&result.report(board.name()))
        }
    }
}

fn eval(cmd: EvalCommand) -> Result<(), String> {
    let EvalCommand::Report {
        input,
        instrument,
        format,
    } = cmd;
    let instrument = match instrument {
        Some(p) => Instrument::load(p).map_err(|e| e.to_string())?,
        None => Instrument::default(),
    };
    let responses = match input {
        Some(p) => SurveyResponseSet::load(p, &instrument).map_err(|e| e.to_string())?,
        None => SurveyResponseSet::fixture(),
    };
    let report = evaluate(&instrument, &responses, &InterpretationScale::default()).map_err(|e| e.to_string())?;
    print!("{}", render_report(&report, format));
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), String> {
    let config = match &args.config {
        Some(p) => GeneratorConfig::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => GeneratorConfig::default(),
    };
    print_json(&generate_batch(args.seed, args.count, args.difficulty, &config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn choices_parse() {
        assert_eq!(parse_choice("B"), Some(1));
        assert_eq!(parse_choice("3"), Some(3));
        assert_eq!(parse_choice("x"), None);
    }
}
