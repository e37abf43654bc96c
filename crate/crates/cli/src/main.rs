use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use moc_core::session::{replay, Command, ImproveCommand, Workspace};
use moc_core::Error;

/// Modular character tables: basic sets, proofs and their log.
#[derive(Parser, Debug)]
#[command(name = "moc", version)]
struct Cli {
    /// Group name; files are kept as `<group>.<prime>*`.
    #[arg(long, short = 'g', global = true)]
    group: Option<String>,
    #[arg(long, short = 'p', global = true)]
    prime: Option<u64>,
    /// Workspace directory.
    #[arg(long, global = true, env = "MOC_WORKSPACE", default_value = ".")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Create the workspace files.
    Init {
        /// Store integers in the base 10^4 word encoding.
        #[arg(long)]
        legacy: bool,
    },
    /// Store an ordinary table in MOC format.
    ImportTable { file: PathBuf },
    /// Print the p-blocks with their defects.
    Blocks,
    /// Choose BS0 in a block, or load a basic pair from matrices.
    Basicset(BasicSetArgs),
    /// Certify Brauer and projective characters as a basic pair.
    Certify {
        #[arg(long, value_delimiter = ',', required = true)]
        bs: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        ps: Vec<String>,
    },
    /// Induce a character of a subgroup.
    Induce(TransferArgs),
    /// Restrict a character of a supergroup.
    Restrict(TransferArgs),
    /// Tensor two characters (table labels or pool ids).
    Tensor { a: String, b: String },
    /// Symmetrization of a character.
    Symmetrize {
        #[arg(long, value_delimiter = ',', required = true)]
        partition: Vec<u64>,
        operand: String,
    },
    /// Improve the basic sets.
    #[command(subcommand)]
    Improve(ImproveCmd),
    /// Integer programs.
    #[command(subcommand)]
    Ilp(IlpCmd),
    /// Mark the projective atoms of the basic set.
    Atoms,
    /// Print the state.
    Status,
    /// Print how a character was obtained.
    Trace { id: String },
    /// Re-run the commands of an info log in this (empty) workspace.
    Replay { log: PathBuf },
}

#[derive(Args, Debug)]
struct BasicSetArgs {
    #[arg(long, conflicts_with = "matrices", required_unless_present = "matrices")]
    block: Option<usize>,
    #[arg(long, value_delimiter = ',', requires = "block")]
    rows: Vec<String>,
    /// Scalar products of BS with PS.
    #[arg(long)]
    matrices: Option<PathBuf>,
    /// Further Brauer characters over BS.
    #[arg(long, requires = "matrices")]
    brauer: Option<PathBuf>,
    /// Further projectives over PS.
    #[arg(long, requires = "matrices")]
    projective: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', requires = "matrices")]
    names: Vec<String>,
}

#[derive(Args, Debug)]
struct TransferArgs {
    /// The other group.
    #[arg(long)]
    from: String,
    /// Its table; defaults to `<from>.tbl` in the workspace.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Images of the classes of the subgroup.
    #[arg(long, value_delimiter = ',', required = true)]
    fusion: Vec<String>,
    operand: String,
}

#[derive(Subcommand, Debug)]
enum ImproveCmd {
    Pimtest {
        #[arg(long)]
        column: Option<usize>,
    },
    Subtract {
        #[arg(long)]
        pim: usize,
        #[arg(long)]
        from: String,
    },
    Triangular,
    Split {
        #[arg(long)]
        column: usize,
    },
    Prune,
    Parity,
}

#[derive(Subcommand, Debug)]
enum IlpCmd {
    /// Minimize c·x subject to A·x ≤ b, x ≥ 0 integral.
    Solve { file: PathBuf },
}

fn read(p: &PathBuf) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn column(n: usize) -> anyhow::Result<usize> {
    n.checked_sub(1).ok_or_else(|| anyhow!("projectives are numbered from 1"))
}

fn to_command(cli: &Cli) -> anyhow::Result<Command> {
    Ok(match &cli.command {
        Cmd::Init { legacy } => Command::Init { legacy: *legacy },
        Cmd::ImportTable { file } => Command::ImportTable {
            group: cli.group.clone().ok_or_else(|| anyhow!("--group is required"))?,
            text: read(file)?,
        },
        Cmd::Blocks => Command::Blocks,
        Cmd::Basicset(a) => match (&a.matrices, a.block) {
            (Some(m), _) => Command::BasicSetMatrices {
                u: read(m)?,
                brauer: a.brauer.as_ref().map(read).transpose()?,
                projective: a.projective.as_ref().map(read).transpose()?,
                names: a.names.clone(),
            },
            (None, Some(block)) => Command::BasicSet { block, rows: a.rows.clone() },
            (None, None) => return Err(anyhow!("give --block or --matrices")),
        },
        Cmd::Certify { bs, ps } => Command::Certify { bs: bs.clone(), ps: ps.clone() },
        Cmd::Induce(t) | Cmd::Restrict(t) => {
            let path = t.table.clone().unwrap_or_else(|| cli.workspace.join(format!("{}.tbl", t.from)));
            let (from, table, fusion, operand) = (t.from.clone(), read(&path)?, t.fusion.clone(), t.operand.clone());
            if matches!(cli.command, Cmd::Induce(_)) {
                Command::Induce { from, table, fusion, operand }
            } else {
                Command::Restrict { from, table, fusion, operand }
            }
        }
        Cmd::Tensor { a, b } => Command::Tensor { a: a.clone(), b: b.clone() },
        Cmd::Symmetrize { partition, operand } => {
            Command::Symmetrize { partition: partition.clone(), operand: operand.clone() }
        }
        Cmd::Improve(c) => Command::Improve(match c {
            ImproveCmd::Pimtest { column: c } => ImproveCommand::PimTest { column: c.map(column).transpose()? },
            ImproveCmd::Subtract { pim, from } => ImproveCommand::Subtract { pim: column(*pim)?, from: from.clone() },
            ImproveCmd::Triangular => ImproveCommand::Triangular,
            ImproveCmd::Split { column: c } => ImproveCommand::Split { column: column(*c)? },
            ImproveCmd::Prune => ImproveCommand::Prune,
            ImproveCmd::Parity => ImproveCommand::Parity,
        }),
        Cmd::Ilp(IlpCmd::Solve { file }) => Command::IlpSolve { problem: read(file)? },
        Cmd::Atoms => Command::Atoms,
        Cmd::Status => Command::Status,
        Cmd::Trace { id } => Command::Trace { id: id.clone() },
        Cmd::Replay { .. } => unreachable!("handled separately"),
    })
}

fn workspace(cli: &Cli) -> anyhow::Result<Workspace> {
    let group = cli.group.as_deref().ok_or_else(|| anyhow!("--group is required"))?;
    let prime = cli.prime.ok_or_else(|| anyhow!("--prime is required"))?;
    Ok(Workspace::new(&cli.workspace, group, prime)?)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Cmd::Ilp(IlpCmd::Solve { file }) = &cli.command {
        // no workspace needed
        let p = moc_core::ilp::IlpProblem::parse(&read(file)?)?;
        match moc_core::ilp::gomory_solve(&p, false, moc_core::ilp::DEFAULT_PIVOT_LIMIT)? {
            moc_core::ilp::IlpOutcome::Optimum { x, value } => {
                println!("optimum {value}");
                let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                println!("x {}", xs.join(" "));
            }
            moc_core::ilp::IlpOutcome::Infeasible => println!("infeasible"),
            moc_core::ilp::IlpOutcome::Aborted { .. } => {
                return Err(Error::Inconclusive("pivot limit reached".into()).into())
            }
        }
        return Ok(());
    }
    let ws = workspace(cli)?;
    if let Cmd::Replay { log } = &cli.command {
        let outs = replay(&read(log)?, &ws)?;
        println!("replayed {} commands", outs.len());
        return Ok(());
    }
    let out = ws.run_command(&to_command(cli)?)?;
    for l in &out.lines {
        println!("{l}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moc: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(err) => err.exit_code(),
                None => 2,
            };
            ExitCode::from(code as u8)
        }
    }
}
