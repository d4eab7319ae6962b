use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cardframe::{GroupStrategy, JoinMode};
use cardframe_bench::commands::{self, Format};
use cardframe_bench::{Failure, Knobs, QueryId};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cardframe",
    version,
    about = "Generate data, run and benchmark analytical queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the mini TPC-H tables as MFB files.
    Gen {
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write `<table>.tbl` and `<table>.schema` files here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Convert delimited text tables to MFB.
    Convert {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one catalog query and report timings.
    Query {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        id: QueryId,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = GroupbyArg::Transposed)]
        groupby: GroupbyArg,
        #[arg(long, value_enum, default_value_t = JoinArg::Hash)]
        join: JoinArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Time queries across thread counts and every strategy mode.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<QueryId>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupbyArg {
    Transposed,
    Incremental,
}

#[derive(Clone, Copy, ValueEnum)]
enum JoinArg {
    Hash,
    Sortmerge,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            scale,
            seed,
            out: dir,
            csv,
        } => commands::gen(scale, seed, &dir, csv.as_deref(), out),
        Command::Convert {
            csv,
            schema,
            out: dir,
        } => commands::convert(&csv, &schema, &dir, out),
        Command::Query {
            data,
            id,
            threads,
            groupby,
            join,
            format,
        } => {
            if threads == 0 {
                return Err(Failure::Usage("threads must be at least 1".into()));
            }
            let knobs = Knobs {
                threads,
                groupby: match groupby {
                    GroupbyArg::Transposed => GroupStrategy::Transposed,
                    GroupbyArg::Incremental => GroupStrategy::Incremental,
                },
                join: match join {
                    JoinArg::Hash => JoinMode::Hash,
                    JoinArg::Sortmerge => JoinMode::SortMerge,
                },
            };
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Table => Format::Table,
            };
            commands::query(&data, id, knobs, format, out)
        }
        Command::Bench {
            data,
            ids,
            threads,
            repeats,
        } => commands::bench(&data, &ids, &threads, repeats, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
