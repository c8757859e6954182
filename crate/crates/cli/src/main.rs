mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn parse_args() -> anyhow::Result<Cli> {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let args = match config::scan(&raw) {
        (Some(path), Some(sub)) => {
            let extra = config::flags_from_file(Path::new(&path), sub)?;
            config::splice(raw, sub, extra)
        }
        _ => raw,
    };
    Ok(Cli::parse_from(args))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let result = parse_args().and_then(|cli| match cli.command {
        Command::GenData(a) => commands::gen_data(&a),
        Command::Part1(a) => commands::part1(&a),
        Command::Part2(a) => commands::part2(&a),
        Command::Infer(a) => commands::infer(&a),
        Command::Serve(a) => commands::serve(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
