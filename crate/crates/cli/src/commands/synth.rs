//! `synth`: generate a synthetic daily rate series.

use ratecast::data::{generate_synthetic, write_series_csv, SyntheticKind};

use crate::args::SynthArgs;
use crate::config::parse_synthetic_kind;
use crate::error::{CliError, CliResult};

/// Refuses flags that belong to a different series family, so a typo like
/// `--kind gbm-walk --period 30` fails loudly instead of being ignored.
fn reject_foreign_flags(kind: &str, foreign: &[(&str, bool)]) -> CliResult<()> {
    for (name, given) in foreign {
        if *given {
            return Err(CliError::Usage(format!(
                "--{name} does not apply to kind {kind}"
            )));
        }
    }
    Ok(())
}

fn build_kind(args: &SynthArgs) -> CliResult<SyntheticKind> {
    // Start from the family defaults, then lay flag overrides on top.
    match parse_synthetic_kind(&args.kind)? {
        SyntheticKind::GbmWalk {
            start,
            drift,
            volatility,
        } => {
            reject_foreign_flags(
                &args.kind,
                &[
                    ("level", args.level.is_some()),
                    ("amplitude", args.amplitude.is_some()),
                    ("period", args.period.is_some()),
                    ("noise", args.noise.is_some()),
                    ("a", args.a.is_some()),
                    ("b", args.b.is_some()),
                    ("c", args.c.is_some()),
                    ("scale", args.scale.is_some()),
                ],
            )?;
            Ok(SyntheticKind::GbmWalk {
                start: args.start.unwrap_or(start),
                drift: args.drift.unwrap_or(drift),
                volatility: args.volatility.unwrap_or(volatility),
            })
        }
        SyntheticKind::NoisySine {
            level,
            amplitude,
            period,
            noise,
        } => {
            reject_foreign_flags(
                &args.kind,
                &[
                    ("start", args.start.is_some()),
                    ("drift", args.drift.is_some()),
                    ("volatility", args.volatility.is_some()),
                    ("a", args.a.is_some()),
                    ("b", args.b.is_some()),
                    ("c", args.c.is_some()),
                    ("scale", args.scale.is_some()),
                ],
            )?;
            Ok(SyntheticKind::NoisySine {
                level: args.level.unwrap_or(level),
                amplitude: args.amplitude.unwrap_or(amplitude),
                period: args.period.unwrap_or(period),
                noise: args.noise.unwrap_or(noise),
            })
        }
        SyntheticKind::NonlinearAr {
            start,
            a,
            b,
            c,
            noise,
            scale,
        } => {
            reject_foreign_flags(
                &args.kind,
                &[
                    ("drift", args.drift.is_some()),
                    ("volatility", args.volatility.is_some()),
                    ("level", args.level.is_some()),
                    ("amplitude", args.amplitude.is_some()),
                    ("period", args.period.is_some()),
                ],
            )?;
            Ok(SyntheticKind::NonlinearAr {
                start: args.start.unwrap_or(start),
                a: args.a.unwrap_or(a),
                b: args.b.unwrap_or(b),
                c: args.c.unwrap_or(c),
                noise: args.noise.unwrap_or(noise),
                scale: args.scale.unwrap_or(scale),
            })
        }
    }
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let kind = build_kind(args)?;
    // Parameter and length problems are invocation problems here: every
    // input to the generator came straight from the flags.
    let series = generate_synthetic(&kind, args.n, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", args.out.display())))?;
    write_series_csv(&series, file)?;
    println!(
        "wrote {} rows of {} (seed {}) to {}",
        series.len(),
        kind.name(),
        args.seed,
        args.out.display()
    );
    Ok(())
}
