use narygw::solver::CriticalFamily;
use narygw::{LawSpec, OffspringLaw};

use crate::args::LawArgs;
use crate::CliError;

fn need<T>(value: Option<T>, flag: &str, law: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--law {law} needs --{flag}")))
}

pub fn spec(args: &LawArgs) -> Result<LawSpec, CliError> {
    let name = args.law.trim();
    if name.starts_with('{') {
        return serde_json::from_str(name).map_err(|e| CliError::Usage(format!("bad law JSON: {e}")));
    }
    let spec = match name {
        "geometric" => match (args.p, args.m) {
            (Some(p), None) => LawSpec::Geometric { p },
            (None, Some(m)) => LawSpec::geometric_with_mean(m),
            _ => return Err(CliError::Usage("--law geometric needs exactly one of --p, --m".into())),
        },
        "fractional-linear" => LawSpec::FractionalLinear {
            p: need(args.p, "p", name)?,
            b: need(args.b, "b", name)?,
        },
        "poisson" => LawSpec::Poisson { m: need(args.m, "m", name)? },
        "one-or-many" => LawSpec::OneOrMany {
            p: need(args.p, "p", name)?,
            r: need(args.r, "r", name)?,
        },
        "generic" => {
            if args.coeffs.is_empty() {
                return Err(CliError::Usage("--law generic needs --coeffs".into()));
            }
            LawSpec::Generic { coeffs: args.coeffs.clone() }
        }
        other => return Err(CliError::Usage(format!("unknown law {other:?}"))),
    };
    Ok(spec)
}

pub fn build(args: &LawArgs) -> Result<OffspringLaw, CliError> {
    Ok(OffspringLaw::new(spec(args)?)?)
}

/// Critical values are searched over a family, so only its name (and `r`)
/// matter.
pub fn critical_family(args: &LawArgs) -> Result<CriticalFamily, CliError> {
    match args.law.trim() {
        "geometric" => Ok(CriticalFamily::Geometric),
        "poisson" => Ok(CriticalFamily::Poisson),
        "one-or-many" => Ok(CriticalFamily::OneOrMany { r: need(args.r, "r", "one-or-many")? }),
        other => Err(CliError::Usage(format!(
            "critical values are available for geometric, poisson and one-or-many, not {other:?}"
        ))),
    }
}
