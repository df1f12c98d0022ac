use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Arg, ArgAction, Command};

use crate::error::{Error, Result};
use crate::hierarchy::CheckSizes;
use crate::numeric::{parse_vector, Mode, Number};
use crate::potentials::BasisSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandKind {
    Cayley,
    ScanPeriods,
    Caustics,
    Elliptic,
    Simulate,
    CompareModels,
    HierarchyCheck,
    Potential,
}

impl CommandKind {
    pub const ALL: [CommandKind; 8] = [
        CommandKind::Cayley,
        CommandKind::ScanPeriods,
        CommandKind::Caustics,
        CommandKind::Elliptic,
        CommandKind::Simulate,
        CommandKind::CompareModels,
        CommandKind::HierarchyCheck,
        CommandKind::Potential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Cayley => "cayley",
            CommandKind::ScanPeriods => "scan-periods",
            CommandKind::Caustics => "caustics",
            CommandKind::Elliptic => "elliptic",
            CommandKind::Simulate => "simulate",
            CommandKind::CompareModels => "compare-models",
            CommandKind::HierarchyCheck => "hierarchy-check",
            CommandKind::Potential => "potential",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCommand(s.to_string()))
    }

    fn about(self) -> &'static str {
        match self {
            CommandKind::Cayley => "Exact periodicity verdict for Minkowski parameters a, mu and period n",
            CommandKind::ScanPeriods => "Search caustic parameters with period n in a bracket and verify by simulation",
            CommandKind::Caustics => "Confocal caustic parameters of the line x + t v",
            CommandKind::Elliptic => "Elliptic coordinates of a point, or the point of given coordinates",
            CommandKind::Simulate => "Chord billiard inside the boundary quadric",
            CommandKind::CompareModels => "Hyperbolic geodesic billiard against the chord billiard",
            CommandKind::HierarchyCheck => "Involution, conservation and reflection checks of the integrals J_i^k",
            CommandKind::Potential => "Separability report for a basis potential or a Laurent polynomial file",
        }
    }

    /// Accepted keys with their help text.
    fn keys(self) -> &'static [(&'static str, &'static str)] {
        match self {
            CommandKind::Cayley => &[
                ("a", "a_0,...,a_d"),
                ("mu", "mu_1,...,mu_{d-1}"),
                ("n", "period"),
            ],
            CommandKind::ScanPeriods => &[
                ("a", "a_0,...,a_d"),
                ("n", "period"),
                ("bracket", "lo,hi for the free caustic parameter"),
                ("fixed", "the other d-2 caustic parameters"),
                ("grid", "number of scan intervals"),
                ("c", "boundary shift of the Klein image (default 1)"),
                ("eps", "closure tolerance (default 1e-6)"),
            ],
            CommandKind::Caustics => &[("b", "b_1,...,b_d"), ("x", "point on the line"), ("v", "direction")],
            CommandKind::Elliptic => &[
                ("b", "b_1,...,b_d"),
                ("x", "point (to elliptic coordinates)"),
                ("lambda", "elliptic coordinates (to a point)"),
                ("signs", "orthant as +,-,... (default all +)"),
            ],
            CommandKind::Simulate => &[
                ("b", "b_1,...,b_d"),
                ("c", "boundary shift (default b_d/2)"),
                ("start", "launch point inside or on the boundary"),
                ("dir", "launch direction"),
                ("caustic", "launch tangent to these caustic parameters from a random boundary point"),
                ("bounces", "number of bounces"),
                ("closure", "report closure after this many bounces"),
                ("metric", "euclidean | hyperbolic | hyperbolic-ode"),
                ("tol", "integrator tolerance for hyperbolic-ode (default 1e-9)"),
            ],
            CommandKind::CompareModels => &[
                ("b", "b_1,...,b_d"),
                ("c", "boundary shift (default b_d/2)"),
                ("start", "launch point"),
                ("dir", "launch direction"),
                ("bounces", "number of bounces (default 5)"),
                ("tol", "integrator tolerance (default 1e-9)"),
            ],
            CommandKind::HierarchyCheck => &[
                ("b", "b_1,...,b_d (default 5,3,1)"),
                ("k", "hierarchy indices (default -1,0,1,2)"),
                ("states", "interior samples (default 1000)"),
                ("boundary-states", "boundary samples (default 1000)"),
                ("geodesics", "integrated geodesics (default 4)"),
                ("tol", "integrator tolerance (default 1e-9)"),
            ],
            CommandKind::Potential => &[
                ("basis", "basis element such as V3 or W2_1"),
                ("file", "Laurent polynomial file with lines `i_1 ... i_d : p/q`"),
                ("b", "b_1,...,b_d (default 3,2,1)"),
                ("export", "write the polynomial in file format to this path"),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Report,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMetric {
    Euclidean,
    Hyperbolic,
    HyperbolicOde,
}

/// Validated, typed parameters of a command.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Cayley { a: Vec<Number>, mu: Vec<Number>, n: usize },
    ScanPeriods { a: Vec<Number>, n: usize, bracket: (f64, f64), fixed: Vec<Number>, grid: usize, c: Number, eps: f64 },
    Caustics { b: Vec<Number>, x: Vec<Number>, v: Vec<Number> },
    Elliptic { b: Vec<Number>, x: Option<Vec<Number>>, lambda: Option<Vec<f64>>, signs: Vec<bool> },
    Simulate {
        b: Vec<Number>,
        c: Option<Number>,
        start: Option<Vec<f64>>,
        dir: Option<Vec<f64>>,
        caustic: Option<Vec<f64>>,
        bounces: usize,
        closure: Option<usize>,
        metric: SimMetric,
        tol: f64,
    },
    CompareModels { b: Vec<Number>, c: Option<Number>, start: Vec<f64>, dir: Vec<f64>, bounces: usize, tol: f64 },
    HierarchyCheck { b: Vec<Number>, ks: Vec<i32>, sizes: CheckSizes },
    Potential { basis: Option<BasisSpec>, file: Option<PathBuf>, b: Vec<Number>, export: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub command: CommandKind,
    /// Merged raw parameters (configuration file overridden by flags).
    pub params: BTreeMap<String, String>,
    pub request: Request,
    pub mode: Mode,
    pub seed: u64,
    pub output: OutputSpec,
}

fn cli() -> Command {
    let mut root = Command::new("klein-billiards")
        .about("Periodicity criteria and simulations for elliptical billiards in Euclidean and Lobachevsky space")
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("TOML file of parameters; flags win"))
        .arg(Arg::new("out").long("out").global(true).value_name("DIR").help("output directory for report files"))
        .arg(Arg::new("seed").long("seed").global(true).value_name("N").help("random seed (default 0)"))
        .arg(Arg::new("format").long("format").global(true).value_name("report|table"))
        .subcommand_required(false);
    for kind in CommandKind::ALL {
        let mut sub = Command::new(kind.name()).about(kind.about());
        for (key, help) in kind.keys() {
            sub = sub.arg(
                Arg::new(*key).long(*key).value_name("VALUE").help(*help).allow_hyphen_values(true).action(ArgAction::Set),
            );
        }
        root = root.subcommand(sub);
    }
    root
}

fn config_value(v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Array(items) => Ok(items.iter().map(config_value).collect::<Result<Vec<_>>>()?.join(",")),
        _ => Err(Error::Parse("configuration values must be scalars or arrays".into())),
    }
}

/// Parses a TOML configuration into a command name and raw parameters.
pub fn parse_config(text: &str) -> Result<(Option<String>, BTreeMap<String, String>)> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let mut command = None;
    let mut params = BTreeMap::new();
    for (k, v) in &table {
        let value = config_value(v)?;
        if k == "command" {
            command = Some(value);
        } else {
            params.insert(k.clone(), value);
        }
    }
    Ok((command, params))
}

/// Parses `argv` (program name first) and an optional `--config` document
/// into a validated scenario.
pub fn parse_scenario(argv: &[String]) -> Result<Scenario> {
    let matches = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            return Err(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Error::Parse(format!("help:{}", e.render()))
                }
                ErrorKind::InvalidSubcommand => Error::UnknownCommand(
                    argv.iter().skip(1).find(|a| !a.starts_with('-')).cloned().unwrap_or_default(),
                ),
                ErrorKind::UnknownArgument => {
                    let key = e.get(clap::error::ContextKind::InvalidArg).map(|v| v.to_string()).unwrap_or_default();
                    Error::BadParameter { key, expected: "a key accepted by this command".into() }
                }
                _ => Error::Parse(e.to_string().lines().next().unwrap_or_default().to_string()),
            })
        }
    };
    let global = |key: &str| -> Option<String> {
        matches
            .get_one::<String>(key)
            .cloned()
            .or_else(|| matches.subcommand().and_then(|(_, m)| m.get_one::<String>(key).cloned()))
    };
    let (config_command, mut params) = match global("config") {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            parse_config(&text)?
        }
        None => (None, BTreeMap::new()),
    };
    let (command, sub) = match matches.subcommand() {
        Some((name, m)) => (CommandKind::from_name(name)?, Some(m)),
        None => match &config_command {
            Some(name) => (CommandKind::from_name(name)?, None),
            None => return Err(Error::UnknownCommand(String::new())),
        },
    };
    let accepted: Vec<&str> = command.keys().iter().map(|(k, _)| *k).collect();
    for key in params.keys() {
        if !accepted.contains(&key.as_str()) && !["seed", "out", "format"].contains(&key.as_str()) {
            return Err(Error::BadParameter { key: key.clone(), expected: format!("a key accepted by `{}`", command.name()) });
        }
    }
    if let Some(m) = sub {
        for key in &accepted {
            if let Some(v) = m.get_one::<String>(key) {
                params.insert((*key).to_string(), v.clone());
            }
        }
    }
    let seed_text = global("seed").or_else(|| params.remove("seed"));
    let seed = match seed_text {
        Some(s) => s.trim().parse::<u64>().map_err(|_| Error::BadParameter { key: "seed".into(), expected: "a non-negative integer".into() })?,
        None => 0,
    };
    let dir = global("out").or_else(|| params.remove("out")).map(PathBuf::from);
    let format = match global("format").or_else(|| params.remove("format")).as_deref() {
        None | Some("report") => OutputFormat::Report,
        Some("table") => OutputFormat::Table,
        Some(_) => return Err(Error::BadParameter { key: "format".into(), expected: "`report` or `table`".into() }),
    };
    let p = Params(&params);
    let request = build_request(command, &p)?;
    let mode = Mode::of(&p.numbers());
    Ok(Scenario { command, params, request, mode, seed, output: OutputSpec { dir, format } })
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn bad(key: &str, expected: &str) -> Error {
        Error::BadParameter { key: key.into(), expected: expected.into() }
    }

    fn vector(&self, key: &str) -> Result<Option<Vec<Number>>> {
        self.raw(key)
            .map(|s| parse_vector(s).map_err(|_| Self::bad(key, "a comma-separated list of p/q or decimal numbers")))
            .transpose()
    }

    fn required_vector(&self, key: &str) -> Result<Vec<Number>> {
        self.vector(key)?.ok_or_else(|| Self::bad(key, "a value (missing)"))
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        Ok(self.vector(key)?.map(|v| v.iter().map(Number::to_f64).collect()))
    }

    fn number(&self, key: &str) -> Result<Option<Number>> {
        self.raw(key).map(|s| s.parse::<Number>().map_err(|_| Self::bad(key, "a p/q or decimal number"))).transpose()
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.map_or(default, |n| n.to_f64()))
    }

    fn count(&self, key: &str, min: usize, default: Option<usize>) -> Result<usize> {
        let expected = format!("{key} must be ≥ {min}");
        match self.raw(key) {
            None => default.ok_or_else(|| Self::bad(key, &expected)),
            Some(s) => {
                let v: i64 = s.trim().parse().map_err(|_| Self::bad(key, &expected))?;
                if v < min as i64 {
                    return Err(Self::bad(key, &expected));
                }
                Ok(v as usize)
            }
        }
    }

    /// Every numeric value supplied, for the arithmetic-mode label.
    fn numbers(&self) -> Vec<Number> {
        self.0
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "basis" | "file" | "export" | "metric" | "signs" | "k" | "n" | "grid" | "bounces" | "closure" | "states" | "boundary-states" | "geodesics"))
            .flat_map(|(_, v)| parse_vector(v).unwrap_or_default())
            .collect()
    }
}

fn build_request(command: CommandKind, p: &Params<'_>) -> Result<Request> {
    Ok(match command {
        CommandKind::Cayley => {
            let n = p.count("n", 1, None)?;
            Request::Cayley { a: p.required_vector("a")?, mu: p.required_vector("mu")?, n }
        }
        CommandKind::ScanPeriods => {
            let bracket = p.floats("bracket")?.ok_or_else(|| Params::bad("bracket", "lo,hi (missing)"))?;
            if bracket.len() != 2 {
                return Err(Params::bad("bracket", "exactly two numbers lo,hi"));
            }
            Request::ScanPeriods {
                a: p.required_vector("a")?,
                n: p.count("n", 1, None)?,
                bracket: (bracket[0], bracket[1]),
                fixed: p.vector("fixed")?.unwrap_or_default(),
                grid: p.count("grid", 3, Some(400))?,
                c: p.number("c")?.unwrap_or(Number::Exact(crate::numeric::int(1))),
                eps: p.float("eps", 1e-6)?,
            }
        }
        CommandKind::Caustics => {
            Request::Caustics { b: p.required_vector("b")?, x: p.required_vector("x")?, v: p.required_vector("v")? }
        }
        CommandKind::Elliptic => {
            let signs = match p.raw("signs") {
                None => Vec::new(),
                Some(s) => s
                    .split(',')
                    .map(|t| match t.trim() {
                        "+" | "1" | "+1" => Ok(true),
                        "-" | "-1" => Ok(false),
                        _ => Err(Params::bad("signs", "a list of + and -")),
                    })
                    .collect::<Result<_>>()?,
            };
            let x = p.vector("x")?;
            let lambda = p.floats("lambda")?;
            if x.is_some() == lambda.is_some() {
                return Err(Params::bad("x", "exactly one of --x and --lambda"));
            }
            Request::Elliptic { b: p.required_vector("b")?, x, lambda, signs }
        }
        CommandKind::Simulate => {
            let metric = match p.raw("metric") {
                None | Some("euclidean") => SimMetric::Euclidean,
                Some("hyperbolic") => SimMetric::Hyperbolic,
                Some("hyperbolic-ode") => SimMetric::HyperbolicOde,
                Some(_) => return Err(Params::bad("metric", "euclidean, hyperbolic or hyperbolic-ode")),
            };
            let start = p.floats("start")?;
            let caustic = p.floats("caustic")?;
            if start.is_none() && caustic.is_none() {
                return Err(Params::bad("start", "a launch point (or --caustic)"));
            }
            let dir = p.floats("dir")?;
            if start.is_some() && dir.is_none() {
                return Err(Params::bad("dir", "a launch direction (missing)"));
            }
            Request::Simulate {
                b: p.required_vector("b")?,
                c: p.number("c")?,
                start,
                dir,
                caustic,
                bounces: p.count("bounces", 1, None)?,
                closure: p.raw("closure").map(|_| p.count("closure", 1, None)).transpose()?,
                metric,
                tol: p.float("tol", 1e-9)?,
            }
        }
        CommandKind::CompareModels => Request::CompareModels {
            b: p.required_vector("b")?,
            c: p.number("c")?,
            start: p.floats("start")?.ok_or_else(|| Params::bad("start", "a launch point (missing)"))?,
            dir: p.floats("dir")?.ok_or_else(|| Params::bad("dir", "a launch direction (missing)"))?,
            bounces: p.count("bounces", 1, Some(5))?,
            tol: p.float("tol", 1e-9)?,
        },
        CommandKind::HierarchyCheck => {
            let ks = match p.raw("k") {
                None => vec![-1, 0, 1, 2],
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse::<i32>().map_err(|_| Params::bad("k", "a list of integers")))
                    .collect::<Result<_>>()?,
            };
            let default = CheckSizes::default();
            Request::HierarchyCheck {
                b: p.vector("b")?.unwrap_or_else(|| parse_vector("5,3,1").expect("literal")),
                ks,
                sizes: CheckSizes {
                    states: p.count("states", 1, Some(default.states))?,
                    boundary_states: p.count("boundary-states", 1, Some(default.boundary_states))?,
                    geodesics: p.count("geodesics", 0, Some(default.geodesics))?,
                    t_end: default.t_end,
                    tol: p.float("tol", default.tol)?,
                },
            }
        }
        CommandKind::Potential => {
            let basis = p
                .raw("basis")
                .map(|s| s.parse::<BasisSpec>().map_err(|_| Params::bad("basis", "a name such as V3 or W2_1")))
                .transpose()?;
            let file = p.raw("file").map(PathBuf::from);
            if basis.is_none() == file.is_none() {
                return Err(Params::bad("basis", "exactly one of --basis and --file"));
            }
            Request::Potential {
                basis,
                file,
                b: p.vector("b")?.unwrap_or_else(|| parse_vector("3,2,1").expect("literal")),
                export: p.raw("export").map(PathBuf::from),
            }
        }
    })
}
