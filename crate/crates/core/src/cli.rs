//! Command-line experiments. Every run is a pure function of its arguments
//! and seed; outputs are collected first and written by the caller.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::continued_fractions::{cylinder_interval, ratio_bounds_check, words};
use crate::fractal_ifs::{box_counting_dimension, iterate_attractor, presets, similarity_dimension};
use crate::friendly_measures::{decay_estimate, doubling_report, measure_by_name, DecayReading};
use crate::game::{limit_enclosure, resolve_support, Ball, Game, GameConfig, Point};
use crate::linear_forms::{badness_infimum, final_badness_bound, schedule_windows, LinearFormsMatrix, TheoremSchedule};
use crate::rational::{self, format_rational, parse_rational, parse_rational_list, Rational};
use crate::strategies::{self, BlackCantorZero, RandomLegal, WindimParams};
use crate::svg::SvgPlot;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "schmidt", version, about = "Schmidt games, badly approximable forms and friendly measures")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Primary output file; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Secondary JSON summary for CSV-emitting commands.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub summary: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Play and inspect games.
    #[command(subcommand)]
    Game(GameCmd),
    /// Running minimum of `‖x‖^{N/M}·dist(Ax, ℤ^M)` up to a cap.
    Badness(BadnessArgs),
    /// Continued-fraction cylinders.
    #[command(subcommand)]
    Cf(CfCmd),
    /// Self-similar sets.
    #[command(subcommand)]
    Ifs(IfsCmd),
    /// Friendliness checks on cell measures.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Stage windows of the lattice schedule.
    #[command(subcommand)]
    Theorem(TheoremCmd),
    /// Runs an experiment described by a JSON file.
    Run(RunArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameCmd {
    Play(PlayArgs),
    /// Black pins the outcome at 0 on the Cantor set.
    WindimDemo(WindimArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PlayArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub beta: String,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long, default_value = "lazy")]
    pub white: String,
    /// JSON parameter record for White.
    #[arg(long, default_value = "{}")]
    pub white_params: String,
    #[arg(long, default_value = "lazy")]
    pub black: String,
    #[arg(long, default_value = "{}")]
    pub black_params: String,
    /// Comma separated coordinates of the first center; the origin by default.
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value = "1")]
    pub radius: String,
    #[arg(long, default_value_t = 10)]
    pub rounds: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct WindimArgs {
    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 30)]
    pub rounds: u32,
    /// Independent games, each against a differently seeded random White.
    #[arg(long, default_value_t = 1)]
    pub games: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct BadnessArgs {
    /// JSON array of rows of `p/q`, decimal, `phi`, `sqrt(k)` or `cbrt(k)` strings.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub cap: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CfCmd {
    Cylinders(CylinderArgs),
    /// Child/parent length ratios against `(1/12, 1/2)`.
    RatioCheck(RatioArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CylinderArgs {
    #[arg(long, default_value = "1,3")]
    pub alphabet: String,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long, default_value = "1,3")]
    pub alphabet: String,
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IfsCmd {
    Render(RenderArgs),
    Dim(DimArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[arg(long)]
    pub preset: String,
    #[arg(long, default_value_t = 6)]
    pub depth: u32,
    #[arg(long)]
    #[serde(skip)]
    pub svg: Option<PathBuf>,
    /// Joins cell centers in word order.
    #[arg(long)]
    pub polyline: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DimArgs {
    #[arg(long)]
    pub preset: String,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Comma separated box sizes; powers of the largest ratio by default.
    #[arg(long)]
    pub scales: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureCmd {
    Doubling(MeasureArgs),
    Decay(MeasureArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    #[arg(long)]
    pub preset: String,
    /// Comma separated radii ρ.
    #[arg(long, default_value = "1/9,1/27,1/81,1/243,1/729,1/2187,1/6561")]
    pub scales: String,
    /// Bracketing depth; 24 on the line, 10 in the plane when absent.
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Depth of the random cells whose sample points are the centers.
    #[arg(long, default_value_t = 20)]
    pub sample_depth: u32,
    /// Values of `ε/ρ` for the decay check.
    #[arg(long, default_value = "1,1/3,1/9,1/27")]
    pub eps_ratios: String,
    /// Inner radius `r` as a multiple of `ρ` in the decay check.
    #[arg(long, default_value = "1")]
    pub r_over_rho: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremCmd {
    Schedule(ScheduleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ScheduleArgs {
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long = "N", default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub stages: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    pub spec: PathBuf,
}

/// A stored experiment: the arguments after the program name, and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        if spec.command.is_empty() {
            return Err(Error::Usage("experiment command is empty".into()));
        }
        if spec.command[0] == "run" {
            return Err(Error::Usage("experiments cannot nest `run`".into()));
        }
        Ok(spec)
    }

    pub fn argv(&self) -> Vec<String> {
        let mut argv = vec!["schmidt".to_string()];
        argv.extend(self.command.iter().cloned());
        argv.extend(["--seed".to_string(), self.seed.to_string()]);
        if let Some(out) = &self.out {
            argv.extend(["--out".to_string(), out.clone()]);
        }
        if let Some(s) = &self.summary {
            argv.extend(["--summary".to_string(), s.clone()]);
        }
        argv
    }

    pub fn parse(&self) -> Result<Cli, Error> {
        Cli::try_parse_from(self.argv()).map_err(|e| Error::Usage(e.to_string()))
    }
}

/// Artifacts of one run, not yet written.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn primary(&mut self, out: &Option<PathBuf>, text: String) {
        match out {
            Some(p) => self.files.push((p.clone(), text)),
            None => self.stdout.push_str(&text),
        }
    }

    /// Summary JSON beside a CSV: `--summary`, else `<out>.summary.json`, else stderr.
    fn summary(&mut self, cli: &Cli, text: String) {
        match (&cli.summary, &cli.out) {
            (Some(p), _) => self.files.push((p.clone(), text)),
            (None, Some(out)) => {
                let mut name = out.clone().into_os_string();
                name.push(".summary.json");
                self.files.push((PathBuf::from(name), text));
            }
            (None, None) => self.stderr.push_str(&text),
        }
    }

    pub fn write(&self) -> Result<(), Error> {
        for (path, text) in &self.files {
            std::fs::write(path, text).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }
}

fn name_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::Game(GameCmd::Play(_)) => "game play",
        Command::Game(GameCmd::WindimDemo(_)) => "game windim-demo",
        Command::Badness(_) => "badness",
        Command::Cf(CfCmd::Cylinders(_)) => "cf cylinders",
        Command::Cf(CfCmd::RatioCheck(_)) => "cf ratio-check",
        Command::Ifs(IfsCmd::Render(_)) => "ifs render",
        Command::Ifs(IfsCmd::Dim(_)) => "ifs dim",
        Command::Measure(MeasureCmd::Doubling(_)) => "measure doubling",
        Command::Measure(MeasureCmd::Decay(_)) => "measure decay",
        Command::Theorem(TheoremCmd::Schedule(_)) => "theorem schedule",
        Command::Run(_) => "run",
    }
}

/// Command name, parameters and seed, echoed into every JSON output.
fn spec_of(cli: &Cli) -> Value {
    let params = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let params = match params {
        Value::Object(mut outer) if outer.len() == 1 => {
            let (_, inner) = outer.iter_mut().next().expect("one entry");
            match inner.take() {
                Value::Object(mut sub) if sub.len() == 1 && sub.values().all(Value::is_object) => {
                    sub.values_mut().next().expect("one entry").take()
                }
                other => other,
            }
        }
        other => other,
    };
    json!({"command": name_of(&cli.command), "params": params, "seed": cli.seed})
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_alphabet(s: &str) -> Result<Vec<u64>, Error> {
    s.split(',')
        .map(|d| {
            d.trim()
                .parse::<u64>()
                .map_err(|_| Error::Usage(format!("alphabet digit `{d}` is not a positive integer")))
        })
        .collect()
}

/// Parses `argv` (program name first) and runs it.
pub fn execute<I, T>(argv: I) -> Result<Outcome, Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    let mut o = Outcome::default();
    match &cli.command {
        Command::Game(GameCmd::Play(a)) => game_play(cli, a, &mut o)?,
        Command::Game(GameCmd::WindimDemo(a)) => windim_demo(cli, a, &mut o)?,
        Command::Badness(a) => badness(cli, a, &mut o)?,
        Command::Cf(CfCmd::Cylinders(a)) => cf_cylinders(cli, a, &mut o)?,
        Command::Cf(CfCmd::RatioCheck(a)) => ratio_check(cli, a, &mut o)?,
        Command::Ifs(IfsCmd::Render(a)) => ifs_render(cli, a, &mut o)?,
        Command::Ifs(IfsCmd::Dim(a)) => ifs_dim(cli, a, &mut o)?,
        Command::Measure(MeasureCmd::Doubling(a)) => measure(cli, a, false, &mut o)?,
        Command::Measure(MeasureCmd::Decay(a)) => measure(cli, a, true, &mut o)?,
        Command::Theorem(TheoremCmd::Schedule(a)) => schedule(cli, a, &mut o)?,
        Command::Run(a) => {
            let text = read(&a.spec)?;
            let spec = ExperimentSpec::from_json(&text)?;
            return run(&spec.parse()?);
        }
    }
    Ok(o)
}

/// Runs and writes outputs; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    if let Err(e) = outcome.write() {
        eprintln!("error: {e}");
        return 1;
    }
    outcome.code
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn game_play(cli: &Cli, a: &PlayArgs, o: &mut Outcome) -> Result<(), Error> {
    let mut cfg = GameConfig::new(parse_rational(&a.alpha)?, parse_rational(&a.beta)?, a.dim)?;
    cfg.max_rounds = cfg.max_rounds.max(a.rounds);
    let game = match &a.support {
        Some(id) => Game::with_support(cfg.with_support(id.clone()), resolve_support(id)?)?,
        None => Game::new(cfg)?,
    };
    let center = match &a.center {
        Some(c) => Point::new(parse_rational_list(c)?),
        None => Point::origin(a.dim),
    };
    let initial = Ball::new(center, parse_rational(&a.radius)?)?;
    let wp: Value = serde_json::from_str(&a.white_params)?;
    let bp: Value = serde_json::from_str(&a.black_params)?;
    let mut white = strategies::by_name(&a.white, &wp, cli.seed)?;
    let mut black = strategies::by_name(&a.black, &bp, cli.seed.wrapping_add(1))?;
    let t = game.play(white.as_mut(), black.as_mut(), initial, a.rounds)?;
    let limit = limit_enclosure(&t).ok();
    let report = json!({
        "spec": spec_of(cli),
        "legal": t.is_legal(),
        "limit": limit,
        "transcript": t,
    });
    o.primary(&cli.out, pretty(&report));
    Ok(())
}

fn windim_demo(cli: &Cli, a: &WindimArgs, o: &mut Outcome) -> Result<(), Error> {
    if a.games == 0 {
        return Err(Error::Usage("--games must be positive".into()));
    }
    let params = WindimParams::new(a.n)?;
    let game = Game::with_support(params.config(a.rounds.max(1)), resolve_support("cantor")?)?;
    let mut failures = 0u32;
    let mut zero_outside = 0u32;
    let mut first = None;
    for g in 0..a.games {
        let mut white = RandomLegal::new(ChaCha8Rng::seed_from_u64(cli.seed.wrapping_add(g as u64)));
        let mut black = BlackCantorZero::new(params.clone());
        let t = game.play(&mut white, &mut black, params.initial_ball(), a.rounds)?;
        let black_ok = t.legality.iter().skip(2).step_by(2).all(|&ok| ok) && t.balls.len() == 2 * a.rounds as usize + 1;
        if !black_ok {
            failures += 1;
        }
        match limit_enclosure(&t) {
            Ok(b) if b.contains_point(&Point::origin(1)) => {}
            _ => zero_outside += 1,
        }
        if first.is_none() {
            first = Some(t);
        }
    }
    let report = json!({
        "spec": spec_of(cli),
        "alpha": format_rational(&params.alpha()),
        "beta": format_rational(&params.beta()),
        "games": a.games,
        "black_failures": failures,
        "limit_misses_zero": zero_outside,
        "transcript": first,
    });
    o.primary(&cli.out, pretty(&report));
    if failures > 0 || zero_outside > 0 {
        o.code = EXIT_CHECK_FAILED;
    }
    Ok(())
}

fn badness(cli: &Cli, a: &BadnessArgs, o: &mut Outcome) -> Result<(), Error> {
    let m = LinearFormsMatrix::from_json(&read(&a.matrix)?)?;
    let r = badness_infimum(&m, a.cap)?;
    let mut csv = String::from("cap[norm_inf],running_min[dimensionless],witness[integer_vector]\n");
    for p in &r.trace {
        let w: Vec<String> = p.witness.iter().map(i64::to_string).collect();
        let _ = writeln!(csv, "{},{:.17e},{}", p.cap, p.value, w.join(";"));
    }
    o.primary(&cli.out, csv);
    o.summary(cli, pretty(&json!({"spec": spec_of(cli), "result": r})));
    Ok(())
}

fn cf_cylinders(cli: &Cli, a: &CylinderArgs, o: &mut Outcome) -> Result<(), Error> {
    let alphabet = parse_alphabet(&a.alphabet)?;
    if a.depth == 0 || a.depth > 20 {
        return Err(Error::Usage("--depth must lie in 1..=20".into()));
    }
    let all = words(&alphabet, a.depth);
    let mass = Rational::new(1.into(), num_bigint::BigInt::from(alphabet.len()).pow(a.depth as u32));
    let mut csv = String::from("word[digits],lo[exact],hi[exact],length[exact],measure[exact]\n");
    for w in &all {
        let c = cylinder_interval(w)?;
        let digits: Vec<String> = w.digits().iter().map(u64::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            digits.join("."),
            format_rational(&c.lo),
            format_rational(&c.hi),
            format_rational(&c.length()),
            format_rational(&mass)
        );
    }
    o.primary(&cli.out, csv);
    Ok(())
}

fn ratio_check(cli: &Cli, a: &RatioArgs, o: &mut Outcome) -> Result<(), Error> {
    let alphabet = parse_alphabet(&a.alphabet)?;
    if a.depth > 22 {
        return Err(Error::Usage("--depth above 22 is too large".into()));
    }
    let r = ratio_bounds_check(a.depth, &alphabet)?;
    o.primary(&cli.out, pretty(&json!({"spec": spec_of(cli), "report": r})));
    if !r.within_bounds {
        o.code = EXIT_CHECK_FAILED;
    }
    Ok(())
}

fn attractor_points(preset: &str, depth: u32) -> Result<(Vec<[f64; 2]>, usize), Error> {
    let ifs = presets::by_name(preset)?;
    let d = ifs.dim();
    let seed = Ball::new(Point::new(vec![rational::ratio(1, 2); d]), rational::ratio(1, 2))?;
    let approx = iterate_attractor(&ifs, depth, &seed)?;
    let pts = approx
        .points()
        .map(|p| if d == 1 { [p[0], 0.0] } else { [p[0], p[1]] })
        .collect();
    Ok((pts, d))
}

fn ifs_render(cli: &Cli, a: &RenderArgs, o: &mut Outcome) -> Result<(), Error> {
    let (pts, _) = attractor_points(&a.preset, a.depth)?;
    let mut plot = SvgPlot::fitted(640.0, 640.0, &pts);
    plot.title(&format!("{} depth {}", a.preset, a.depth));
    if a.polyline {
        plot.polyline(&pts, "#1f77b4");
    }
    plot.scatter(&pts, 1.2, "black");
    let text = plot.finish();
    match &a.svg {
        Some(p) => {
            o.files.push((p.clone(), text));
            o.primary(&cli.out, pretty(&json!({"spec": spec_of(cli), "points": pts.len()})));
        }
        None => o.primary(&cli.out, text),
    }
    Ok(())
}

fn ifs_dim(cli: &Cli, a: &DimArgs, o: &mut Outcome) -> Result<(), Error> {
    let ifs = presets::by_name(&a.preset)?;
    let seed = Ball::new(Point::new(vec![rational::ratio(1, 2); ifs.dim()]), rational::ratio(1, 2))?;
    let approx = iterate_attractor(&ifs, a.depth, &seed)?;
    let scales: Vec<f64> = match &a.scales {
        Some(s) => parse_rational_list(s)?.iter().map(rational::to_f64).collect(),
        None => {
            let r = ifs.max_ratio();
            (1..a.depth).map(|k| r.powi(k as i32)).collect()
        }
    };
    let fit = box_counting_dimension(&approx, &scales)?;
    let mut csv = String::from("scale[length],boxes[count]\n");
    for (s, n) in &fit.counts {
        let _ = writeln!(csv, "{s:.17e},{n}");
    }
    o.primary(&cli.out, csv);
    o.summary(
        cli,
        pretty(&json!({
            "spec": spec_of(cli),
            "estimate": fit.estimate,
            "similarity_dimension": similarity_dimension(&ifs),
            "residuals": fit.residuals,
        })),
    );
    Ok(())
}

fn measure(cli: &Cli, a: &MeasureArgs, decay: bool, o: &mut Outcome) -> Result<(), Error> {
    let m = measure_by_name(&a.preset)?;
    let depth = a.depth.unwrap_or(if m.dim() == 1 { 24 } else { 10 });
    let scales = parse_rational_list(&a.scales)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let centers = m.sample_centers(a.samples, a.sample_depth, &mut rng)?;
    let mut csv = String::new();
    let summary = if decay {
        let eps = parse_rational_list(&a.eps_ratios)?;
        let reading = DecayReading {
            r_over_rho: parse_rational(&a.r_over_rho)?,
        };
        let fit = decay_estimate(&m, &centers, &scales, &eps, depth, &reading)?;
        csv.push_str("scale[length],eps_over_rho[dimensionless],worst_ratio[dimensionless]\n");
        for r in &fit.rows {
            let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e}", r.scale, r.eps_ratio, r.worst_ratio);
        }
        json!({"spec": spec_of(cli), "a": fit.a, "c_fit": fit.c_fit, "c_envelope": fit.c_envelope, "residuals": fit.residuals})
    } else {
        let r = doubling_report(&m, &centers, &scales, depth)?;
        csv.push_str("center[coords],scale[length],half_lower[mass],full_upper[mass],ratio[dimensionless]\n");
        for s in &r.samples {
            let c: Vec<String> = s.center.iter().map(|x| format!("{x:.17e}")).collect();
            let _ = writeln!(
                csv,
                "{},{},{},{},{:.17e}",
                c.join(";"),
                format_rational(&s.scale),
                format_rational(&s.half_lower),
                format_rational(&s.full_upper),
                rational::to_f64(&s.ratio)
            );
        }
        json!({"spec": spec_of(cli), "estimate": r.estimate, "per_scale": r.per_scale})
    };
    o.primary(&cli.out, csv);
    o.summary(cli, pretty(&summary));
    Ok(())
}

fn schedule(cli: &Cli, a: &ScheduleArgs, o: &mut Outcome) -> Result<(), Error> {
    let s = TheoremSchedule::new(a.r, a.m, a.n)?;
    let windows: Vec<_> = (0..=a.stages).map(|i| schedule_windows(&s, i)).collect();
    let report = json!({
        "spec": spec_of(cli),
        "L": s.l(),
        "lambda": s.lambda(),
        "delta": s.delta(),
        "delta_t": s.delta_t(),
        "final_bound": final_badness_bound(&s),
        "windows": windows,
    });
    o.primary(&cli.out, pretty(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        execute(std::iter::once("schmidt").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ratio_check_passes_and_embeds_spec() {
        let o = run_args(&["cf", "ratio-check", "--depth", "6"]);
        assert_eq!(o.code, EXIT_OK);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["spec"]["command"], "cf ratio-check");
        assert_eq!(v["spec"]["params"]["depth"], 6);
        assert_eq!(v["report"]["within_bounds"], true);
    }

    #[test]
    fn ratio_check_failure_exit_code() {
        let o = run_args(&["cf", "ratio-check", "--depth", "3", "--alphabet", "1,2,9"]);
        assert_eq!(o.code, EXIT_CHECK_FAILED);
    }

    #[test]
    fn cylinders_csv() {
        let o = run_args(&["cf", "cylinders", "--depth", "1"]);
        let lines: Vec<&str> = o.stdout.lines().collect();
        assert_eq!(lines[0], "word[digits],lo[exact],hi[exact],length[exact],measure[exact]");
        assert_eq!(lines[1], "1,1/2,1/1,1/2,1/2");
        assert_eq!(lines[2], "3,1/4,1/3,1/12,1/2");
    }

    #[test]
    fn invalid_input_is_an_error() {
        assert!(execute(["schmidt", "cf", "ratio-check", "--alphabet", "0"]).is_err());
        assert!(execute(["schmidt", "theorem", "schedule", "--R", "1"]).is_err());
        assert_eq!(main_with(["schmidt", "nonsense"]), EXIT_INVALID);
    }

    #[test]
    fn windim_demo_is_deterministic() {
        let a = run_args(&["game", "windim-demo", "--N", "2", "--rounds", "5", "--games", "3", "--seed", "9"]);
        let b = run_args(&["game", "windim-demo", "--N", "2", "--rounds", "5", "--games", "3", "--seed", "9"]);
        assert_eq!(a, b);
        assert_eq!(a.code, EXIT_OK);
    }

    #[test]
    fn experiment_spec_round_trip() {
        let spec = ExperimentSpec::from_json(r#"{"command": ["theorem", "schedule", "--R", "2"], "seed": 3}"#).unwrap();
        let cli = spec.parse().unwrap();
        assert_eq!(cli.seed, 3);
        let o = run(&cli).unwrap();
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["final_bound"], 2f64.powi(-10));
        assert!(ExperimentSpec::from_json(r#"{"command": ["run", "x"]}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"command": []}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"command": ["cf"], "extra": 1}"#).is_err());
    }
}
