use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multiprice::audit::{audit, AuditReport};
use multiprice::cohort::{build_profiles, default_catalog, simulate_cohort, CohortConfig, QualityDraw};
use multiprice::elicit::{elicit_bisect, elicit_rowscan, Method};
use multiprice::error::{ElicitError, IoError};
use multiprice::io::{
    apply_overrides, fmt_money, read_dataset, read_text, write_dataset, write_text, RawConfig, RunConfig,
    ScenarioChoice, Subcommand as ConfigSubcommand,
};
use multiprice::model::catalog;
use multiprice::regions::{boundary_trace, region_grid, BoundaryPair, Choice, RegionSpec};
use multiprice::stats::{
    cdf_points, cohort_means, fe_ols, paired_t_test, positive_value_records, sign_test, summarize_subjects,
    wilcoxon_rank_sum, wilcoxon_signed_rank, CohortMean, FixedEffects, Grouping, RegressionResult,
    SubjectSummary, SubjectType,
};
use multiprice::ModelSpec;

#[derive(Parser)]
#[command(name = "multiprice", version, about = "Choice-model MPL elicitation, audits, simulation and analysis")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, env = "MPL_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set model=rn-kinked --set lambda=2`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit the injective, symmetry and linearity conditions (configured model or full catalog).
    Check {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Elicit one switch point.
    Elicit {
        /// Print the CSV header line first.
        #[arg(long)]
        header: bool,
    },
    /// Simulate a cohort and write the dataset CSV plus a provenance sidecar.
    Simulate {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Analyze a dataset CSV.
    Analyze {
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Directory for the report and CSV tables.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Predicted choice regions over a price grid.
    Regions {
        /// Directory for regions.csv and boundaries.csv.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn kind(&self) -> ConfigSubcommand {
        match self {
            Command::Check { .. } => ConfigSubcommand::Check,
            Command::Elicit { .. } => ConfigSubcommand::Elicit,
            Command::Simulate { .. } => ConfigSubcommand::Simulate,
            Command::Analyze { .. } => ConfigSubcommand::Analyze,
            Command::Regions { .. } => ConfigSubcommand::Regions,
        }
    }
}

enum Failure {
    Validation(String),
    Degenerate(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Degenerate(m) | Failure::Io(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::File { .. } => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(invalid)?;
    }
    let text = match &cli.config {
        Some(path) => read_text(path)?,
        None => String::new(),
    };
    let raw = apply_overrides(&text, &cli.set)?;
    let config = raw.validate()?;
    if let Some(sub) = config.subcommand {
        if sub != cli.command.kind() {
            return Err(invalid(format!(
                "config is for `{}` but `{}` was invoked",
                sub.label(),
                cli.command.kind().label()
            )));
        }
    }
    match cli.command {
        Command::Check { csv } => check(&config, csv.as_deref()),
        Command::Elicit { header } => elicit(&config, header),
        Command::Simulate { output } => simulate(&raw, &config, output.or(config.output.clone())),
        Command::Analyze { input, output } => analyze(&config, input.or(config.input.clone()), output.or(config.output.clone())),
        Command::Regions { output } => regions(&config, output.or(config.output.clone())),
    }
}

fn require_model(config: &RunConfig) -> Result<ModelSpec, Failure> {
    config.model.ok_or_else(|| invalid("a `model` is required"))
}

fn check(config: &RunConfig, csv: Option<&Path>) -> Outcome {
    let models: Vec<(String, ModelSpec)> = match config.model {
        Some(m) => vec![(m.to_string(), m)],
        None => catalog().into_iter().map(|(n, m)| (n.to_string(), m)).collect(),
    };
    let reports: Vec<(String, AuditReport)> = models
        .into_iter()
        .map(|(name, m)| audit(&m, &config.audit_grid).map(|r| (name, r)).map_err(invalid))
        .collect::<Result<_, _>>()?;
    let mark = |b: bool| if b { "yes" } else { "no" };
    println!(
        "{:<32} {:<14} {:<14} {:<14} {:<6} {:<10} {:<8}",
        "model", "injective", "symmetry", "linearity", "m-MPL", "p-ign/sep", "p-comb"
    );
    let mut table = String::from("model,injective,symmetry,linearity,m_mpl,p_ignore_separate,p_combine\n");
    for (name, r) in &reports {
        let acc = r.accuracy();
        println!(
            "{:<32} {:<14} {:<14} {:<14} {:<6} {:<10} {:<8}",
            name,
            r.injective.label(),
            r.symmetry.label(),
            r.linearity.label(),
            mark(acc.m_mpl),
            mark(acc.p_ignore_or_separate),
            mark(acc.p_combine)
        );
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            name,
            r.injective,
            r.symmetry,
            r.linearity,
            acc.m_mpl,
            acc.p_ignore_or_separate,
            acc.p_combine
        );
    }
    if let Some(path) = csv {
        write_text(path, &table)?;
    }
    Ok(())
}

fn elicit(config: &RunConfig, header: bool) -> Outcome {
    let model = require_model(config)?;
    let q = config.q.ok_or_else(|| invalid("`q` is required"))?;
    let scenario = config.scenario_or(ScenarioChoice::M);
    let result = match config.method {
        Method::RowScan => elicit_rowscan(&model, &scenario, q, &config.mpl),
        Method::Bisection => elicit_bisect(&model, &scenario, q, &config.mpl, config.tolerance),
    };
    let result = match result {
        Ok(r) => r,
        Err(ElicitError::NoCrossing) => return Err(Failure::Degenerate(ElicitError::NoCrossing.to_string())),
        Err(e) => return Err(invalid(e)),
    };
    if header {
        println!("model,scenario,q,switch_point,crossings,clamped");
    }
    println!(
        "{},{},{},{},{},{}",
        model,
        scenario.kind.label(),
        fmt_money(q),
        result.switch_point.map(fmt_money).unwrap_or_default(),
        result.crossing_count,
        result.clamped.label()
    );
    match result.switch_point {
        Some(_) => Ok(()),
        None => Err(Failure::Degenerate(format!(
            "no switch within the list (always prefers the product up to {})",
            fmt_money(config.mpl.max_value())
        ))),
    }
}

fn simulate(raw: &RawConfig, config: &RunConfig, output: Option<PathBuf>) -> Outcome {
    let model = require_model(config)?;
    let output = output.ok_or_else(|| invalid("an output path is required"))?;
    let p_scenario = config.scenario_or(ScenarioChoice::Ignore);
    if p_scenario.kind == multiprice::elicit::ScenarioKind::MMoney {
        return Err(invalid("the p-block scenario must be ignore, separate or combine"));
    }
    let catalog = default_catalog();
    let qualities = match &config.qualities {
        Some(list) => QualityDraw::Fixed(list.clone()),
        None => QualityDraw::Uniform {
            lo: config.quality_range.0,
            hi: config.quality_range.1,
        },
    };
    let cohort = CohortConfig {
        subjects: config.subjects,
        model,
        p_scenario,
        qualities,
        noise_sd: config.noise_sd,
        mp_subjects: config.mp_subjects,
    };
    let profiles = build_profiles(&cohort, &catalog, config.master_seed).map_err(invalid)?;
    let dataset = simulate_cohort(&profiles, &catalog, &config.mpl, config.master_seed).map_err(invalid)?;
    write_dataset(&dataset, &output)?;
    let mut sidecar_path = output.clone().into_os_string();
    sidecar_path.push(".provenance.toml");
    let sidecar = format!(
        "tool = \"multiprice {}\"\nseed = {}\nconfig_sha256 = \"{}\"\nrecords = {}\nirregular_elicitations = {}\n\n[config]\n{}",
        env!("CARGO_PKG_VERSION"),
        config.master_seed,
        raw.digest(),
        dataset.records.len(),
        dataset.diagnostics.len(),
        raw.canonical_toml()
    );
    write_text(Path::new(&sidecar_path), &sidecar)?;
    println!(
        "wrote {} records for {} subjects to {}",
        dataset.records.len(),
        profiles.len(),
        output.display()
    );
    Ok(())
}

fn opt_money(v: Option<f64>) -> String {
    v.map(fmt_money).unwrap_or_default()
}

fn fmt_p(p: f64) -> String {
    format!("{p:.3e}")
}

fn group_means(summaries: &[SubjectSummary]) -> Vec<CohortMean> {
    let mut out = Vec::new();
    if let Ok(mut m) = cohort_means(summaries, Grouping::Pooled) {
        out.append(&mut m);
    }
    for t in [multiprice::cohort::Treatment::Mp, multiprice::cohort::Treatment::Pm] {
        let subset: Vec<SubjectSummary> = summaries.iter().filter(|s| s.treatment == t).cloned().collect();
        if let Ok(mut m) = cohort_means(&subset, Grouping::Pooled) {
            m[0].group = t.label().to_string();
            out.append(&mut m);
        }
    }
    out
}

fn analyze(config: &RunConfig, input: Option<PathBuf>, out_dir: Option<PathBuf>) -> Outcome {
    let input = input.ok_or_else(|| invalid("an input dataset is required"))?;
    let dataset = read_dataset(&input)?;
    let summaries = summarize_subjects(&dataset, &config.analysis).map_err(invalid)?;
    let active: Vec<&SubjectSummary> = summaries.iter().filter(|s| !s.is_empty()).collect();
    let pairs: Vec<(f64, f64)> = active
        .iter()
        .map(|s| (s.individual_m.unwrap_or(0.0), s.individual_p.unwrap_or(0.0)))
        .collect();
    let diffs: Vec<f64> = pairs.iter().map(|(m, p)| m - p).collect();
    let means = group_means(&summaries);

    let mut report = String::new();
    let _ = writeln!(report, "dataset: {}", input.display());
    let _ = writeln!(
        report,
        "records: {}  subjects: {}  with qualifying products: {}",
        dataset.records.len(),
        summaries.len(),
        active.len()
    );
    let _ = writeln!(
        report,
        "settings: include_nonpositive={} significance={} equal_value_rule={} outlier_cutoff={}",
        config.analysis.include_nonpositive,
        config.analysis.significance,
        config.analysis.equal_value_rule.label(),
        config.analysis.outlier_cutoff.map(fmt_money).unwrap_or_else(|| "off".into())
    );
    let _ = writeln!(report, "\nmeans of individual switch points");
    let _ = writeln!(report, "{:<8} {:>4} {:>8} {:>8} {:>8} {:>8}", "group", "n", "mean_m", "sd_m", "mean_p", "sd_p");
    for m in &means {
        let _ = writeln!(
            report,
            "{:<8} {:>4} {:>8} {:>8} {:>8} {:>8}",
            m.group,
            m.n_subjects,
            fmt_money(m.mean_m),
            fmt_money(m.sd_m),
            fmt_money(m.mean_p),
            fmt_money(m.sd_p)
        );
    }
    let _ = writeln!(report, "\nsign test (individual m vs p)");
    match sign_test(&pairs) {
        Ok(t) => {
            let _ = writeln!(report, "  I={} I_m={} I_p={} p={}", t.n, t.n_m, t.n_p, fmt_p(t.p_value));
        }
        Err(e) => {
            let _ = writeln!(report, "  not computed: {e}");
        }
    }
    let _ = writeln!(report, "secondary tests");
    match paired_t_test(&pairs) {
        Ok(t) => {
            let _ = writeln!(report, "  paired t: t={:.4} p={}", t.statistic, fmt_p(t.p_value));
        }
        Err(e) => {
            let _ = writeln!(report, "  paired t: not computed: {e}");
        }
    }
    match wilcoxon_signed_rank(&pairs) {
        Ok(t) => {
            let _ = writeln!(report, "  signed-rank: W+={:.1} n={} p={}", t.statistic, t.n, fmt_p(t.p_value));
        }
        Err(e) => {
            let _ = writeln!(report, "  signed-rank: not computed: {e}");
        }
    }
    let (ms, ps): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    match wilcoxon_rank_sum(&ms, &ps) {
        Ok(t) => {
            let _ = writeln!(report, "  rank-sum: R_m={:.1} p={}", t.statistic, fmt_p(t.p_value));
        }
        Err(e) => {
            let _ = writeln!(report, "  rank-sum: not computed: {e}");
        }
    }
    let count = |t: SubjectType| summaries.iter().filter(|s| s.subject_type == t).count();
    let _ = writeln!(
        report,
        "\nclassification: m-high={} p-high={} unclassified={}",
        count(SubjectType::MHigh),
        count(SubjectType::PHigh),
        count(SubjectType::Unclassified)
    );

    let reg_data = if config.analysis.include_nonpositive {
        dataset.clone()
    } else {
        positive_value_records(&dataset)
    };
    let specs = match config.fixed_effects {
        Some(fe) => vec![fe],
        None => vec![FixedEffects::None, FixedEffects::Subject, FixedEffects::SubjectProduct],
    };
    let mut results: Vec<RegressionResult> = Vec::new();
    let _ = writeln!(report, "\nregression: switch ~ block + price + block x price (clustered by subject)");
    for fe in specs {
        match fe_ols(&reg_data, fe) {
            Ok(r) => {
                let price = r
                    .price
                    .map(|e| format!("{:.3} ({:.3})", e.coef, e.std_error))
                    .unwrap_or_else(|| "absorbed".into());
                let _ = writeln!(
                    report,
                    "  fe={:<16} block={:.3} ({:.3}) price={} block_x_price={:.3} ({:.3}) const={:.3} ({:.3}) n={} clusters={}",
                    fe.label(),
                    r.block.coef,
                    r.block.std_error,
                    price,
                    r.block_price.coef,
                    r.block_price.std_error,
                    r.constant.coef,
                    r.constant.std_error,
                    r.n_observations,
                    r.n_clusters
                );
                results.push(r);
            }
            Err(e) => {
                let _ = writeln!(report, "  fe={:<16} not estimated: {e}", fe.label());
            }
        }
    }
    print!("{report}");

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        write_text(&dir.join("report.txt"), &report)?;
        let mut subjects = String::from(
            "subject_id,treatment,individual_m,individual_p,n_positive,n_nonpositive,n_equal_value,n_outliers,abs_m_score,abs_p_score,adjusted_m_score,adjusted_p_score,k,threshold,type\n",
        );
        for s in &summaries {
            let _ = writeln!(
                subjects,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.subject_id,
                s.treatment.label(),
                opt_money(s.individual_m),
                opt_money(s.individual_p),
                s.n_positive,
                s.n_nonpositive,
                s.n_equal_value,
                s.n_outliers,
                s.abs_m_score,
                s.abs_p_score,
                s.adjusted_m_score,
                s.adjusted_p_score,
                s.k,
                s.threshold.map(|t| t.to_string()).unwrap_or_default(),
                s.subject_type.label()
            );
        }
        write_text(&dir.join("subjects.csv"), &subjects)?;
        let mut means_csv = String::from("group,n_subjects,mean_m,sd_m,mean_p,sd_p\n");
        for m in &means {
            let _ = writeln!(
                means_csv,
                "{},{},{},{},{},{}",
                m.group,
                m.n_subjects,
                fmt_money(m.mean_m),
                fmt_money(m.sd_m),
                fmt_money(m.mean_p),
                fmt_money(m.sd_p)
            );
        }
        write_text(&dir.join("means.csv"), &means_csv)?;
        let mut cdf = String::from("difference,cumulative_fraction\n");
        if let Ok(points) = cdf_points(&diffs) {
            for (v, f) in points {
                let _ = writeln!(cdf, "{},{f:.6}", fmt_money(v));
            }
        }
        write_text(&dir.join("cdf.csv"), &cdf)?;
        let mut reg = String::from("fixed_effects,term,coef,std_error,n_observations,n_clusters\n");
        for r in &results {
            let terms = [
                ("block", Some(r.block)),
                ("price", r.price),
                ("block_x_price", Some(r.block_price)),
                ("constant", Some(r.constant)),
            ];
            for (term, e) in terms {
                let (c, se) = e.map_or((String::new(), String::new()), |e| {
                    (format!("{:.6}", e.coef), format!("{:.6}", e.std_error))
                });
                let _ = writeln!(
                    reg,
                    "{},{term},{c},{se},{},{}",
                    r.fixed_effects.label(),
                    r.n_observations,
                    r.n_clusters
                );
            }
        }
        write_text(&dir.join("regression.csv"), &reg)?;
    }
    Ok(())
}

fn regions(config: &RunConfig, out_dir: Option<PathBuf>) -> Outcome {
    let model = require_model(config)?;
    let lq = config.lq.ok_or_else(|| invalid("`lq` is required"))?;
    let hq = config.hq.ok_or_else(|| invalid("`hq` is required"))?;
    let spec = RegionSpec::with_axes(lq, hq, model, config.price_axis, config.price_axis).map_err(invalid)?;
    let grid = region_grid(&spec).map_err(invalid)?;
    println!("model {model}, lq={} hq={}", fmt_money(lq), fmt_money(hq));
    println!("cells: {}", grid.cells.len());
    for c in [Choice::High, Choice::Low, Choice::Outside] {
        println!("  {}: {}", c.label(), grid.count(c));
    }
    println!("  ties: {}", grid.cells.iter().filter(|c| c.tie).count());

    let mut cells = String::from("lp,hp,label,tie,degenerate,v_h,v_l\n");
    for c in &grid.cells {
        let _ = writeln!(
            cells,
            "{},{},{},{},{},{:.9},{:.9}",
            fmt_money(c.lp),
            fmt_money(c.hp),
            c.choice.label(),
            c.tie,
            c.degenerate,
            c.v_h,
            c.v_l
        );
    }
    let mut bounds = String::from("pair,lp,hp,value_gap\n");
    for pair in BoundaryPair::all() {
        match boundary_trace(&grid, pair) {
            Ok(points) => {
                println!("boundary {}: {} points", pair.label(), points.len());
                for p in points {
                    let _ = writeln!(bounds, "{},{:.6},{:.6},{:.3e}", pair.label(), p.lp, p.hp, p.value_gap);
                }
            }
            Err(_) => println!("boundary {}: none", pair.label()),
        }
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        write_text(&dir.join("regions.csv"), &cells)?;
        write_text(&dir.join("boundaries.csv"), &bounds)?;
    }
    Ok(())
}
