use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use monolil_core::chernoff::{
    airy_tail_density, airy_tail_integrated, airy_tail_probability, empirical_tail,
    sample_chernoff, AiryTailParams, SamplerMethod,
};
use monolil_core::grenander::fit;
use monolil_core::harness::{
    lil_trace, limit_distribution_check, mixing_distribution_check, sample_density,
    DistributionReport, ExampleDensity, ReferenceGrid,
};
use monolil_core::rng::stream_rng;
use monolil_core::stats::{ks_distance, mean_and_se, quantiles, REPORT_PROBS};
use monolil_core::strassen::{min_energy_given_argmax, sup_t};
use monolil_core::switching::{random_sweep, sweep_fit, SweepReport, TIE_RULE};
use monolil_core::SortedSample;

use crate::config::{LilMode, MethodArg, RunConfig, SubcommandName};
use crate::output::{summary_table, Cell, OutputDir, Table};
use crate::Failure;

/// Files written by a command, plus a property violation if one was found.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub violation: Option<String>,
}

pub fn run(config: &RunConfig) -> Result<Outcome, Failure> {
    let mut out =
        OutputDir::create(&config.out, config.format, config.metadata()).map_err(Failure::Io)?;
    let violation = match config.subcommand {
        SubcommandName::Estimate => estimate(config, &mut out)?,
        SubcommandName::Chernoff => chernoff(config, &mut out)?,
        SubcommandName::Strassen => strassen(config, &mut out)?,
        SubcommandName::Lil => lil(config, &mut out)?,
        SubcommandName::Switching => switching(config, &mut out)?,
    };
    Ok(Outcome {
        files: out.written().to_vec(),
        violation,
    })
}

fn write(out: &mut OutputDir, t: &Table) -> Result<(), Failure> {
    out.write(t).map(|_| ()).map_err(Failure::Io)
}

/// Observations from a text file: one number per line, `#` comments.
pub fn read_observations(path: &Path) -> Result<SortedSample, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Config)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body.parse().map_err(|_| {
            Failure::Config(anyhow::anyhow!(
                "{}:{}: not a number: {body:?}",
                path.display(),
                i + 1
            ))
        })?;
        values.push(v);
    }
    SortedSample::from_unsorted(values)
        .with_context(|| format!("invalid observations in {}", path.display()))
        .map_err(Failure::Config)
}

fn config_sample(config: &RunConfig) -> Result<SortedSample, Failure> {
    match &config.input {
        Some(path) => read_observations(path),
        None => {
            let d = ExampleDensity::new(config.density.expect("validated"));
            let mut rng = stream_rng(config.seed.expect("validated"), 0);
            Ok(sample_density(&d, config.n.expect("validated"), &mut rng)?)
        }
    }
}

fn estimate(config: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, Failure> {
    let sample = config_sample(config)?;
    let f = fit(&sample)?;
    let n = f.ecdf().n();

    let mut ecdf = Table::new("ecdf", &["x", "count", "cumulative_count", "cdf"]);
    ecdf.push(vec![0.0.into(), 0u64.into(), 0u64.into(), 0.0.into()]);
    let cdf = f.ecdf();
    for ((&x, &c), &cum) in cdf
        .jump_points()
        .iter()
        .zip(cdf.counts())
        .zip(cdf.cumulative_counts())
    {
        ecdf.push(vec![
            x.into(),
            c.into(),
            cum.into(),
            (cum as f64 / n as f64).into(),
        ]);
    }
    write(out, &ecdf)?;

    let m = f.majorant();
    let mut knots = Table::new("majorant", &["x", "y"]);
    for (x, y) in m.knot_xs().iter().zip(m.knot_ys()) {
        knots.push(vec![(*x).into(), y.into()]);
    }
    write(out, &knots)?;

    let xs = m.knot_xs();
    let mut dens = Table::new("grenander", &["left", "right", "density"]);
    dens.note(
        "continuity",
        "left (value on (left, right]); zero past the last knot",
    );
    for (j, &s) in m.slopes().iter().enumerate() {
        dens.push(vec![xs[j].into(), xs[j + 1].into(), s.into()]);
    }
    write(out, &dens)?;

    let mix = f.mixing();
    let mut g = Table::new("mixing", &["left", "right", "mixing_cdf"]);
    g.note("continuity", "right (value on [left, right))");
    for (j, &level) in mix.levels().iter().enumerate() {
        g.push(vec![xs[j].into(), xs[j + 1].into(), level.into()]);
    }
    g.push(vec![
        (*xs.last().expect("nonempty")).into(),
        f64::INFINITY.into(),
        mix.terminal().into(),
    ]);
    write(out, &g)?;

    let mix_ok = mix.levels().windows(2).all(|w| w[0] <= w[1]);
    Ok((!mix_ok).then(|| "mixing estimate is not nondecreasing".to_string()))
}

fn methods(m: MethodArg) -> Vec<SamplerMethod> {
    match m {
        MethodArg::Argmin => vec![SamplerMethod::Argmin],
        MethodArg::Slope => vec![SamplerMethod::Slope],
        MethodArg::Both => vec![SamplerMethod::Argmin, SamplerMethod::Slope],
    }
}

/// Per-method streams are keyed apart so the samplers see independent paths.
fn method_seed(seed: u64, m: SamplerMethod) -> u64 {
    monolil_core::rng::derive_seed(seed, m.as_str())
}

fn chernoff(config: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, Failure> {
    let n = config.n.expect("validated");
    let seed = config.seed.expect("validated");
    let (l, delta) = (
        config.grid_l.expect("validated"),
        config.grid_delta.expect("validated"),
    );
    let ms = methods(config.method.expect("validated"));
    let sets = ms
        .iter()
        .map(|&m| {
            log::info!("drawing {n} values by {}", m.as_str());
            sample_chernoff(m, n, l, delta, method_seed(seed, m))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cols = vec!["index"];
    cols.extend(ms.iter().map(|m| m.as_str()));
    let mut draws = Table::new("chernoff_draws", &cols);
    for i in 0..n {
        let mut row = vec![Cell::from(i)];
        row.extend(sets.iter().map(|s| Cell::from(s.draws[i])));
        draws.push(row);
    }
    write(out, &draws)?;

    let mut summary = Table::new(
        "chernoff_summary",
        &cols
            .iter()
            .map(|c| if *c == "index" { "statistic" } else { c })
            .collect::<Vec<_>>(),
    );
    let stat_row = |name: String, f: &dyn Fn(&[f64]) -> f64| {
        let mut row = vec![Cell::from(name)];
        row.extend(sets.iter().map(|s| Cell::from(f(&s.draws))));
        row
    };
    summary.push(stat_row("mean".into(), &|d| mean_and_se(d).0));
    summary.push(stat_row("standard_error".into(), &|d| mean_and_se(d).1));
    summary.push(stat_row("variance".into(), &|d| {
        let (m, _) = mean_and_se(d);
        d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() as f64 - 1.0)
    }));
    for p in REPORT_PROBS {
        summary.push(stat_row(format!("q{p}"), &|d| quantiles(d, &[p])[0]));
    }
    if sets.len() == 2 {
        let ks = ks_distance(&sets[0].draws, &sets[1].draws);
        summary.push(vec!["ks_argmin_vs_slope".into(), ks.into(), ks.into()]);
    }
    for m in &ms {
        summary.note(&format!("seed_{}", m.as_str()), method_seed(seed, *m));
    }
    write(out, &summary)?;

    if config.tail {
        let p = AiryTailParams::default();
        let mut tcols = vec!["z"];
        let emp_names: Vec<String> = ms
            .iter()
            .map(|m| format!("empirical_{}", m.as_str()))
            .collect();
        tcols.extend(emp_names.iter().map(String::as_str));
        tcols.extend([
            "tail_from_density",
            "survival_displayed",
            "density_asymptote",
        ]);
        let mut tail = Table::new("chernoff_tail", &tcols);
        tail.note("a1", p.a1);
        tail.note("ai_prime_a1", p.ai_prime_a1);
        tail.note(
            "columns",
            "tail_from_density integrates density_asymptote over (z, inf); survival_displayed has no a1 term",
        );
        for k in 3..=8 {
            let z = 0.25 * k as f64;
            let mut row = vec![Cell::from(z)];
            row.extend(sets.iter().map(|s| Cell::from(empirical_tail(&s.draws, z))));
            row.push(airy_tail_integrated(z, &p)?.into());
            row.push(airy_tail_probability(z, &p)?.into());
            row.push(airy_tail_density(z, &p)?.into());
            tail.push(row);
        }
        write(out, &tail)?;
    }
    Ok(None)
}

fn strassen(config: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, Failure> {
    let eta = config.grid_eta.expect("validated");
    let h = config.grid_h.expect("validated");
    let mut curve = Table::new(
        "strassen_energy",
        &[
            "t0",
            "energy",
            "four_thirds_t0_cubed",
            "relative_error",
            "iterations",
            "max_violation",
        ],
    );
    for k in 0..=18 {
        let t0 = 0.3 + 0.05 * k as f64;
        let sol = min_energy_given_argmax(t0, eta)?;
        let exact = sol.continuum_energy();
        curve.push(vec![
            t0.into(),
            sol.energy.into(),
            exact.into(),
            ((sol.energy - exact) / exact).into(),
            sol.iterations.into(),
            sol.max_violation.into(),
        ]);
    }
    write(out, &curve)?;

    log::info!("bisecting for M at eta = {eta}");
    let r = sup_t(eta)?;
    let half = sup_t(eta / 2.0)?;
    let ext = &r.extremal;
    let mut profile = Table::new("strassen_extremal", &["u", "gdot", "two_u"]);
    profile.note("t0", ext.t0);
    profile.note("energy", ext.energy);
    for (u, g) in ext.cell_midpoints().into_iter().zip(&ext.gdot_opt) {
        profile.push(vec![u.into(), (*g).into(), (2.0 * u).into()]);
    }
    write(out, &profile)?;

    let target = 0.75f64.cbrt();
    let embedded = ext.to_grid_function(h)?;
    let argmax = monolil_core::strassen::argmax_quadratic(&embedded, 1.0, 1.0, 0.0)?;
    let summary = summary_table(
        "strassen_summary",
        vec![
            ("M", r.value.into()),
            ("bracket_low", r.bracket.0.into()),
            ("bracket_high", r.bracket.1.into()),
            ("bisection_steps", r.bisection_steps.into()),
            ("target_three_quarters_cube_root", target.into()),
            ("abs_error", (r.value - target).abs().into()),
            ("M_at_half_eta", half.value.into()),
            ("refinement_gap", (r.value - half.value).abs().into()),
            ("extremal_energy", ext.energy.into()),
            (
                "extremal_sup_gap_to_2u",
                ext.sup_distance_to_linear().into(),
            ),
            (
                "extremal_argmax_of_g_minus_t_squared",
                argmax.location.into(),
            ),
            ("cell_width", ext.eta.into()),
        ],
    );
    write(out, &summary)?;
    Ok(None)
}

fn distribution_tables(
    name: &str,
    r: &DistributionReport,
    grid: ReferenceGrid,
    out: &mut OutputDir,
) -> Result<(), Failure> {
    let mut q = Table::new(
        &format!("{name}_quantiles"),
        &["prob", "observed", "reference"],
    );
    for row in &r.quantiles {
        q.push(vec![
            row.prob.into(),
            row.observed.into(),
            row.reference.into(),
        ]);
    }
    write(out, &q)?;
    let s = summary_table(
        &format!("{name}_summary"),
        vec![
            ("density", r.density.to_string().into()),
            ("n", r.n.into()),
            ("replicates", r.replicates.into()),
            ("scale", r.scale.into()),
            ("ks_distance", r.ks.into()),
            ("reference_method", grid.method.as_str().into()),
            ("estimate_min", r.estimate_range.0.into()),
            ("estimate_max", r.estimate_range.1.into()),
        ],
    );
    write(out, &s)
}

fn lil(config: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, Failure> {
    let d = ExampleDensity::new(config.density.expect("validated"));
    let seed = config.seed.expect("validated");
    match config.mode.expect("validated") {
        LilMode::Trace => {
            let t = lil_trace(
                &d,
                config.n_max.expect("validated"),
                config.growth.expect("validated"),
                seed,
            )?;
            let mut table = Table::new(
                "lil_trace",
                &["n", "estimate", "statistic", "running_max", "limit"],
            );
            table.note("t0", d.t0);
            table.note("f_t0", d.pdf(d.t0));
            for r in &t.rows {
                table.push(vec![
                    r.n.into(),
                    r.estimate.into(),
                    r.statistic.into(),
                    r.running_max.into(),
                    t.limit.into(),
                ]);
            }
            write(out, &table)?;
            Ok(None)
        }
        mode => {
            let grid = ReferenceGrid {
                half_width: config.grid_l.expect("validated"),
                step: config.grid_delta.expect("validated"),
                ..ReferenceGrid::default()
            };
            let n = config.n.expect("validated");
            let reps = config.replicates.expect("validated");
            let (name, r) = if mode == LilMode::Mixing {
                (
                    "lil_mixing",
                    mixing_distribution_check(&d, n, reps, seed, grid)?,
                )
            } else {
                (
                    "lil_distribution",
                    limit_distribution_check(&d, n, reps, seed, grid)?,
                )
            };
            distribution_tables(name, &r, grid, out)?;
            let in_range = r.estimate_range.0 >= 0.0 && r.estimate_range.1 <= 1.0;
            Ok((mode == LilMode::Mixing && !in_range)
                .then(|| format!("mixing estimate left [0, 1]: {:?}", r.estimate_range)))
        }
    }
}

fn switching(config: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, Failure> {
    let report: SweepReport = match &config.input {
        Some(path) => sweep_fit(&fit(&read_observations(path)?)?),
        None => random_sweep(
            config.replicates.expect("validated"),
            config.n_max.expect("validated"),
            config.seed.expect("validated"),
        ),
    };
    let mut entries = vec![
        ("samples", Cell::from(report.samples)),
        ("checks", Cell::from(report.checks)),
        ("violations", Cell::from(report.violations)),
    ];
    if let Some(c) = &report.first_counterexample {
        let sample: Vec<String> = c.sample.iter().map(|v| format!("{v:?}")).collect();
        entries.push(("counterexample_sample", Cell::from(sample.join(" "))));
        entries.push(("counterexample_level", Cell::from(c.level.clone())));
        entries.push(("counterexample_t0", Cell::from(c.t0)));
    }
    let mut t = summary_table("switching_report", entries);
    t.note("tie_rule", TIE_RULE);
    write(out, &t)?;
    println!("violations: {}", report.violations);
    Ok((report.violations > 0).then(|| format!("{} switching violations", report.violations)))
}
