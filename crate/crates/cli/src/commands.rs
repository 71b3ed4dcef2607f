use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use steer_core::algebra::{parse_operator_set, spectral_gap, write_operator_set};
use steer_core::engine::{read_snapshot, schmidt, write_snapshot};
use steer_core::fits::{entropy_curve, fit_entropy_pair, fit_gap, linear_fit};
use steer_core::optimize::{
    comm_measure, even_odd_variant, optimize_even_odd, optimize_maps, write_trace_csv, CommutationReport, Constraint,
    NormConvention, OptimizeOptions,
};
use steer_core::oracle::{
    channel_comparison, dephasing_comparison, lindblad_limit_check, write_limit_csv, OracleComparison,
};
use steer_core::protocol::{
    commuting_toy_model, config_digest, operator_digest, outcome_log, run_ensemble, run_trajectory_state,
    write_ensemble_csv, EnsembleResult, PeriodStats, ProtocolConfig, SteeringContext,
};
use steer_core::{InitialState, MappingOperatorSet, C64};

use crate::artifacts::RunDir;
use crate::config::{parse_kind, RunConfig};
use crate::rational::{pi_grid, real_grid, PiMultiple};
use crate::{
    EntropyArgs, FitArgs, FitTarget, GapArgs, OperatorsArgs, OptimizeArgs, OracleArgs, OracleMode, RunArgs,
    SweepArgs, SweepParam,
};

/// Named invariant checks of one command; printed as they are recorded.
#[derive(Default)]
pub struct Checks {
    items: Vec<(String, bool)>,
}

impl Checks {
    fn check(&mut self, name: &str, ok: bool, detail: impl std::fmt::Display) {
        println!("invariant {name}: {} ({detail})", if ok { "ok" } else { "FAILED" });
        self.items.push((name.to_string(), ok));
    }

    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|(_, ok)| *ok)
    }

    pub fn failed(&self) -> Vec<String> {
        self.items.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.clone()).collect()
    }
}

fn csv<F: FnOnce(&mut Vec<u8>) -> steer_core::Result<()>>(f: F) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn parse_norm(s: &str) -> Result<NormConvention> {
    s.parse().map_err(|e| anyhow::anyhow!("{e}"))
}

fn print_report(report: &CommutationReport, verbose: bool) {
    if verbose {
        println!("term,alpha,beta,adjoint,value");
        for (k, t) in report.terms.iter().enumerate() {
            println!(
                "{k},{},{},{},{:.6}",
                t.alpha,
                t.beta,
                t.adjoint,
                report.weight * t.value(report.convention)
            );
        }
    }
    println!("comm = {:.4} ({})", report.total, report.convention);
    println!(
        "comm[frobenius-squared] = {:.4}, comm[frobenius] = {:.4}, comm[spectral] = {:.4}",
        report.total_frobenius_squared, report.total_frobenius, report.total_spectral
    );
}

fn set_invariants(checks: &mut Checks, set: &MappingOperatorSet) {
    for (name, value) in set.invariant_report() {
        let waived = name.contains("sum") && set.sum_waived();
        checks.check(
            name,
            waived || value < 1e-10,
            format!("residual {value:.3e}{}", if waived { ", waived" } else { "" }),
        );
    }
}

pub fn operators(a: &OperatorsArgs) -> Result<Checks> {
    let set = match &a.custom {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_operator_set(&text, a.waive_sum).with_context(|| format!("operator set {}", p.display()))?
        }
        None => steer_core::algebra::mapping_set(parse_kind(&a.kind, a.alpha)?)?,
    };
    let mut checks = Checks::default();
    println!("operators: {:?} ({} maps), digest {}", set.kind(), set.len(), operator_digest(&set));
    set_invariants(&mut checks, &set);
    let report = comm_measure(&set, parse_norm(&a.norm)?);
    print_report(&report, a.report);
    if let Some(p) = &a.export {
        std::fs::write(p, write_operator_set(&set)).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
    }
    Ok(checks)
}

fn start_dir(out: &Path, command: &str, cfg: Option<&RunConfig>) -> Result<RunDir> {
    let mut dir = RunDir::create(out, command)?;
    if let Some(cfg) = cfg {
        dir.write("config.txt", cfg.to_text().as_bytes())?;
        dir.note("seed", cfg.seed);
        dir.note("engine.tol", cfg.tol);
    }
    Ok(dir)
}

fn finish(dir: RunDir) -> Result<()> {
    let path = dir.finish()?;
    println!("output: {}", path.display());
    Ok(())
}

fn observables_csv(r: &EnsembleResult) -> Vec<u8> {
    let mut s = String::from(
        "period,time,mean_Eb_pre,se_Eb_pre,mean_Eb_post,se_Eb_post,mean_infid_pre,se_infid_pre,\
         mean_infid_post,se_infid_post,mean_S_pre,se_S_pre,mean_S_post,se_S_post,smoothed_Eb,flips_mean\n",
    );
    for n in 0..r.times.len() {
        let cols = [
            &r.energy_pre[n],
            &r.energy_post[n],
            &r.infidelity_pre[n],
            &r.infidelity_post[n],
            &r.entropy_pre[n],
            &r.entropy_post[n],
        ];
        let _ = write!(s, "{n},{:?}", r.times[n]);
        for c in cols {
            let _ = write!(s, ",{:?},{:?}", c.mean, c.se);
        }
        let _ = writeln!(s, ",{:?},{:?}", r.smoothed_energy[n], r.flips_mean[n]);
    }
    s.into_bytes()
}

fn magnetization_csv(r: &EnsembleResult) -> Vec<u8> {
    let mut s = String::from("period,site,mean_pre,se_pre,mean_post,se_post\n");
    for (n, (pre, post)) in r.magnetization_pre.iter().zip(&r.magnetization_post).enumerate() {
        for (site, (a, b)) in pre.iter().zip(post).enumerate() {
            let _ = writeln!(s, "{},{site},{:?},{:?},{:?},{:?}", n + 1, a.mean, a.se, b.mean, b.se);
        }
    }
    s.into_bytes()
}

fn tconv_csv(r: &EnsembleResult) -> Vec<u8> {
    let mut s = String::from("trajectory,seed,conv_period,t_conv,stop_period,dephasing_events,max_norm_drift,valid\n");
    for t in &r.records {
        let _ = writeln!(
            s,
            "{},{},{},{:?},{},{},{:?},{}",
            t.index,
            t.seed,
            t.conv_period,
            t.t_conv,
            t.stop_period.map_or(String::new(), |p| p.to_string()),
            t.dephasing_events,
            t.max_norm_drift,
            t.valid
        );
    }
    s.into_bytes()
}

fn outcomes_text(r: &EnsembleResult) -> Vec<u8> {
    let mut s = String::new();
    for t in &r.records {
        let _ = writeln!(s, "# trajectory {}", t.index);
        s.push_str(&outcome_log(t, 3));
    }
    s.into_bytes()
}

fn summary_text(cfg: &RunConfig, set: &MappingOperatorSet, r: &EnsembleResult) -> String {
    let mut s = String::new();
    let last = r.periods();
    let _ = writeln!(s, "Ls = {}", cfg.ls);
    let _ = writeln!(s, "dt = {} ({:.6})", cfg.dt, cfg.dt.value());
    let _ = writeln!(s, "operators = {:?}", set.kind());
    let _ = writeln!(s, "comm = {:.6}", comm_measure(set, NormConvention::default()).total);
    let _ = writeln!(s, "trajectories = {}", r.trajectories);
    let _ = writeln!(s, "excluded = {}", r.excluded);
    let _ = writeln!(s, "t_conv_mean = {:.6}", r.t_conv.mean);
    let _ = writeln!(s, "t_conv_se = {:.6}", r.t_conv.se);
    let _ = writeln!(s, "t_conv_median = {:.6}", r.t_conv.median);
    let _ = writeln!(s, "S_max = {:.6}", r.s_max);
    let _ = writeln!(s, "t_max = {:.6}", r.t_max);
    let _ = writeln!(s, "t_max_at_end = {}", r.t_max_at_end);
    let _ = writeln!(s, "Eb_end = {:.6e} ± {:.2e}", r.energy_pre[last].mean, r.energy_pre[last].se);
    let _ = writeln!(
        s,
        "infidelity_end = {:.6e} ± {:.2e}",
        r.infidelity_pre[last].mean, r.infidelity_pre[last].se
    );
    if let Some(stop) = &r.stop {
        let _ = writeln!(s, "stop_window = {}", stop.window);
        let _ = writeln!(s, "stop_triggered = {}", stop.triggered);
        let _ = writeln!(s, "stop_median_fidelity = {:.6}", stop.median_fidelity);
        let _ = writeln!(s, "stop_mean_fidelity = {:.6}", 1.0 - stop.mean_infidelity);
        let _ = writeln!(s, "stop_mean_time = {:.6}", stop.mean_stop_time);
        let _ = writeln!(s, "unconditioned_equilibrium_fidelity = {:.6}", 1.0 - stop.equilibrium_infidelity);
        let _ = writeln!(s, "improvement = {:.4}", stop.improvement());
    }
    let _ = writeln!(s, "entropy = -sum p ln p over squared Schmidt values (natural log, nonnegative)");
    s
}

fn ensemble_invariants(checks: &mut Checks, r: &EnsembleResult) {
    checks.check(
        "trajectory validity",
        r.excluded == 0,
        format!("{} of {} excluded", r.excluded, r.trajectories),
    );
    let drift = r.records.iter().map(|t| t.max_norm_drift).fold(0.0, f64::max);
    checks.check("norm conservation", drift < 1e-8, format!("max drift {drift:.2e}"));
    let bounded = r
        .infidelity_pre
        .iter()
        .chain(&r.infidelity_post)
        .all(|p| p.mean > -1e-12 && p.mean < 1.0 + 1e-12);
    checks.check("fidelity bounds", bounded, "0 <= F <= 1");
}

fn protocol_for(cfg: &RunConfig, stop_scheme: bool, no_entropy: bool) -> Result<ProtocolConfig> {
    let mut p = cfg.protocol()?;
    if stop_scheme && p.stop_window.is_none() {
        p.stop_window = Some(4);
    }
    p.track_entropy = !no_entropy;
    p.validate()?;
    Ok(p)
}

pub fn run(out: &Path, a: &RunArgs) -> Result<Checks> {
    let mut cfg = a.overrides.resolve()?;
    let protocol = protocol_for(&cfg, a.stop_scheme, a.no_entropy)?;
    cfg.twait_periods = protocol.stop_window;
    let set = cfg.operator_set()?;
    let ctx = SteeringContext::aklt(cfg.ls, &set)?;
    let mut dir = start_dir(out, "run", Some(&cfg))?;
    let mut checks = Checks::default();
    set_invariants(&mut checks, &set);
    let result = run_ensemble(&ctx, &protocol)?;
    dir.note("config_digest", config_digest(&protocol));
    dir.note("operator_digest", operator_digest(&set));
    dir.write("operators.txt", write_operator_set(&set).as_bytes())?;
    dir.write("ensemble.csv", &csv(|w| write_ensemble_csv(w, &result))?)?;
    dir.write("observables.csv", &observables_csv(&result))?;
    dir.write("magnetization.csv", &magnetization_csv(&result))?;
    dir.write("tconv.csv", &tconv_csv(&result))?;
    dir.write("outcomes.txt", &outcomes_text(&result))?;
    let summary = summary_text(&cfg, &set, &result);
    dir.write("summary.txt", summary.as_bytes())?;
    if a.snapshot {
        let (_, state) = run_trajectory_state(&ctx, &protocol, 0);
        let state = state.context("trajectory 0 failed; no snapshot")?;
        dir.write("state.snap", &csv(|w| write_snapshot(w, &state))?)?;
    }
    print!("{summary}");
    if let Some(stop) = &result.stop {
        let scheme = 1.0 - stop.mean_infidelity;
        let plain = 1.0 - stop.equilibrium_infidelity;
        println!(
            "stop scheme: fidelity {scheme:.6} vs unconditioned {plain:.6} -> {}",
            if scheme > plain { "scheme better" } else { "no improvement" }
        );
    }
    ensemble_invariants(&mut checks, &result);
    finish(dir)?;
    Ok(checks)
}

/// Mean of the last quarter of the pre-measurement energy series.
fn equilibrium_energy(r: &EnsembleResult) -> PeriodStats {
    let n = r.periods();
    let from = n - n / 4;
    let tail = &r.energy_pre[from.max(1)..=n];
    let k = tail.len() as f64;
    PeriodStats {
        mean: tail.iter().map(|p| p.mean).sum::<f64>() / k,
        se: tail.iter().map(|p| p.se).sum::<f64>() / k,
    }
}

pub fn sweep(out: &Path, a: &SweepArgs) -> Result<Checks> {
    let base = a.overrides.resolve()?;
    let mut points: Vec<(String, f64, RunConfig)> = Vec::new();
    match a.param {
        SweepParam::Dt => {
            for dt in pi_grid(&a.values)? {
                let mut c = base.clone();
                c.dt = dt;
                points.push((dt.to_string(), dt.coefficient(), c));
            }
        }
        SweepParam::Eps | SweepParam::Alpha | SweepParam::Ls => {
            for v in real_grid(&a.values)? {
                let mut c = base.clone();
                match a.param {
                    SweepParam::Eps => c.eps = v,
                    SweepParam::Alpha => {
                        c.alpha = v;
                        c.kind = "M2".into();
                    }
                    _ => {
                        if v < 1.0 || v.fract() != 0.0 {
                            bail!("Ls values must be positive integers, got {v}");
                        }
                        c.ls = v as usize;
                    }
                }
                points.push((format!("{v}"), v, c));
            }
        }
    }
    let name = match a.param {
        SweepParam::Dt => "dt",
        SweepParam::Eps => "eps",
        SweepParam::Ls => "Ls",
        SweepParam::Alpha => "alpha",
    };
    let mut dir = start_dir(out, "sweep", Some(&base))?;
    dir.note("param", name);
    dir.note("values", &a.values);
    let mut checks = Checks::default();
    let mut table = format!(
        "{name},value,trajectories,excluded,mean_tconv,se_tconv,median_tconv,S_max,t_max,\
         eq_Eb,se_eq_Eb,stop_triggered,stop_median_fidelity,stop_mean_time,improvement,comm\n"
    );
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for (k, (label, x, cfg)) in points.iter().enumerate() {
        let protocol = protocol_for(cfg, a.stop_scheme, a.no_entropy)?;
        let set = cfg.operator_set()?;
        let ctx = SteeringContext::aklt(cfg.ls, &set)?;
        let r = run_ensemble(&ctx, &protocol)?;
        excluded += r.excluded;
        let eq = equilibrium_energy(&r);
        let stop = r.stop.clone().unwrap_or_default();
        let stop_cols = if r.stop.is_some() {
            format!(
                "{},{:?},{:?},{:?}",
                stop.triggered,
                stop.median_fidelity,
                stop.mean_stop_time,
                stop.improvement()
            )
        } else {
            ",,,".to_string()
        };
        let _ = writeln!(
            table,
            "{label},{x:?},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{stop_cols},{:?}",
            r.trajectories,
            r.excluded,
            r.t_conv.mean,
            r.t_conv.se,
            r.t_conv.median,
            r.s_max,
            r.t_max,
            eq.mean,
            eq.se,
            comm_measure(&set, NormConvention::default()).total
        );
        println!(
            "{name} = {label}: t_conv = {:.4} ± {:.4}, eq E_b = {:.3e}",
            r.t_conv.mean, r.t_conv.se, eq.mean
        );
        dir.write(&format!("ensemble_{k:02}.csv"), &csv(|w| write_ensemble_csv(w, &r))?)?;
        xs.push(*x);
        ys.push(r.t_conv.mean);
    }
    dir.write(&format!("tconv_vs_{name}.csv"), table.as_bytes())?;
    let finite: Vec<usize> = (0..ys.len()).filter(|&i| ys[i].is_finite()).collect();
    if let Some(&best) = finite.iter().min_by(|&&i, &&j| ys[i].partial_cmp(&ys[j]).unwrap()) {
        println!(
            "argmin t_conv at {name} = {} (interior: {})",
            points[best].0,
            best > 0 && best + 1 < ys.len()
        );
        dir.note("argmin", &points[best].0);
    }
    if matches!(a.param, SweepParam::Ls) && finite.len() >= 2 {
        let x: Vec<f64> = finite.iter().map(|&i| xs[i]).collect();
        let y: Vec<f64> = finite.iter().map(|&i| ys[i]).collect();
        let fit = linear_fit(&x, &y, None)?;
        println!("t_conv vs Ls: slope {:.4} ± {:.4}, R² {:.4}", fit.slope, fit.slope_se, fit.r2);
        dir.note("slope", fit.slope);
        dir.note("r2", fit.r2);
    }
    checks.check("trajectory validity", excluded == 0, format!("{excluded} excluded across points"));
    finish(dir)?;
    Ok(checks)
}

fn comparison_checks(checks: &mut Checks, cmp: &OracleComparison, sigma: f64, what: &str) {
    let failures = cmp.failures(sigma);
    let detail = match failures.first() {
        Some(r) => format!(
            "{} of {} outside, first: period {} {} (z = {:.2})",
            failures.len(),
            cmp.rows.len(),
            r.period,
            r.observable,
            r.z()
        ),
        None => format!("{} comparisons, max z {:.2}", cmp.rows.len(), cmp.max_z()),
    };
    checks.check(&format!("{what} agreement within {sigma} standard errors"), failures.is_empty(), detail);
    checks.check(
        "oracle trace preservation",
        cmp.trace_drift < 1e-9,
        format!("drift {:.2e}", cmp.trace_drift),
    );
}

pub fn oracle(out: &Path, a: &OracleArgs) -> Result<Checks> {
    let mut checks = Checks::default();
    let set = steer_core::algebra::mapping_set(parse_kind(&a.kind, a.alpha)?)?;
    let dt = a.dt.unwrap_or(PiMultiple::new(1, 2)?);
    let mut dir = start_dir(out, "oracle", None)?;
    dir.note("operator_digest", operator_digest(&set));
    dir.note("seed", a.seed);
    match a.mode {
        OracleMode::Channel | OracleMode::Dephasing => {
            let ls = a.ls.unwrap_or(2);
            let eps = if matches!(a.mode, OracleMode::Channel) { 0.0 } else { a.eps };
            let config = ProtocolConfig {
                dt: dt.value(),
                periods: a.periods.unwrap_or(10),
                eps,
                seed: a.seed,
                trajectories: a.traj,
                ..ProtocolConfig::default()
            };
            dir.note("mode", if eps == 0.0 { "channel" } else { "dephasing" });
            dir.note("config", config.canonical().replace('\n', "; "));
            let (result, _, cmp) = if eps == 0.0 {
                channel_comparison(ls, &set, &config)?
            } else {
                dephasing_comparison(ls, &set, &config, a.step)?
            };
            dir.write("comparison.csv", &csv(|w| cmp.write_csv(w))?)?;
            dir.write("ensemble.csv", &csv(|w| write_ensemble_csv(w, &result))?)?;
            println!(
                "Ls = {ls}, dt = {dt}, eps = {eps}: {} comparisons over {} periods, max z = {:.3}",
                cmp.rows.len(),
                config.periods,
                cmp.max_z()
            );
            comparison_checks(&mut checks, &cmp, a.sigma, if eps == 0.0 { "channel" } else { "dephasing" });
            ensemble_invariants(&mut checks, &result);
        }
        OracleMode::LindbladLimit => {
            let ls = a.ls.unwrap_or(3);
            let mut dts: Vec<PiMultiple> = match &a.dts {
                Some(s) => pi_grid(s)?,
                None => ["1/2", "1/5", "1/10"].iter().map(|s| s.parse()).collect::<Result<_>>()?,
            };
            if a.dts.is_none() && !dts.contains(&dt) {
                dts.push(dt);
            }
            let values: Vec<f64> = dts.iter().map(|d| d.value()).collect();
            let dim = 3usize.pow(ls as u32);
            let mut rho0 = DMatrix::<C64>::zeros(dim, dim);
            rho0[(0, 0)] = C64::new(1.0, 0.0);
            let table = lindblad_limit_check(&values, ls, &set, &rho0, a.horizon)?;
            dir.write("limit.csv", &csv(|w| write_limit_csv(w, &table))?)?;
            for (d, r) in dts.iter().zip(&table.rows) {
                println!("dt = {d}: {} periods, max |ΔE_b| = {:.4e}", r.periods, r.max_dev);
            }
            println!("fitted order = {:.3} ± {:.3}", table.fitted_order, table.order_se);
            dir.note("fitted_order", table.fitted_order);
            checks.check(
                "monotone decrease of the deviation",
                table.is_monotone(),
                format!("{} intervals", table.rows.len()),
            );
        }
        OracleMode::Toy => {
            let periods = a.periods.unwrap_or(6);
            if a.n == 0 || a.n > 3 {
                bail!("the exact toy model is limited to 1..=3 qubit pairs, got {}", a.n);
            }
            let mut down = vec![C64::new(0.0, 0.0); 1 << a.n];
            down[(1 << a.n) - 1] = C64::new(1.0, 0.0);
            let toy = commuting_toy_model(a.n, dt.value(), periods, &InitialState::System(down), 0, a.seed)?;
            let mut s = String::from("period,channel_fidelity,recursion_full,recursion_single\n");
            for n in 0..toy.channel_fidelity.len() {
                let _ = writeln!(
                    s,
                    "{n},{:?},{:?},{:?}",
                    toy.channel_fidelity[n], toy.recursion_full[n], toy.recursion_single[n]
                );
            }
            dir.write("toy.csv", s.as_bytes())?;
            println!(
                "N = {}, dt = {dt}: F = {:?}",
                a.n,
                toy.channel_fidelity.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>()
            );
            println!("single-jump recursion max error = {:.3e}", toy.max_single_jump_error());
            let err = toy.max_recursion_error();
            checks.check("sine-law recursion", err < 1e-9, format!("max error {err:.3e}"));
        }
    }
    finish(dir)?;
    Ok(checks)
}

pub fn optimize(out: &Path, a: &OptimizeArgs) -> Result<Checks> {
    let opts = OptimizeOptions {
        starts: a.starts,
        constraint: if a.unconstrained {
            Constraint::Sphere
        } else {
            Constraint::Stiefel
        },
        convention: parse_norm(&a.norm)?,
        seed: a.seed,
        max_iter: a.max_iter,
        ..OptimizeOptions::default()
    };
    let mut dir = start_dir(out, "optimize", None)?;
    let result = if a.even_odd {
        optimize_even_odd(&opts)?
    } else {
        optimize_maps(&opts)?
    };
    dir.note("seed", a.seed);
    dir.note("starts", a.starts);
    dir.note("constraint", result.constraint);
    dir.note("norm", opts.convention);
    let names: &[&str] = if a.even_odd {
        &["operators_even.txt", "operators_odd.txt"]
    } else {
        &["operators.txt"]
    };
    for (name, set) in names.iter().zip(&result.sets) {
        dir.write(name, write_operator_set(set).as_bytes())?;
    }
    let mut starts = String::from("start,initial,objective,grad_norm,iterations,status\n");
    for r in &result.starts {
        let _ = writeln!(
            starts,
            "{},{:?},{:?},{:?},{},{:?}",
            r.start, r.initial, r.objective, r.grad_norm, r.iterations, r.status
        );
    }
    dir.write("starts.csv", starts.as_bytes())?;
    dir.write("trace.csv", &csv(|w| write_trace_csv(w, &result.best().trace))?)?;
    let best = result.best();
    println!(
        "best of {} starts: start {} after {} iterations ({:?})",
        result.starts.len(),
        best.start,
        best.iterations,
        best.status
    );
    let report = if a.even_odd {
        even_odd_variant(&result.sets[0], &result.sets[1], opts.convention)
    } else {
        result.report.clone()
    };
    print_report(&report, false);
    for (k, v) in result.sum_violation.iter().enumerate() {
        println!("set {k}: Hamiltonian-sum violation {v:.4e}");
    }
    let mut checks = Checks::default();
    if matches!(result.constraint, Constraint::Stiefel) {
        let worst = result.sum_violation.iter().cloned().fold(0.0, f64::max);
        checks.check("Hamiltonian-sum constraint", worst < 1e-10, format!("violation {worst:.2e}"));
    }
    for set in &result.sets {
        let r = set.projector_residual();
        checks.check("projector identity", r < 1e-10 || set.sum_waived(), format!("residual {r:.2e}"));
    }
    finish(dir)?;
    Ok(checks)
}

pub fn fit(out: &Path, a: &FitArgs) -> Result<Checks> {
    match &a.target {
        FitTarget::Gap(g) => fit_gap_cmd(out, g),
        FitTarget::Entropy(e) => fit_entropy_cmd(out, e),
    }
}

fn fit_gap_cmd(out: &Path, g: &GapArgs) -> Result<Checks> {
    let base = g.overrides.resolve()?;
    let set = base.operator_set()?;
    let ctx = SteeringContext::aklt(base.ls, &set)?;
    let mut dir = start_dir(out, "fit-gap", Some(&base))?;
    let mut results = Vec::new();
    let mut excluded = 0;
    for dt in pi_grid(&g.dts)? {
        let mut c = base.clone();
        c.dt = dt;
        let protocol = protocol_for(&c, false, true)?;
        let r = run_ensemble(&ctx, &protocol)?;
        excluded += r.excluded;
        println!("dt = {dt}: {} trajectories, t_conv {:.4}", r.trajectories, r.t_conv.mean);
        results.push(r);
    }
    let refs: Vec<&EnsembleResult> = results.iter().collect();
    let fit = fit_gap(&refs, g.max_dt.value())?;
    let exact = spectral_gap(base.ls)?;
    dir.note("dts", &g.dts);
    let mut table = String::from("dt,c,c_se,a,samples,window_lo,window_hi,residual_norm\n");
    for e in &fit.per_dt {
        let _ = writeln!(
            table,
            "{:?},{:?},{:?},{:?},{},{},{},{:?}",
            e.dt, e.c, e.c_se, e.a, e.samples, e.window.0, e.window.1, e.residual_norm
        );
    }
    dir.write("gap_fit.csv", table.as_bytes())?;
    let rel = (fit.gap - exact).abs() / exact;
    let mut s = String::new();
    let _ = writeln!(s, "parameter,value,stderr");
    let _ = writeln!(s, "gap,{:?},{:?}", fit.gap, fit.gap_se);
    let _ = writeln!(s, "intercept,{:?},{:?}", fit.slope.intercept, fit.slope.intercept_se);
    let _ = writeln!(s, "residual_norm,{:?},", fit.slope.residual_norm);
    let _ = writeln!(s, "window_max_dt,{:?},", fit.max_dt);
    let _ = writeln!(s, "exact_gap,{exact:?},");
    let _ = writeln!(s, "relative_difference,{rel:?},");
    dir.write("gap.txt", s.as_bytes())?;
    print!("{s}");
    let mut checks = Checks::default();
    checks.check("trajectory validity", excluded == 0, format!("{excluded} excluded"));
    checks.check(
        "finite gap fit",
        fit.gap.is_finite() && fit.gap_se.is_finite(),
        format!("{} intervals in the linear region", fit.slope.n),
    );
    finish(dir)?;
    Ok(checks)
}

fn read_spectrum(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(|l| l.split('#').next().unwrap())
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("invalid Schmidt value '{t}'")))
        .collect()
}

fn fit_entropy_cmd(out: &Path, e: &EntropyArgs) -> Result<Checks> {
    let (values, source) = match (&e.spectrum, &e.snapshot) {
        (Some(p), _) => (read_spectrum(p)?, p.display().to_string()),
        (None, Some(p)) => {
            let f = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let state = read_snapshot(std::io::BufReader::new(f))?;
            let layout = state.layout().clone();
            let bond = e.bond.unwrap_or(layout.n_sites() / 2);
            let sp = schmidt(&layout, state.amplitudes(), bond)?;
            (sp.values, format!("{} (bond {bond})", p.display()))
        }
        (None, None) => bail!("fit entropy needs --spectrum or --snapshot"),
    };
    let cut_max = e.cut_max.unwrap_or(values.len().min(40));
    let cut_small = e.cut_small.unwrap_or(cut_max / 2);
    let ex = fit_entropy_pair(&values, cut_small, cut_max)?;
    let mut dir = start_dir(out, "fit-entropy", None)?;
    dir.note("source", &source);
    dir.note("cut_small", cut_small);
    dir.note("cut_max", cut_max);
    let mut s = String::from("# S(cut) = -sum p ln p over the cut largest squared Schmidt values, renormalized\n");
    let _ = writeln!(s, "parameter,value,stderr");
    let f = &ex.large;
    let _ = writeln!(s, "S_sat,{:?},{:?}", f.s_sat, f.stderr[0]);
    for k in 0..3 {
        let _ = writeln!(s, "sigma{},{:?},{:?}", k + 1, f.sigma[k], f.stderr[k + 1]);
    }
    let _ = writeln!(s, "residual_norm,{:?},", f.residual_norm);
    let _ = writeln!(s, "window,{}-{},", f.window.0, f.window.1);
    let _ = writeln!(s, "S_sat_small_cut,{:?},{:?}", ex.small.s_sat, ex.small.stderr[0]);
    let _ = writeln!(s, "valid,{},", ex.valid);
    dir.write("entropy_fit.txt", s.as_bytes())?;
    let mut curve = String::from("cut,S,fit_small,fit_large\n");
    for (cut, v) in entropy_curve(&values, 1, cut_max)? {
        let _ = writeln!(
            curve,
            "{cut},{v:?},{:?},{:?}",
            ex.small.evaluate(cut as f64),
            ex.large.evaluate(cut as f64)
        );
    }
    dir.write("entropy_curve.csv", curve.as_bytes())?;
    print!("{s}");
    if !ex.valid {
        println!("warning: the two truncations disagree; S_sat is not trustworthy");
    }
    let mut checks = Checks::default();
    checks.check(
        "S_sat not below the observed entropy",
        f.s_sat >= f.max_observed - f.residual_norm,
        format!("S_sat {:.4}, max observed {:.4}", f.s_sat, f.max_observed),
    );
    finish(dir)?;
    Ok(checks)
}
