use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use brw_core::material::MaterialModel;
use brw_core::modesolver::{
    default_search_range, find_modes_in, quarter_wave_deviation, GuidedMode, LayerStack, Waveguide,
};
use brw_core::optimizer::{run_ga, GAConfig, GENE_NAMES};
use brw_core::schmidt::{
    build_jsa, schmidt_spectrum, spectrum_table, summarize, sweep_pump_bandwidth, sweep_table, Builder, JsaSummary,
};
use brw_core::spdc::{
    bandwidth_rad_s_to_nm, mode_overlap, optimal_pump_bandwidth, qpm_period, GridSpec, Interaction,
    JointSpectralAmplitude, ProcessModes, ProcessSpec, PumpSpec, OVERLAP_PERCENT_SCALE,
};
use brw_core::wavelength_nm_from_omega;

use crate::manifest::OutputDir;
use crate::{AnalyzeArgs, Failure, JsaArgs, ModesArgs, OptimizeArgs, PeriodArg, ProcessArgs, SweepArgs};

const MIN_GRID_POINTS: usize = 8;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn require_positive(name: &str, value: f64) -> Result<(), Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be positive, got {value}")))
    }
}

fn check_grid(points: usize) -> Result<(), Failure> {
    if points < MIN_GRID_POINTS {
        return Err(usage(format!("--grid must be at least {MIN_GRID_POINTS}, got {points}")));
    }
    Ok(())
}

fn load_material(path: &Path, out: &mut OutputDir) -> Result<Arc<MaterialModel>, Failure> {
    let m = MaterialModel::load(path)?;
    out.add_input(path)?;
    Ok(Arc::new(m))
}

fn load_waveguide(material: &Path, structure: &Path, out: &mut OutputDir) -> Result<(Waveguide, LayerStack), Failure> {
    let stack = LayerStack::load(structure)?;
    let m = load_material(material, out)?;
    out.add_input(structure)?;
    Ok((Waveguide::new(stack.clone(), m)?, stack))
}

fn check_process(args: &ProcessArgs) -> Result<(), Failure> {
    require_positive("--signal", args.signal)?;
    require_positive("--idler", args.idler)
}

#[derive(Debug, Serialize)]
struct ModeReport {
    role: &'static str,
    pol: String,
    class: String,
    lambda_nm: f64,
    n_eff: f64,
    beta_rad_per_um: f64,
    core_fraction: f64,
    effective_width_um: f64,
}

impl ModeReport {
    fn new(role: &'static str, m: &GuidedMode) -> Self {
        ModeReport {
            role,
            pol: m.pol.to_string(),
            class: m.class.to_string(),
            lambda_nm: m.lambda_nm,
            n_eff: m.n_eff,
            beta_rad_per_um: m.beta,
            core_fraction: m.core_fraction,
            effective_width_um: m.field.effective_width_um(),
        }
    }
}

#[derive(Debug, Serialize)]
struct OverlapReport {
    gamma_per_sqrt_um: f64,
    figure: f64,
    percent: f64,
    convention: String,
}

#[derive(Debug, Serialize)]
struct ProcessReport {
    structure: String,
    material: String,
    signal_nm: f64,
    idler_nm: f64,
    pump_nm: f64,
    length_mm: f64,
    modes: Vec<ModeReport>,
    central_mismatch_rad_per_um: f64,
    qpm_period_derived_um: f64,
    qpm_period_file_um: Option<f64>,
    qpm_period_used_um: f64,
    signal_quarter_wave_deviation: Vec<f64>,
    group_index_pump: f64,
    group_index_signal: f64,
    group_index_idler: f64,
    group_velocity_pump_c: f64,
    group_velocity_signal_c: f64,
    group_velocity_idler_c: f64,
    optimal_pump_bandwidth_nm: Option<f64>,
    overlap: OverlapReport,
}

struct Process {
    interaction: Interaction,
    modes: ProcessModes,
    spec: ProcessSpec,
    report: ProcessReport,
}

fn solve_process(
    wg: &Waveguide,
    stack: &LayerStack,
    args: &ProcessArgs,
    period: PeriodArg,
) -> Result<Process, Failure> {
    let mut spec = ProcessSpec::type_ii(args.signal, args.idler, stack.length_mm);
    if period == PeriodArg::File {
        spec.qpm_period_um = Some(stack.qpm_period_um.ok_or_else(|| {
            usage("--period file needs a poling period (\"Λ\") in the structure file")
        })?);
    }
    let (interaction, modes) = Interaction::from_waveguide(wg, &spec)?;
    let derived = qpm_period(modes.central_mismatch())?;
    let g = interaction.group_indices()?;
    let v = g.velocities();
    let optimal = optimal_pump_bandwidth(g.pump, g.signal, g.idler, stack.length_mm)
        .ok()
        .map(|w| bandwidth_rad_s_to_nm(spec.pump_nm(), w));
    let o = mode_overlap(&modes.pump.field, &modes.signal.field, &modes.idler.field)?;
    let signal_profile = wg.profile(spec.signal_nm, modes.signal.pol)?;
    let material = &wg.material;
    let report = ProcessReport {
        structure: args.structure.display().to_string(),
        material: format!("{} {}", material.name(), material.version().unwrap_or("")).trim().to_string(),
        signal_nm: spec.signal_nm,
        idler_nm: spec.idler_nm,
        pump_nm: spec.pump_nm(),
        length_mm: spec.length_mm,
        modes: vec![
            ModeReport::new("pump", &modes.pump),
            ModeReport::new("signal", &modes.signal),
            ModeReport::new("idler", &modes.idler),
        ],
        central_mismatch_rad_per_um: modes.central_mismatch(),
        qpm_period_derived_um: derived,
        qpm_period_file_um: stack.qpm_period_um,
        qpm_period_used_um: interaction.qpm_period_um.unwrap_or(derived),
        signal_quarter_wave_deviation: quarter_wave_deviation(&signal_profile, modes.signal.n_eff),
        group_index_pump: g.pump,
        group_index_signal: g.signal,
        group_index_idler: g.idler,
        group_velocity_pump_c: v[0],
        group_velocity_signal_c: v[1],
        group_velocity_idler_c: v[2],
        optimal_pump_bandwidth_nm: optimal,
        overlap: OverlapReport {
            gamma_per_sqrt_um: o.gamma,
            figure: o.figure,
            percent: o.percent,
            convention: format!(
                "percent = {OVERLAP_PERCENT_SCALE} x |gamma| x sqrt(w_p), w_p = 1/integral(u_p^4) in um; \
                 scale fixed once so that structure 1 reads 40.5%"
            ),
        },
    };
    Ok(Process {
        interaction,
        modes,
        spec,
        report,
    })
}

fn print_process(r: &ProcessReport) {
    println!("structure        {}", r.structure);
    println!("material         {}", r.material);
    for m in &r.modes {
        println!(
            "{:<6} {} {:<5} λ = {:9.3} nm  n_eff = {:.8}  core fraction = {:.4}",
            m.role, m.pol, m.class, m.lambda_nm, m.n_eff, m.core_fraction
        );
    }
    println!("Δk⁰              {:.9} rad/µm", r.central_mismatch_rad_per_um);
    println!("Λ derived        {:.6} µm", r.qpm_period_derived_um);
    if let Some(p) = r.qpm_period_file_um {
        println!("Λ in file        {p:.6} µm");
    }
    println!(
        "group index      p {:.6}  s {:.6}  i {:.6}",
        r.group_index_pump, r.group_index_signal, r.group_index_idler
    );
    println!(
        "group velocity   p {:.6}c  s {:.6}c  i {:.6}c",
        r.group_velocity_pump_c, r.group_velocity_signal_c, r.group_velocity_idler_c
    );
    match r.optimal_pump_bandwidth_nm {
        Some(b) => println!("separable Δλ_p   {b:.6} nm"),
        None => println!("separable Δλ_p   none (signal and idler group indices on the same side of the pump)"),
    }
    println!(
        "overlap          Γ = {:.6} µm^-1/2  figure {:.6}  {:.3}%",
        r.overlap.gamma_per_sqrt_um, r.overlap.figure, r.overlap.percent
    );
}

pub fn modes(material: &Path, a: ModesArgs) -> Result<(), Failure> {
    require_positive("--wavelength", a.wavelength)?;
    require_positive("--step", a.step)?;
    let range = match a.range.as_deref() {
        Some(&[lo, hi]) if lo < hi && lo > 0.0 => Some((lo, hi)),
        Some(r) => return Err(usage(format!("--range needs 0 < N_MIN < N_MAX, got {r:?}"))),
        None => None,
    };
    let mut out = OutputDir::new(a.out.clone(), "modes");
    let (wg, _) = load_waveguide(material, &a.structure, &mut out)?;
    out.prepare()?;

    let pol = a.pol.into();
    let profile = wg.profile(a.wavelength, pol)?;
    let range = range.unwrap_or_else(|| default_search_range(&profile));
    let modes = find_modes_in(&profile, range, a.step)?;

    let mut table = String::from("mode\tclass\tn_eff\tbeta_rad_per_um\tcore_fraction\teffective_width_um\n");
    for (k, m) in modes.iter().enumerate() {
        table.push_str(&format!(
            "{k}\t{}\t{:.12}\t{:.12}\t{:.9}\t{:.9}\n",
            m.class,
            m.n_eff,
            m.beta,
            m.core_fraction,
            m.field.effective_width_um()
        ));
    }
    print!("{table}");
    if modes.is_empty() {
        log::warn!("no guided modes in n_eff ∈ [{}, {}]", range.0, range.1);
    }
    out.write("modes.tsv", &table)?;

    if let Some(first) = modes.first() {
        let grid = first.field.grid;
        let mut header = String::from("y_nm\trefractive_index");
        for k in 0..modes.len() {
            header.push_str(&format!("\tu{k}_per_sqrt_um"));
        }
        let mut profiles = header + "\n";
        for (i, y) in grid.positions_nm().enumerate() {
            profiles.push_str(&format!("{y:.3}\t{:.12}", profile.index_at(y)));
            for m in &modes {
                profiles.push_str(&format!("\t{:.12e}", m.field.values[i]));
            }
            profiles.push('\n');
        }
        out.write("profiles.tsv", &profiles)?;
    }
    out.finish(json!({
        "structure": a.structure,
        "material": material,
        "wavelength_nm": a.wavelength,
        "pol": pol.to_string(),
        "n_eff_range": [range.0, range.1],
        "profile_step_nm": a.step,
    }))
}

fn grid_spec(j: &JsaArgs) -> GridSpec {
    GridSpec::square(j.grid)
}

fn jsa_config(a: &ProcessArgs, j: &JsaArgs, material: &Path) -> serde_json::Value {
    json!({
        "structure": a.structure,
        "material": material,
        "signal_nm": a.signal,
        "idler_nm": a.idler,
        "grid_points": j.grid,
        "builder": Builder::from(j.builder),
        "period": j.period,
    })
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    process: ProcessReport,
    pump_bandwidth_nm: f64,
    builder: Builder,
    grid_points: usize,
    half_span_signal_rad_per_s: f64,
    half_span_idler_rad_per_s: f64,
    schmidt_number: f64,
    purity: f64,
    entropy_bits: f64,
    rho: f64,
    correlation: String,
    signal_fwhm_nm: f64,
    idler_fwhm_nm: f64,
    signal_marginal_truncated: bool,
    idler_marginal_truncated: bool,
    leading_eigenvalues: Vec<f64>,
}

fn marginal_table(axis: &[f64], lambda0_nm: f64, density: &[f64]) -> String {
    let w0 = brw_core::omega_from_wavelength_nm(lambda0_nm);
    let mut t = String::from("detuning_rad_per_s\twavelength_nm\tdensity_s_per_rad\n");
    for (w, d) in axis.iter().zip(density) {
        t.push_str(&format!("{w:.9e}\t{:.9}\t{d:.12e}\n", wavelength_nm_from_omega(w0 + w)));
    }
    t
}

fn print_summary(s: &JsaSummary) {
    println!("Schmidt number   K = {:.6}  (purity {:.6})", s.schmidt_number, s.purity);
    println!("entropy          E = {:.6} bits", s.entropy_bits);
    println!("correlation      ρ = {:.6}  ({})", s.rho, s.correlation);
    println!(
        "marginal FWHM    signal {:.4} nm{}  idler {:.4} nm{}",
        s.signal.fwhm_nm,
        if s.signal.truncated { " (truncated)" } else { "" },
        s.idler.fwhm_nm,
        if s.idler.truncated { " (truncated)" } else { "" },
    );
}

pub fn analyze(material: &Path, a: AnalyzeArgs) -> Result<(), Failure> {
    require_positive("--bandwidth", a.bandwidth)?;
    check_grid(a.jsa.grid)?;
    check_process(&a.process)?;
    let mut out = OutputDir::new(a.process.out.clone(), "analyze");
    let (wg, stack) = load_waveguide(material, &a.process.structure, &mut out)?;
    out.prepare()?;

    let p = solve_process(&wg, &stack, &a.process, a.jsa.period)?;
    let pump = PumpSpec::from_bandwidth_nm(p.spec.pump_nm(), a.bandwidth)?;
    let builder: Builder = a.jsa.builder.into();
    let jsa = build_jsa(&p.interaction, &pump, builder, &grid_spec(&a.jsa))?;
    let summary = summarize(&jsa)?;
    let eigenvalues = schmidt_spectrum(&jsa)?;

    print_process(&p.report);
    println!("pump bandwidth   {:.6} nm ({builder:?} builder, {}² grid)", a.bandwidth, a.jsa.grid);
    print_summary(&summary);

    write_jsa_outputs(&mut out, &jsa, &eigenvalues)?;
    let report = AnalyzeReport {
        process: p.report,
        pump_bandwidth_nm: a.bandwidth,
        builder,
        grid_points: a.jsa.grid,
        half_span_signal_rad_per_s: *jsa.omega_s.last().expect("non-empty axis"),
        half_span_idler_rad_per_s: *jsa.omega_i.last().expect("non-empty axis"),
        schmidt_number: summary.schmidt_number,
        purity: summary.purity,
        entropy_bits: summary.entropy_bits,
        rho: summary.rho,
        correlation: summary.correlation.to_string(),
        signal_fwhm_nm: summary.signal.fwhm_nm,
        idler_fwhm_nm: summary.idler.fwhm_nm,
        signal_marginal_truncated: summary.signal.truncated,
        idler_marginal_truncated: summary.idler.truncated,
        leading_eigenvalues: eigenvalues.iter().take(10).copied().collect(),
    };
    out.write_json("report.json", &report)?;
    let mut config = jsa_config(&a.process, &a.jsa, material);
    config["pump_bandwidth_nm"] = json!(a.bandwidth);
    out.finish(config)
}

fn write_jsa_outputs(out: &mut OutputDir, jsa: &JointSpectralAmplitude, eigenvalues: &[f64]) -> Result<(), Failure> {
    out.write("jsa.json", &jsa.to_json())?;
    out.write("schmidt_spectrum.tsv", &spectrum_table(eigenvalues, 50))?;
    out.write(
        "marginal_signal.tsv",
        &marginal_table(&jsa.omega_s, jsa.lambda_s_nm, &jsa.marginal_signal()),
    )?;
    out.write(
        "marginal_idler.tsv",
        &marginal_table(&jsa.omega_i, jsa.lambda_i_nm, &jsa.marginal_idler()),
    )
}

fn bandwidth_list(from: f64, to: f64, steps: usize, log: bool) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            if log {
                from * (to / from).powf(t)
            } else {
                from + (to - from) * t
            }
        })
        .collect()
}

pub fn sweep(material: &Path, a: SweepArgs) -> Result<(), Failure> {
    require_positive("--from", a.from)?;
    require_positive("--to", a.to)?;
    if a.to <= a.from {
        return Err(usage(format!("--to ({}) must exceed --from ({})", a.to, a.from)));
    }
    if a.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    check_grid(a.jsa.grid)?;
    check_process(&a.process)?;
    let mut out = OutputDir::new(a.process.out.clone(), "sweep");
    let (wg, stack) = load_waveguide(material, &a.process.structure, &mut out)?;
    out.prepare()?;

    let p = solve_process(&wg, &stack, &a.process, a.jsa.period)?;
    let bandwidths = bandwidth_list(a.from, a.to, a.steps, a.log);
    let rows = sweep_pump_bandwidth(&p.interaction, &bandwidths, a.jsa.builder.into(), &grid_spec(&a.jsa))?;
    let table = sweep_table(&rows);
    print!("{table}");
    let best = rows
        .iter()
        .min_by(|x, y| x.summary.schmidt_number.total_cmp(&y.summary.schmidt_number))
        .expect("at least two rows");
    println!(
        "minimum K = {:.6} at Δλ_p = {:.6} nm (E = {:.6} bits)",
        best.summary.schmidt_number, best.bandwidth_nm, best.summary.entropy_bits
    );
    out.write("sweep.tsv", &table)?;
    out.write_json(
        "sweep_report.json",
        &json!({
            "process": p.report,
            "minimum_schmidt_number": best.summary.schmidt_number,
            "minimum_at_pump_bandwidth_nm": best.bandwidth_nm,
            "entropy_bits_at_minimum": best.summary.entropy_bits,
        }),
    )?;
    let mut config = jsa_config(&a.process, &a.jsa, material);
    config["pump_bandwidths_nm"] = json!(bandwidths);
    out.finish(config)
}

pub fn optimize(material: &Path, a: OptimizeArgs) -> Result<(), Failure> {
    let mut config = GAConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(grid) = a.grid {
        check_grid(grid)?;
        config.grid_points = grid;
    }
    config.validate()?;
    let mut out = OutputDir::new(a.out.clone(), "optimize");
    out.add_input(&a.config)?;
    let m = load_material(material, &mut out)?;
    out.prepare()?;

    let outcome = run_ga(&config, m)?;

    let mut winners = String::from("rank\tfitness\tfeasible");
    for name in GENE_NAMES {
        let unit = if name.starts_with('t') { "_nm" } else { "" };
        winners.push_str(&format!("\t{name}{unit}"));
    }
    winners.push_str(
        "\tqpm_period_um\tgvm_residual\toverlap_percent\tpump_bandwidth_nm\tK_linear\tK_full\n",
    );
    for (rank, c) in outcome.ranked.iter().enumerate() {
        winners.push_str(&format!("{rank}\t{:.9e}\t{}", c.fitness, c.feasible));
        for g in c.genes {
            winners.push_str(&format!("\t{g:.6}"));
        }
        match &c.metrics {
            Some(m) => winners.push_str(&format!(
                "\t{:.6}\t{:.6e}\t{:.4}\t{:.6}\t{:.6}\t{}\n",
                m.qpm_period_um,
                m.gvm_residual,
                m.overlap_percent,
                m.pump_bandwidth_nm,
                m.schmidt_number,
                m.schmidt_number_full.map_or("nan".to_string(), |k| format!("{k:.6}"))
            )),
            None => winners.push_str("\tnan\tnan\tnan\tnan\tnan\tnan\n"),
        }
    }
    print!("{winners}");
    out.write("winners.tsv", &winners)?;
    out.write("generations.tsv", &outcome.log_table())?;
    out.write("config.toml", &config.to_toml_string())?;
    for (rank, c) in outcome.ranked.iter().enumerate() {
        out.write(&format!("winner_{rank}.toml"), &c.to_stack(&config).to_toml_string())?;
    }
    out.finish(json!({ "material": material, "ga": config }))
}

pub fn qpm(material: &Path, a: ProcessArgs) -> Result<(), Failure> {
    check_process(&a)?;
    let mut out = OutputDir::new(a.out.clone(), "qpm");
    let (wg, stack) = load_waveguide(material, &a.structure, &mut out)?;
    out.prepare()?;
    let p = solve_process(&wg, &stack, &a, PeriodArg::Derived)?;
    print_process(&p.report);
    out.write_json("qpm.json", &p.report)?;
    out.finish(json!({ "structure": a.structure, "material": material, "signal_nm": a.signal, "idler_nm": a.idler }))
}

pub fn overlap(material: &Path, a: ProcessArgs) -> Result<(), Failure> {
    check_process(&a)?;
    let mut out = OutputDir::new(a.out.clone(), "overlap");
    let (wg, stack) = load_waveguide(material, &a.structure, &mut out)?;
    out.prepare()?;
    let p = solve_process(&wg, &stack, &a, PeriodArg::Derived)?;
    let o = &p.report.overlap;
    println!("Γ                {:.9} µm^-1/2", o.gamma_per_sqrt_um);
    println!("figure           {:.9}", o.figure);
    println!("percent          {:.4}%", o.percent);
    println!("convention       {}", o.convention);

    let (u_p, u_s, u_i) = (&p.modes.pump.field, &p.modes.signal.field, &p.modes.idler.field);
    let mut t = String::from("y_nm\tu_pump_per_sqrt_um\tu_signal_per_sqrt_um\tu_idler_per_sqrt_um\n");
    for (k, y) in u_p.grid.positions_nm().enumerate() {
        t.push_str(&format!("{y:.3}\t{:.12e}\t{:.12e}\t{:.12e}\n", u_p.values[k], u_s.values[k], u_i.values[k]));
    }
    out.write("profiles.tsv", &t)?;
    out.write_json("overlap.json", &p.report)?;
    out.finish(json!({ "structure": a.structure, "material": material, "signal_nm": a.signal, "idler_nm": a.idler }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_lists_hit_both_ends() {
        let lin = bandwidth_list(0.2, 6.0, 30, false);
        assert_eq!(lin.len(), 30);
        assert_eq!(lin[0], 0.2);
        assert!((lin[29] - 6.0).abs() < 1e-12);
        let geo = bandwidth_list(0.1, 10.0, 3, true);
        assert!((geo[1] - 1.0).abs() < 1e-12);
    }
}
