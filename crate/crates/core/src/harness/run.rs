//! Scenario execution: build the state, apply the injection, evaluate every law.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::{inverse_piola_transform, metric_derivative, EnergyArgs, EnergyModel, FnModel, MetricSlot, Signature, StressState};
use crate::covariance::{
    f0_sigma, gnr_experiment, micro_covariance_experiment, residual_angular_free, residual_linear_momentum, residual_mass,
    residual_micro_inertia, residual_micro_linear_momentum, residual_scs_angular, residual_scs_doyle_ericksen,
    residual_scs_linear_momentum, spatial_covariance_experiment, BalanceReport, FlowSpec, NodalField, Norms, Subbody,
    material_covariance_conditions,
};
use crate::error::{Error, Result};
use crate::geometry::PolyVectorField;
use crate::kinematics::spatial_fields;
use crate::mixtures::{coupled_doyle_ericksen, residual_constituent_mass, residual_constituent_momentum};
use crate::tensor::{mat_from_rows, Mat};
use crate::variational::{
    canonical_momentum_flux, energy_piola_from_flux, leapfrog_trajectory, noether_drift, noether_micro_check,
    noether_spatial_check, LagrangianModel, LeapfrogConfig, SpacetimeGrid,
};
use crate::voids::{
    oscillation_frequency, residual_equilibrated_inertia, residual_equilibrated_momentum, residual_scalar_doyle_ericksen,
    simulate_voids_bar, InertiaForm, InitialCondition, VoidsBarConfig,
};

use super::build::{build, Bundle, ContinuumBundle, MixtureBundle, VariationalBundle, VoidsBundle};
use super::scenario::{FlowEntry, Regime, Scenario};

/// Layers of boundary nodes left out of covariance experiments.
const SUBBODY_MARGIN: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub regime: Regime,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub reports: Vec<BalanceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeseries: Option<TimeSeries>,
    pub passed: bool,
    pub failing: Vec<String>,
}

/// Process exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericBlowUp(_) | Error::VoidFractionOutOfRange { .. } | Error::NonFiniteEnergy | Error::NonFiniteDensity => 3,
        _ => 2,
    }
}

/// Runs a validated scenario; defaults are filled in here.
pub fn run(scenario: &Scenario) -> Result<RunReport> {
    scenario.validate()?;
    let s = scenario.clone().with_defaults();
    let start = Instant::now();
    let bundle = build(&s)?;
    let (reports, timeseries) = match bundle {
        Bundle::Free(b) => (vec![free(&s, inject_continuum(&s, b)?)?], None),
        Bundle::Scs(b) => (vec![scs(&s, inject_continuum(&s, b)?)?], None),
        Bundle::Gnr(b) => (vec![gnr(&s, inject_continuum(&s, b)?)?], None),
        Bundle::Material(b) => (vec![material(&s, inject_continuum(&s, b)?)?], None),
        Bundle::Voids(b) => voids(&s, b)?,
        Bundle::Mixture(b) => (vec![mixture(&s, b)?], None),
        Bundle::Variational(b) => variational(&s, b)?,
    };
    for r in &reports {
        if let Some(l) = r.laws.iter().find(|l| !l.linf.is_finite() || !l.l2.is_finite()) {
            return Err(Error::NumericBlowUp(format!("law '{}' of the {} report is not finite", l.law, r.regime)));
        }
    }
    let failing: Vec<String> = reports.iter().flat_map(|r| r.failing()).map(str::to_string).collect();
    Ok(RunReport {
        scenario: s.name.clone(),
        regime: s.regime,
        seed: s.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        reports,
        timeseries,
        passed: failing.is_empty(),
        failing,
    })
}

fn injection(s: &Scenario) -> Option<(&str, f64)> {
    s.injection.as_ref().map(|i| (i.law.as_str(), i.amplitude))
}

fn add_all(values: &mut [f64], amp: f64) {
    for v in values {
        *v += amp;
    }
}

fn inject_continuum(s: &Scenario, mut b: ContinuumBundle) -> Result<ContinuumBundle> {
    let Some((law, amp)) = injection(s) else { return Ok(b) };
    let n = b.fields.len();
    match law {
        "linear_momentum" | "scs_linear_momentum" => add_all(&mut b.loads.b, amp),
        "micro_linear_momentum" => add_all(&mut b.loads.b_micro, amp),
        "doyle_ericksen" => {
            let shift = Mat::identity(2, 2) * amp;
            let cauchy = b.stress.cauchy.iter().map(|c| c + &shift).collect();
            b.stress = StressState::from_cauchy(&b.fields, cauchy, b.stress.micro_cauchy.clone())?;
        }
        "bracket_symmetry" => {
            let a = mat_from_rows(&[&[0.0, amp], &[-amp, 0.0]]);
            let cauchy = b.stress.cauchy.iter().map(|c| c + &a).collect();
            b.stress = StressState::from_cauchy(&b.fields, cauchy, b.stress.micro_cauchy.clone())?;
        }
        "material_p0" => {
            for i in 0..n {
                b.stress.piola[i] += Mat::identity(2, 2) * amp;
            }
            inverse_piola_transform(&mut b.stress, &b.fields)?;
        }
        other => return Err(Error::Unsupported(format!("injection '{other}'"))),
    }
    Ok(b)
}

/// Seeded generators for the scenario's flow list, on their own stream.
fn flow_specs(s: &Scenario) -> Result<Vec<(&'static str, FlowSpec)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    for f in s.flows.iter().flatten() {
        match f {
            FlowEntry::Spatial { degree, scale, count } => {
                for _ in 0..*count {
                    out.push(("spatial", FlowSpec::spatial(PolyVectorField::random(2, *degree, *scale, &mut rng))));
                }
            }
            FlowEntry::Micro { degree, scale, count } => {
                for _ in 0..*count {
                    out.push(("micro", FlowSpec::micro(PolyVectorField::random(2, *degree, *scale, &mut rng))));
                }
            }
            FlowEntry::Translation { c } => out.push(("translation", FlowSpec::translation(c.clone()))),
            FlowEntry::Rotation { rate } => {
                out.push(("rotation", FlowSpec::rotation(mat_from_rows(&[&[0.0, *rate], &[-*rate, 0.0]]))?))
            }
        }
    }
    Ok(out)
}

fn scalar(v: f64) -> Norms {
    Norms { linf: v.abs(), l2: v.abs() }
}

/// Largest of several scalar norms; NaN wins so blow-ups are not hidden.
fn worst(values: impl IntoIterator<Item = f64>) -> Norms {
    let m = values.into_iter().fold(0.0f64, |a, v| if v.is_nan() || a.is_nan() { f64::NAN } else { a.max(v.abs()) });
    scalar(m)
}

/// Defect field σ − 2ρ∂e/∂(slot) per node, with `lhs(n)` the stress side.
fn de_field(b: &ContinuumBundle, slot: MetricSlot, lhs: impl Fn(usize) -> Mat) -> Result<NodalField> {
    let f = &b.fields;
    let mats = (0..f.len())
        .map(|n| {
            let args = EnergyArgs::at_node(f, n)?;
            Ok(lhs(n) - metric_derivative(b.model.as_ref(), &args, slot)? * (2.0 * f.rho(n)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_mats(&mats))
}

fn free(s: &Scenario, b: ContinuumBundle) -> Result<BalanceReport> {
    let (f, st, l) = (&b.fields, &b.stress, &b.loads);
    let nodes = f.interior_nodes();
    let mut r = BalanceReport::new("free");
    let tol = |law: &str| s.tolerance(law);
    r.push_field("mass", &residual_mass(f)?, &nodes, tol("mass"));
    r.push_field("micro_inertia", &residual_micro_inertia(f)?, &nodes, tol("micro_inertia"));
    r.push_field("linear_momentum", &residual_linear_momentum(st, f, l)?, &nodes, tol("linear_momentum"));
    r.push_field("micro_linear_momentum", &residual_micro_linear_momentum(st, f, l)?, &nodes, tol("micro_linear_momentum"));
    let de = de_field(&b, MetricSlot::Spatial, |n| st.cauchy[n].clone())?;
    r.push_field("doyle_ericksen", &de, &nodes, tol("doyle_ericksen"));
    let f0 = |n| f0_sigma(f, st, n).unwrap_or_else(|| Mat::zeros(2, 2));
    let mde = de_field(&b, MetricSlot::Micro, f0)?;
    r.push_field("micro_doyle_ericksen", &mde, &nodes, tol("micro_doyle_ericksen"));
    let ang = residual_angular_free(st, f)?;
    r.push_field("angular_momentum", &ang.sigma, &nodes, tol("angular_momentum"));
    let micro_ang = ang.f0_sigma.unwrap_or_else(|| NodalField::zeros(f.len(), 4));
    r.push_field("micro_angular_momentum", &micro_ang, &nodes, tol("micro_angular_momentum"));

    let sub = Subbody::inset(&f.body.grid, SUBBODY_MARGIN)?;
    let (mut spatial, mut micro) = (Vec::new(), Vec::new());
    for (kind, flow) in flow_specs(s)? {
        if kind == "spatial" {
            let e = spatial_covariance_experiment(f, st, l, b.model.as_ref(), &flow, &sub, tol("spatial_covariance"))?;
            spatial.push(e.total.unwrap_or(f64::NAN));
        } else {
            let e = micro_covariance_experiment(f, st, l, b.model.as_ref(), &flow, &sub, tol("micro_covariance"))?;
            micro.push(e.total.unwrap_or(f64::NAN));
        }
    }
    if !spatial.is_empty() {
        r.diagnostics.insert("spatial_flows".into(), spatial.len() as f64);
        r.push("spatial_covariance", worst(spatial), tol("spatial_covariance"), None);
    }
    if !micro.is_empty() {
        r.diagnostics.insert("micro_flows".into(), micro.len() as f64);
        r.push("micro_covariance", worst(micro), tol("micro_covariance"), None);
    }
    Ok(r)
}

fn scs(s: &Scenario, b: ContinuumBundle) -> Result<BalanceReport> {
    let (f, st, l) = (&b.fields, &b.stress, &b.loads);
    let nodes = f.interior_nodes();
    let mut r = BalanceReport::new("scs");
    let tol = |law: &str| s.tolerance(law);
    r.push_field("mass", &residual_mass(f)?, &nodes, tol("mass"));
    let lm = residual_scs_linear_momentum(st, f, l, b.model.as_ref())?;
    r.push_field("scs_linear_momentum", &lm, &nodes, tol("scs_linear_momentum"));
    r.push_field("micro_linear_momentum", &residual_micro_linear_momentum(st, f, l)?, &nodes, tol("micro_linear_momentum"));
    let de = residual_scs_doyle_ericksen(st, f, l, b.model.as_ref())?;
    r.push_field("scs_doyle_ericksen", &de.defect, &nodes, tol("scs_doyle_ericksen"));
    r.push_field("scs_angular", &residual_scs_angular(st, f, l)?, &nodes, tol("scs_angular"));
    Ok(r)
}

fn gnr(s: &Scenario, b: ContinuumBundle) -> Result<BalanceReport> {
    let (f, st, l) = (&b.fields, &b.stress, &b.loads);
    let nodes = f.interior_nodes();
    let mut r = BalanceReport::new("gnr");
    let tol = |law: &str| s.tolerance(law);
    r.push_field("mass", &residual_mass(f)?, &nodes, tol("mass"));
    r.push_field("linear_momentum", &residual_linear_momentum(st, f, l)?, &nodes, tol("linear_momentum"));
    r.push_field("micro_linear_momentum", &residual_micro_linear_momentum(st, f, l)?, &nodes, tol("micro_linear_momentum"));
    r.push_field("bracket_symmetry", &residual_scs_angular(st, f, l)?, &nodes, tol("bracket_symmetry"));

    // micro-momentum violation along the director: b̃ += λp
    let mut shifted = l.clone();
    for n in 0..f.len() {
        let lam = 0.7 + f.x(n)[0] * f.x(n)[1];
        for i in 0..2 {
            shifted.b_micro[2 * n + i] += lam * f.p(n)[i];
        }
    }
    let sub = Subbody::inset(&f.body.grid, SUBBODY_MARGIN)?;
    let (mut brackets, mut shifts) = (Vec::new(), Vec::new());
    for (kind, flow) in flow_specs(s)? {
        let base = gnr_experiment(f, st, l, &flow, &sub)?;
        let moved = gnr_experiment(f, st, &shifted, &flow, &sub)?;
        r.diagnostics.insert(format!("{kind}_defect"), base.defect);
        r.diagnostics.insert(format!("{kind}_surface"), base.terms.get("surface").copied().unwrap_or(0.0));
        if let Some(bi) = base.bracket_integral {
            brackets.push(bi);
        }
        shifts.push(moved.defect - base.defect);
    }
    if !brackets.is_empty() {
        r.push("gnr_bracket", worst(brackets), tol("gnr_bracket"), None);
    }
    if !shifts.is_empty() {
        r.push("director_momentum_shift", worst(shifts), tol("director_momentum_shift"), None);
    }
    Ok(r)
}

fn material(s: &Scenario, b: ContinuumBundle) -> Result<BalanceReport> {
    let c = material_covariance_conditions(&b.fields, &b.stress, b.model.as_ref())?;
    let mut r = BalanceReport::new("material");
    r.push("material_p0", c.p0, s.tolerance("material_p0"), None);
    r.push("material_balance", c.balance, s.tolerance("material_balance"), None);
    Ok(r)
}

fn voids(s: &Scenario, mut b: VoidsBundle) -> Result<(Vec<BalanceReport>, Option<TimeSeries>)> {
    if let Some(("equilibrated_momentum", amp)) = injection(s) {
        add_all(&mut b.state.void_body_force, amp);
    }
    let f = &b.fields;
    let nodes = f.interior_nodes();
    let tol = |law: &str| s.tolerance(law);
    let mut local = BalanceReport::new("voids");
    local.push_field("mass", &residual_mass(f)?, &nodes, tol("mass"));
    local.push_field("equilibrated_inertia", &residual_equilibrated_inertia(f)?, &nodes, tol("equilibrated_inertia"));
    let em = residual_equilibrated_momentum(&b.state, f, b.form)?;
    local.push_field("equilibrated_momentum", &em, &nodes, tol("equilibrated_momentum"));
    let sde = residual_scalar_doyle_ericksen(&b.state, f, &b.model)?;
    local.push_field("scalar_doyle_ericksen", &sde, &nodes, tol("scalar_doyle_ericksen"));

    let vs = s.voids.as_ref().ok_or_else(|| Error::RegimeFieldMissing("voids".into()))?;
    let cfg = VoidsBarConfig {
        dim: 1,
        length: vs.length,
        nodes: vs.nodes,
        dt: s.dt.ok_or_else(|| Error::RegimeFieldMissing("dt".into()))?,
        steps: s.steps.ok_or_else(|| Error::RegimeFieldMissing("steps".into()))?,
        rho0: vs.rho0,
        kappa: vs.kappa,
        coefficients: vs.coefficients.clone(),
        inertia_form: vs.inertia_form,
        initial: vs.initial.clone(),
        cfl_safety: vs.cfl_safety,
        diagnostics_every: vs.diagnostics_every,
    };
    let run = simulate_voids_bar(&cfg)?;
    let mut bar = BalanceReport::new("voids_bar");
    bar.diagnostics.insert("stability_limit".into(), run.stability_limit);
    bar.push("energy_drift", scalar(run.energy_drift()), tol("energy_drift"), None);
    let mass = run.records.iter().filter_map(|r| r.mass_residual);
    bar.push("bar_mass", worst(mass), tol("bar_mass"), None);
    if matches!(cfg.initial, InitialCondition::VoidOscillation { .. }) {
        let kappa_eff = match cfg.inertia_form {
            InertiaForm::Printed => 1.0,
            InertiaForm::KineticConsistent => cfg.kappa,
        };
        let expected = (2.0 * cfg.coefficients.c_nu / (cfg.rho0 * kappa_eff)).sqrt();
        let times: Vec<f64> = run.records.iter().map(|r| r.time).collect();
        let probe: Vec<f64> = run.records.iter().map(|r| r.probe).collect();
        if let Some(w) = oscillation_frequency(&times, &probe, cfg.coefficients.nu_ref) {
            bar.diagnostics.insert("omega_measured".into(), w);
            bar.diagnostics.insert("omega_expected".into(), expected);
            bar.push("void_frequency", scalar((w - expected) / expected), tol("void_frequency"), None);
        }
    }
    let series = TimeSeries {
        columns: ["step", "time", "kinetic", "internal", "total_energy", "probe"].map(String::from).to_vec(),
        rows: run
            .records
            .iter()
            .map(|r| vec![r.step as f64, r.time, r.kinetic, r.internal, r.total_energy, r.probe])
            .collect(),
    };
    Ok((vec![local, bar], Some(series)))
}

fn mixture(s: &Scenario, mut b: MixtureBundle) -> Result<BalanceReport> {
    if let Some(("coupled_doyle_ericksen_1", amp)) = injection(s) {
        let c = &mut b.mixture.constituents[0];
        let cauchy = c.stress.cauchy.iter().map(|m| m + Mat::identity(2, 2) * amp).collect();
        c.stress = StressState::from_cauchy(&c.fields, cauchy, c.stress.micro_cauchy.clone())?;
    }
    let mix = &b.mixture;
    let nodes = mix.constituents[0].fields.interior_nodes();
    let tol = |law: &str| s.tolerance(law);
    let mut r = BalanceReport::new("mixture");
    for i in 0..2 {
        let k = i + 1;
        r.push_field(&format!("mass_{k}"), &residual_constituent_mass(mix, i)?, &nodes, tol(&format!("mass_{k}")));
        r.push_field(&format!("momentum_{k}"), &residual_constituent_momentum(mix, i)?, &nodes, tol(&format!("momentum_{k}")));
    }
    let [m1, m2] = &b.models;
    let d = coupled_doyle_ericksen(mix, m1, m2)?;
    let (d1, d2) = d.fields();
    r.push_field("coupled_doyle_ericksen_1", &d1, &nodes, tol("coupled_doyle_ericksen_1"));
    r.push_field("coupled_doyle_ericksen_2", &d2, &nodes, tol("coupled_doyle_ericksen_2"));

    // relabeling: swapped constituents and models give swapped outputs bit for bit
    let sw = mix.relabeled();
    let ds = coupled_doyle_ericksen(&sw, &m2.relabeled(), &m1.relabeled())?;
    let mut gap = 0.0f64;
    let mut diff = |a: &[f64], b: &[f64]| {
        for (x, y) in a.iter().zip(b) {
            gap = gap.max((x - y).abs());
        }
    };
    diff(&d1.values, &ds.fields().1.values);
    diff(&d2.values, &ds.fields().0.values);
    for i in 0..2 {
        diff(&residual_constituent_momentum(mix, i)?.values, &residual_constituent_momentum(&sw, 1 - i)?.values);
        diff(&residual_constituent_mass(mix, i)?.values, &residual_constituent_mass(&sw, 1 - i)?.values);
    }
    r.push("relabel_symmetry", scalar(gap), tol("relabel_symmetry"), None);
    Ok(r)
}

/// The energy plus amp·tr g: no longer a function of FᵀgF.
fn metric_tilted(energy: std::sync::Arc<dyn EnergyModel>, amp: f64) -> std::sync::Arc<dyn EnergyModel> {
    std::sync::Arc::new(FnModel::new("tilted", Signature::Free, move |a| energy.evaluate(a) + amp * a.g.trace()))
}

/// 2ρ∂e/∂g̃ − F₀σ̃ with σ̃ from the inverse Piola transform of the stress
/// read off the canonical flux.
fn constitutive_micro_defect(model: &LagrangianModel, grid: &SpacetimeGrid, energy: &dyn EnergyModel, level: usize) -> Result<Vec<Mat>> {
    let fields = spatial_fields(&grid.motion_state(level)?)?;
    let flux = canonical_momentum_flux(model, grid, level)?;
    let (piola, micro_piola) = energy_piola_from_flux(model, grid, level, &flux)?;
    let mut stress = StressState::zeros(grid.len(), 2, 2);
    stress.piola = piola;
    stress.micro_piola = micro_piola;
    inverse_piola_transform(&mut stress, &fields)?;
    (0..grid.len())
        .map(|i| {
            let args = EnergyArgs::at_node(&fields, i)?;
            let m = metric_derivative(energy, &args, MetricSlot::Micro)? * (2.0 * fields.rho(i));
            let f0 = fields.f0(i).ok_or(Error::SingularF0 { node: i })?;
            Ok(m - f0 * stress.micro_cauchy[i].transpose())
        })
        .collect()
}

fn variational(s: &Scenario, b: VariationalBundle) -> Result<(Vec<BalanceReport>, Option<TimeSeries>)> {
    let (energy, model) = match injection(s) {
        Some(("noether_doyle_ericksen", amp)) => {
            let e = metric_tilted(b.energy.clone(), amp);
            let split = b.model.splitting.as_ref().expect("split model");
            let m = LagrangianModel::split("tilted", e.clone(), split.rho0, split.rho0_micro, false);
            (e, m)
        }
        _ => (b.energy.clone(), b.model.clone()),
    };
    let cfg = LeapfrogConfig {
        dt: s.dt.ok_or_else(|| Error::RegimeFieldMissing("dt".into()))?,
        steps: s.steps.ok_or_else(|| Error::RegimeFieldMissing("steps".into()))?,
        record_every: s.record_every.unwrap_or(1),
    };
    let grid = leapfrog_trajectory(&model, b.body.clone(), b.ambient.clone(), b.director.clone(), b.initial.clone(), &cfg)?;
    let nodes = grid.body.grid.interior_nodes();
    let tol = |law: &str| s.tolerance(law);
    let last = grid.level_count() - 1;
    let mut r = BalanceReport::new("variational");
    let (mut de, mut mde, mut cross) = (Vec::new(), Vec::new(), Vec::new());
    for level in [0, last] {
        let sp = noether_spatial_check(&model, &grid, level, None)?;
        de.push(sp.doyle_ericksen.norms(&nodes));
        let mc = noether_micro_check(&model, &grid, level)?;
        mde.push(mc.doyle_ericksen.norms(&nodes));
        let reduced = mc.reduced.ok_or_else(|| Error::Unsupported("micro check without splitting".into()))?;
        let other = constitutive_micro_defect(&model, &grid, energy.as_ref(), level)?;
        let gap: Vec<Mat> = other.iter().enumerate().map(|(i, o)| Mat::from_row_slice(2, 2, reduced.at(i)) - o).collect();
        cross.push(NodalField::from_mats(&gap).norms(&nodes));
    }
    let max_norms = |v: Vec<Norms>| Norms {
        linf: v.iter().map(|n| n.linf).fold(0.0, f64::max),
        l2: v.iter().map(|n| n.l2).fold(0.0, f64::max),
    };
    r.push("noether_doyle_ericksen", max_norms(de), tol("noether_doyle_ericksen"), None);
    r.push("noether_micro_doyle_ericksen", max_norms(mde), tol("noether_micro_doyle_ericksen"), None);
    r.push("micro_cross_module", max_norms(cross), tol("micro_cross_module"), None);

    let mut columns = vec!["time".to_string()];
    let mut series: Vec<Vec<f64>> = Vec::new();
    let (mut tr, mut rot) = (Vec::new(), Vec::new());
    for (k, f) in s.flows.iter().flatten().enumerate() {
        let (kind, w) = match f {
            FlowEntry::Translation { c } => ("translation", PolyVectorField::affine(&[vec![0.0; 2], vec![0.0; 2]], c)),
            FlowEntry::Rotation { rate } => {
                ("rotation", PolyVectorField::affine(&[vec![0.0, -*rate], vec![*rate, 0.0]], &[0.0, 0.0]))
            }
            _ => continue,
        };
        let d = noether_drift(&model, &grid, &w)?;
        if series.is_empty() {
            series.push(d.times.clone());
        }
        columns.push(format!("{kind}_{k}_momentum"));
        series.push(d.momentum.clone());
        columns.push(format!("{kind}_{k}_drift"));
        series.push(d.drift.clone());
        if kind == "translation" { tr.push(d.max_drift()) } else { rot.push(d.max_drift()) }
    }
    if !tr.is_empty() {
        r.push("noether_drift_translation", worst(tr), tol("noether_drift_translation"), None);
    }
    if !rot.is_empty() {
        r.push("noether_drift_rotation", worst(rot), tol("noether_drift_rotation"), None);
    }
    r.diagnostics.insert("levels".into(), grid.level_count() as f64);
    let timeseries = (!series.is_empty()).then(|| TimeSeries {
        columns,
        rows: (0..series[0].len()).map(|i| series.iter().map(|c| c[i]).collect()).collect(),
    });
    Ok((vec![r], timeseries))
}
