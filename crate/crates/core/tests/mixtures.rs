use std::sync::Arc;

use microcontinuum::constitutive::*;
use microcontinuum::covariance::BodyLoads;
use microcontinuum::geometry::MetricChart;
use microcontinuum::grid::RectGrid;
use microcontinuum::kinematics::*;
use microcontinuum::mixtures::*;
use microcontinuum::tensor::{mat_from_rows, max_abs, Mat};
use microcontinuum::Error;
use proptest::prelude::*;

const T0: f64 = 0.3;
const DT: f64 = 1e-3;

fn flat() -> Arc<MetricChart> {
    Arc::new(MetricChart::euclidean(2))
}

fn g2_const() -> Mat {
    mat_from_rows(&[&[2.0, 0.3], &[0.3, 1.0]])
}

fn skewed(m: Mat) -> Arc<MetricChart> {
    Arc::new(MetricChart::analytic(2, "constant", Arc::new(move |_| m.clone())))
}

fn body(rho0: f64) -> Arc<ReferenceBody> {
    let g = RectGrid::cube(&[0.0, 0.0], &[1.0, 1.0], 7).unwrap();
    Arc::new(ReferenceBody::uniform(flat(), g, rho0, 0.0).unwrap())
}

fn shared(t: f64, x: &[f64]) -> Vec<f64> {
    vec![1.1 * x[0] + 0.1 * x[1], -0.05 * x[0] + 0.95 * x[1] + 0.0 * t]
}

fn motion1() -> AnalyticMotion {
    AnalyticMotion::new(Arc::new(|t, x: &[f64]| {
        let s = t - T0;
        let b = shared(T0, x);
        vec![b[0] + s * 0.2 * x[1], b[1] + s * 0.1 * x[0] * x[0] + 0.5 * s * s]
    }))
}

fn motion2() -> AnalyticMotion {
    AnalyticMotion::new(Arc::new(|t, x: &[f64]| {
        let s = t - T0;
        let b = shared(T0, x);
        vec![b[0] - s * 0.3 + s * s * x[0], b[1] + s * 0.2 * x[0] * x[1]]
    }))
}

fn constituent(m: &AnalyticMotion, rho0: f64, ambient: Arc<MetricChart>, sigma: impl Fn(&[f64]) -> Mat) -> Constituent {
    let fields = spatial_fields(&m.sample(body(rho0), ambient, DirectorKind::None, T0, DT, 3).unwrap()).unwrap();
    let cauchy = (0..fields.len()).map(|n| sigma(fields.x(n))).collect();
    let micro = vec![Mat::zeros(0, 2); fields.len()];
    let stress = StressState::from_cauchy(&fields, cauchy, micro).unwrap();
    let loads = BodyLoads::zeros(&fields);
    Constituent { fields, stress, loads }
}

fn zero_stress(_: &[f64]) -> Mat {
    Mat::zeros(2, 2)
}

fn mixture(g2: Mat) -> MixtureState {
    MixtureState::new(
        constituent(&motion1(), 1.5, flat(), |x| mat_from_rows(&[&[1.0 + x[0], 0.2], &[0.2, 0.5]])),
        constituent(&motion2(), 0.8, skewed(g2), |x| mat_from_rows(&[&[0.3, x[1]], &[x[1], 0.7]])),
    )
    .unwrap()
}

fn e1(coupling: f64) -> MixtureConstituent {
    MixtureConstituent { mu: 1.0, lambda: 0.5, coupling, own: 0, coupling_slots: (0, 1) }
}

fn e2(coupling: f64) -> MixtureConstituent {
    MixtureConstituent { mu: 0.6, lambda: 0.2, coupling, own: 1, coupling_slots: (1, 0) }
}

fn interior(mix: &MixtureState) -> Vec<usize> {
    mix.constituents[0].fields.interior_nodes()
}

#[test]
fn shared_nodes_are_required() {
    let off = AnalyticMotion::new(Arc::new(|t, x: &[f64]| {
        let b = shared(t, x);
        vec![b[0] + 0.01, b[1]]
    }));
    let a = constituent(&motion1(), 1.0, flat(), zero_stress);
    let b = constituent(&off, 1.0, flat(), zero_stress);
    assert!(matches!(MixtureState::new(a, b), Err(Error::DimensionMismatch(_))));

    let mix = mixture(g2_const()).with_volume_fractions(vec![0.25; 49]).unwrap();
    let rho = 0.25 * mix.constituents[0].fields.rho(3) + 0.75 * mix.constituents[1].fields.rho(3);
    assert_eq!(mix.total_density(3), Some(rho));
    assert!(mixture(g2_const()).with_volume_fractions(vec![1.5; 49]).is_err());
}

#[test]
fn constituent_mass_cases() {
    let st = AnalyticMotion::new(Arc::new(|_, x: &[f64]| shared(T0, x)));
    let mix = MixtureState::new(constituent(&st, 1.0, flat(), zero_stress), constituent(&st, 2.0, skewed(g2_const()), zero_stress)).unwrap();
    let nodes = interior(&mix);
    for i in 0..2 {
        assert_eq!(residual_constituent_mass(&mix, i).unwrap().linf(&nodes), 0.0);
    }

    // Uniform expansion of constituent 1 about the shared configuration: J = e^{2α(t−t₀)}.
    let alpha = 0.4;
    let exp = AnalyticMotion::new(Arc::new(move |t, x: &[f64]| {
        let b = shared(T0, x);
        let s = (alpha * (t - T0)).exp();
        vec![b[0] * s, b[1] * s]
    }));
    let mut c1 = constituent(&exp, 1.0, flat(), zero_stress);
    c1.fields = c1.fields.with_density(move |t, _| 1.0 / (1.1 * 0.95 + 0.1 * 0.05) * (-2.0 * alpha * (t - T0)).exp());
    let mix = MixtureState::new(c1, constituent(&motion2(), 1.0, flat(), zero_stress)).unwrap();
    assert!(residual_constituent_mass(&mix, 0).unwrap().linf(&nodes) < 1e-8);

    let sw = mix.relabeled();
    assert_eq!(residual_constituent_mass(&sw, 1).unwrap(), residual_constituent_mass(&mix, 0).unwrap());
    assert_eq!(residual_constituent_mass(&sw, 0).unwrap(), residual_constituent_mass(&mix, 1).unwrap());
    assert!(residual_constituent_mass(&mix, 2).is_err());
}

#[test]
fn constituent_momentum_cases() {
    // Free fall of both constituents with zero stress.
    let fall = |g: f64| {
        AnalyticMotion::new(Arc::new(move |t, x: &[f64]| {
            let b = shared(T0, x);
            vec![b[0], b[1] - 0.5 * g * (t - T0) * (t - T0)]
        }))
    };
    let mut a = constituent(&fall(9.81), 1.0, flat(), zero_stress);
    let mut b = constituent(&fall(2.0), 1.0, skewed(g2_const()), zero_stress);
    for n in 0..a.fields.len() {
        a.loads.b[2 * n + 1] = -9.81;
    }
    // Constant metric: a^i = ẍ^i, so b = (0, −2) in coordinates.
    for n in 0..b.fields.len() {
        b.loads.b[2 * n + 1] = -2.0;
    }
    let mix = MixtureState::new(a, b).unwrap();
    let nodes = interior(&mix);
    assert!(residual_constituent_momentum(&mix, 0).unwrap().linf(&nodes) < 1e-7);
    assert!(residual_constituent_momentum(&mix, 1).unwrap().linf(&nodes) < 1e-7);

    // Hydrostatic constituent 2 in its own metric: σ = −p g₂⁻¹, div σ = −g₂⁻¹ ∇p.
    let st = AnalyticMotion::new(Arc::new(|_, x: &[f64]| shared(T0, x)));
    let g2inv = g2_const().try_inverse().unwrap();
    let p = |x: &[f64]| 1.0 + x[0] * x[1] + 0.5 * x[1] * x[1];
    let gi = g2inv.clone();
    let mut c2 = constituent(&st, 0.8, skewed(g2_const()), move |x| &gi * -p(x));
    for n in 0..c2.fields.len() {
        let x = c2.fields.x(n).to_vec();
        let grad = [x[1], x[0] + x[1]];
        let b = microcontinuum::tensor::mat_vec(&g2inv, &grad);
        let rho = c2.fields.rho(n);
        c2.loads.b[2 * n] = b[0] / rho;
        c2.loads.b[2 * n + 1] = b[1] / rho;
    }
    let c1 = constituent(&st, 1.0, flat(), zero_stress);
    let mix = MixtureState::new(c1.clone(), c2.clone()).unwrap();
    assert!(residual_constituent_momentum(&mix, 1).unwrap().linf(&nodes) < 1e-10);

    // Changing g₂ leaves constituent 1 untouched.
    let c2b = constituent(&st, 0.8, skewed(mat_from_rows(&[&[1.0, 0.0], &[0.0, 3.0]])), zero_stress);
    let other = MixtureState::new(c1, c2b).unwrap();
    assert_eq!(residual_constituent_momentum(&mix, 0).unwrap(), residual_constituent_momentum(&other, 0).unwrap());
}

#[test]
fn uncoupled_defects_reduce_to_single_constituent() {
    let mix = mixture(g2_const());
    let d = coupled_doyle_ericksen(&mix, &e1(0.0), &e2(0.0)).unwrap();
    for n in 0..mix.len() {
        let args = mix.energy_args(n).unwrap();
        for (i, (slot, model, got)) in [(MetricSlot::First, e1(0.0), &d.first[n]), (MetricSlot::Second, e2(0.0), &d.second[n])]
            .into_iter()
            .enumerate()
        {
            let c = &mix.constituents[i];
            let single = &c.stress.cauchy[n] - metric_derivative(&model, &args, slot).unwrap() * (2.0 * c.fields.rho(n));
            assert!(max_abs(&(got - single)) < 1e-9);
        }
    }
}

#[test]
fn coupling_term_enters_both_defects() {
    let c = 0.3;
    let mix = mixture(g2_const());
    let plain = coupled_doyle_ericksen(&mix, &e1(0.0), &e2(0.0)).unwrap();
    let coupled = coupled_doyle_ericksen(&mix, &e1(c), &e2(0.0)).unwrap();
    for n in 0..mix.len() {
        // c tr(¹g⁻¹ ²g): ∂/∂¹g = −c ¹g⁻¹ ²g ¹g⁻¹, ∂/∂²g = c ¹g⁻¹.
        let args = mix.energy_args(n).unwrap();
        let g1inv = args.g.clone().try_inverse().unwrap();
        let g2 = args.g2.clone().unwrap();
        let d1 = &g1inv * &g2 * &g1inv * -c;
        let d2 = &g1inv * c;
        let rho1 = mix.constituents[0].fields.rho(n);
        let rho2 = mix.constituents[1].fields.rho(n);
        assert!(max_abs(&(&coupled.first[n] - &plain.first[n] + d1 * (2.0 * rho1))) < 1e-7);
        assert!(max_abs(&(&coupled.second[n] - &plain.second[n] + d2 * (2.0 * rho2))) < 1e-7);
    }
}

#[test]
fn constructed_stresses_have_no_defect() {
    let base = mixture(g2_const());
    let (m1, m2) = (e1(0.3), e2(0.15));
    let mut mix = base.clone();
    for (i, slot) in [MetricSlot::First, MetricSlot::Second].into_iter().enumerate() {
        let c = &mut mix.constituents[i];
        let cauchy: Vec<Mat> = (0..c.fields.len())
            .map(|n| {
                let args = base.energy_args(n).unwrap();
                let a = m1.analytic_metric_derivative(&args, slot).unwrap() + m2.analytic_metric_derivative(&args, slot).unwrap();
                a * (2.0 * c.fields.rho(n))
            })
            .collect();
        c.stress = StressState::from_cauchy(&c.fields, cauchy, vec![Mat::zeros(0, 2); c.fields.len()]).unwrap();
    }
    let d = coupled_doyle_ericksen(&mix, &m1, &m2).unwrap();
    let (f1, f2) = d.fields();
    let all: Vec<usize> = (0..mix.len()).collect();
    assert!(f1.linf(&all) < 1e-7 && f2.linf(&all) < 1e-7);
    for m in d.first.iter().chain(&d.second) {
        assert!(max_abs(&(m - m.transpose())) < 1e-12);
    }
    let built = coupled_stresses(&base, &m1, &m2).unwrap();
    for n in 0..mix.len() {
        assert!(max_abs(&(&built[0][n] - &mix.constituents[0].stress.cauchy[n])) < 1e-7);
    }
    let wrong = QuadraticFree { mu: 1.0, lambda: 0.0, kappa_m: 0.0, coupling: 0.0 };
    assert!(coupled_doyle_ericksen(&mix, &wrong, &m2).is_err());
}

#[test]
fn separable_second_energy_does_not_touch_first_defect() {
    let mix = mixture(g2_const());
    let a = coupled_doyle_ericksen(&mix, &e1(0.3), &e2(0.0)).unwrap();
    let stiffer = MixtureConstituent { mu: 2.5, lambda: 1.0, ..e2(0.0) };
    let b = coupled_doyle_ericksen(&mix, &e1(0.3), &stiffer).unwrap();
    for n in 0..mix.len() {
        assert!(max_abs(&(&a.first[n] - &b.first[n])) < 1e-9);
    }
    assert!(max_abs(&(&a.second[24] - &b.second[24])) > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relabeling_swaps_outputs_exactly(c1 in -0.5f64..0.5, c2 in -0.5f64..0.5, off in -0.4f64..0.4, mu in 0.2f64..2.0) {
        let mix = mixture(mat_from_rows(&[&[1.5, off], &[off, 1.2]]));
        let a = MixtureConstituent { mu, ..e1(c1) };
        let b = e2(c2);
        let d = coupled_doyle_ericksen(&mix, &a, &b).unwrap();
        let s = coupled_doyle_ericksen(&mix.relabeled(), &b.relabeled(), &a.relabeled()).unwrap();
        prop_assert_eq!(&d.first, &s.second);
        prop_assert_eq!(&d.second, &s.first);
        for i in 0..2 {
            prop_assert_eq!(residual_constituent_momentum(&mix, i).unwrap(), residual_constituent_momentum(&mix.relabeled(), 1 - i).unwrap());
        }
    }
}
