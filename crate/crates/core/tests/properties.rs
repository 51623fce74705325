use std::sync::Arc;

use eitcool::analytics::{
    bloch_observables, bloch_steady_state, fluctuation_spectrum, rate_equation_stationary, rates,
    rates_at_optimum,
};
use eitcool::effective::{effective_pump_rates, effective_rates_for};
use eitcool::liouvillian::Generator;
use eitcool::model::{
    build_model_four_level, build_model_seven_level, build_model_three_level, dressed_states,
};
use eitcool::operator::{
    annihilation, compose_space, creation, hermiticity_residual, lindblad_rhs_matrix, max_abs,
    trace_product, transition,
};
use eitcool::{HilbertSpace, LindbladModel, ModelParams, Operator, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complex_matrix(d: usize, seed: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
    })
}

/// Random density matrix `A A† / Tr`.
fn random_rho(d: usize, seed: &[f64]) -> DMatrix<C64> {
    let a = complex_matrix(d, seed);
    let r = &a * a.adjoint();
    let tr = r.trace();
    r / tr
}

fn random_model(space: &Arc<HilbertSpace>, seed: &[f64], rates: &[f64]) -> LindbladModel {
    let d = space.dim();
    let a = complex_matrix(d, seed);
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut m = LindbladModel::new(Operator::from_matrix(space, h).unwrap()).unwrap();
    for (k, r) in rates.iter().enumerate() {
        let shifted: Vec<f64> = seed.iter().skip(k + 1).chain(seed.iter()).copied().collect();
        let l = Operator::from_matrix(space, complex_matrix(d, &shifted)).unwrap();
        m.add_channel(format!("c{k}"), *r, l).unwrap();
    }
    m
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..12.0,
        -40.0f64..40.0,
        0.1f64..30.0,
        0.05f64..0.95,
        0.0f64..0.3,
    )
        .prop_map(|(o, d, g, split, eta)| {
            let mut p = ModelParams::reference().with_gamma_total(g);
            p.rabi_omega0 = o;
            p.detuning = d;
            p.gamma_plus = g * split;
            p.gamma_minus = g * (1.0 - split);
            p.eta = eta;
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        seed in prop::collection::vec(-1.0f64..1.0, 40),
        rates in prop::collection::vec(0.0f64..3.0, 0..4),
        levels in 1usize..4,
        fock in 1usize..4,
    ) {
        let labels: Vec<String> = (0..levels).map(|i| format!("l{i}")).collect();
        let space = if fock == 1 {
            HilbertSpace::internal_only(&labels).unwrap()
        } else {
            compose_space(&labels, fock).unwrap()
        };
        let model = random_model(&space, &seed, &rates);
        let rho = random_rho(space.dim(), &seed[3..]);
        let drho = lindblad_rhs_matrix(&model, &rho).unwrap();
        prop_assert!(drho.trace().norm() < 1e-12);
        prop_assert!(hermiticity_residual(&drho) < 1e-12);
        let fast = Generator::new(&model).apply_matrix(&rho);
        prop_assert!(max_abs(&(fast - drho)) < 1e-12);
    }

    #[test]
    fn ladder_commutator_structure(fock in 2usize..20, levels in 1usize..4) {
        let labels: Vec<String> = (0..levels).map(|i| format!("l{i}")).collect();
        let space = compose_space(&labels, fock).unwrap();
        let b = annihilation(&space);
        let bd = creation(&space);
        let comm = &(&b * &bd) - &(&bd * &b);
        let top = fock - 1;
        for l in 0..levels {
            for n in 0..fock {
                let i = space.index(l, n);
                let want = if n == top { -(top as f64) } else { 1.0 };
                prop_assert!((comm.matrix()[(i, i)] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let mut off = comm.matrix().clone();
        for i in 0..space.dim() {
            off[(i, i)] = C64::new(0.0, 0.0);
        }
        prop_assert!(max_abs(&off) < 1e-14);
    }

    #[test]
    fn transition_products(a in 0usize..4, b in 0usize..4, c in 0usize..4, d in 0usize..4, fock in 1usize..4) {
        let labels = ["w", "x", "y", "z"];
        let space = if fock == 1 {
            HilbertSpace::internal_only(&labels).unwrap()
        } else {
            compose_space(&labels, fock).unwrap()
        };
        let ab = transition(&space, labels[a], labels[b]).unwrap();
        let cd = transition(&space, labels[c], labels[d]).unwrap();
        let prod = &ab * &cd;
        let want = if b == c {
            transition(&space, labels[a], labels[d]).unwrap()
        } else {
            Operator::zeros(&space)
        };
        prop_assert!(prod.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn dressed_vieta(p in params_strategy()) {
        let r = dressed_states(&p).unwrap();
        let o2 = p.rabi_omega0 * p.rabi_omega0;
        prop_assert!((r.e_plus * r.e_minus + o2 / 2.0).abs() <= 1e-12 * o2.max(p.detuning.powi(2)).max(1.0));
        prop_assert!((r.e_plus + r.e_minus + p.detuning).abs() <= 1e-12 * p.detuning.abs().max(1.0));
    }

    #[test]
    fn rates_from_spectrum(p in params_strategy()) {
        let r = rates(&p);
        let sp = 2.0 * fluctuation_spectrum(&p, -1.0).unwrap().re;
        let sm = 2.0 * fluctuation_spectrum(&p, 1.0).unwrap().re;
        prop_assert!((r.a_plus - sp).abs() <= 1e-12 * r.a_plus.abs().max(1e-300));
        prop_assert!((r.a_minus - sm).abs() <= 1e-12 * r.a_minus.abs().max(1e-300));
    }

    #[test]
    fn optimum_is_general_rates(m in 0.3f64..15.0, g in 0.1f64..40.0, eta in 0.01f64..0.3) {
        let mut p = ModelParams::reference().with_gamma_total(g).with_rabi_ratio(m);
        p.eta = eta;
        let a = rates(&p);
        let b = rates_at_optimum(m, g, eta).unwrap();
        prop_assert!((a.a_plus - b.a_plus).abs() <= 1e-13 * b.a_plus);
        prop_assert!((a.a_minus - b.a_minus).abs() <= 1e-13 * b.a_minus);
    }

    #[test]
    fn effective_rate_ratios(
        op in 0.0f64..20.0, de in -30.0f64..30.0,
        g0 in 0.1f64..20.0, gp in 0.0f64..1.0, gm in 0.0f64..1.0,
    ) {
        let r = effective_pump_rates(op, de, g0, gp, gm).unwrap();
        prop_assert!((r.gamma_op_p1 * g0 - r.gamma_op_0 * gp).abs() <= 1e-14 * (r.gamma_op_0 * gp).max(1e-300));
        prop_assert!((r.gamma_op_m1 * g0 - r.gamma_op_0 * gm).abs() <= 1e-14 * (r.gamma_op_0 * gm).max(1e-300));
    }

    #[test]
    fn effective_rate_monotonicity(g0 in 0.1f64..20.0, gp in 0.01f64..1.0, gm in 0.01f64..1.0) {
        let pumps = [0.1, 0.5, 1.0, 2.0, 5.0];
        let dets = [0.0, 0.5, 2.0, 10.0, 50.0];
        for &de in &dets {
            let mut last = -1.0;
            for &op in &pumps {
                let r = effective_pump_rates(op, de, g0, gp, gm).unwrap();
                prop_assert!(r.gamma_op_0 > last);
                last = r.gamma_op_0;
            }
        }
        for &op in &pumps {
            let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            for &de in &dets {
                let r = effective_pump_rates(op, -de, g0, gp, gm).unwrap();
                prop_assert!(r.gamma_op_p1 < last.0 && r.gamma_op_m1 < last.1 && r.gamma_op_0 < last.2);
                last = (r.gamma_op_p1, r.gamma_op_m1, r.gamma_op_0);
            }
        }
    }

    #[test]
    fn birth_death_stationary_mean(
        ap in 0.0f64..0.5, w in 0.01f64..1.0, gm in 0.0f64..0.01, n in 0.0f64..5.0,
    ) {
        let am = ap + w;
        let p = rate_equation_stationary(ap, am, gm, n, 3000).unwrap();
        let mean: f64 = p.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        let want = (ap + n * gm) / (w + gm);
        prop_assert!((mean - want).abs() < 1e-8, "{} vs {}", mean, want);
    }

    #[test]
    fn bloch_dark_purity(p in params_strategy()) {
        let rho = bloch_steady_state(&p).unwrap();
        let pd = trace_product(&bloch_observables()[1], &rho).re;
        prop_assert!(1.0 - pd < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn built_models_are_trace_preserving(p in params_strategy(), seed in prop::collection::vec(-1.0f64..1.0, 20)) {
        let mut p = p;
        p.gamma_p1 = p.gamma_plus;
        p.gamma_m1 = p.gamma_minus;
        p.gamma_0 = 0.3;
        p.gamma_dark = 0.1;
        p.gamma_s = 0.4;
        p.big_gamma_0 = 5.0;
        p.big_gamma_p1 = 0.05;
        p.big_gamma_m1 = 0.07;
        p.rabi_pump = 2.0;
        p.gamma_total += 1.0;
        let rates = effective_rates_for(&p).unwrap();
        let models = [
            build_model_three_level(&p, 3).unwrap(),
            build_model_four_level(&p, &rates, 3).unwrap(),
            build_model_seven_level(&p, 3).unwrap(),
        ];
        for m in &models {
            prop_assert!(m.hamiltonian().hermiticity_residual() < 1e-13);
            let rho = random_rho(m.space().dim(), &seed);
            let drho = lindblad_rhs_matrix(m, &rho).unwrap();
            prop_assert!(drho.trace().norm() < 1e-12);
            prop_assert!(hermiticity_residual(&drho) < 1e-12);
        }
    }
}
