//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N [PASS]` line (visible with `--nocapture`). Run with
//! `cargo test -p blocklift --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use blocklift::embed::{
    classify, embed_chain, embed_chain_with, predict_blti, reduce, EmbedOptions, ModelClass,
};
use blocklift::kron::{kron_jacobian, kron_power_vec, lifted_a, lifted_b};
use blocklift::model::BlockChain;
use blocklift::poly::{lambda_factor, poly_eval, split_const, MultiPoly};
use blocklift::sim::{compare, simulate_chain, simulate_piti, InputSignal, SimConfig};
use common::{load_fixture, random_chain, random_x0};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Chains the fuzzing criteria share (seeded, fixed count).
fn fuzz_chains() -> Vec<BlockChain> {
    (0..50).map(|i| random_chain(1000 + i)).collect()
}

fn assert_budget(start: Instant, budget: Duration, what: &str) -> Duration {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{what} took {elapsed:?}, over the {budget:?} budget"
    );
    elapsed
}

#[test]
fn criterion_1_mimo_lift_dimensions() {
    let start = Instant::now();
    let chain = load_fixture("mimo_wiener_hammerstein.json");
    let model = embed_chain(&chain).unwrap();
    let (reduced, _) = reduce(&model);
    assert_eq!(model.n_z(), 17);
    assert_eq!(reduced.n_z(), 12);
    let elapsed = assert_budget(start, Duration::from_secs(1), "criterion 1");
    println!("criterion 1 [PASS]: lifted dimension 17 -> 12 ({elapsed:?})");
}

fn compare_fixture(chain: &BlockChain, input: &InputSignal, cfg: &SimConfig) -> (ModelClass, f64) {
    let model = embed_chain(chain).unwrap();
    let class = classify(&model);
    let (reduced, _) = reduce(&model);
    let x0 = chain.ones_initial_state();
    let z0 = reduced.atlas.lift(&x0).unwrap();
    let a = simulate_chain(chain, &x0, input, cfg).unwrap();
    let b = simulate_piti(&reduced, &z0, input, cfg).unwrap();
    (class, compare(&a, &b).unwrap().max_abs)
}

#[test]
fn criterion_2_mimo_gaussian_comparison() {
    let start = Instant::now();
    let chain = load_fixture("mimo_wiener_hammerstein.json");
    let cfg = SimConfig::new(1e-4, 5.0).unwrap();
    let input = InputSignal::WhiteNoise {
        seed: 42,
        scale: 1.0,
    };
    let (class, max_abs) = compare_fixture(&chain, &input, &cfg);
    assert_eq!(class, ModelClass::Piti);
    assert!(max_abs <= 1e-9, "max error {max_abs}");
    let elapsed = assert_budget(start, Duration::from_secs(30), "criterion 2");
    println!("criterion 2 [PASS]: max |y_chain - y_lifted| = {max_abs:.3e} ({elapsed:?})");
}

#[test]
fn criterion_3_mimo_blti_variant() {
    let start = Instant::now();
    let chain = load_fixture("mimo_wiener_hammerstein_blti.json");
    let cfg = SimConfig::new(1e-4, 5.0).unwrap();
    let input = InputSignal::WhiteNoise {
        seed: 42,
        scale: 1.0,
    };
    let (class, max_abs) = compare_fixture(&chain, &input, &cfg);
    assert_eq!(class, ModelClass::BltiNoFeedthrough);
    assert!(max_abs <= 1e-9, "max error {max_abs}");
    let elapsed = assert_budget(start, Duration::from_secs(30), "criterion 3");
    println!("criterion 3 [PASS]: bilinear variant, max error {max_abs:.3e} ({elapsed:?})");
}

#[test]
fn criterion_4_siso_multisine_comparison() {
    let start = Instant::now();
    let chain = load_fixture("siso_chain.json");
    let model = embed_chain(&chain).unwrap();
    assert_eq!(model.n_z(), 931);
    assert_eq!(classify(&model), ModelClass::BltiNoFeedthrough);
    let (reduced, _) = reduce(&model);
    assert_eq!(reduced.n_z(), 103);

    let cfg = SimConfig::new(1e-4, 20.0).unwrap();
    let input = InputSignal::standard_multisine();
    let x0 = chain.ones_initial_state();
    let z0 = reduced.atlas.lift(&x0).unwrap();
    let a = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
    let b = simulate_piti(&reduced, &z0, &input, &cfg).unwrap();
    let max_abs = compare(&a, &b).unwrap().max_abs;
    assert!(max_abs <= 1e-9, "max error {max_abs}");
    let elapsed = assert_budget(start, Duration::from_secs(180), "criterion 4");
    println!(
        "criterion 4 [PASS]: 931 -> 103, BLTI_no_feedthrough, max error {max_abs:.3e} ({elapsed:?})"
    );
}

#[test]
fn criterion_5_kronecker_operator_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..200 {
        let n = rng.random_range(1..=3usize);
        let tau = rng.random_range(1..=4usize);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));

        // Jacobian of the Kronecker power vs central finite differences
        let jac = kron_jacobian(&x, tau);
        let h = 1e-6;
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (kron_power_vec(&xp, tau) - kron_power_vec(&xm, tau)) / (2.0 * h);
            let diff = (DVector::from(jac.column(j)) - fd).amax();
            assert!(diff <= 1e-6, "case {case}: FD mismatch {diff}");
        }

        // lifted state operator identity
        let lhs = &jac * (&a * &x);
        let rhs = lifted_a(&a, tau) * kron_power_vec(&x, tau);
        assert!(
            (lhs - rhs).amax() <= 1e-12,
            "case {case}: lifted A identity"
        );

        // lifted input column identity
        let lhs = &jac * &b;
        let rhs = lifted_b(&b, tau) * kron_power_vec(&x, tau - 1);
        assert!(
            (lhs - rhs).amax() <= 1e-12,
            "case {case}: lifted B identity"
        );
    }
    let elapsed = assert_budget(start, Duration::from_secs(10), "criterion 5");
    println!("criterion 5 [PASS]: 200 random Kronecker-operator identity cases ({elapsed:?})");
}

#[test]
fn criterion_6_randomized_exactness() {
    let start = Instant::now();
    let cfg = SimConfig::new(1e-3, 2.0).unwrap();
    let input = InputSignal::Multisine {
        freqs: vec![0.3, 0.7],
        amps: vec![0.4, 0.25],
        phases: vec![0.4, 1.1],
    };
    let mut worst = 0.0f64;
    for (i, chain) in fuzz_chains().iter().enumerate() {
        let model = embed_chain_with(
            chain,
            &EmbedOptions {
                reduce_each_step: true,
            },
        )
        .unwrap();
        let x0 = random_x0(chain, 5000 + i as u64);
        let z0 = model.atlas.lift(&x0).unwrap();
        let a = simulate_chain(chain, &x0, &input, &cfg).unwrap();
        let b = simulate_piti(&model, &z0, &input, &cfg).unwrap();
        let rel = compare(&a, &b).unwrap().relative_to(&a);
        assert!(
            rel <= 1e-6,
            "chain {i} (seed {}): relative error {rel}",
            1000 + i
        );
        worst = worst.max(rel);
    }
    let elapsed = assert_budget(start, Duration::from_secs(120), "criterion 6");
    println!(
        "criterion 6 [PASS]: 50 random chains, worst relative error {worst:.3e} ({elapsed:?})"
    );
}

#[test]
fn criterion_7_bilinear_prediction_soundness() {
    let start = Instant::now();
    let mut predicted = 0usize;
    for (i, chain) in fuzz_chains().iter().enumerate() {
        if predict_blti(chain) {
            predicted += 1;
            let model = embed_chain_with(
                chain,
                &EmbedOptions {
                    reduce_each_step: true,
                },
            )
            .unwrap();
            assert_eq!(
                classify(&model),
                ModelClass::BltiNoFeedthrough,
                "chain {i} (seed {}) predicted bilinear but classified otherwise",
                1000 + i
            );
        }
    }
    for name in [
        "mimo_wiener_hammerstein.json",
        "mimo_wiener_hammerstein_blti.json",
        "siso_chain.json",
    ] {
        let chain = load_fixture(name);
        if predict_blti(&chain) {
            predicted += 1;
            let model = embed_chain(&chain).unwrap();
            assert_eq!(classify(&model), ModelClass::BltiNoFeedthrough, "{name}");
        }
    }
    assert!(predicted > 0, "the bilinear-prediction test never fired");
    let elapsed = start.elapsed();
    println!(
        "criterion 7 [PASS]: {predicted} predicted-bilinear chains, zero counterexamples ({elapsed:?})"
    );
}

#[test]
fn criterion_8_reduction_safety() {
    let start = Instant::now();
    for name in [
        "mimo_wiener_hammerstein.json",
        "mimo_wiener_hammerstein_blti.json",
        "siso_chain.json",
    ] {
        let chain = load_fixture(name);
        let model = embed_chain(&chain).unwrap();
        let (reduced, rm) = reduce(&model);
        let t = rm.t_matrix();
        let td = rm.t_dagger_matrix();
        assert_eq!(
            &t * &td,
            DMatrix::identity(rm.n_reduced(), rm.n_reduced()),
            "{name}"
        );

        let x0 = chain.ones_initial_state();
        let cfg = SimConfig::new(1e-3, 0.5).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 21,
            scale: 1.0,
        };
        let full = simulate_piti(&model, &model.atlas.lift(&x0).unwrap(), &input, &cfg).unwrap();
        let red = simulate_piti(&reduced, &reduced.atlas.lift(&x0).unwrap(), &input, &cfg).unwrap();
        let rel = compare(&full, &red).unwrap().relative_to(&full);
        assert!(
            rel <= 1e-12,
            "{name}: reduced vs unreduced relative error {rel}"
        );
    }
    let elapsed = start.elapsed();
    println!("criterion 8 [PASS]: reduction leaves responses unchanged ({elapsed:?})");
}

#[test]
fn criterion_9_integral_factorization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for case in 0..100 {
        let n_in = rng.random_range(1..=3usize);
        let n_out = rng.random_range(1..=2usize);
        let mut f = MultiPoly::new(n_in, n_out);
        for row in 0..n_out {
            for _ in 0..10 {
                let exps: Vec<u32> = (0..n_in).map(|_| rng.random_range(0..=4u32)).collect();
                if exps.iter().sum::<u32>() > 4 {
                    continue;
                }
                f.add_term(row, &exps, rng.random_range(-1.0..1.0));
            }
        }
        let (f0, f_bar) = split_const(&f);
        let f_tilde = lambda_factor(&f_bar).unwrap();
        for _ in 0..10 {
            let u = DVector::from_fn(n_in, |_, _| rng.random_range(-1.0..1.0));
            let lhs = poly_eval(&f_tilde, &u).unwrap() * &u;
            let rhs = f.eval(&u).unwrap() - &f0;
            let rel = (lhs - &rhs).amax() / rhs.amax().max(1.0);
            assert!(rel <= 1e-10, "case {case}: relative residual {rel}");
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 9 [PASS]: 100 random factorizations ({elapsed:?})");
}

// calibration guard for the suite itself: the fuzz generator must keep every
// lifted model inside the documented size bound
#[test]
fn fuzz_chains_stay_within_bounds() {
    for (i, chain) in fuzz_chains().iter().enumerate() {
        chain
            .validate()
            .unwrap_or_else(|e| panic!("chain {i} invalid: {e}"));
        let model = embed_chain_with(
            chain,
            &EmbedOptions {
                reduce_each_step: true,
            },
        )
        .unwrap();
        assert!(model.n_z() <= 1200, "chain {i} lifted to {}", model.n_z());
    }
}
