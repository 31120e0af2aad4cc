use proptest::prelude::*;

use ubpnet::bp::{
    apply_correction, bp_detect, damp, extrinsic_sum, had_damping_factor, kl_divergence, ms_prior, softmax_prior,
    BeliefState, BpVariant, Factor, RealSystem, PRIOR_FLOOR,
};
use ubpnet::mimo::{indices_to_bits, modulate, random_frame, transmit, ChannelScenario, PamAlphabet, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;
use ubpnet::tensor::Tensor3;
use ubpnet::unfolded::{constrain, unconstrain, FactorInit, NetVariant, UnfoldedNetwork};

fn tensor(dims: [usize; 3]) -> impl Strategy<Value = Tensor3> {
    prop::collection::vec(-60.0..60.0f64, dims.iter().product::<usize>())
        .prop_map(move |v| Tensor3::from_vec(dims[0], dims[1], dims[2], v))
}

fn any_tensor() -> impl Strategy<Value = Tensor3> {
    (1..4usize, 1..5usize, prop::sample::select(vec![2usize, 4, 8])).prop_flat_map(|(a, b, k)| tensor([a, b, k]))
}

fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6..1.0f64, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn system(seed: u64, cfg: SystemConfig, snr: f64) -> RealSystem {
    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid).unwrap();
    let mut rng = stream(seed, &[]);
    let inst = ch.generate(snr, &mut rng).unwrap();
    let frame = random_frame(&cfg, &mut rng).unwrap();
    let rx = transmit(&inst, &frame, &mut rng).unwrap();
    RealSystem::new(&cfg, &inst, &rx).unwrap()
}

proptest! {
    #[test]
    fn softmax_lanes_sum_to_one(alpha in any_tensor()) {
        let k = alpha.dims()[2];
        for lane in softmax_prior(&alpha).as_slice().chunks_exact(k) {
            prop_assert!((lane.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(lane.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn max_sum_prior_overestimates(alpha in any_tensor()) {
        let ms = ms_prior(&alpha);
        let sm = softmax_prior(&alpha);
        let k = alpha.dims()[2];
        for (a, b) in ms.as_slice().iter().zip(sm.as_slice()) {
            prop_assert!(a >= b);
        }
        for lane in ms.as_slice().chunks_exact(k) {
            prop_assert!(lane.iter().any(|&v| v == 1.0));
        }
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self((p, q) in (2..9usize).prop_flat_map(|k| (distribution(k), distribution(k)))) {
        prop_assert!(kl_divergence(&p, &q) >= 0.0);
        prop_assert!(kl_divergence(&p, &p).abs() < 1e-12);
    }

    #[test]
    fn had_factor_in_unit_interval(
        (p, q) in (2..9usize).prop_flat_map(|k| (distribution(k), distribution(k))),
        log_c in -8.0..4.0f64,
    ) {
        let k = p.len();
        let step = had_damping_factor(
            &Tensor3::from_vec(1, 1, k, p),
            &Tensor3::from_vec(1, 1, k, q),
            10f64.powf(log_c),
        ).unwrap();
        prop_assert!(step.delta >= 0.0 && step.delta < 1.0);
    }

    #[test]
    fn extrinsic_sum_leaves_out_own_message(beta in (1..5usize, 1..4usize).prop_flat_map(|(o, s)| tensor([o, s, 4]))) {
        let [obs, sym, k] = beta.dims();
        let alpha = extrinsic_sum(&beta);
        prop_assert_eq!(alpha.dims(), [sym, obs, k]);
        for i in 0..sym {
            for j in 0..obs {
                for kk in 0..k {
                    let direct: f64 = (0..obs).filter(|&t| t != j).map(|t| beta.get(t, i, kk)).sum();
                    prop_assert!((alpha.get(i, j, kk) - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn damping_endpoints(cur in tensor([2, 3, 4]), prev in tensor([2, 3, 4])) {
        let (cur, prev) = (softmax_prior(&cur), softmax_prior(&prev));
        prop_assert_eq!(damp(&cur, &prev, Factor::Scalar(0.0)).unwrap(), cur.clone());
        prop_assert_eq!(damp(&cur, &prev, Factor::Scalar(1.0)).unwrap(), prev);
    }

    #[test]
    fn neutral_correction_is_max_sum(alpha in tensor([2, 3, 4]), prev in tensor([2, 3, 4])) {
        let p = ms_prior(&alpha);
        let out = apply_correction(&p, &softmax_prior(&prev), Factor::Scalar(0.0), Factor::Scalar(1.0), Factor::Scalar(0.0)).unwrap();
        for (o, v) in out.as_slice().iter().zip(p.as_slice()) {
            prop_assert_eq!(*o, v.max(PRIOR_FLOOR));
        }
    }

    #[test]
    fn correction_output_stays_in_floor_range(
        alpha in tensor([1, 2, 4]),
        prev in tensor([1, 2, 4]),
        d in 0.0..=1.0f64,
        l in 0.0..=1.0f64,
        w in 0.0..=1.0f64,
    ) {
        let out = apply_correction(&ms_prior(&alpha), &softmax_prior(&prev), Factor::Scalar(d), Factor::Scalar(l), Factor::Scalar(w)).unwrap();
        prop_assert!(out.as_slice().iter().all(|&v| (PRIOR_FLOOR..=1.0).contains(&v)));
    }

    #[test]
    fn logistic_stays_inside_unit_interval(raw in -30.0..=30.0f64) {
        let v = constrain(raw);
        prop_assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn logistic_round_trip(raw in -15.0..15.0f64) {
        prop_assert!((unconstrain(constrain(raw)) - raw).abs() <= 1e-8);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit(bits in 1..5u32) {
        let pam = PamAlphabet::new(1 << bits).unwrap();
        for k in 1..pam.len() {
            prop_assert_eq!((pam.label(k) ^ pam.label(k - 1)).count_ones(), 1);
        }
    }

    #[test]
    fn bits_survive_modulation(bits in prop::collection::vec(0u8..2, 3 * 8)) {
        let cfg = SystemConfig::new(3, 3, 256);
        let frame = modulate(&bits, &cfg).unwrap();
        prop_assert_eq!(indices_to_bits(&frame.labels, &cfg).unwrap(), bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn depth_concatenation(seed in any::<u64>(), first in 1..4usize, second in 1..4usize, d in 0.05..0.95f64) {
        let cfg = SystemConfig::new(3, 6, 16);
        let sys = system(seed, cfg, 12.0);
        let init = FactorInit { delta: d, lambda: 0.9, omega: 0.01 };
        for variant in [NetVariant::DnnDbp, NetVariant::DnnMs] {
            let net = UnfoldedNetwork::with_init(cfg, variant, first + second, init).unwrap();
            let whole = net.run_layers(&sys, BeliefState::initial(&sys), first + second).unwrap();
            let head = net.run_layers(&sys, BeliefState::initial(&sys), first).unwrap();
            let tail = net.run_layers(&sys, head, second).unwrap();
            prop_assert_eq!(tail, whole);
        }
    }

    #[test]
    fn zero_damping_network_is_plain_bp(seed in any::<u64>(), layers in 1..6usize, snr in 0.0..25.0f64) {
        let cfg = SystemConfig::new(2, 4, 16);
        let sys = system(seed, cfg, snr);
        let size = layers * 4 * 8;
        let f = ubpnet::unfolded::CorrectionFactors::from_values(NetVariant::DnnDbp, layers, 4, 8, vec![vec![0.0; size]]).unwrap();
        let net = UnfoldedNetwork::from_factors(cfg, f).unwrap();
        let out = net.forward_system(&sys).unwrap();
        let bp = bp_detect(&sys, BpVariant::Plain, layers).unwrap();
        prop_assert_eq!(out.gamma, bp.gamma);
    }
}
