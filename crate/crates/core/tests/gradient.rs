use rand::Rng;
use rand_distr::StandardNormal;
use ubpnet::autodiff::{loss_and_gradient, record_loss, Tape};
use ubpnet::mimo::{ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;
use ubpnet::train::{draw_batch, gradient, TrainingSample, TrainingSchedule};
use ubpnet::unfolded::{loss, FactorKind, NetVariant, UnfoldedNetwork};

fn plain_loss(net: &UnfoldedNetwork, s: &TrainingSample) -> f64 {
    let out = net.forward_system(&s.system).unwrap();
    let k = s.system.alphabet_size();
    let mut onehot = vec![0.0; s.labels.len() * k];
    for (i, &l) in s.labels.iter().enumerate() {
        onehot[i * k + l] = 1.0;
    }
    loss(&out, &onehot).unwrap()
}

fn sample(cfg: SystemConfig, seed: u64, snr: f64) -> TrainingSample {
    let schedule = TrainingSchedule {
        snr_list_db: vec![snr],
        samples_per_snr_per_batch: 1,
        batch_size: 1,
        seed,
        ..Default::default()
    };
    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid).unwrap();
    draw_batch(&cfg, &ch, &schedule, 0).unwrap().remove(0)
}

/// Random raw parameters; the max-sum correction is kept away from its
/// clamp so most entries carry signal.
fn random_net(cfg: SystemConfig, variant: NetVariant, layers: usize, seed: u64) -> UnfoldedNetwork {
    let mut net = UnfoldedNetwork::new(cfg, variant, layers).unwrap();
    let mut rng = stream(seed, &[99]);
    let n = net.factors.num_params() / variant.families().len();
    let mut raw = Vec::new();
    for kind in variant.families() {
        let centre = match kind {
            FactorKind::Delta => 0.0,
            FactorKind::Lambda => 2.0,
            FactorKind::Omega => -3.0,
        };
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            raw.push(centre + z);
        }
    }
    net.factors.set_raw_params(&raw).unwrap();
    net
}

fn worst_relative_error(variant: NetVariant, seed: u64) -> f64 {
    let cfg = SystemConfig::new(2, 4, 4);
    let snr = stream(seed, &[7]).random_range(0.0..20.0);
    let s = sample(cfg, seed, snr);
    let net = random_net(cfg, variant, 3, seed);
    let mut tape = Tape::new();
    let (l, g) = loss_and_gradient(&mut tape, &net.factors, &s.system, &s.labels).unwrap();
    assert!((l - plain_loss(&net, &s)).abs() <= 1e-12 * (1.0 + l.abs()));

    let raw = net.factors.raw_params();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for p in 0..raw.len() {
        let mut probe = net.clone();
        let mut r = raw.clone();
        r[p] = raw[p] + h;
        probe.factors.set_raw_params(&r).unwrap();
        let up = plain_loss(&probe, &s);
        r[p] = raw[p] - h;
        probe.factors.set_raw_params(&r).unwrap();
        let down = plain_loss(&probe, &s);
        let fd = (up - down) / (2.0 * h);
        let rel = (g[p] - fd).abs() / g[p].abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

#[test]
fn dnn_dbp_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let e = worst_relative_error(NetVariant::DnnDbp, seed);
        assert!(e < 1e-4, "seed {seed}: relative error {e}");
    }
}

#[test]
fn dnn_ms_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let e = worst_relative_error(NetVariant::DnnMs, seed);
        assert!(e < 1e-4, "seed {seed}: relative error {e}");
    }
}

#[test]
fn recorded_loss_matches_plain_forward_at_16qam() {
    let cfg = SystemConfig::new(4, 8, 16);
    for (seed, variant) in [(1, NetVariant::DnnDbp), (2, NetVariant::DnnMs)] {
        let s = sample(cfg, seed, 12.0);
        let net = random_net(cfg, variant, 4, seed);
        let mut tape = Tape::new();
        let rec = record_loss(&mut tape, &net.factors, &s.system, &s.labels).unwrap();
        let a = tape.value(rec.loss);
        let b = plain_loss(&net, &s);
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{variant}: {a} vs {b}");
    }
}

#[test]
fn last_layer_factors_get_zero_gradient() {
    let cfg = SystemConfig::new(2, 4, 16);
    let s = sample(cfg, 4, 10.0);
    let net = random_net(cfg, NetVariant::DnnMs, 3, 4);
    let g = gradient(&net, &[s]).unwrap();
    for (p, v) in g.grad.iter().enumerate() {
        if net.factors.layer_of_param(p) == 2 {
            assert_eq!(*v, 0.0);
        }
    }
    assert!(g.grad.iter().any(|&v| v != 0.0));
}
