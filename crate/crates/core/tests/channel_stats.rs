use num_complex::Complex64;
use ubpnet::mimo::{random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;

const DRAWS: u64 = 20_000;

/// Sample `E[h_ja conj(h_jb)]` averaged over receive antennas `j`, and the
/// receive-side counterpart.
fn covariances(scenario: ChannelScenario) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let cfg = SystemConfig::new(3, 3, 16);
    let ch = ScenarioChannel::new(cfg, scenario).unwrap();
    let mut tx = vec![vec![Complex64::new(0.0, 0.0); 3]; 3];
    let mut rx = tx.clone();
    for d in 0..DRAWS {
        let h = ch.generate(10.0, &mut stream(5, &[d])).unwrap().h;
        for a in 0..3 {
            for b in 0..3 {
                for j in 0..3 {
                    tx[a][b] += h[(j, a)] * h[(j, b)].conj() / (3.0 * DRAWS as f64);
                    rx[a][b] += h[(a, j)] * h[(b, j)].conj() / (3.0 * DRAWS as f64);
                }
            }
        }
    }
    (tx, rx)
}

fn expect(cov: &[Vec<Complex64>], r: f64) {
    for (a, row) in cov.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            let want = r.powi((a as i32 - b as i32).abs());
            assert!((v.re - want).abs() < 0.03 && v.im.abs() < 0.03, "({a},{b}): {v} vs {want}");
        }
    }
}

#[test]
fn iid_entries_have_unit_power() {
    let (tx, rx) = covariances(ChannelScenario::Iid);
    expect(&tx, 0.0);
    expect(&rx, 0.0);
}

#[test]
fn tx_correlation_is_exponential() {
    let (tx, rx) = covariances(ChannelScenario::TxCorrelated { r: 0.5 });
    expect(&tx, 0.5);
    expect(&rx, 0.0);
}

#[test]
fn rx_correlation_is_exponential() {
    let (tx, rx) = covariances(ChannelScenario::RxCorrelated { r: 0.5 });
    expect(&tx, 0.0);
    expect(&rx, 0.5);
}

#[test]
fn noise_power_matches_snr() {
    let cfg = SystemConfig::new(4, 4, 16);
    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid).unwrap();
    let snr = 7.0;
    let mut acc = 0.0;
    let mut count = 0.0;
    for d in 0..5_000 {
        let mut rng = stream(6, &[d]);
        let inst = ch.generate(snr, &mut rng).unwrap();
        let frame = random_frame(&cfg, &mut rng).unwrap();
        let rx = transmit(&inst, &frame, &mut rng).unwrap();
        for j in 0..4 {
            let clean: Complex64 = (0..4).map(|i| inst.h[(j, i)] * frame.x[i]).sum();
            acc += (rx.y[j] - clean).norm_sqr();
            count += 1.0;
        }
    }
    let want = 4.0 / 10f64.powf(snr / 10.0);
    assert!((acc / count / want - 1.0).abs() < 0.03, "{} vs {want}", acc / count);
}

#[test]
fn symbols_have_unit_energy() {
    let cfg = SystemConfig::new(8, 8, 16);
    let mut e = 0.0;
    for d in 0..5_000 {
        let frame = random_frame(&cfg, &mut stream(7, &[d])).unwrap();
        e += frame.x.iter().map(|x| x.norm_sqr()).sum::<f64>() / 8.0;
    }
    assert!((e / 5_000.0 - 1.0).abs() < 0.02);
}
