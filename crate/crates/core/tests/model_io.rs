use proptest::prelude::*;
use ubpnet::harness::{load_model, model_from_str, model_to_string, save_model};
use ubpnet::mimo::SystemConfig;
use ubpnet::unfolded::{NetVariant, UnfoldedNetwork};
use ubpnet::Error;

fn network() -> impl Strategy<Value = UnfoldedNetwork> {
    (
        1..4usize,
        1..5usize,
        prop::sample::select(vec![4usize, 16, 64]),
        1..4usize,
        prop::bool::ANY,
    )
        .prop_flat_map(|(m, n, order, layers, ms)| {
            let variant = if ms { NetVariant::DnnMs } else { NetVariant::DnnDbp };
            let cfg = SystemConfig::new(m, n, order);
            let len = layers * 2 * m * 2 * n * variant.families().len();
            prop::collection::vec(-12.0..12.0f64, len).prop_map(move |raw| {
                let mut net = UnfoldedNetwork::new(cfg, variant, layers).unwrap();
                net.factors.set_raw_params(&raw).unwrap();
                net
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip_is_exact(net in network()) {
        let text = model_to_string(&net);
        let back = model_from_str(&text).unwrap();
        prop_assert_eq!(model_to_string(&back), text);
        prop_assert_eq!(back, net);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.ubp");
    let net = UnfoldedNetwork::new(SystemConfig::new(2, 3, 16), NetVariant::DnnMs, 2).unwrap();
    save_model(&net, &path).unwrap();
    assert_eq!(load_model(&path).unwrap(), net);
    assert!(matches!(load_model(dir.path().join("missing.ubp")), Err(Error::Io { .. })));
}

#[test]
fn rejects_wrong_row_length() {
    let net = UnfoldedNetwork::new(SystemConfig::new(1, 1, 4), NetVariant::DnnDbp, 1).unwrap();
    let text = model_to_string(&net);
    let short = text.replacen(" 5.0000000000000000e-1\n", "\n", 1);
    assert!(matches!(model_from_str(&short), Err(Error::Format(_))));
    let extra = format!("{text}delta layer=2\n");
    assert!(matches!(model_from_str(&extra), Err(Error::Format(_))));
}
