use hepnc::cli::default_library;
use hepnc::clustering::broadcast_length;
use hepnc::psk::{Labeling, SchemePair};
use hepnc::sim::{
    bc_phase, ma_phase_decode, simulate, sweep, user_decode, ChannelKind, ChannelModel, SimConfig, User,
};
use hepnc::Complex64;

fn config(m1: usize, m2: usize, kind: ChannelKind, snr_ar_db: f64, symbols: u64) -> SimConfig {
    let library = default_library(&SchemePair::new(m1, m2).unwrap()).unwrap();
    SimConfig {
        channel: ChannelModel { kind, snr_ar_db, snr_br_db: kind.default_snr_br_db(), block_length: 1 },
        max_maps_used: library.maps().len(),
        library,
        symbols,
        seed: 11,
        labeling: Labeling::Natural,
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = config(4, 2, ChannelKind::Awgn, 10.0, 50_000);
    let a = simulate(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| simulate(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, simulate(&cfg).unwrap());
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(a.counts, simulate(&other).unwrap().counts);
}

#[test]
fn average_ber_weights_by_bits() {
    let r = simulate(&config(4, 2, ChannelKind::Awgn, 5.0, 20_000)).unwrap();
    assert!((r.ber_avg - (2.0 * r.ber_ab + r.ber_ba) / 3.0).abs() < 1e-15);
    let r = simulate(&config(8, 2, ChannelKind::Awgn, 5.0, 20_000)).unwrap();
    assert!((r.ber_avg - (3.0 * r.ber_ab + r.ber_ba) / 4.0).abs() < 1e-15);
}

#[test]
fn ber_ba_floor_matches_single_link_bpsk() {
    // with A's link far stronger, the relay misreads B's BPSK symbol at rate Q(sqrt(2 snr_br))
    let cfg = config(4, 2, ChannelKind::Awgn, 40.0, 400_000);
    let snr_br = 10f64.powf(cfg.channel.snr_br_db / 10.0);
    let p = 0.5 * libm::erfc(snr_br.sqrt());
    let r = simulate(&cfg).unwrap();
    let sigma = (p * (1.0 - p) / r.counts.ba_bits as f64).sqrt();
    assert!((r.ber_ba - p).abs() < 4.0 * sigma, "{} vs {p}", r.ber_ba);
}

#[test]
fn noiseless_protocol_recovers_every_pair() {
    for (m1, m2) in [(4, 2), (8, 2), (8, 4)] {
        let s = SchemePair::new(m1, m2).unwrap();
        let lib = default_library(&s).unwrap();
        let (h_a, h_b) = (Complex64::new(1.0, 0.0), Complex64::from_polar(0.61, 0.29));
        for m in lib.maps() {
            let n = broadcast_length(m);
            let gains = vec![Complex64::from_polar(2.0, 1.1); n];
            let noise = vec![Complex64::new(0.0, 0.0); n];
            for xa in 0..m1 {
                for xb in 0..m2 {
                    let y = h_a * s.user_a().point(xa) + h_b * s.user_b().point(xb);
                    let (ea, eb) = ma_phase_decode(y, h_a, h_b, &s);
                    let heard = bc_phase(m.label(ea, eb), m, &gains, &noise);
                    assert_eq!(user_decode(xa, heard, m, User::A), Some(xb));
                    assert_eq!(user_decode(xb, heard, m, User::B), Some(xa));
                }
            }
        }
    }
}

#[test]
fn rayleigh_error_rates_fall_with_snr() {
    let cfg = config(4, 2, ChannelKind::Rayleigh, 0.0, 100_000);
    let rows = sweep(&cfg, &[0.0, 15.0, 30.0]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].1.rer < w[0].1.rer, "{rows:?}");
        assert!(w[1].1.ber_avg < w[0].1.ber_avg, "{rows:?}");
    }
}

#[test]
fn block_fading_keeps_symbol_count() {
    let mut cfg = config(8, 4, ChannelKind::Rayleigh, 20.0, 10_001);
    cfg.channel.block_length = 100;
    let r = simulate(&cfg).unwrap();
    assert_eq!(r.counts.relay_trials, 10_001);
    assert_eq!(r.counts.ab_bits, 3 * 10_001);
    assert_eq!(r.counts.ba_bits, 2 * 10_001);
}

#[test]
fn more_maps_lower_relay_errors_outside_the_ci_regions() {
    // at 10 dB the fade circle crosses singular-state regions, so extra maps help
    let n = 200_000;
    let rer: Vec<f64> = (1..=3)
        .map(|k| {
            let mut cfg = config(4, 2, ChannelKind::Awgn, 10.0, n);
            cfg.max_maps_used = k;
            simulate(&cfg).unwrap().rer
        })
        .collect();
    let se = |p: f64, q: f64| (p * (1.0 - p) / n as f64 + q * (1.0 - q) / n as f64).sqrt();
    assert!(rer[0] - rer[1] > 3.0 * se(rer[0], rer[1]), "{rer:?}");
    assert!(rer[1] - rer[2] > 3.0 * se(rer[1], rer[2]), "{rer:?}");
}
