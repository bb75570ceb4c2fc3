use std::collections::BTreeSet;

use proptest::prelude::*;
use urngame::incarnation::*;

fn setup() -> impl Strategy<Value = (IncarnationParams, Time)> {
    (-1_000i64..1_000, 1i64..500)
        .prop_flat_map(|(ivt, il)| (Just(ivt), Just(il), 0..=il))
        .prop_flat_map(|(ivt, il, gw)| {
            let p = IncarnationParams::new(ivt, il, gw).unwrap();
            let start = ivt + (gw + 1) / 2;
            (Just(p), start..start + 20 * il)
        })
}

fn id_at(cert: &CertificateFields, p: &IncarnationParams, t: Time) -> PeerId {
    derive_id(cert, current_incarnation(p, t).unwrap(), 160).unwrap()
}

proptest! {
    #[test]
    fn valid_set_is_one_or_two_adjacent((p, t) in setup()) {
        let set = valid_incarnations(&p, t).unwrap();
        let lo = *set.iter().next().unwrap();
        let hi = *set.iter().next_back().unwrap();
        prop_assert!(set.len() == 1 || set.len() == 2);
        prop_assert!(hi - lo <= 1);
        let twice = |dt: i64| {
            // Incarnation current at t + dt/2, by direct search over expiries.
            let target = 2 * (t - p.ivt()) + dt;
            (1u64..).find(|&k| 2 * (k as i64) * p.il() >= target).unwrap()
        };
        prop_assert_eq!(set, BTreeSet::from([twice(-p.gw()), twice(p.gw())]));
    }

    #[test]
    fn current_incarnation_is_ceiling((p, t) in setup()) {
        let k = current_incarnation(&p, t).unwrap();
        prop_assert!(k >= 1);
        prop_assert!(t <= p.expiry(k));
        if k > 1 {
            prop_assert!(t > p.expiry(k - 1));
        }
        prop_assert!(current_incarnation(&p, t + 1).unwrap() >= k);
    }

    #[test]
    fn zero_grace_window_is_singleton(ivt in -1_000i64..1_000, il in 1i64..500, dt in 0i64..10_000) {
        let p = IncarnationParams::new(ivt, il, 0).unwrap();
        let t = ivt + dt;
        prop_assert_eq!(valid_incarnations(&p, t).unwrap(), BTreeSet::from([current_incarnation(&p, t).unwrap()]));
    }

    #[test]
    fn correct_peers_never_reject_each_other((p, t) in setup(), frac in -1.0f64..=1.0) {
        let skew = (frac * p.gw() as f64).round() as Time;
        let (ta, tb) = (t + p.gw(), t + p.gw() + skew);
        let a = CertificateFields::new(*b"CN=a", p.ivt());
        let b = CertificateFields::new(*b"CN=b", p.ivt());
        let b_accepts_a = validate_peer_id(&id_at(&a, &p, ta), &a, &p, tb).is_accept();
        let a_accepts_b = validate_peer_id(&id_at(&b, &p, tb), &b, &p, ta).is_accept();
        prop_assert!(b_accepts_a || a_accepts_b);
        if 2 * skew.abs() <= p.gw() {
            prop_assert!(b_accepts_a && a_accepts_b);
        }
    }

    #[test]
    fn replay_after_expiry_is_rejected((p, t) in setup(), extra in 1i64..1_000) {
        let cert = CertificateFields::new(*b"CN=replayed", p.ivt());
        let id = id_at(&cert, &p, t);
        prop_assert!(validate_peer_id(&id, &cert, &p, t).is_accept());
        let k = current_incarnation(&p, t).unwrap();
        let later = p.expiry(k) + (p.gw() + 1) / 2 + extra;
        prop_assert!(!validate_peer_id(&id, &cert, &p, later).is_accept());
    }

    #[test]
    fn ids_differ_across_incarnations(subject in proptest::collection::vec(any::<u8>(), 0..64), k in 1u64..1_000_000) {
        let cert = CertificateFields::new(subject, 0);
        let a = derive_id(&cert, k, 160).unwrap();
        prop_assert_eq!(a.as_bytes().len(), 20);
        prop_assert_eq!(&a, &derive_id(&cert, k, 160).unwrap());
        prop_assert_ne!(a, derive_id(&cert, k + 1, 160).unwrap());
    }

    #[test]
    fn truncation_keeps_the_prefix(m in 1u16..=256) {
        let cert = CertificateFields::new(*b"prefix", 0);
        let full = derive_id(&cert, 3, 256).unwrap();
        let short = derive_id(&cert, 3, m).unwrap();
        prop_assert_eq!(short.bits(), m);
        let bytes = short.as_bytes();
        prop_assert_eq!(bytes.len(), usize::from(m).div_ceil(8));
        let whole = usize::from(m) / 8;
        prop_assert_eq!(&bytes[..whole], &full.as_bytes()[..whole]);
        if m % 8 != 0 {
            let mask = 0xffu8 << (8 - m % 8);
            prop_assert_eq!(bytes[whole], full.as_bytes()[whole] & mask);
        }
    }
}

#[test]
fn canonical_encoding_layout() {
    let cert = CertificateFields::new(vec![0xaa, 0xbb, 0xcc], 0);
    assert_eq!(
        cert.canonical_encoding(0x0102),
        [&[0, 0, 0, 0, 0, 0, 0, 3][..], &[0xaa, 0xbb, 0xcc], &[0, 0, 0, 0, 0, 0, 1, 2]].concat()
    );
}
