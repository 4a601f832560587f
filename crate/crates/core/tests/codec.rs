use hcompress::codec::{compress, compressed_size, decompress, mantissa_bits_for, CompressedBuffer, FormatDescriptor, Scheme};
use proptest::prelude::*;

/// Values with magnitudes spread over `span` decades, some zeros.
fn block(span: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((any::<bool>(), 0.0..1.0f64, 0u8..20), 1..300).prop_map(move |v| {
        v.into_iter()
            .map(|(neg, t, z)| {
                if z == 0 {
                    return 0.0;
                }
                let x = 10f64.powf(-span * t) * 3.7;
                if neg {
                    -x
                } else {
                    x
                }
            })
            .collect()
    })
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::sample::select(Scheme::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn elementwise_bound(values in block(6.0), s in scheme(), e in 1..=14i32) {
        let eps = 10f64.powi(-e);
        let buf = compress(&values, eps, s).unwrap();
        let out = decompress(&buf).unwrap();
        let m = mantissa_bits_for(eps).unwrap();
        let m_min = buf.descriptor.scale;
        for (x, y) in values.iter().zip(&out) {
            prop_assert!((x - y).abs() <= (-(m as f64)).exp2() * (x.abs() + m_min), "{x} -> {y}");
            prop_assert_eq!(x.is_sign_negative() && *x != 0.0, y.is_sign_negative() && *y != 0.0);
        }
    }

    #[test]
    fn deterministic_and_serializable(values in block(12.0), s in scheme(), e in 1..=12i32) {
        let eps = 10f64.powi(-e);
        let a = compress(&values, eps, s).unwrap();
        let b = compress(&values, eps, s).unwrap();
        prop_assert_eq!(a.to_bytes(), b.to_bytes());
        let bytes = a.to_bytes();
        let (c, used) = CompressedBuffer::from_bytes(&bytes).unwrap();
        prop_assert_eq!(used, bytes.len());
        prop_assert_eq!(decompress(&c).unwrap(), decompress(&a).unwrap());
        prop_assert_eq!(a.byte_size(), compressed_size(values.len(), &a.descriptor));
    }

    #[test]
    fn tighter_eps_never_loses_accuracy(values in block(6.0), s in scheme(), e in 1..=13i32) {
        let (loose, tight) = (10f64.powi(-e), 10f64.powi(-e - 1));
        let a = FormatDescriptor::for_values(&values, loose, s).unwrap();
        let b = FormatDescriptor::for_values(&values, tight, s).unwrap();
        prop_assert!(b.mant_bits >= a.mant_bits);
        prop_assert!(b.width() >= a.width());
    }

    #[test]
    fn sizes_are_ordered(values in block(4.0), e in 1..=14i32) {
        let eps = 10f64.powi(-e);
        let size = |s| compress(&values, eps, s).unwrap().byte_size();
        let d = FormatDescriptor::for_values(&values, eps, Scheme::Afl).unwrap();
        prop_assume!(d.exp_bits <= 8);
        let sizes: Vec<usize> = Scheme::ALL.iter().map(|&s| size(s)).collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
        prop_assert!(sizes[3] <= values.len() * 8 + hcompress::codec::HEADER_BYTES);
    }
}

#[test]
fn corrupt_buffers_are_rejected() {
    let buf = compress(&[1.0, -2.0, 3.5, 0.0], 1e-6, Scheme::Afl).unwrap();
    let bytes = buf.to_bytes();
    assert!(CompressedBuffer::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    assert!(CompressedBuffer::from_bytes(&bytes[..10]).is_err());
    let mut bad = bytes.clone();
    bad[0] = 99;
    assert!(CompressedBuffer::from_bytes(&bad).is_err());
    let mut bad = bytes;
    bad[1] = 0;
    assert!(CompressedBuffer::from_bytes(&bad).is_err());
}

#[test]
fn non_finite_input_is_rejected() {
    for s in Scheme::ALL {
        assert!(compress(&[1.0, f64::NAN], 1e-4, s).is_err());
        assert!(compress(&[f64::INFINITY], 1e-4, s).is_err());
    }
    assert!(mantissa_bits_for(0.0).is_err());
    assert!(mantissa_bits_for(1.0).is_err());
}
