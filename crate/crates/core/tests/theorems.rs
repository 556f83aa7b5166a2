use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use badic_qmc::discrepancy::{delta_bound, star_discrepancy_exact};
use badic_qmc::engine::{generate_block, point_to_rational, BijectionFamily};
use badic_qmc::field::FieldSpec;
use badic_qmc::genmatrix::{identity_set, stirling_set, MatrixSet};
use badic_qmc::inputseq::{empirical_ud_test, parse_sequence_spec, UdVerdict};
use badic_qmc::quality::t_profile;

const SIZES: [usize; 4] = [25, 125, 625, 3125];

fn stirling_pair() -> MatrixSet {
    stirling_set(&FieldSpec::prime(5).unwrap(), 2, 12).unwrap()
}

/// `D*_N` of the first `N` points for each `N` in `SIZES`.
fn discrepancies(set: &MatrixSet, spec: &str) -> Vec<BigRational> {
    let q = set.field().order();
    let seq = parse_sequence_spec(spec, q).unwrap();
    let points = generate_block(set, &BijectionFamily::identity(q), &seq, 0, 3125, set.depth()).unwrap();
    let coords: Vec<Vec<BigRational>> =
        points.iter().map(|p| (1..=p.s()).map(|i| point_to_rational(p, i)).collect()).collect();
    SIZES.iter().map(|&n| star_discrepancy_exact(&coords[..n]).unwrap().value).collect()
}

#[test]
fn uniformly_distributed_inputs_converge() {
    let set = stirling_pair();
    let small = BigRational::new(1.into(), 100.into());
    for spec in ["natural", "neg", "alt", "paper-ex2c"] {
        let d = discrepancies(&set, spec);
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{spec}: {d:?}");
        assert!(d[3] < small, "{spec}: D*_3125 = {}", d[3]);
    }
}

#[test]
fn net_blocks_meet_the_delta_bound() {
    let set = stirling_pair();
    for spec in ["natural", "neg"] {
        for (m, d) in discrepancies(&set, spec).into_iter().enumerate() {
            let m = m as u32 + 2;
            let n = BigInt::from(5u32.pow(m));
            let delta: BigUint = delta_bound(5, 0, m, 2).unwrap();
            assert!(d * BigRational::from_integer(n) <= BigRational::from_integer(delta.into()), "{spec}, m = {m}");
        }
    }
}

#[test]
fn non_uniform_inputs_do_not_converge() {
    let set = stirling_pair();
    let floor = BigRational::new(1.into(), 5.into());
    for spec in ["quad:a=1", "affine:a=5"] {
        let seq = parse_sequence_spec(spec, 5).unwrap();
        assert_eq!(seq.is_ud_expected(), UdVerdict::NotUD, "{spec}");
        assert!(empirical_ud_test(&seq, 2, 3125).unwrap().max_deviation_f64() > 0.01, "{spec}");
        let d = discrepancies(&set, spec);
        assert!(d.iter().all(|x| *x > floor), "{spec}: {d:?}");
    }
}

/// Matrices with `T ≡ 0` whose row lengths grow with `j` have, for every `j`, some row `j`
/// of length at least `s j`.
#[test]
fn optimal_families_have_long_rows() {
    let mut sets: Vec<MatrixSet> =
        [2, 3, 5].iter().map(|&p| identity_set(FieldSpec::prime(p).unwrap(), 1, 8).unwrap()).collect();
    for (p, s) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 3)] {
        sets.push(stirling_set(&FieldSpec::prime(p).unwrap(), s, 8).unwrap());
    }
    for set in &sets {
        let s = set.s();
        let profile = t_profile(set, 6).unwrap();
        assert_eq!(profile.t(), 0);
        for j in 1..=6 / s {
            let longest = set.matrices().iter().map(|c| c.row_length(j).unwrap()).max().unwrap();
            assert!(longest >= s * j, "q = {}, s = {s}, j = {j}", set.field().order());
        }
    }
}
