use num_bigint::BigInt;
use pucoh::presentation::{groups_by_degree, primary_decomposition};
use pucoh::AbelianGroup;

#[test]
fn degree_two_is_cyclic_of_order_n() {
    for n in 2..=12u64 {
        let g = groups_by_degree(n, 3).unwrap();
        assert_eq!(g[&2], AbelianGroup::cyclic(n), "n = {n}");
        assert_eq!(g[&3], AbelianGroup::free(1), "n = {n}");
    }
}

#[test]
fn pu4_degree_five() {
    let g = groups_by_degree(4, 5).unwrap();
    assert_eq!(g[&5], AbelianGroup::from_orders(1, [BigInt::from(2)]));
}

#[test]
fn pu6_splits_into_two_and_three_parts() {
    let d = primary_decomposition(6, 37).unwrap();
    assert!(d.checks.iter().all(|c| c.passed), "{:?}", d.checks);
    assert_eq!(d.primary.keys().copied().collect::<Vec<_>>(), vec![2, 3]);
    // ω of order 6 = 2·3 in degree 2
    assert_eq!(d.primary[&2][&2], vec![BigInt::from(2)]);
    assert_eq!(d.primary[&3][&2], vec![BigInt::from(3)]);
    assert_eq!(d.free.values().sum::<usize>(), 32);
}

#[test]
fn too_large_n_is_a_resource_limit() {
    assert!(matches!(
        groups_by_degree(33, 4),
        Err(pucoh::Error::ResourceLimit(_))
    ));
    assert!(matches!(
        groups_by_degree(1, 4),
        Err(pucoh::Error::InvalidInput(_))
    ));
}
