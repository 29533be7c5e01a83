use ramsey_core::hjspace::{verify_embedding_identity, IdentityLimits};
use ramsey_core::SearchConfig;

// The full N ≤ 3 enumeration runs in the cli acceptance target.
#[test]
fn identity_up_to_two_generators() {
    let limits = IdentityLimits {
        n_max: 2,
        d_max: 2,
        q_max: 3,
        x_max: 4,
    };
    let one = verify_embedding_identity(limits, &SearchConfig::default()).unwrap();
    assert_eq!(one.failures, 0, "{:?}", one.first_failure);
    assert!(one.cases > 10_000);
    let four = verify_embedding_identity(limits, &SearchConfig::default().with_workers(4)).unwrap();
    assert_eq!(one, four);
}
