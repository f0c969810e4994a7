//! Shipped clause programs; the same files live under `fixtures/` for the
//! command-line front end.

/// Heralded-entanglement program; goal `herald(nv1, nv2, p1, p2)`.
pub const HERALD: &str = include_str!("../../fixtures/herald.qh");
/// Copying-device program; goal `clone(α|0⟩+β|1⟩, α|0⟩+β|1⟩)` and its negation.
pub const NO_CLONING: &str = include_str!("../../fixtures/nocloning.qh");
/// Pointer-probe program; goals `sequence_ok` and `sequence_disturbed`.
pub const PROBE: &str = include_str!("../../fixtures/probe.qh");
/// Coined-walk program; goal `qwalk_r(X, n)`.
pub const WALK: &str = include_str!("../../fixtures/walk.qh");

pub fn all() -> Vec<(&'static str, &'static str)> {
    vec![
        ("herald", HERALD),
        ("nocloning", NO_CLONING),
        ("probe", PROBE),
        ("walk", WALK),
    ]
}
