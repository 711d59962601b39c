//! Compiled-batch well-formedness, shared with the workspace acceptance suite.

use std::collections::BTreeSet;

use cua_core::action::{compile, parse_action, MouseButton, ScrollDirection, SemanticAction, Target};
use cua_core::geometry::Screen;
use cua_core::keys::all_key_names;
use cua_core::PrimitiveCommand as P;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const SCREEN: Screen = Screen::new(800, 600);

pub fn point() -> impl Strategy<Value = Target> {
    (0i64..800, 0i64..600).prop_map(|(x, y)| Target::Point { x, y })
}

pub fn action() -> impl Strategy<Value = SemanticAction> {
    let button = prop::sample::select(vec![MouseButton::Left, MouseButton::Right, MouseButton::Middle]);
    let direction = prop::sample::select(vec![
        ScrollDirection::Up,
        ScrollDirection::Down,
        ScrollDirection::Left,
        ScrollDirection::Right,
    ]);
    let keys = prop::sample::subsequence(all_key_names(), 1..=4).prop_shuffle();
    prop_oneof![
        (point(), button, 1u8..=2).prop_map(|(target, button, count)| SemanticAction::Click { target, button, count }),
        "[ -~\n\t]{0,64}".prop_map(|text| SemanticAction::Type { text }),
        (prop::option::of(point()), direction, 1u32..=1000)
            .prop_map(|(target, direction, amount)| SemanticAction::Scroll { target, direction, amount }),
        (point(), point()).prop_map(|(from, to)| SemanticAction::Drag { from, to }),
        (0u32..=30_000).prop_map(|ms| SemanticAction::Wait { seconds: f64::from(ms) / 1000.0 }),
        keys.prop_map(|keys| SemanticAction::Hotkey { keys }),
    ]
}

/// Round-trips through JSON, stays on screen, and releases everything it
/// presses (keys in LIFO order).
pub fn check_well_formed(a: &SemanticAction) -> Result<(), TestCaseError> {
    prop_assert_eq!(parse_action(&a.to_json()).unwrap(), a.clone());
    let cmds = compile(a).unwrap();
    // only typing nothing compiles to nothing
    prop_assert_eq!(cmds.is_empty(), *a == SemanticAction::Type { text: String::new() });
    let mut buttons = BTreeSet::new();
    let mut keys = Vec::<String>::new();
    for c in &cmds {
        match c {
            P::MoveTo { x, y } => prop_assert!(SCREEN.contains(*x, *y)),
            P::ButtonDown { button } => prop_assert!(buttons.insert(*button)),
            P::ButtonUp { button } => prop_assert!(buttons.remove(button)),
            P::KeyDown { key } => {
                prop_assert!(!keys.contains(key));
                keys.push(key.clone());
            }
            P::KeyUp { key } => {
                let top = keys.pop();
                prop_assert_eq!(top.as_ref(), Some(key));
            }
            P::Wheel { dx, dy } => prop_assert!(*dx != 0 || *dy != 0),
            P::Sleep { .. } => {}
        }
    }
    prop_assert!(buttons.is_empty());
    prop_assert!(keys.is_empty());
    Ok(())
}
