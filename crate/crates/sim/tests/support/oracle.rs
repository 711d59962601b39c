//! Simulator oracles shared with the workspace acceptance suite: replay
//! determinism over the built-in scenes, and compiled actions reaching their
//! postconditions on generated scenes.
#![allow(dead_code)]

use cua_core::a11y::ingest_a11y;
use cua_core::action::{compile, resolve_target, MouseButton, ScrollDirection, SemanticAction, Target};
use cua_core::context::{annotate, compact, UIElement};
use cua_core::geometry::Bounds;
use cua_core::PrimitiveCommand as P;
use cua_sim::scene::{Orientation, SceneSpec, WidgetSpec, WindowSpec};
use cua_sim::state::proportional_offset;
use cua_sim::{emit_a11y, emit_screenshot, DesktopState, SceneCatalog, WidgetKind};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const KEYS: [&str; 8] = ["a", "b", "1", "shift", "ctrl", "s", "enter", "backspace"];

pub fn command() -> impl Strategy<Value = P> {
    let button = prop::sample::select(vec![MouseButton::Left, MouseButton::Right]);
    prop_oneof![
        4 => (0i64..820, 0i64..620).prop_map(|(x, y)| P::MoveTo { x, y }),
        3 => button.clone().prop_map(|button| P::ButtonDown { button }),
        3 => button.prop_map(|button| P::ButtonUp { button }),
        1 => (-3i64..=3, -3i64..=3).prop_map(|(dx, dy)| P::Wheel { dx, dy }),
        2 => prop::sample::select(KEYS.to_vec()).prop_map(|k| P::KeyDown { key: k.into() }),
        2 => prop::sample::select(KEYS.to_vec()).prop_map(|k| P::KeyUp { key: k.into() }),
        1 => (0u64..400).prop_map(|ms| P::Sleep { ms }),
    ]
}

pub fn scene_id() -> impl Strategy<Value = String> {
    let ids: Vec<String> = SceneCatalog::builtin().ids().map(str::to_string).collect();
    prop::sample::select(ids)
}

/// Applies commands one at a time, skipping rejected ones.
pub fn replay(spec: &SceneSpec, seed: u64, cmds: &[P]) -> DesktopState {
    let mut s = DesktopState::load_scene(spec, seed).unwrap();
    let widgets = s.widgets.len();
    for c in cmds {
        let _ = s.step(c);
        assert_eq!(s.widgets.len(), widgets, "widget table size changed");
    }
    s
}

/// A built-in scene, a seed and a primitive sequence.
pub fn replay_case() -> impl Strategy<Value = (String, u64, Vec<P>)> {
    (scene_id(), any::<u64>(), prop::collection::vec(command(), 0..40))
}

/// Two replays agree on state hash, a11y bytes, screenshot bytes and tick.
pub fn check_replay_determinism((id, seed, cmds): &(String, u64, Vec<P>)) -> Result<(), TestCaseError> {
    let catalog = SceneCatalog::builtin();
    let spec = catalog.get(id).unwrap();
    let a = replay(spec, *seed, cmds);
    let b = replay(spec, *seed, cmds);
    prop_assert_eq!(a.state_hash(), b.state_hash());
    prop_assert_eq!(emit_a11y(&a), emit_a11y(&b));
    prop_assert_eq!(emit_screenshot(&a), emit_screenshot(&b));
    prop_assert_eq!(a.tick, b.tick);
    Ok(())
}

// ---- compiled-action oracle over generated scenes ----

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Button,
    Field,
    Check,
    VScroll,
    HScroll,
}

pub fn layout(kinds: &[(Kind, i64)]) -> SceneSpec {
    let mut widgets = Vec::new();
    for (i, (kind, max)) in kinds.iter().enumerate() {
        let (col, row) = (i as i64 % 5, i as i64 / 5);
        let (x, y) = (30 + col * 150, 60 + row * 150);
        let (wk, bounds, orientation) = match kind {
            Kind::Button => (WidgetKind::Button, Bounds::new(x, y, 100, 30), Orientation::Vertical),
            Kind::Field => (WidgetKind::TextField, Bounds::new(x, y, 120, 24), Orientation::Vertical),
            Kind::Check => (WidgetKind::Checkbox, Bounds::new(x, y, 110, 24), Orientation::Vertical),
            Kind::VScroll => (WidgetKind::Scrollbar, Bounds::new(x, y, 20, 101 + max), Orientation::Vertical),
            Kind::HScroll => (WidgetKind::Scrollbar, Bounds::new(x, y, 101 + max, 20), Orientation::Horizontal),
        };
        widgets.push(WidgetSpec {
            id: format!("w{i}"),
            kind: wk,
            name: format!("widget {i}"),
            description: String::new(),
            bounds,
            value: String::new(),
            checked: false,
            scroll_max: if wk == WidgetKind::Scrollbar { *max } else { 0 },
            scroll_offset: 0,
            orientation,
            on_press: vec![],
            on_activate: vec![],
        });
    }
    SceneSpec {
        scene_id: "generated".into(),
        screen: cua_core::geometry::Screen::new(800, 600),
        windows: vec![WindowSpec {
            title: "Main".into(),
            bounds: Bounds::new(10, 30, 780, 560),
            open: true,
            widgets,
        }],
        initial_focus: None,
        system_info: Default::default(),
        hotkeys: vec![],
    }
}

pub fn kinds() -> impl Strategy<Value = Vec<(Kind, i64)>> {
    let kind = prop_oneof![
        Just(Kind::Button),
        Just(Kind::Field),
        Just(Kind::Check),
        Just(Kind::VScroll),
        Just(Kind::HScroll)
    ];
    prop::collection::vec((kind, 1i64..30), 1..=15)
}

fn elements(s: &DesktopState) -> Vec<UIElement> {
    let tree = ingest_a11y(&emit_a11y(s)).unwrap();
    annotate(compact(&tree.root, s.scene.screen))
}

fn element_id(els: &[UIElement], name: &str) -> u32 {
    els.iter().find(|e| e.name == name).expect("widget is an element").id
}

fn run(s: &mut DesktopState, action: &SemanticAction) {
    let els = elements(s);
    let grounded = resolve_target(action, &els, s.scene.screen).unwrap();
    let cmds = compile(&grounded).unwrap();
    s.apply_batch(&cmds).unwrap();
}

#[derive(Debug, Clone)]
pub struct OracleCase {
    pub kinds: Vec<(Kind, i64)>,
    pub pick: prop::sample::Index,
    pub count: u8,
    pub amount: u32,
    pub forward: bool,
    pub frac: f64,
    pub text: String,
}

/// A generated scene plus one action aimed at one of its widgets.
pub fn oracle_case() -> impl Strategy<Value = OracleCase> {
    (kinds(), any::<prop::sample::Index>(), 1u8..=2, 1u32..40, any::<bool>(), 0.0f64..=1.0, "[ -~]{0,24}").prop_map(
        |(kinds, pick, count, amount, forward, frac, text)| OracleCase { kinds, pick, count, amount, forward, frac, text },
    )
}

/// Runs the action through resolve → compile → the simulator and checks the
/// widget's postcondition: press counts, toggles, field text, clamped or
/// proportional scroll offsets, and nothing left held.
pub fn check_postcondition(case: &OracleCase) -> Result<(), TestCaseError> {
    let OracleCase { kinds, pick, count, amount, forward, frac, text } = case.clone();
    let spec = layout(&kinds);
    let mut s = DesktopState::load_scene(&spec, 0).unwrap();
    let i = pick.index(kinds.len());
    let (kind, max) = kinds[i];
    let wid = format!("w{i}");
    let id = element_id(&elements(&s), &format!("widget {i}"));
    let before = s.widgets[&wid].clone();
    match kind {
        Kind::Button | Kind::Check => {
            let click = SemanticAction::Click { target: Target::Element(id), button: MouseButton::Left, count };
            run(&mut s, &click);
            let after = &s.widgets[&wid];
            prop_assert_eq!(after.pressed_count, before.pressed_count + u64::from(count));
            prop_assert_eq!(after.activated_count, u64::from(count == 2));
            if matches!(kind, Kind::Check) {
                prop_assert_eq!(after.checked, before.checked ^ (count == 1));
            }
        }
        Kind::Field => {
            run(&mut s, &SemanticAction::click(Target::Element(id)));
            prop_assert_eq!(s.focus.as_deref(), Some(wid.as_str()));
            run(&mut s, &SemanticAction::Type { text: text.clone() });
            prop_assert_eq!(&s.widgets[&wid].value, &text);
        }
        Kind::VScroll | Kind::HScroll => {
            let vertical = matches!(kind, Kind::VScroll);
            if frac < 0.5 {
                let direction = match (vertical, forward) {
                    (true, true) => ScrollDirection::Down,
                    (true, false) => ScrollDirection::Up,
                    (false, true) => ScrollDirection::Right,
                    (false, false) => ScrollDirection::Left,
                };
                let scroll = SemanticAction::Scroll { target: Some(Target::Element(id)), direction, amount };
                run(&mut s, &scroll);
                let delta = if forward { i64::from(amount) } else { -i64::from(amount) };
                prop_assert_eq!(s.widgets[&wid].scroll_offset, (before.scroll_offset + delta).clamp(0, max));
            } else {
                let b = spec.widget(&wid).unwrap().bounds;
                let (tx, ty) = if vertical {
                    (b.x + b.w / 2, b.y + ((b.h - 1) as f64 * frac).round() as i64)
                } else {
                    (b.x + ((b.w - 1) as f64 * frac).round() as i64, b.y + b.h / 2)
                };
                let drag = SemanticAction::Drag { from: Target::Element(id), to: Target::Point { x: tx, y: ty } };
                run(&mut s, &drag);
                let orientation = if vertical { Orientation::Vertical } else { Orientation::Horizontal };
                prop_assert_eq!(s.widgets[&wid].scroll_offset, proportional_offset(&b, orientation, max, (tx, ty)));
            }
        }
    }
    prop_assert!(s.held_buttons.is_empty());
    prop_assert!(s.held_keys.is_empty());
    Ok(())
}
