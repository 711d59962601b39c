//! Desktop state and the primitive-command transition function.

use std::collections::{BTreeMap, BTreeSet};

use cua_core::action::MouseButton;
use cua_core::geometry::Bounds;
use cua_core::keys;
use cua_core::{content_hash, PrimitiveCommand};
use serde::{Deserialize, Serialize};

use crate::scene::{Effect, Orientation, SceneSpec, WidgetKind, WidgetSpec};
use crate::SimError;

/// Two left clicks on one widget this close in simulated time form a double-click.
pub const DOUBLE_CLICK_WINDOW_MS: u64 = 250;
/// Simulated time charged to every non-sleep primitive.
pub const MS_PER_TICK: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WidgetState {
    pub value: String,
    pub checked: bool,
    pub scroll_offset: i64,
    pub pressed_count: u64,
    /// Double-clicks received.
    pub activated_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LastClick {
    pub widget: String,
    pub at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesktopState {
    pub scene: SceneSpec,
    pub widgets: BTreeMap<String, WidgetState>,
    /// Titles of open windows, bottom to top.
    pub open_windows: Vec<String>,
    pub pointer: (i64, i64),
    /// Held buttons and the widget (if any) each was pressed over.
    pub held_buttons: BTreeMap<MouseButton, Option<String>>,
    pub held_keys: Vec<String>,
    pub focus: Option<String>,
    pub tick: u64,
    pub time_ms: u64,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_click: Option<LastClick>,
}

impl DesktopState {
    /// Fresh state for `spec`: tick 0, pointer at the origin, nothing held.
    pub fn load_scene(spec: &SceneSpec, seed: u64) -> Result<Self, SimError> {
        spec.validate()?;
        let widgets = spec
            .widgets()
            .map(|(_, w)| {
                let state = WidgetState {
                    value: w.value.clone(),
                    checked: w.checked,
                    scroll_offset: w.scroll_offset,
                    pressed_count: 0,
                    activated_count: 0,
                };
                (w.id.clone(), state)
            })
            .collect();
        let open_windows = spec
            .windows
            .iter()
            .filter(|w| w.open)
            .map(|w| w.title.clone())
            .collect();
        let mut state = Self {
            scene: spec.clone(),
            widgets,
            open_windows,
            pointer: (0, 0),
            held_buttons: BTreeMap::new(),
            held_keys: Vec::new(),
            focus: None,
            tick: 0,
            time_ms: 0,
            rng_seed: seed,
            last_click: None,
        };
        state.focus = spec
            .initial_focus
            .clone()
            .filter(|id| state.widget_is_open(id));
        Ok(state)
    }

    /// Content hash of the canonical JSON form.
    pub fn state_hash(&self) -> u64 {
        content_hash(&serde_json::to_vec(self).expect("state always serializes"))
    }

    pub fn widget(&self, id: &str) -> Option<&WidgetState> {
        self.widgets.get(id)
    }

    /// Spec and live state of the first widget named `name`, in declaration order.
    pub fn widget_by_name(&self, name: &str) -> Option<(&WidgetSpec, &WidgetState)> {
        self.scene
            .widgets()
            .map(|(_, w)| w)
            .find(|w| w.name == name)
            .map(|w| (w, &self.widgets[&w.id]))
    }

    pub fn is_window_open(&self, title: &str) -> bool {
        self.open_windows.iter().any(|t| t == title)
    }

    fn widget_is_open(&self, id: &str) -> bool {
        self.scene
            .window_of(id)
            .is_some_and(|w| self.is_window_open(&w.title))
    }

    /// Topmost widget under the point; open windows occlude those below.
    pub fn widget_at(&self, x: i64, y: i64) -> Option<&WidgetSpec> {
        for title in self.open_windows.iter().rev() {
            let win = self
                .scene
                .windows
                .iter()
                .find(|w| &w.title == title)
                .expect("open windows exist in the scene");
            if win.bounds.contains(x, y) {
                return win.widgets.iter().rev().find(|w| w.bounds.contains(x, y));
            }
        }
        None
    }

    /// Applies one command. On error the state is left untouched.
    pub fn step(&mut self, cmd: &PrimitiveCommand) -> Result<(), SimError> {
        self.check(cmd)?;
        self.tick += 1;
        self.time_ms += match cmd {
            PrimitiveCommand::Sleep { ms } => ms.div_ceil(MS_PER_TICK) * MS_PER_TICK,
            _ => MS_PER_TICK,
        };
        match cmd {
            PrimitiveCommand::MoveTo { x, y } => {
                self.pointer = (*x, *y);
                if let Some(Some(id)) = self.held_buttons.get(&MouseButton::Left) {
                    let id = id.clone();
                    self.drag_scrollbar(&id);
                }
            }
            PrimitiveCommand::ButtonDown { button } => {
                let under = self.widget_at(self.pointer.0, self.pointer.1).map(|w| w.id.clone());
                self.held_buttons.insert(*button, under.clone());
                if *button == MouseButton::Left {
                    if let Some(id) = under {
                        self.drag_scrollbar(&id);
                    }
                }
            }
            PrimitiveCommand::ButtonUp { button } => {
                let pressed_on = self.held_buttons.remove(button).flatten();
                let under = self.widget_at(self.pointer.0, self.pointer.1).map(|w| w.id.clone());
                if *button == MouseButton::Left && pressed_on.is_some() && pressed_on == under {
                    self.click(&under.expect("checked above"));
                }
            }
            PrimitiveCommand::KeyDown { key } => {
                self.held_keys.push(key.clone());
                self.fire_hotkeys(key);
            }
            PrimitiveCommand::KeyUp { key } => {
                let pos = self.held_keys.iter().rposition(|k| k == key).expect("checked");
                self.held_keys.remove(pos);
                self.type_key(key);
            }
            PrimitiveCommand::Wheel { dx, dy } => {
                if let Some(w) = self.widget_at(self.pointer.0, self.pointer.1) {
                    if w.scroll_max > 0 {
                        let delta = match w.orientation {
                            Orientation::Vertical => -dy,
                            Orientation::Horizontal => *dx,
                        };
                        let (id, max) = (w.id.clone(), w.scroll_max);
                        let ws = self.widgets.get_mut(&id).expect("widget state exists");
                        ws.scroll_offset = (ws.scroll_offset + delta).clamp(0, max);
                    }
                }
            }
            PrimitiveCommand::Sleep { .. } => {}
        }
        Ok(())
    }

    fn check(&self, cmd: &PrimitiveCommand) -> Result<(), SimError> {
        match cmd {
            PrimitiveCommand::MoveTo { x, y } if !self.scene.screen.contains(*x, *y) => {
                Err(SimError::OutOfBounds { x: *x, y: *y })
            }
            PrimitiveCommand::ButtonDown { button } if self.held_buttons.contains_key(button) => {
                Err(SimError::AlreadyHeld(button.to_string()))
            }
            PrimitiveCommand::ButtonUp { button } if !self.held_buttons.contains_key(button) => {
                Err(SimError::UnmatchedRelease(button.to_string()))
            }
            PrimitiveCommand::KeyDown { key } | PrimitiveCommand::KeyUp { key }
                if !keys::is_key_name(key) =>
            {
                Err(SimError::InvalidKey(key.clone()))
            }
            PrimitiveCommand::KeyDown { key } if self.held_keys.contains(key) => {
                Err(SimError::AlreadyHeld(key.clone()))
            }
            PrimitiveCommand::KeyUp { key } if !self.held_keys.contains(key) => {
                Err(SimError::UnmatchedRelease(key.clone()))
            }
            _ => Ok(()),
        }
    }

    /// Applies a batch in order, stopping at the first rejected command.
    ///
    /// Returns the number of commands applied, or the failing index and error.
    pub fn apply_batch(&mut self, cmds: &[PrimitiveCommand]) -> Result<usize, (usize, SimError)> {
        for (i, cmd) in cmds.iter().enumerate() {
            self.step(cmd).map_err(|e| (i, e))?;
        }
        Ok(cmds.len())
    }

    fn drag_scrollbar(&mut self, id: &str) {
        let spec = match self.scene.widget(id) {
            Some(w) if w.kind == WidgetKind::Scrollbar && w.scroll_max > 0 => w,
            _ => return,
        };
        let offset = proportional_offset(&spec.bounds, spec.orientation, spec.scroll_max, self.pointer);
        self.widgets.get_mut(id).expect("widget state exists").scroll_offset = offset;
    }

    fn click(&mut self, id: &str) {
        let spec = self.scene.widget(id).expect("clicked widget exists").clone();
        let ws = self.widgets.get_mut(id).expect("widget state exists");
        ws.pressed_count += 1;
        match spec.kind {
            WidgetKind::Checkbox => ws.checked = !ws.checked,
            WidgetKind::TextField => self.focus = Some(id.to_string()),
            WidgetKind::ListItem => self.select_list_item(id),
            _ => {}
        }
        self.run_effects(&spec.on_press);

        let double = self
            .last_click
            .as_ref()
            .is_some_and(|c| c.widget == id && self.time_ms - c.at_ms <= DOUBLE_CLICK_WINDOW_MS);
        if double {
            self.last_click = None;
            if let Some(ws) = self.widgets.get_mut(id) {
                ws.activated_count += 1;
            }
            self.run_effects(&spec.on_activate);
        } else {
            self.last_click = Some(LastClick { widget: id.to_string(), at_ms: self.time_ms });
        }
    }

    fn select_list_item(&mut self, id: &str) {
        let siblings: Vec<String> = self
            .scene
            .window_of(id)
            .map(|w| {
                w.widgets
                    .iter()
                    .filter(|s| s.kind == WidgetKind::ListItem)
                    .map(|s| s.id.clone())
                    .collect()
            })
            .unwrap_or_default();
        for sib in siblings {
            self.widgets.get_mut(&sib).expect("widget state exists").checked = sib == id;
        }
    }

    fn run_effects(&mut self, effects: &[Effect]) {
        for effect in effects {
            match effect {
                Effect::Toggle { target } => {
                    let ws = self.widgets.get_mut(target).expect("validated target");
                    ws.checked = !ws.checked;
                }
                Effect::Focus { target } => {
                    if self.widget_is_open(target) {
                        self.focus = Some(target.clone());
                    }
                }
                Effect::SetValue { target, value } => {
                    self.widgets.get_mut(target).expect("validated target").value = value.clone();
                }
                Effect::OpenWindow { title } => {
                    self.open_windows.retain(|t| t != title);
                    self.open_windows.push(title.clone());
                }
                Effect::CloseWindow { title } => {
                    self.open_windows.retain(|t| t != title);
                    if self.focus.as_deref().is_some_and(|f| !self.widget_is_open(f)) {
                        self.focus = None;
                    }
                    // a pending double-click cannot complete on a hidden widget
                    if self
                        .last_click
                        .as_ref()
                        .is_some_and(|c| !self.widget_is_open(&c.widget))
                    {
                        self.last_click = None;
                    }
                }
            }
        }
    }

    fn fire_hotkeys(&mut self, pressed: &str) {
        let held: BTreeSet<&str> = self.held_keys.iter().map(String::as_str).collect();
        let matching: Vec<Vec<Effect>> = self
            .scene
            .hotkeys
            .iter()
            .filter(|hk| {
                hk.keys.iter().any(|k| k == pressed)
                    && hk.keys.len() == held.len()
                    && hk.keys.iter().all(|k| held.contains(k.as_str()))
            })
            .map(|hk| hk.effects.clone())
            .collect();
        for effects in matching {
            self.run_effects(&effects);
        }
    }

    fn type_key(&mut self, key: &str) {
        let Some(focus) = self.focus.clone() else { return };
        let is_field = self
            .scene
            .widget(&focus)
            .is_some_and(|w| w.kind == WidgetKind::TextField);
        if !is_field || self.held_keys.iter().any(|k| matches!(k.as_str(), "ctrl" | "alt" | "meta")) {
            return;
        }
        let shift = self.held_keys.iter().any(|k| k == keys::SHIFT);
        let ws = self.widgets.get_mut(&focus).expect("widget state exists");
        if key == "backspace" {
            ws.value.pop();
        } else if let Some(c) = keys::char_for_key(key, shift) {
            ws.value.push(c);
        }
    }
}

/// Scroll offset for a pointer position along a scrollbar track.
pub fn proportional_offset(bounds: &Bounds, orientation: Orientation, max: i64, pointer: (i64, i64)) -> i64 {
    let (rel, span) = match orientation {
        Orientation::Vertical => (pointer.1 - bounds.y, bounds.h - 1),
        Orientation::Horizontal => (pointer.0 - bounds.x, bounds.w - 1),
    };
    if span <= 0 {
        return 0;
    }
    let rel = rel.clamp(0, span);
    // half-up rounding of rel * max / span
    ((2 * rel * max + span) / (2 * span)).clamp(0, max)
}
