//! Declarative scene descriptions.
//!
//! A scene is a JSON document naming a screen size, a stack of windows and
//! their widgets, plus a small effect vocabulary fired when widgets are
//! pressed. Scene files live in a directory, one per file, named
//! `<scene_id>.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use cua_core::geometry::{Bounds, Screen};
use cua_core::keys;
use serde::{Deserialize, Serialize};

use crate::SimError;

pub const DEFAULT_SCENE: &str = "two_buttons";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetKind {
    Button,
    TextField,
    Checkbox,
    Label,
    Scrollbar,
    ListItem,
    MenuItem,
}

impl WidgetKind {
    /// Role name emitted in the raw accessibility tree.
    pub fn a11y_role(self) -> &'static str {
        match self {
            WidgetKind::Button => "push-button",
            WidgetKind::TextField => "text",
            WidgetKind::Checkbox => "check-box",
            WidgetKind::Label => "label",
            WidgetKind::Scrollbar => "scroll-bar",
            WidgetKind::ListItem => "list-item",
            WidgetKind::MenuItem => "menu-item",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Vertical,
    Horizontal,
}

/// Side effect fired by a press, a double-click or a hotkey.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    Toggle { target: String },
    Focus { target: String },
    OpenWindow { title: String },
    CloseWindow { title: String },
    SetValue { target: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetSpec {
    pub id: String,
    pub kind: WidgetKind,
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub bounds: Bounds,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub value: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub checked: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub scroll_max: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub scroll_offset: i64,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub on_press: Vec<Effect>,
    /// Fired on double-click.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub on_activate: Vec<Effect>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(n: &i64) -> bool {
    *n == 0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub title: String,
    pub bounds: Bounds,
    #[serde(default = "default_true")]
    pub open: bool,
    #[serde(default)]
    pub widgets: Vec<WidgetSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HotkeySpec {
    pub keys: Vec<String>,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub scene_id: String,
    pub screen: Screen,
    pub windows: Vec<WindowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_focus: Option<String>,
    #[serde(default)]
    pub system_info: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hotkeys: Vec<HotkeySpec>,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let spec: SceneSpec =
            serde_json::from_str(text).map_err(|e| SimError::InvalidScene(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn widgets(&self) -> impl Iterator<Item = (&WindowSpec, &WidgetSpec)> {
        self.windows
            .iter()
            .flat_map(|w| w.widgets.iter().map(move |wd| (w, wd)))
    }

    pub fn widget(&self, id: &str) -> Option<&WidgetSpec> {
        self.widgets().map(|(_, w)| w).find(|w| w.id == id)
    }

    pub fn window_of(&self, widget_id: &str) -> Option<&WindowSpec> {
        self.widgets().find(|(_, w)| w.id == widget_id).map(|(win, _)| win)
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScene(msg));
        if self.scene_id.is_empty() {
            return bad("scene_id is empty".into());
        }
        if self.screen.width == 0 || self.screen.height == 0 {
            return bad("screen has zero extent".into());
        }
        let mut titles = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for win in &self.windows {
            if !titles.insert(win.title.as_str()) {
                return bad(format!("duplicate window title '{}'", win.title));
            }
            if win.bounds.is_empty() {
                return bad(format!("window '{}' has zero area", win.title));
            }
            for wd in &win.widgets {
                if !ids.insert(wd.id.as_str()) {
                    return bad(format!("duplicate widget id '{}'", wd.id));
                }
                if wd.bounds.is_empty() || !win.bounds.contains_rect(&wd.bounds) {
                    return bad(format!(
                        "widget '{}' is not inside window '{}'",
                        wd.id, win.title
                    ));
                }
                if wd.scroll_max < 0 || !(0..=wd.scroll_max).contains(&wd.scroll_offset) {
                    return bad(format!("widget '{}' has an invalid scroll range", wd.id));
                }
            }
        }
        let effects = self
            .widgets()
            .flat_map(|(_, w)| w.on_press.iter().chain(&w.on_activate))
            .chain(self.hotkeys.iter().flat_map(|h| &h.effects));
        for effect in effects {
            match effect {
                Effect::Toggle { target }
                | Effect::Focus { target }
                | Effect::SetValue { target, .. } => {
                    if !ids.contains(target.as_str()) {
                        return bad(format!("effect targets unknown widget '{target}'"));
                    }
                }
                Effect::OpenWindow { title } | Effect::CloseWindow { title } => {
                    if !titles.contains(title.as_str()) {
                        return bad(format!("effect targets unknown window '{title}'"));
                    }
                }
            }
        }
        for hk in &self.hotkeys {
            if hk.keys.is_empty() || hk.keys.iter().any(|k| !keys::is_key_name(k)) {
                return bad(format!("invalid hotkey {:?}", hk.keys));
            }
        }
        if let Some(focus) = &self.initial_focus {
            if !ids.contains(focus.as_str()) {
                return bad(format!("initial_focus names unknown widget '{focus}'"));
            }
        }
        Ok(())
    }
}

/// Scenes available to a server, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SceneCatalog {
    scenes: BTreeMap<String, SceneSpec>,
}

const BUILTIN: [&str; 7] = [
    include_str!("../scenes/two_buttons.json"),
    include_str!("../scenes/login_form.json"),
    include_str!("../scenes/settings.json"),
    include_str!("../scenes/notepad.json"),
    include_str!("../scenes/document_viewer.json"),
    include_str!("../scenes/file_browser.json"),
    include_str!("../scenes/media_player.json"),
];

impl SceneCatalog {
    /// The scenes shipped with the simulator.
    pub fn builtin() -> Self {
        let mut catalog = Self::default();
        for text in BUILTIN {
            catalog
                .insert(SceneSpec::from_json(text).expect("built-in scenes are valid"))
                .expect("built-in scene ids are unique");
        }
        catalog
    }

    /// Loads every `*.json` file of `dir`; each file name must equal its scene id.
    pub fn load_dir(dir: &Path) -> Result<Self, SimError> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| SimError::InvalidScene(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        paths.sort();
        let mut catalog = Self::default();
        for path in paths {
            let text = fs::read_to_string(&path)
                .map_err(|e| SimError::InvalidScene(format!("{}: {e}", path.display())))?;
            let spec = SceneSpec::from_json(&text).map_err(|e| {
                SimError::InvalidScene(format!("{}: {e}", path.display()))
            })?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if stem != spec.scene_id {
                return Err(SimError::InvalidScene(format!(
                    "{}: file name does not match scene_id '{}'",
                    path.display(),
                    spec.scene_id
                )));
            }
            catalog.insert(spec)?;
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, spec: SceneSpec) -> Result<(), SimError> {
        spec.validate()?;
        if self.scenes.contains_key(&spec.scene_id) {
            return Err(SimError::InvalidScene(format!(
                "duplicate scene id '{}'",
                spec.scene_id
            )));
        }
        self.scenes.insert(spec.scene_id.clone(), spec);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&SceneSpec> {
        self.scenes.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.scenes.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    /// `two_buttons` when present, otherwise the first id in order.
    pub fn default_scene(&self) -> Option<&SceneSpec> {
        self.scenes
            .get(DEFAULT_SCENE)
            .or_else(|| self.scenes.values().next())
    }
}
