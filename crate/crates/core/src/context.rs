//! Compaction of raw accessibility trees into the element table an agent
//! reasons over, plus the plain-text rendering used in prompts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::a11y::{ingest_a11y, RawA11yNode};
use crate::geometry::{Bounds, Screen};
use crate::hash::content_hash;
use crate::wire::RawObservation;
use crate::Error;

pub const NAME_CAP: usize = 80;
pub const VALUE_CAP: usize = 200;
pub const MIN_RENDER_BUDGET: usize = 256;
/// Version tag of [`Role::canonicalize`]; bump whenever the map changes.
pub const ROLE_MAP_VERSION: u32 = 1;

const ELLIPSIS: char = '…';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Button,
    TextField,
    Label,
    MenuItem,
    Window,
    Checkbox,
    Scrollbar,
    ListItem,
    Unknown,
}

impl Role {
    /// Fixed source-role map; anything not listed becomes `Unknown`.
    pub fn canonicalize(raw: &str) -> Role {
        match raw.to_ascii_lowercase().as_str() {
            "push-button" | "button" | "toggle-button" | "push button" => Role::Button,
            "text" | "entry" | "text-field" | "password-text" | "edit" => Role::TextField,
            "label" | "static" | "static-text" => Role::Label,
            "menu-item" | "menu item" => Role::MenuItem,
            "frame" | "window" | "dialog" => Role::Window,
            "check-box" | "checkbox" | "check box" => Role::Checkbox,
            "scroll-bar" | "scrollbar" | "scroll bar" => Role::Scrollbar,
            "list-item" | "list item" => Role::ListItem,
            _ => Role::Unknown,
        }
    }

    pub fn is_interactive(self) -> bool {
        matches!(
            self,
            Role::Button
                | Role::TextField
                | Role::MenuItem
                | Role::Checkbox
                | Role::Scrollbar
                | Role::ListItem
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Button => "button",
            Role::TextField => "text-field",
            Role::Label => "label",
            Role::MenuItem => "menu-item",
            Role::Window => "window",
            Role::Checkbox => "checkbox",
            Role::Scrollbar => "scrollbar",
            Role::ListItem => "list-item",
            Role::Unknown => "unknown",
        }
    }

    fn usage_verb(self) -> &'static str {
        match self {
            Role::Button => "Press to trigger",
            Role::TextField => "Type into",
            Role::MenuItem => "Open",
            Role::Checkbox => "Toggle",
            Role::Scrollbar => "Scroll",
            Role::Window => "Contains",
            Role::ListItem => "Select",
            Role::Label => "Reads",
            Role::Unknown => "Inspect",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One entry of the compacted element table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UIElement {
    pub id: u32,
    pub role: Role,
    pub name: String,
    #[serde(default)]
    pub usage: String,
    pub bounds: Bounds,
    pub states: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl UIElement {
    pub fn center(&self) -> (i64, i64) {
        self.bounds.center()
    }
}

/// The contextualized observation for one agent step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSnapshot {
    pub step: u64,
    pub screen: Screen,
    pub screenshot_hash: u64,
    pub elements: Vec<UIElement>,
    pub system_info: BTreeMap<String, String>,
    pub captured_at: u64,
}

impl ContextSnapshot {
    /// Content hash over the canonical JSON form.
    pub fn hash(&self) -> u64 {
        let bytes = serde_json::to_vec(self).expect("snapshots always serialize");
        content_hash(&bytes)
    }

    pub fn element(&self, id: u32) -> Option<&UIElement> {
        self.elements.get(id as usize).filter(|e| e.id == id)
    }

    /// First element, in id order, whose name matches exactly.
    pub fn find_by_name(&self, name: &str) -> Option<&UIElement> {
        self.elements.iter().find(|e| e.name == name)
    }
}

/// Prunes and canonicalizes a raw tree into a dense element table.
///
/// Rules, applied in order: invisible or off-screen subtrees are dropped
/// (zero-area nodes are dropped but their children are kept); nameless,
/// valueless, non-interactive containers are spliced out; roles are
/// canonicalized; name and value are capped; ids follow pre-order.
pub fn compact(root: &RawA11yNode, screen: Screen) -> Vec<UIElement> {
    let mut out = Vec::new();
    collect(root, &screen.rect(), &mut out);
    out
}

fn collect(node: &RawA11yNode, screen: &Bounds, out: &mut Vec<UIElement>) {
    if !node.has_state("visible") {
        return;
    }
    let zero_area = node.bounds.is_empty();
    if !zero_area && !node.bounds.intersects(screen) {
        return;
    }
    let role = Role::canonicalize(&node.role);
    let has_value = node.value.as_deref().is_some_and(|v| !v.is_empty());
    let container = node.name.is_empty() && !has_value && !role.is_interactive();
    if !zero_area && !container {
        out.push(UIElement {
            id: out.len() as u32,
            role,
            name: cap(&node.name, NAME_CAP),
            usage: String::new(),
            bounds: node.bounds,
            states: node.states.clone(),
            value: node.value.as_deref().map(|v| cap(v, VALUE_CAP)),
        });
    }
    for child in &node.children {
        collect(child, screen, out);
    }
}

fn cap(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let mut out: String = text.chars().take(limit - 1).collect();
    out.push(ELLIPSIS);
    out
}

/// Fills each element's `usage` from its role, name and value.
pub fn annotate(mut elements: Vec<UIElement>) -> Vec<UIElement> {
    for el in &mut elements {
        el.usage = usage_for(el);
    }
    elements
}

fn usage_for(el: &UIElement) -> String {
    let subject = if !el.name.is_empty() {
        el.name.clone()
    } else if let Some(v) = el.value.as_deref().filter(|v| !v.is_empty()) {
        v.to_string()
    } else {
        format!("this {}", el.role)
    };
    format!("{} {}", el.role.usage_verb(), subject)
}

/// The full pipeline: ingest, compact, annotate, and wrap as step `step`.
pub fn contextualize(raw: &RawObservation, step: u64) -> Result<ContextSnapshot, Error> {
    let tree = ingest_a11y(&raw.a11y)?;
    Ok(ContextSnapshot {
        step,
        screen: raw.screen,
        screenshot_hash: raw.screenshot_hash(),
        elements: annotate(compact(&tree.root, raw.screen)),
        system_info: raw.system_info.clone(),
        captured_at: raw.tick,
    })
}

/// Renders a snapshot as text, one line per element, within `char_budget` bytes.
pub fn render_context(snapshot: &ContextSnapshot, char_budget: usize) -> Result<String, Error> {
    if char_budget < MIN_RENDER_BUDGET {
        return Err(Error::BudgetTooSmall(char_budget));
    }
    let header = format!(
        "screen {}x{} step {} elements {}",
        snapshot.screen.width,
        snapshot.screen.height,
        snapshot.step,
        snapshot.elements.len()
    );
    let lines: Vec<String> = snapshot.elements.iter().map(element_line).collect();

    let full: usize = header.len() + lines.iter().map(|l| l.len() + 1).sum::<usize>();
    let mut out = header;
    if full <= char_budget {
        for line in &lines {
            out.push('\n');
            out.push_str(line);
        }
        return Ok(out);
    }

    let total = lines.len();
    let mut used = out.len();
    let mut kept = 0;
    for line in &lines {
        let marker_len = more_marker(total - kept - 1).len() + 1;
        if used + line.len() + 1 + marker_len > char_budget {
            break;
        }
        used += line.len() + 1;
        kept += 1;
    }
    for line in &lines[..kept] {
        out.push('\n');
        out.push_str(line);
    }
    out.push('\n');
    out.push_str(&more_marker(total - kept));
    Ok(out)
}

fn more_marker(n: usize) -> String {
    format!("[+{n} more elements]")
}

fn element_line(el: &UIElement) -> String {
    let (cx, cy) = el.center();
    let states = if el.states.is_empty() {
        "-".to_string()
    } else {
        el.states.iter().map(String::as_str).collect::<Vec<_>>().join(",")
    };
    let mut line = format!(
        "[{}] {} '{}' @({},{}) state={}",
        el.id, el.role, el.name, cx, cy, states
    );
    if let Some(v) = &el.value {
        line.push_str(&format!(" value='{v}'"));
    }
    line.push_str(&format!(" usage={}", el.usage));
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    fn visible(role: &str, name: &str, b: Bounds) -> RawA11yNode {
        RawA11yNode::new(role, name, b).with_states(["visible", "enabled"])
    }

    const SCREEN: Screen = Screen::new(800, 600);

    #[test]
    fn invisible_button_is_dropped() {
        let root = visible("window", "Main", Bounds::new(0, 0, 400, 300))
            .with_child(visible("push-button", "OK", Bounds::new(10, 10, 60, 20)))
            .with_child(
                RawA11yNode::new("push-button", "Hidden", Bounds::new(80, 10, 60, 20))
                    .with_states(["enabled"]),
            );
        let els = compact(&root, SCREEN);
        assert_eq!(els.len(), 2);
        assert_eq!((els[0].role, els[1].role), (Role::Window, Role::Button));
        assert_eq!(els[1].name, "OK");
    }

    #[test]
    fn filler_panel_is_spliced() {
        let root = visible("frame", "desktop", Bounds::new(0, 0, 800, 600))
            .with_child(
                visible("filler", "", Bounds::new(0, 0, 0, 0))
                    .with_child(visible("text", "Name", Bounds::new(10, 10, 100, 20))),
            )
            .with_child(visible("push-button", "Go", Bounds::new(10, 40, 40, 20)));
        let els = compact(&root, SCREEN);
        let summary: Vec<_> = els.iter().map(|e| (e.id, e.role, e.name.as_str())).collect();
        assert_eq!(
            summary,
            vec![
                (0, Role::Window, "desktop"),
                (1, Role::TextField, "Name"),
                (2, Role::Button, "Go")
            ]
        );
    }

    #[test]
    fn unnamed_positive_area_container_is_spliced() {
        let root = visible("panel", "", Bounds::new(0, 0, 300, 300))
            .with_child(visible("push-button", "A", Bounds::new(0, 0, 10, 10)));
        let els = compact(&root, SCREEN);
        assert_eq!(els.len(), 1);
        assert_eq!(els[0].id, 0);
    }

    #[test]
    fn invisible_root_empties_everything() {
        let root = RawA11yNode::new("frame", "desktop", Bounds::new(0, 0, 800, 600))
            .with_child(visible("push-button", "OK", Bounds::new(10, 10, 60, 20)));
        assert!(compact(&root, SCREEN).is_empty());
    }

    #[test]
    fn offscreen_subtree_is_dropped() {
        let root = visible("window", "W", Bounds::new(900, 0, 100, 100))
            .with_child(visible("push-button", "OK", Bounds::new(910, 10, 10, 10)));
        assert!(compact(&root, SCREEN).is_empty());
    }

    #[test]
    fn unknown_roles_canonicalize() {
        assert_eq!(Role::canonicalize("push-button"), Role::Button);
        assert_eq!(Role::canonicalize("frame"), Role::Window);
        assert_eq!(Role::canonicalize("tree-table"), Role::Unknown);
    }

    #[test]
    fn long_names_and_values_are_capped() {
        let long = "x".repeat(300);
        let root = visible("text", &long, Bounds::new(0, 0, 10, 10)).with_value(long.clone());
        let els = compact(&root, SCREEN);
        assert_eq!(els[0].name.chars().count(), NAME_CAP);
        assert!(els[0].name.ends_with('…'));
        let v = els[0].value.as_deref().unwrap();
        assert_eq!(v.chars().count(), VALUE_CAP);
        assert!(v.ends_with('…'));
    }

    fn element(id: u32, role: Role, name: &str, value: Option<&str>) -> UIElement {
        UIElement {
            id,
            role,
            name: name.into(),
            usage: String::new(),
            bounds: Bounds::new(0, 0, 10, 10),
            states: BTreeSet::new(),
            value: value.map(str::to_string),
        }
    }

    #[test]
    fn usage_templates() {
        let els = annotate(vec![
            element(0, Role::Button, "Chrome", None),
            element(1, Role::Label, "", Some("Ready")),
            element(2, Role::Checkbox, "", None),
        ]);
        assert_eq!(els[0].usage, "Press to trigger Chrome");
        assert_eq!(els[1].usage, "Reads Ready");
        assert_eq!(els[2].usage, "Toggle this checkbox");
        assert_eq!(annotate(els.clone()), els);
    }

    fn snapshot(n: usize) -> ContextSnapshot {
        let elements = (0..n)
            .map(|i| {
                let mut e = element(i as u32, Role::Button, &format!("Button {i}"), None);
                e.bounds = Bounds::new(10 * i as i64, 5, 20, 10);
                e.states.insert("visible".into());
                e
            })
            .collect();
        ContextSnapshot {
            step: 3,
            screen: SCREEN,
            screenshot_hash: 7,
            elements: annotate(elements),
            system_info: BTreeMap::new(),
            captured_at: 0,
        }
    }

    #[test]
    fn render_small_snapshot_in_full() {
        let text = render_context(&snapshot(2), 4096).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "screen 800x600 step 3 elements 2");
        assert_eq!(
            lines[1],
            "[0] button 'Button 0' @(10,10) state=visible usage=Press to trigger Button 0"
        );
        assert!(text.len() < 4096);
    }

    #[test]
    fn render_truncates_on_line_boundary() {
        let snap = snapshot(100);
        let text = render_context(&snap, 500).unwrap();
        assert!(text.len() <= 500);
        let last = text.lines().last().unwrap();
        let kept = text.lines().count() - 2;
        assert_eq!(last, format!("[+{} more elements]", 100 - kept));
        // header 34 bytes, element lines 76 bytes each, marker 20: five lines fit
        assert_eq!(kept, 5);
        assert_eq!(text.len(), 439);
        assert_eq!(text, render_context(&snap, 500).unwrap());
    }

    #[test]
    fn render_rejects_tiny_budget() {
        assert!(matches!(
            render_context(&snapshot(1), 255),
            Err(Error::BudgetTooSmall(255))
        ));
    }
}
