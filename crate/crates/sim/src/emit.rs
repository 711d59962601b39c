use cua_core::a11y::RawA11yNode;

use crate::scene::WidgetKind;
use crate::state::DesktopState;

pub const ROOT_NAME: &str = "desktop";

/// Raw accessibility tree: a root frame, then one child per open window in
/// z-order (bottom first), widgets in declaration order.
pub fn a11y_tree(state: &DesktopState) -> RawA11yNode {
    let scene = &state.scene;
    let mut root = RawA11yNode::new("frame", ROOT_NAME, scene.screen.rect())
        .with_states(["visible", "enabled"]);
    let top = state.open_windows.last();
    for title in &state.open_windows {
        let win = scene
            .windows
            .iter()
            .find(|w| &w.title == title)
            .expect("open windows exist in the scene");
        let mut states = vec!["visible", "enabled"];
        if Some(title) == top {
            states.push("active");
        }
        let mut node = RawA11yNode::new("window", &win.title, win.bounds).with_states(states);
        for wd in &win.widgets {
            let ws = &state.widgets[&wd.id];
            let mut states = vec!["visible", "enabled"];
            let mut value = None;
            match wd.kind {
                WidgetKind::TextField => {
                    states.push("focusable");
                    states.push("editable");
                    value = Some(ws.value.clone());
                }
                WidgetKind::Checkbox => {
                    states.push("checkable");
                    if ws.checked {
                        states.push("checked");
                    }
                }
                WidgetKind::ListItem => {
                    states.push("selectable");
                    if ws.checked {
                        states.push("selected");
                    }
                }
                WidgetKind::Scrollbar => value = Some(ws.scroll_offset.to_string()),
                WidgetKind::Label => value = Some(ws.value.clone()).filter(|v| !v.is_empty()),
                WidgetKind::Button | WidgetKind::MenuItem => {}
            }
            if state.focus.as_deref() == Some(wd.id.as_str()) {
                states.push("focused");
            }
            let mut child = RawA11yNode::new(wd.kind.a11y_role(), &wd.name, wd.bounds).with_states(states);
            child.description = wd.description.clone();
            child.value = value;
            node.children.push(child);
        }
        root.children.push(node);
    }
    root
}

/// Wire document for `GET /a11y`.
pub fn emit_a11y(state: &DesktopState) -> Vec<u8> {
    a11y_tree(state).to_json().into_bytes()
}
