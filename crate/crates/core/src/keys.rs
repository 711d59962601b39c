//! Key-name vocabulary shared by the action compiler and the simulator.
//!
//! Printable keys are named by their unshifted US-layout character; the
//! remaining keys use lower-case names such as `shift` or `enter`.

pub const SHIFT: &str = "shift";

pub const MODIFIERS: [&str; 4] = ["ctrl", "shift", "alt", "meta"];

const NAMED: [&str; 19] = [
    "enter", "tab", "escape", "backspace", "delete", "space", "up", "down", "left", "right",
    "home", "end", "pageup", "pagedown", "insert", "ctrl", "shift", "alt", "meta",
];

const UNSHIFTED_PUNCT: &str = "`-=[]\\;',./";
const SHIFTED_PUNCT: &str = "~_+{}|:\"<>?";
const SHIFTED_DIGITS: &str = ")!@#$%^&*(";

/// Every key name accepted in hotkeys and primitive key events.
pub fn all_key_names() -> Vec<String> {
    let mut out: Vec<String> = NAMED.iter().map(|s| s.to_string()).collect();
    out.extend((1..=12).map(|n| format!("f{n}")));
    out.extend(('a'..='z').map(String::from));
    out.extend(('0'..='9').map(String::from));
    out.extend(UNSHIFTED_PUNCT.chars().map(String::from));
    out
}

pub fn is_key_name(name: &str) -> bool {
    if NAMED.contains(&name) {
        return true;
    }
    if let Some(n) = name.strip_prefix('f').and_then(|d| d.parse::<u8>().ok()) {
        return (1..=12).contains(&n) && name.len() <= 3;
    }
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => {
            c.is_ascii_lowercase() || c.is_ascii_digit() || UNSHIFTED_PUNCT.contains(c)
        }
        _ => false,
    }
}

pub fn is_modifier(name: &str) -> bool {
    MODIFIERS.contains(&name)
}

/// Key that produces `c`, and whether shift must be held.
pub fn key_for_char(c: char) -> Option<(String, bool)> {
    match c {
        'a'..='z' | '0'..='9' => Some((c.to_string(), false)),
        'A'..='Z' => Some((c.to_ascii_lowercase().to_string(), true)),
        ' ' => Some(("space".into(), false)),
        '\n' => Some(("enter".into(), false)),
        '\t' => Some(("tab".into(), false)),
        _ if UNSHIFTED_PUNCT.contains(c) => Some((c.to_string(), false)),
        _ => {
            if let Some(i) = SHIFTED_PUNCT.find(c) {
                let base = UNSHIFTED_PUNCT.as_bytes()[i] as char;
                return Some((base.to_string(), true));
            }
            SHIFTED_DIGITS
                .find(c)
                .map(|i| (char::from(b'0' + i as u8).to_string(), true))
        }
    }
}

/// Character produced by releasing `key`, or `None` for non-text keys.
pub fn char_for_key(key: &str, shift: bool) -> Option<char> {
    match key {
        "space" => return Some(' '),
        "enter" => return Some('\n'),
        "tab" => return Some('\t'),
        _ => {}
    }
    let mut chars = key.chars();
    let c = match (chars.next(), chars.next()) {
        (Some(c), None) => c,
        _ => return None,
    };
    if !shift {
        return (c.is_ascii_lowercase() || c.is_ascii_digit() || UNSHIFTED_PUNCT.contains(c))
            .then_some(c);
    }
    if c.is_ascii_lowercase() {
        return Some(c.to_ascii_uppercase());
    }
    if let Some(d) = c.to_digit(10) {
        return SHIFTED_DIGITS.chars().nth(d as usize);
    }
    UNSHIFTED_PUNCT
        .find(c)
        .and_then(|i| SHIFTED_PUNCT.chars().nth(i))
}

/// Characters the keystroke synthesizer can produce.
pub fn is_typeable(c: char) -> bool {
    c == '\n' || c == '\t' || (' '..='~').contains(&c)
}
