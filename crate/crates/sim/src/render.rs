//! Flat-color synthetic screenshots.
//!
//! Every widget draws strictly inside its own bounds, so a widget state
//! change only touches pixels within that widget's rectangle.

use cua_core::geometry::Bounds;

use crate::scene::{Orientation, WidgetKind};
use crate::state::{DesktopState, WidgetState};
use crate::scene::WidgetSpec;

type Rgb = [u8; 3];

const BACKGROUND: Rgb = [0x2e, 0x4a, 0x62];
const WINDOW_FILL: Rgb = [0xe8, 0xe8, 0xe8];
const WINDOW_BORDER: Rgb = [0x40, 0x40, 0x40];
const TITLE_BAR: Rgb = [0x9a, 0xb3, 0xcc];
const ACTIVE_TITLE_BAR: Rgb = [0x3d, 0x6e, 0xa8];
const TEXT: Rgb = [0x10, 0x10, 0x10];
const TITLE_TEXT: Rgb = [0xff, 0xff, 0xff];
const FOCUS_RING: Rgb = [0xff, 0x8c, 0x00];
const CHECK_MARK: Rgb = [0x20, 0x80, 0x20];
const THUMB: Rgb = [0x60, 0x60, 0x60];

pub const GLYPH_W: i64 = 5;
pub const GLYPH_H: i64 = 7;
const ADVANCE: i64 = GLYPH_W + 1;
const TITLE_BAR_H: i64 = 14;

fn widget_fill(kind: WidgetKind) -> Rgb {
    match kind {
        WidgetKind::Button => [0xc8, 0xd6, 0xe5],
        WidgetKind::TextField => [0xff, 0xff, 0xff],
        WidgetKind::Checkbox => [0xdd, 0xe8, 0xd5],
        WidgetKind::Label => [0xe8, 0xe8, 0xe8],
        WidgetKind::Scrollbar => [0xbb, 0xbb, 0xbb],
        WidgetKind::ListItem => [0xf4, 0xf4, 0xf4],
        WidgetKind::MenuItem => [0xf0, 0xe6, 0xc8],
    }
}

/// RGB raster with clipped drawing primitives.
pub struct Canvas {
    width: i64,
    height: i64,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        let pixels = fill.repeat(width as usize * height as usize);
        Self { width: i64::from(width), height: i64::from(height), pixels }
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: i64, y: i64) -> Rgb {
        let i = ((y * self.width + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, clip: &Bounds, color: Rgb) {
        if x < 0 || y < 0 || x >= self.width || y >= self.height || !clip.contains(x, y) {
            return;
        }
        let i = ((y * self.width + x) * 3) as usize;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    fn fill(&mut self, r: &Bounds, clip: &Bounds, color: Rgb) {
        for y in r.y..r.bottom() {
            for x in r.x..r.right() {
                self.put(x, y, clip, color);
            }
        }
    }

    fn outline(&mut self, r: &Bounds, clip: &Bounds, color: Rgb) {
        for x in r.x..r.right() {
            self.put(x, r.y, clip, color);
            self.put(x, r.bottom() - 1, clip, color);
        }
        for y in r.y..r.bottom() {
            self.put(r.x, y, clip, color);
            self.put(r.right() - 1, y, clip, color);
        }
    }

    fn text(&mut self, x: i64, y: i64, text: &str, clip: &Bounds, color: Rgb) {
        for (i, c) in text.chars().enumerate() {
            let gx = x + i as i64 * ADVANCE;
            if gx >= clip.right() {
                break;
            }
            for (row, bits) in glyph(c).iter().enumerate() {
                for col in 0..GLYPH_W {
                    if bits & (1 << (GLYPH_W - 1 - col)) != 0 {
                        self.put(gx + col, y + row as i64, clip, color);
                    }
                }
            }
        }
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder.write_header().expect("in-memory png header");
            writer.write_image_data(&self.pixels).expect("in-memory png data");
        }
        out
    }
}

/// Deterministic 5×7 bitmap for `c`: five bits per row, high bit leftmost.
///
/// Patterns are derived from the code point, not drawn from a font; they
/// only need to be stable and distinct per character.
pub fn glyph(c: char) -> [u8; 7] {
    if c.is_whitespace() {
        return [0; 7];
    }
    let mut h = (c as u32).wrapping_mul(0x9e37_79b9) ^ 0x5bd1_e995;
    let mut rows = [0u8; 7];
    for row in &mut rows {
        h ^= h >> 13;
        h = h.wrapping_mul(0x85eb_ca6b);
        h ^= h >> 16;
        *row = (h & 0x1f) as u8;
    }
    // keep a visible stroke on the left edge
    rows[0] |= 0x10;
    rows[6] |= 0x10;
    rows
}

fn inset(b: &Bounds, by: i64) -> Bounds {
    Bounds::new(b.x + by, b.y + by, (b.w - 2 * by).max(0), (b.h - 2 * by).max(0))
}

fn draw_widget(canvas: &mut Canvas, spec: &WidgetSpec, ws: &WidgetState, focused: bool) {
    let clip = spec.bounds;
    canvas.fill(&clip, &clip, widget_fill(spec.kind));
    if spec.kind != WidgetKind::Label {
        canvas.outline(&clip, &clip, WINDOW_BORDER);
    }
    let text_y = clip.y + (clip.h - GLYPH_H) / 2;
    match spec.kind {
        WidgetKind::Checkbox => {
            let size = (clip.h - 6).clamp(1, 12);
            let boxr = Bounds::new(clip.x + 3, clip.y + (clip.h - size) / 2, size, size);
            canvas.outline(&boxr, &clip, WINDOW_BORDER);
            if ws.checked {
                canvas.fill(&inset(&boxr, 2), &clip, CHECK_MARK);
            }
            canvas.text(boxr.right() + 4, text_y, &spec.name, &clip, TEXT);
        }
        WidgetKind::ListItem => {
            if ws.checked {
                canvas.fill(&inset(&clip, 1), &clip, ACTIVE_TITLE_BAR);
            }
            let color = if ws.checked { TITLE_TEXT } else { TEXT };
            canvas.text(clip.x + 4, text_y, &spec.name, &clip, color);
        }
        WidgetKind::TextField => {
            canvas.text(clip.x + 3, clip.y + 3, &ws.value.replace(['\n', '\t'], " "), &clip, TEXT);
        }
        WidgetKind::Scrollbar => {
            if spec.scroll_max > 0 {
                let thumb = match spec.orientation {
                    Orientation::Vertical => {
                        let len = (clip.h / 5).max(4);
                        let y = clip.y + (clip.h - len) * ws.scroll_offset / spec.scroll_max;
                        Bounds::new(clip.x + 2, y, clip.w - 4, len)
                    }
                    Orientation::Horizontal => {
                        let len = (clip.w / 5).max(4);
                        let x = clip.x + (clip.w - len) * ws.scroll_offset / spec.scroll_max;
                        Bounds::new(x, clip.y + 2, len, clip.h - 4)
                    }
                };
                canvas.fill(&thumb, &clip, THUMB);
            }
        }
        WidgetKind::Label => {
            let text = if ws.value.is_empty() { &spec.name } else { &ws.value };
            canvas.text(clip.x + 2, text_y, text, &clip, TEXT);
        }
        WidgetKind::Button | WidgetKind::MenuItem => {
            let width = spec.name.chars().count() as i64 * ADVANCE;
            let x = clip.x + ((clip.w - width) / 2).max(2);
            canvas.text(x, text_y, &spec.name, &clip, TEXT);
        }
    }
    if focused {
        canvas.outline(&inset(&clip, 1), &clip, FOCUS_RING);
    }
}

/// Renders the desktop into an RGB canvas.
pub fn render(state: &DesktopState) -> Canvas {
    let screen = state.scene.screen;
    let mut canvas = Canvas::new(screen.width, screen.height, BACKGROUND);
    let top = state.open_windows.last();
    for title in &state.open_windows {
        let win = state
            .scene
            .windows
            .iter()
            .find(|w| &w.title == title)
            .expect("open windows exist in the scene");
        let clip = win.bounds;
        canvas.fill(&clip, &clip, WINDOW_FILL);
        let bar = Bounds::new(clip.x, clip.y, clip.w, TITLE_BAR_H.min(clip.h));
        let bar_color = if Some(title) == top { ACTIVE_TITLE_BAR } else { TITLE_BAR };
        canvas.fill(&bar, &clip, bar_color);
        canvas.text(clip.x + 4, clip.y + 4, &win.title, &bar, TITLE_TEXT);
        canvas.outline(&clip, &clip, WINDOW_BORDER);
        for wd in &win.widgets {
            let focused = state.focus.as_deref() == Some(wd.id.as_str());
            draw_widget(&mut canvas, wd, &state.widgets[&wd.id], focused);
        }
    }
    canvas
}

/// PNG bytes for `GET /screenshot`.
pub fn emit_screenshot(state: &DesktopState) -> Vec<u8> {
    render(state).encode_png()
}

#[cfg(test)]
mod tests {
    use cua_core::action::MouseButton;
    use cua_core::wire::png_dimensions;
    use cua_core::PrimitiveCommand as P;

    use super::*;
    use crate::scene::SceneCatalog;

    fn scene(id: &str) -> DesktopState {
        DesktopState::load_scene(SceneCatalog::builtin().get(id).unwrap(), 0).unwrap()
    }

    #[test]
    fn identical_states_identical_bytes() {
        assert_eq!(emit_screenshot(&scene("settings")), emit_screenshot(&scene("settings")));
    }

    #[test]
    fn header_declares_screen_size() {
        assert_eq!(png_dimensions(&emit_screenshot(&scene("two_buttons"))), Some((800, 600)));
    }

    #[test]
    fn checkbox_toggle_changes_only_its_pixels() {
        let before = scene("settings");
        let mut after = before.clone();
        after
            .apply_batch(&[
                P::MoveTo { x: 240, y: 152 },
                P::ButtonDown { button: MouseButton::Left },
                P::ButtonUp { button: MouseButton::Left },
            ])
            .unwrap();
        let (a, b) = (render(&before), render(&after));
        let bounds = before.scene.widget("dark").unwrap().bounds;
        let mut changed = 0;
        for y in 0..600 {
            for x in 0..800 {
                if a.pixel(x, y) != b.pixel(x, y) {
                    assert!(bounds.contains(x, y), "pixel ({x},{y}) changed outside the checkbox");
                    changed += 1;
                }
            }
        }
        assert!(changed > 0);
    }

    #[test]
    fn glyphs_are_stable() {
        assert_eq!(glyph('A'), glyph('A'));
        assert_ne!(glyph('A'), glyph('B'));
        assert_eq!(glyph(' '), [0; 7]);
    }
}
