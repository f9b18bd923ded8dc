use std::fmt::Write;

use super::bars::truncate;
use super::{Bar, ColorToken, KeyValueTable, LayoutModel, Rect, RowCategory, StyleFlags, Theme};

const GRID: &str = "#d9d9d9";
const INK: &str = "#222222";
const MUTED: &str = "#666666";
const GRAY_FILL: &str = "#c4c4c4";
const HEADER_BUDGET: usize = 20;
/// Rough advance of one character at the 11-12px sizes used here.
const CHAR_WIDTH: f64 = 6.5;

/// Text cut to fit `width` pixels; the full text goes in a tooltip when cut.
fn fitted(text: &str, width: f64) -> String {
    let budget = (width / CHAR_WIDTH).floor().max(1.0) as usize;
    let shown = truncate(text, budget);
    if shown == text {
        esc(text)
    } else {
        format!("<title>{}</title>{}", esc(text), esc(&shown))
    }
}

/// Numbers print without a trailing `.0` and with at most one decimal, so
/// output bytes do not depend on float formatting details.
fn num(v: f64) -> String {
    let r = (v * 10.0).round() / 10.0;
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r:.1}")
    }
}

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Render a layout as a standalone SVG 1.1 document. Identical layouts give
/// identical bytes.
pub fn render_svg(layout: &LayoutModel, theme: &Theme) -> String {
    let m = &layout.metrics;
    let mut s = String::new();
    let (w, h) = (num(m.width), num(m.height));
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="Helvetica, Arial, sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", esc(&layout.title));
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);

    let plot_x = m.margin + m.row_header_width;
    let axis_y = m.margin + m.header_height;
    let plot_end = layout.columns.last().map_or(plot_x, |c| c.x + c.width);
    let grid_bottom = m.legend_y - m.margin / 2.0;

    s.push_str("<g class=\"columns\">\n");
    for col in &layout.columns {
        let cx = col.x + col.width / 2.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y1}" x2="{x}" y2="{y2}" stroke="{GRID}" stroke-width="1"/>"#,
            x = num(col.x),
            y1 = num(m.margin),
            y2 = num(grid_bottom)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-weight="bold" fill="{INK}">{}</text>"#,
            num(cx),
            num(m.margin + 16.0),
            esc(&truncate(&col.label, HEADER_BUDGET))
        );
        if let Some(date) = &col.resolved_date {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" font-size="10" fill="{MUTED}">{}</text>"#,
                num(cx),
                num(m.margin + 32.0),
                esc(date)
            );
        }
    }
    if let Some(last) = layout.columns.last() {
        let x = num(last.x + last.width);
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y1}" x2="{x}" y2="{y2}" stroke="{GRID}" stroke-width="1"/>"#,
            y1 = num(m.margin),
            y2 = num(grid_bottom)
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{INK}" stroke-width="1.5"/>"#,
        num(m.margin),
        num(plot_end.max(plot_x)),
        y = num(axis_y)
    );
    s.push_str("</g>\n");

    s.push_str("<g class=\"rows\">\n");
    for row in &layout.rows {
        let color = theme.color(row.color_token);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}" fill-opacity="0.35"/>"#,
            num(m.margin),
            num(row.y + 1.0),
            num(m.row_header_width - 8.0),
            num(row.height - 2.0)
        );
        let weight = if matches!(row.category, RowCategory::AnatomicalGroup { .. }) {
            "bold"
        } else {
            "normal"
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-weight="{weight}" fill="{INK}">{}</text>"#,
            num(m.margin + 6.0),
            num(row.y + 17.0),
            esc(&truncate(&row.label, HEADER_BUDGET))
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{GRID}" stroke-width="1"/>"#,
            num(m.margin),
            num(plot_end.max(plot_x)),
            y = num(row.y + row.height)
        );
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"bars\">\n");
    for bar in &layout.bars {
        let color = layout
            .rows
            .iter()
            .find(|r| r.row_id == bar.row_id)
            .map_or(ColorToken::Pink, |r| r.color_token);
        render_bar(&mut s, bar, theme.color(color), m.nested_line_height);
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"tables\">\n");
    for table in &layout.tables {
        let color = layout
            .rows
            .iter()
            .find(|r| r.row_id == table.row_id)
            .map_or(ColorToken::Green, |r| r.color_token);
        render_table(&mut s, table, theme.color(color), m.nested_line_height);
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"legend\">\n");
    let legend = [
        (ColorToken::Orange, "Anatomical part"),
        (ColorToken::Pink, "Diseases"),
        (ColorToken::Violet, "Test"),
        (ColorToken::Green, "Medicine"),
        (ColorToken::Lightgreen, "Clinical treatment"),
    ];
    let mut x = m.margin;
    for (token, label) in legend {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="14" height="14" fill="{}"/>"#,
            num(x),
            num(m.legend_y),
            theme.color(token)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{INK}">{}</text>"#,
            num(x + 20.0),
            num(m.legend_y + 12.0),
            label
        );
        x += 30.0 + label.len() as f64 * 7.0;
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn box_attrs(style: StyleFlags, color: &str) -> String {
    let fill = if style.hollow || style.outline {
        "#ffffff"
    } else if style.gray {
        GRAY_FILL
    } else {
        color
    };
    let stroke = if style.gray { MUTED } else { color };
    let mut attrs = format!(r#"fill="{fill}" stroke="{stroke}" stroke-width="1.5""#);
    if style.dashed {
        attrs.push_str(r#" stroke-dasharray="5 3""#);
    }
    attrs
}

fn text_attrs(style: StyleFlags) -> &'static str {
    match (style.strikethrough, style.outline) {
        (true, _) => r#" text-decoration="line-through""#,
        (false, true) => r#" font-style="italic""#,
        _ => "",
    }
}

/// Arrow heads on the sides of a box whose span continues past its columns.
fn open_markers(s: &mut String, r: Rect, open_start: bool, open_end: bool, color: &str) {
    let mid = r.y + r.h.min(18.0) / 2.0;
    let tip = |x: f64, dx: f64| {
        format!(
            "{},{} {},{} {},{}",
            num(x),
            num(mid - 9.0),
            num(x + dx),
            num(mid),
            num(x),
            num(mid + 9.0)
        )
    };
    if open_start {
        let _ = writeln!(
            s,
            r#"<polygon class="open-start" points="{}" fill="{color}"/>"#,
            tip(r.x, -8.0)
        );
    }
    if open_end {
        let _ = writeln!(
            s,
            r#"<polygon class="open-end" points="{}" fill="{color}"/>"#,
            tip(r.x + r.w, 8.0)
        );
    }
}

fn render_bar(s: &mut String, bar: &Bar, color: &str, line_height: f64) {
    let r = bar.rect;
    let _ = writeln!(
        s,
        r#"<g class="bar" id="{}" data-entities="{}">"#,
        esc(&bar.bar_id),
        esc(&bar.entity_ids.join(" "))
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" rx="3" {}/>"#,
        num(r.x),
        num(r.y),
        num(r.w),
        num(r.h),
        box_attrs(bar.style, color)
    );
    open_markers(s, r, bar.open_start, bar.open_end, color);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" fill="{INK}"{}>{}</text>"#,
        num(r.x + 6.0),
        num(r.y + 15.0),
        text_attrs(bar.style),
        fitted(&bar.label, r.w - 12.0)
    );
    if bar.style.cancelled {
        let (cx, cy) = (r.x + r.w - 10.0, r.y + 10.0);
        let _ = writeln!(
            s,
            r##"<g class="cancelled"><circle cx="{}" cy="{}" r="6" fill="#ffffff" stroke="#c62828" stroke-width="1.5"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c62828" stroke-width="1.5"/></g>"##,
            num(cx),
            num(cy),
            num(cx - 4.0),
            num(cy + 4.0),
            num(cx + 4.0),
            num(cy - 4.0)
        );
    }
    for (k, nested) in bar.nested.iter().enumerate() {
        let indent = 6.0 + nested.depth as f64 * 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{INK}">{}</text>"#,
            num(r.x + indent),
            num(r.y + 15.0 + (k + 1) as f64 * line_height),
            fitted(&nested.text, r.w - indent - 6.0)
        );
    }
    for (k, sup) in bar.supplemental_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" fill="{MUTED}"><title>{}</title>{}</text>"#,
            num(r.x + r.w + 10.0),
            num(r.y + 12.0 + k as f64 * 12.0),
            esc(&sup.text),
            esc(&sup.display)
        );
    }
    s.push_str("</g>\n");
}

fn render_table(s: &mut String, table: &KeyValueTable, color: &str, line_height: f64) {
    let r = table.rect;
    let _ = writeln!(s, r#"<g class="table" id="{}">"#, esc(&table.table_id));
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff" stroke="{color}" stroke-width="1.5"/>"##,
        num(r.x),
        num(r.y),
        num(r.w),
        num(r.h)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="4" height="{}" fill="{color}"/>"#,
        num(r.x),
        num(r.y),
        num(r.h)
    );
    open_markers(s, r, table.open_start, table.open_end, color);
    for (k, entry) in table.entries.iter().enumerate() {
        let text = match (entry.key.is_empty(), entry.value.is_empty()) {
            (false, false) => format!("{}: {}", entry.key, entry.value),
            (true, _) => entry.value.clone(),
            (false, true) => entry.key.clone(),
        };
        let text = if entry.style.cancelled {
            format!("\u{2298} {text}")
        } else {
            text
        };
        let fill = if entry.style.gray { MUTED } else { INK };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{fill}" data-entities="{}"{}>{}</text>"#,
            num(r.x + 10.0),
            num(r.y + (k + 1) as f64 * line_height),
            esc(&entry.entity_ids.join(" ")),
            text_attrs(entry.style),
            fitted(&text, r.w - 16.0)
        );
    }
    s.push_str("</g>\n");
}
