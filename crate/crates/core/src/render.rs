//! Static SVG picture of the grid assignment: one colored square per lattice point with an
//! arrow along `−∇f`. Output is byte-identical for identical instances.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::color_field::{Color, ColorField, Direction};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`render_svg`] (a 391×391 lattice).
pub const MAX_RENDER_N: u32 = 6;
/// Side of one lattice square in SVG user units.
pub const CELL: i64 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RenderSummary {
    pub n: u32,
    pub side: i64,
    pub colors: BTreeMap<Color, usize>,
    pub directions: BTreeMap<Direction, usize>,
}

fn fill(c: Color) -> &'static str {
    match c {
        Color::Blue => "#2b59c3",
        Color::Black => "#1a1a1a",
        Color::Red => "#d1495b",
        Color::Green => "#3a9d5d",
        Color::Orange => "#f29e4c",
    }
}

fn stroke(c: Color) -> &'static str {
    match c {
        Color::Blue | Color::Black => "#ffffff",
        _ => "#1a1a1a",
    }
}

fn glyph(d: Direction) -> &'static str {
    match d {
        Direction::Up => "up",
        Direction::Left => "left",
        Direction::Down => "down",
        Direction::Right => "right",
    }
}

/// Arrow paths in a `CELL × CELL` square, SVG y pointing down.
const ARROWS: [(&str, &str); 4] = [
    ("up", "M6 10V2M3 5L6 2L9 5"),
    ("down", "M6 2V10M3 7L6 10L9 7"),
    ("left", "M10 6H2M5 3L2 6L5 9"),
    ("right", "M2 6H10M7 3L10 6L7 9"),
];

/// SVG of every lattice point of `{0..N}²` with `(0, 0)` at the bottom left.
pub fn render_svg(field: &ColorField) -> Result<(String, RenderSummary)> {
    let n = field.instance().n();
    if n > MAX_RENDER_N {
        return Err(Error::Validation(format!("rendering supports n ≤ {MAX_RENDER_N}, got n = {n}")));
    }
    let side = field.geometry().side;
    let size = (side + 1) * CELL;
    let mut svg = String::new();
    let mut colors: BTreeMap<Color, usize> = Color::ALL.iter().map(|&c| (c, 0)).collect();
    let mut directions: BTreeMap<Direction, usize> = BTreeMap::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .expect("write to string");
    svg.push_str("<defs>\n");
    for (id, d) in ARROWS {
        writeln!(svg, r#"<path id="{id}" d="{d}" fill="none" stroke-width="1.5" stroke-linecap="round"/>"#).expect("write to string");
    }
    svg.push_str("</defs>\n<style>\n");
    for c in Color::ALL {
        writeln!(svg, ".{0}>rect{{fill:{1}}} .{0}>use{{stroke:{2}}}", c.name(), fill(c), stroke(c)).expect("write to string");
    }
    svg.push_str("</style>\n");
    for b in (0..=side).rev() {
        for a in 0..=side {
            let color = field.color(a, b);
            let dir = field.direction(a, b);
            *colors.entry(color).or_default() += 1;
            *directions.entry(dir).or_default() += 1;
            let (x, y) = (a * CELL, (side - b) * CELL);
            writeln!(
                svg,
                r##"<g class="{}" transform="translate({x} {y})"><rect width="{CELL}" height="{CELL}"/><use href="#{}"/></g>"##,
                color.name(),
                glyph(dir)
            )
            .expect("write to string");
        }
    }
    svg.push_str("</svg>\n");
    Ok((svg, RenderSummary { n, side, colors, directions }))
}

/// Per-color glyph counts read back from rendered SVG.
pub fn count_glyphs(svg: &str) -> BTreeMap<Color, usize> {
    Color::ALL
        .iter()
        .map(|&c| (c, svg.matches(&format!(r#"<g class="{}""#, c.name())).count()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iter_problems::IterInstance;
    use std::sync::Arc;

    fn field(n: u32, table: Vec<u64>) -> ColorField {
        ColorField::new(Arc::new(IterInstance::from_table(n, table).unwrap()))
    }

    #[test]
    fn deterministic_and_counted() {
        let f = field(1, vec![2, 2]);
        let (a, summary) = render_svg(&f).unwrap();
        let (b, _) = render_svg(&f).unwrap();
        assert_eq!(a, b);
        assert_eq!(summary.colors.values().sum::<usize>(), 19 * 19);
        assert_eq!(count_glyphs(&a), summary.colors);
        assert_eq!(a.matches("<use ").count(), 19 * 19);
    }

    #[test]
    fn oversized_instances_are_rejected() {
        let table: Vec<u64> = (0..128u64).map(|v| (v + 2).min(128)).collect();
        let f = field(7, table);
        assert!(matches!(render_svg(&f), Err(Error::Validation(_))));
    }
}
