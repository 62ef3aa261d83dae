//! Static SVG scatter plots of 2d datasets with the outlier circle overlaid.

use std::fmt::Write;

use crate::data::{require_2d_numeric, Dataset, OutlierRule};
use crate::error::Result;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Train,
    Test,
    Synth,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Test => "test",
            Role::Synth => "synth",
        }
    }

    fn color(self) -> &'static str {
        match self {
            Role::Train => "#d95f02",
            Role::Test => "#1b9e77",
            Role::Synth => "#7570b3",
        }
    }

    fn marker(self) -> &'static str {
        match self {
            Role::Train => r#"<circle cx="0" cy="0" r="2.2"/>"#,
            Role::Test => r#"<rect x="-2" y="-2" width="4" height="4"/>"#,
            Role::Synth => {
                r#"<polygon points="0,-4.5 1.1,-1.5 4.3,-1.4 1.7,0.6 2.6,3.6 0,1.8 -2.6,3.6 -1.7,0.6 -4.3,-1.4 -1.1,-1.5"/>"#
            }
        }
    }
}

/// Distinct points in first-appearance order, with their multiplicities.
fn collapse(d: &Dataset) -> Vec<([f64; 2], usize)> {
    let mut seen: std::collections::HashMap<[u64; 2], usize> = Default::default();
    let mut out: Vec<([f64; 2], usize)> = Vec::new();
    for r in d.rows() {
        let key = [(r[0] + 0.0).to_bits(), (r[1] + 0.0).to_bits()];
        match seen.get(&key) {
            Some(&k) => out[k].1 += 1,
            None => {
                seen.insert(key, out.len());
                out.push(([r[0], r[1]], 1));
            }
        }
    }
    out
}

/// Renders the layers in order, later roles on top.
pub fn render_svg(layers: &[(Role, &Dataset)], rule: &OutlierRule) -> Result<String> {
    for (role, d) in layers {
        require_2d_numeric(d, &format!("plotting the {} set", role.name()))?;
    }
    let extent = layers
        .iter()
        .flat_map(|(_, d)| d.values().iter().map(|v| v.abs()))
        .fold(rule.radius(), f64::max);
    let extent = (extent * 1.05 * 2.0).ceil() / 2.0;
    let scale = (SIZE - 2.0 * MARGIN) / (2.0 * extent);
    let px = |x: f64| MARGIN + (x + extent) * scale;
    let py = |y: f64| MARGIN + (extent - y) * scale;

    let mut s = String::new();
    // write! into a String cannot fail
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    s.push_str("<defs>\n");
    for (role, _) in layers {
        let _ = writeln!(s, r#"<g id="mk-{}">{}</g>"#, role.name(), role.marker());
    }
    s.push_str("</defs>\n");
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r##"<g class="axes" stroke="#999" stroke-width="0.8"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"##,
        px(-extent),
        py(0.0),
        px(extent),
        py(0.0),
        px(0.0),
        py(-extent),
        px(0.0),
        py(extent)
    );
    let mut tick = -extent.floor();
    while tick <= extent {
        let _ = writeln!(
            s,
            r##"<text class="tick" x="{:.2}" y="{:.2}" font-size="10" fill="#666" text-anchor="middle">{tick}</text>"##,
            px(tick),
            py(-extent) + 14.0
        );
        tick += 1.0;
    }

    for (role, d) in layers {
        let _ = writeln!(
            s,
            r#"<g class="role-{0}" fill="{1}" fill-opacity="0.75">"#,
            role.name(),
            role.color()
        );
        let points = collapse(d);
        for &([x, y], _) in &points {
            let _ = writeln!(
                s,
                r##"<use xlink:href="#mk-{}" x="{:.2}" y="{:.2}"/>"##,
                role.name(),
                px(x),
                py(y)
            );
        }
        for &([x, y], count) in points.iter().filter(|p| p.1 > 1) {
            let _ = writeln!(
                s,
                r#"<text class="multiplicity" x="{:.2}" y="{:.2}" font-size="11" fill="black">&#215;{count}</text>"#,
                px(x) + 6.0,
                py(y) - 6.0
            );
        }
        s.push_str("</g>\n");
    }

    let _ = writeln!(
        s,
        r##"<circle class="outlier-rule" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#2060d0" stroke-width="1.5"/>"##,
        px(0.0),
        py(0.0),
        rule.radius() * scale
    );
    for (k, (role, d)) in layers.iter().enumerate() {
        let y = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r##"<g class="legend"><use xlink:href="#mk-{0}" x="{1:.2}" y="{2:.2}" fill="{3}"/><text x="{4:.2}" y="{5:.2}" font-size="11">{0} ({6})</text></g>"##,
            role.name(),
            MARGIN + 6.0,
            y,
            role.color(),
            MARGIN + 14.0,
            y + 4.0,
            d.n_rows()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_roles_and_one_circle() {
        let a = Dataset::from_points(&[[0.0, 0.0], [1.0, -1.0]]).unwrap();
        let b = Dataset::from_points(&[[3.0, 0.5]]).unwrap();
        let svg = render_svg(
            &[(Role::Train, &a), (Role::Test, &b)],
            &OutlierRule::default(),
        )
        .unwrap();
        assert_eq!(svg.matches("class=\"role-").count(), 2);
        assert_eq!(svg.matches("class=\"outlier-rule\"").count(), 1);
        assert_eq!(svg.matches("href=\"#mk-train\" x").count(), 2 + 1);
        assert!(!svg.contains("multiplicity"));
    }

    #[test]
    fn duplicates_are_drawn_once_with_count() {
        let d = Dataset::from_points(&[[2.5, 2.5], [0.0, 0.0], [0.0, 0.0], [-0.0, 0.0]]).unwrap();
        let svg = render_svg(&[(Role::Synth, &d)], &OutlierRule::default()).unwrap();
        assert_eq!(svg.matches("href=\"#mk-synth\" x").count(), 2 + 1);
        assert_eq!(svg.matches("class=\"multiplicity\"").count(), 1);
        assert!(svg.contains("&#215;3<"));
    }

    #[test]
    fn rejects_non_2d() {
        let d = Dataset::new(vec![crate::data::Column::numeric("x")], vec![vec![1.0]]).unwrap();
        assert!(render_svg(&[(Role::Train, &d)], &OutlierRule::default()).is_err());
    }
}
