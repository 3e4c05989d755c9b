//! Planar homothety iterated function systems and their presets.
//!
//! A system is a list of maps `z -> r_i z + beta_i` together with a base
//! rectangle `A_0`; generation `n + 1` is the union of the images of
//! generation `n`.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::projection::{Chart, Direction};

/// Homothety `z -> ratio * z + translation` with `0 < ratio < 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Similitude2D {
    ratio: Rational,
    translation: (Rational, Rational),
}

impl Similitude2D {
    pub fn new(ratio: Rational, translation: (Rational, Rational)) -> Result<Self> {
        if !(ratio.is_positive() && ratio < 1) {
            return Err(Error::InvalidSystem(format!("ratio {ratio} not in (0, 1)")));
        }
        Ok(Similitude2D { ratio, translation })
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn translation(&self) -> &(Rational, Rational) {
        &self.translation
    }

    pub fn apply_rect(&self, rect: &Rect) -> Rect {
        let (bx, by) = &self.translation;
        Rect {
            x0: &self.ratio * &rect.x0 + bx,
            y0: &self.ratio * &rect.y0 + by,
            x1: &self.ratio * &rect.x1 + bx,
            y1: &self.ratio * &rect.y1 + by,
        }
    }
}

/// Axis-aligned closed rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x0: Rational,
    pub y0: Rational,
    pub x1: Rational,
    pub y1: Rational,
}

impl Rect {
    pub fn new(x0: Rational, y0: Rational, x1: Rational, y1: Rational) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::InvalidSystem(format!(
                "empty base rectangle [{x0}, {y0}, {x1}, {y1}]"
            )));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn unit_square() -> Self {
        Rect {
            x0: Rational::zero(),
            y0: Rational::zero(),
            x1: Rational::one(),
            y1: Rational::one(),
        }
    }

    pub fn corners(&self) -> [(Rational, Rational); 4] {
        [
            (self.x0.clone(), self.y0.clone()),
            (self.x1.clone(), self.y0.clone()),
            (self.x0.clone(), self.y1.clone()),
            (self.x1.clone(), self.y1.clone()),
        ]
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn center_f64(&self) -> (f64, f64) {
        (
            ((&self.x0 + &self.x1) / Rational::integer(2)).to_f64(),
            ((&self.y0 + &self.y1) / Rational::integer(2)).to_f64(),
        )
    }

    /// Half the diagonal: radius of the smallest disc about the center containing the rectangle.
    pub fn circumradius(&self) -> f64 {
        let w = (&self.x1 - &self.x0).to_f64();
        let h = (&self.y1 - &self.y0).to_f64();
        0.5 * w.hypot(h)
    }

    fn is_square(&self) -> bool {
        &self.x1 - &self.x0 == &self.y1 - &self.y0
    }
}

/// Symmetry of the generation sets that the quadrature may exploit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    #[default]
    None,
    /// Invariant under the dihedral group of the base square: projection
    /// lengths have period pi/2 and are symmetric about pi/4.
    Dihedral4,
}

impl Symmetry {
    fn label(self) -> &'static str {
        match self {
            Symmetry::None => "none",
            Symmetry::Dihedral4 => "dihedral4",
        }
    }
}

/// Planar IFS of homotheties with a rectangular generation-0 set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ifs2D {
    name: String,
    maps: Vec<Similitude2D>,
    base: Rect,
    symmetry: Symmetry,
    ratio_sum: Rational,
}

impl Ifs2D {
    pub fn new(name: impl Into<String>, maps: Vec<Similitude2D>, base: Rect) -> Result<Self> {
        Self::with_symmetry(name, maps, base, Symmetry::None)
    }

    /// Declares a symmetry; it is verified on the first-generation rectangles.
    pub fn with_symmetry(
        name: impl Into<String>,
        maps: Vec<Similitude2D>,
        base: Rect,
        symmetry: Symmetry,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "need at least 2 maps, got {}",
                maps.len()
            )));
        }
        let ratio_sum = maps.iter().map(|m| m.ratio.clone()).sum();
        let ifs = Ifs2D {
            name: name.into(),
            maps,
            base,
            symmetry,
            ratio_sum,
        };
        if symmetry == Symmetry::Dihedral4 && !ifs.first_generation_is_dihedral() {
            return Err(Error::InvalidSystem("declared dihedral4 symmetry does not hold".into()));
        }
        Ok(ifs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn maps(&self) -> &[Similitude2D] {
        &self.maps
    }

    pub fn base(&self) -> &Rect {
        &self.base
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn ratio_sum(&self) -> &Rational {
        &self.ratio_sum
    }

    /// True iff the contraction ratios sum to exactly one.
    pub fn convexity_applies(&self) -> bool {
        self.ratio_sum == 1
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn max_ratio(&self) -> &Rational {
        self.maps.iter().map(|m| &m.ratio).max().expect("at least two maps")
    }

    /// Solution `s` of `sum r_i^s = 1` (closed form for uniform ratios).
    pub fn similarity_dimension(&self) -> f64 {
        let ratios: Vec<f64> = self.maps.iter().map(|m| m.ratio.to_f64()).collect();
        if self.maps.iter().all(|m| m.ratio == self.maps[0].ratio) {
            return (ratios.len() as f64).ln() / (1.0 / ratios[0]).ln();
        }
        let moran = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
        let (mut lo, mut hi) = (0.0, 64.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moran(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn image_rects(&self) -> Vec<Rect> {
        self.maps.iter().map(|m| m.apply_rect(&self.base)).collect()
    }

    fn first_generation_is_dihedral(&self) -> bool {
        if !self.base.is_square() {
            return false;
        }
        let cx2 = &self.base.x0 + &self.base.x1;
        let cy2 = &self.base.y0 + &self.base.y1;
        let mut images: Vec<Rect> = self.image_rects();
        let key = |r: &Rect| (r.x0.clone(), r.y0.clone(), r.x1.clone(), r.y1.clone());
        images.sort_by_key(key);
        // generators: reflection in the diagonal through the center, and in the vertical center line
        let diag = |r: &Rect| Rect {
            x0: &r.y0 - &cy2 / Rational::integer(2) + &cx2 / Rational::integer(2),
            x1: &r.y1 - &cy2 / Rational::integer(2) + &cx2 / Rational::integer(2),
            y0: &r.x0 - &cx2 / Rational::integer(2) + &cy2 / Rational::integer(2),
            y1: &r.x1 - &cx2 / Rational::integer(2) + &cy2 / Rational::integer(2),
        };
        let vert = |r: &Rect| Rect {
            x0: &cx2 - &r.x1,
            x1: &cx2 - &r.x0,
            y0: r.y0.clone(),
            y1: r.y1.clone(),
        };
        [&diag as &dyn Fn(&Rect) -> Rect, &vert].iter().all(|g| {
            let mut mapped: Vec<Rect> = images.iter().map(g).collect();
            mapped.sort_by_key(key);
            mapped == images
        })
    }

    /// Hypotheses report: ratio sum and nesting of first-generation images.
    pub fn validate(&self, display_depth: usize) -> ValidationReport {
        let base = &self.base;
        let planar_nesting = self.image_rects().iter().all(|r| base.contains(r));
        let directions = nesting_directions();
        let projected = directions
            .iter()
            .map(|d| {
                let p = crate::projection::project_ifs(self, d);
                let base_iv = p.base();
                let ok = p.maps().iter().all(|m| {
                    let lo = m.ratio() * base_iv.lo() + m.offset();
                    let hi = m.ratio() * base_iv.hi() + m.offset();
                    base_iv.lo() <= &lo && &hi <= base_iv.hi()
                });
                DirectionNesting {
                    chart: d.chart(),
                    slope: d.slope().clone(),
                    pass: ok,
                }
            })
            .collect::<Vec<_>>();
        let nesting_pass = planar_nesting && projected.iter().all(|d| d.pass);
        let n = BigInt::from(self.maps.len());
        ValidationReport {
            name: self.name.clone(),
            maps: self.maps.len(),
            ratio_sum: self.ratio_sum.clone(),
            convexity_applies: self.convexity_applies(),
            nesting_pass,
            planar_nesting,
            projected_nesting: projected,
            similarity_dimension: self.similarity_dimension(),
            cylinder_counts: (0..=display_depth)
                .map(|k| (k, num_traits::pow(n.clone(), k).to_string()))
                .collect(),
        }
    }

    pub fn nesting_passes(&self) -> bool {
        self.validate(0).nesting_pass
    }

    /// Parse the structured config format (see [`Ifs2D::to_config_string`]).
    pub fn from_config_str(text: &str) -> Result<Self> {
        config::parse(text)
    }

    /// Render in the config format; parsing the output reproduces `self` exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = \"{}\"", self.name);
        let b = &self.base;
        let _ = writeln!(out, "base = [\"{}\", \"{}\", \"{}\", \"{}\"]", b.x0, b.y0, b.x1, b.y1);
        if self.symmetry != Symmetry::None {
            let _ = writeln!(out, "symmetry = \"{}\"", self.symmetry.label());
        }
        for m in &self.maps {
            let _ = writeln!(
                out,
                "map {{ ratio = \"{}\", translate = [\"{}\", \"{}\"] }}",
                m.ratio, m.translation.0, m.translation.1
            );
        }
        out
    }

    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "four-corner" => four_corner(),
            "sierpinski-gasket" => sierpinski_gasket(),
            _ => {
                let k = name
                    .strip_prefix("sparse-corner")
                    .map(|rest| rest.trim_start_matches(['-', '(']).trim_end_matches(')'))
                    .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
                let k: i64 = k.parse().map_err(|_| Error::UnknownPreset(name.to_string()))?;
                sparse_corner(k)
            }
        }
    }
}

/// Names accepted by [`Ifs2D::preset`] (sparse-corner takes a parameter `k > 4`).
pub const PRESET_NAMES: &[&str] = &["four-corner", "sparse-corner-<k>", "sierpinski-gasket"];

fn corner_maps(k: i64) -> Result<Vec<Similitude2D>> {
    let r = Rational::frac(1, k);
    let far = Rational::one() - &r;
    let zero = Rational::zero();
    [
        (zero.clone(), zero.clone()),
        (zero.clone(), far.clone()),
        (far.clone(), zero),
        (far.clone(), far),
    ]
    .into_iter()
    .map(|t| Similitude2D::new(r.clone(), t))
    .collect()
}

fn four_corner() -> Result<Ifs2D> {
    Ifs2D::with_symmetry("four-corner", corner_maps(4)?, Rect::unit_square(), Symmetry::Dihedral4)
}

fn sparse_corner(k: i64) -> Result<Ifs2D> {
    if k <= 4 {
        return Err(Error::InvalidSystem(format!("sparse-corner needs k > 4, got {k}")));
    }
    Ifs2D::with_symmetry(
        format!("sparse-corner-{k}"),
        corner_maps(k)?,
        Rect::unit_square(),
        Symmetry::Dihedral4,
    )
}

fn sierpinski_gasket() -> Result<Ifs2D> {
    let h = Rational::frac(1, 2);
    let maps = [
        (Rational::zero(), Rational::zero()),
        (h.clone(), Rational::zero()),
        (Rational::frac(1, 4), h.clone()),
    ]
    .into_iter()
    .map(|t| Similitude2D::new(h.clone(), t))
    .collect::<Result<Vec<_>>>()?;
    Ifs2D::new("sierpinski-gasket", maps, Rect::unit_square())
}

fn nesting_directions() -> Vec<Direction> {
    let half = Rational::frac(1, 2);
    [
        (Chart::X, Rational::zero()),
        (Chart::X, half.clone()),
        (Chart::X, -&half),
        (Chart::X, Rational::one()),
        (Chart::Y, Rational::zero()),
        (Chart::Y, half.clone()),
        (Chart::Y, -&half),
        (Chart::Y, -Rational::one()),
    ]
    .into_iter()
    .map(|(c, s)| Direction::new(c, s).expect("slopes within chart range"))
    .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionNesting {
    pub chart: Chart,
    pub slope: Rational,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub maps: usize,
    pub ratio_sum: Rational,
    pub convexity_applies: bool,
    pub nesting_pass: bool,
    pub planar_nesting: bool,
    pub projected_nesting: Vec<DirectionNesting>,
    pub similarity_dimension: f64,
    /// `(n, N^n)` with the count rendered in decimal.
    pub cylinder_counts: Vec<(usize, String)>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: N={} ratio_sum={} convexity_applies={} nesting={}",
            self.name,
            self.maps,
            self.ratio_sum,
            self.convexity_applies,
            if self.nesting_pass { "pass" } else { "fail" }
        )
    }
}

mod config {
    //! Grammar (one statement per line, `#` starts a comment):
    //!
    //! ```text
    //! name = "four-corner"
    //! base = [x0, y0, x1, y1]
    //! symmetry = "dihedral4"            # optional
    //! map { ratio = "p/q", translate = ["p/q", "p/q"] }
    //! ```
    //!
    //! Numbers are exact: `"p/q"`, integers or finite decimals, quoted or bare.
    //! A `rotation` key inside `map` is reserved; only a zero rotation is accepted.

    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Ident(String),
        Atom(String),
        Eq,
        Comma,
        LBracket,
        RBracket,
        LBrace,
        RBrace,
    }

    #[derive(Debug)]
    enum Value {
        Atom(String),
        List(Vec<String>),
    }

    fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
        let mut toks = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let mut chars = line.char_indices().peekable();
            while let Some(&(i, c)) = chars.peek() {
                match c {
                    '#' => break,
                    c if c.is_whitespace() => {
                        chars.next();
                    }
                    '=' | ',' | '[' | ']' | '{' | '}' => {
                        chars.next();
                        toks.push((
                            line_no,
                            match c {
                                '=' => Tok::Eq,
                                ',' => Tok::Comma,
                                '[' => Tok::LBracket,
                                ']' => Tok::RBracket,
                                '{' => Tok::LBrace,
                                _ => Tok::RBrace,
                            },
                        ));
                    }
                    '"' => {
                        chars.next();
                        let start = i + 1;
                        let mut end = None;
                        for (j, c) in chars.by_ref() {
                            if c == '"' {
                                end = Some(j);
                                break;
                            }
                        }
                        let end = end.ok_or(Error::Config {
                            line: line_no,
                            msg: "unterminated string".into(),
                        })?;
                        toks.push((line_no, Tok::Atom(line[start..end].to_string())));
                    }
                    _ => {
                        let start = i;
                        let mut end = line.len();
                        while let Some(&(j, c)) = chars.peek() {
                            if c.is_whitespace() || "=,[]{}#\"".contains(c) {
                                end = j;
                                break;
                            }
                            chars.next();
                        }
                        let word = &line[start..end];
                        let tok = if word.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                            Tok::Ident(word.to_string())
                        } else {
                            Tok::Atom(word.to_string())
                        };
                        toks.push((line_no, tok));
                    }
                }
            }
        }
        Ok(toks)
    }

    struct Parser {
        toks: Vec<(usize, Tok)>,
        pos: usize,
    }

    impl Parser {
        fn line(&self) -> usize {
            self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.0)
        }

        fn err(&self, msg: impl Into<String>) -> Error {
            Error::Config {
                line: self.line(),
                msg: msg.into(),
            }
        }

        fn next(&mut self) -> Option<Tok> {
            let t = self.toks.get(self.pos).map(|t| t.1.clone());
            self.pos += 1;
            t
        }

        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos).map(|t| &t.1)
        }

        fn expect(&mut self, want: Tok) -> Result<()> {
            match self.next() {
                Some(t) if t == want => Ok(()),
                other => {
                    self.pos -= 1;
                    Err(self.err(format!("expected {want:?}, found {other:?}")))
                }
            }
        }

        fn atom(&mut self) -> Result<String> {
            match self.next() {
                Some(Tok::Atom(s)) | Some(Tok::Ident(s)) => Ok(s),
                other => {
                    self.pos -= 1;
                    Err(self.err(format!("expected a value, found {other:?}")))
                }
            }
        }

        fn value(&mut self) -> Result<Value> {
            if self.peek() == Some(&Tok::LBracket) {
                self.next();
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(&Tok::RBracket) {
                        self.next();
                        break;
                    }
                    items.push(self.atom()?);
                    match self.next() {
                        Some(Tok::Comma) => {}
                        Some(Tok::RBracket) => break,
                        other => {
                            self.pos -= 1;
                            return Err(self.err(format!("expected ',' or ']', found {other:?}")));
                        }
                    }
                }
                Ok(Value::List(items))
            } else {
                Ok(Value::Atom(self.atom()?))
            }
        }

        fn ident(&mut self) -> Result<String> {
            match self.next() {
                Some(Tok::Ident(s)) => Ok(s),
                other => {
                    self.pos -= 1;
                    Err(self.err(format!("expected a key, found {other:?}")))
                }
            }
        }
    }

    fn rational(p: &Parser, s: &str) -> Result<Rational> {
        s.parse().map_err(|e: Error| p.err(e.to_string()))
    }

    pub(super) fn parse(text: &str) -> Result<Ifs2D> {
        let mut p = Parser {
            toks: lex(text)?,
            pos: 0,
        };
        let mut name = None;
        let mut base = None;
        let mut symmetry = Symmetry::None;
        let mut maps = Vec::new();
        while p.peek().is_some() {
            let key = p.ident()?;
            if key == "map" {
                p.expect(Tok::LBrace)?;
                let (mut ratio, mut translate) = (None, None);
                loop {
                    if p.peek() == Some(&Tok::RBrace) {
                        p.next();
                        break;
                    }
                    let k = p.ident()?;
                    p.expect(Tok::Eq)?;
                    let v = p.value()?;
                    match (k.as_str(), v) {
                        ("ratio", Value::Atom(s)) => ratio = Some(rational(&p, &s)?),
                        ("translate", Value::List(items)) if items.len() == 2 => {
                            translate = Some((rational(&p, &items[0])?, rational(&p, &items[1])?))
                        }
                        ("rotation", Value::Atom(s)) => {
                            if !rational(&p, &s)?.is_zero() {
                                return Err(p.err("rotations are not supported (homotheties only)"));
                            }
                        }
                        (k, v) => return Err(p.err(format!("unexpected map entry {k} = {v:?}"))),
                    }
                    if p.peek() == Some(&Tok::Comma) {
                        p.next();
                    }
                }
                let ratio = ratio.ok_or_else(|| p.err("map without ratio"))?;
                let translate = translate.ok_or_else(|| p.err("map without translate"))?;
                maps.push(Similitude2D::new(ratio, translate).map_err(|e| p.err(e.to_string()))?);
                continue;
            }
            p.expect(Tok::Eq)?;
            let v = p.value()?;
            match (key.as_str(), v) {
                ("name", Value::Atom(s)) => name = Some(s),
                ("base", Value::List(items)) if items.len() == 4 => {
                    let r: Vec<Rational> = items.iter().map(|s| rational(&p, s)).collect::<Result<_>>()?;
                    let [x0, y0, x1, y1]: [Rational; 4] = r.try_into().expect("length checked");
                    base = Some(Rect::new(x0, y0, x1, y1).map_err(|e| p.err(e.to_string()))?);
                }
                ("symmetry", Value::Atom(s)) => {
                    symmetry = match s.as_str() {
                        "none" => Symmetry::None,
                        "dihedral4" => Symmetry::Dihedral4,
                        other => return Err(p.err(format!("unknown symmetry {other:?}"))),
                    }
                }
                (k, v) => return Err(p.err(format!("unexpected entry {k} = {v:?}"))),
            }
        }
        let name = name.unwrap_or_else(|| "custom".to_string());
        let base = base.unwrap_or_else(Rect::unit_square);
        Ifs2D::with_symmetry(name, maps, base, symmetry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_corner_preset() {
        let k = Ifs2D::preset("four-corner").unwrap();
        assert_eq!(k.len(), 4);
        assert_eq!(k.ratio_sum(), &Rational::one());
        assert!(k.convexity_applies());
        let t: Vec<_> = k.maps().iter().map(|m| m.translation().clone()).collect();
        let q = Rational::frac;
        assert_eq!(
            t,
            vec![
                (q(0, 1), q(0, 1)),
                (q(0, 1), q(3, 4)),
                (q(3, 4), q(0, 1)),
                (q(3, 4), q(3, 4))
            ]
        );
        assert!(k.maps().iter().all(|m| m.ratio() == &q(1, 4)));
        assert_eq!(k.symmetry(), Symmetry::Dihedral4);
    }

    #[test]
    fn sparse_corner_dimension() {
        let s = Ifs2D::preset("sparse-corner(8)").unwrap();
        assert!((s.similarity_dimension() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(Ifs2D::preset("sparse-corner-8").unwrap(), s);
        assert!(!s.convexity_applies());
        assert!(Ifs2D::preset("sparse-corner-4").is_err());
        assert!(Ifs2D::preset("sparse-corner-3").is_err());
    }

    #[test]
    fn gasket_flags() {
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        assert!(!g.convexity_applies());
        assert_eq!(g.ratio_sum(), &Rational::frac(3, 2));
        let report = g.validate(3);
        assert!(report.nesting_pass);
        assert!((g.similarity_dimension() - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(Ifs2D::preset("koch"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn validate_four_corner() {
        let r = Ifs2D::preset("four-corner").unwrap().validate(4);
        assert!(r.nesting_pass && r.planar_nesting);
        assert_eq!(r.projected_nesting.len(), 8);
        assert_eq!(r.cylinder_counts.last().unwrap(), &(4, "256".to_string()));
    }

    #[test]
    fn validate_reports_nesting_failure() {
        let h = Rational::frac(1, 2);
        let maps = vec![
            Similitude2D::new(h.clone(), (Rational::zero(), Rational::zero())).unwrap(),
            Similitude2D::new(h, (Rational::frac(3, 4), Rational::zero())).unwrap(),
        ];
        let ifs = Ifs2D::new("overhang", maps, Rect::unit_square()).unwrap();
        let r = ifs.validate(2);
        assert!(!r.nesting_pass);
        assert!(!r.planar_nesting);
        assert!(r.convexity_applies);
    }

    #[test]
    fn rejects_bad_ratio_and_single_map() {
        assert!(Similitude2D::new(Rational::one(), (Rational::zero(), Rational::zero())).is_err());
        assert!(Similitude2D::new(Rational::zero(), (Rational::zero(), Rational::zero())).is_err());
        let m = Similitude2D::new(Rational::frac(1, 2), (Rational::zero(), Rational::zero())).unwrap();
        assert!(Ifs2D::new("one", vec![m], Rect::unit_square()).is_err());
    }

    #[test]
    fn false_symmetry_declaration_rejected() {
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        let err = Ifs2D::with_symmetry("g", g.maps().to_vec(), g.base().clone(), Symmetry::Dihedral4);
        assert!(err.is_err());
    }

    #[test]
    fn config_round_trip_presets() {
        for name in ["four-corner", "sparse-corner-8", "sierpinski-gasket"] {
            let ifs = Ifs2D::preset(name).unwrap();
            let text = ifs.to_config_string();
            assert_eq!(Ifs2D::from_config_str(&text).unwrap(), ifs, "{text}");
        }
    }

    #[test]
    fn config_accepts_decimals_and_comments() {
        let text = r#"
            # a comment
            name = "quarter"
            base = [0, 0, 1, 1]
            map { ratio = 0.5, translate = [0, 0] }   # trailing
            map {
                ratio = "1/2",
                translate = ["0.5", "1/2"],
                rotation = "0"
            }
        "#;
        let ifs = Ifs2D::from_config_str(text).unwrap();
        assert_eq!(ifs.name(), "quarter");
        assert_eq!(ifs.maps()[1].translation().0, Rational::frac(1, 2));
        assert!(ifs.convexity_applies());
    }

    #[test]
    fn config_errors_carry_line() {
        let text = "name = \"x\"\nmap { ratio = \"1/2\", translate = [\"0\"] }\n";
        match Ifs2D::from_config_str(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "map { ratio = \"1/2\", translate = [0, 0], rotation = \"1/4\" }";
        assert!(Ifs2D::from_config_str(text).is_err());
        assert!(Ifs2D::from_config_str("base = [0, 0, 1]").is_err());
    }
}
