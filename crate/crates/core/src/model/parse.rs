use std::cell::Cell;
use std::collections::{HashMap, HashSet};

use roxmltree::{Document, Node};

use super::{
    validate::validate, Diagnostic, Entity, Joint, JointKind, JointLimits, Link, Location,
    ModelError, RobotModel,
};

/// A successfully parsed model together with the non-fatal diagnostics
/// (ignored elements) produced while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub model: RobotModel,
    pub warnings: Vec<Diagnostic>,
}

/// Parses raw bytes. Invalid UTF-8 is reported like any other syntax error.
pub fn parse_sdf_bytes(bytes: &[u8]) -> Result<Parsed, ModelError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_sdf(text),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
            let col = prefix.iter().rev().take_while(|&&b| b != b'\n').count() as u32 + 1;
            Err(ModelError::Invalid(vec![Diagnostic::error(
                "utf-8",
                format!("syntax error: invalid UTF-8: {e}"),
            )
            .at(Location { line, col })]))
        }
    }
}

/// Parses an SDF-subset document and validates the resulting model.
///
/// Total on arbitrary input: every failure is returned as diagnostics
/// carrying a source location.
pub fn parse_sdf(text: &str) -> Result<Parsed, ModelError> {
    if let Some(d) = nesting_overflow(text) {
        return Err(ModelError::Invalid(vec![d]));
    }
    let doc = match Document::parse(text) {
        Ok(doc) => doc,
        Err(e) => {
            let pos = e.pos();
            return Err(ModelError::Invalid(vec![Diagnostic::error(
                "well-formed xml",
                format!("syntax error: {e}"),
            )
            .at(Location {
                line: pos.row,
                col: pos.col,
            })]));
        }
    };

    let mut reader = Reader {
        doc: &doc,
        text,
        cursor: Cell::new(Cursor::START),
        diags: Vec::new(),
        positions: HashMap::new(),
    };
    let model = reader.read_document();
    let Reader {
        mut diags,
        positions,
        ..
    } = reader;

    if let Some(model) = model.filter(|_| !diags.iter().any(Diagnostic::is_error)) {
        for mut d in validate(&model) {
            if let Some(loc) = d.entity.as_ref().and_then(|e| positions.get(e)) {
                d.location = Some(*loc);
            }
            diags.push(d);
        }
        if !diags.iter().any(Diagnostic::is_error) {
            return Ok(Parsed {
                model,
                warnings: diags,
            });
        }
    }
    diags.sort_by_key(|d| (d.location.is_none(), d.location));
    Err(ModelError::Invalid(diags))
}

/// Byte offset with its 1-based line and column (in characters).
#[derive(Debug, Clone, Copy)]
struct Cursor {
    offset: usize,
    line: u32,
    col: u32,
}

impl Cursor {
    const START: Cursor = Cursor {
        offset: 0,
        line: 1,
        col: 1,
    };
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    text: &'input str,
    /// Last computed position; nodes are mostly visited in document order,
    /// so locating the next one only scans the text in between.
    cursor: Cell<Cursor>,
    diags: Vec<Diagnostic>,
    positions: HashMap<Entity, Location>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn loc(&self, node: Node) -> Location {
        let target = node.range().start.min(self.text.len());
        let mut c = self.cursor.get();
        if target < c.offset {
            c = Cursor::START;
        }
        for ch in self.text[c.offset..target].chars() {
            if ch == '\n' {
                c.line += 1;
                c.col = 1;
            } else {
                c.col += 1;
            }
        }
        c.offset = target;
        self.cursor.set(c);
        Location {
            line: c.line,
            col: c.col,
        }
    }

    fn error(&mut self, node: Node, rule: &str, message: String) {
        let d = Diagnostic::error(rule, message).at(self.loc(node));
        self.diags.push(d);
    }

    fn ignore(&mut self, node: Node, context: &str) {
        let d = Diagnostic::warning(
            "supported element",
            format!(
                "unsupported element <{}> in <{context}> ignored",
                node.tag_name().name()
            ),
        )
        .at(self.loc(node));
        self.diags.push(d);
    }

    fn read_document(&mut self) -> Option<RobotModel> {
        let root = self.doc.root_element();
        match root.tag_name().name() {
            "model" => self.read_model(root),
            "sdf" => {
                let mut models = Vec::new();
                for child in root.children().filter(Node::is_element) {
                    if child.tag_name().name() == "model" {
                        models.push(child);
                    } else {
                        self.ignore(child, "sdf");
                    }
                }
                match models.as_slice() {
                    [model] => self.read_model(*model),
                    [] => {
                        self.error(root, "one model", "document contains no <model>".into());
                        None
                    }
                    [_, second, ..] => {
                        self.error(
                            *second,
                            "one model",
                            "document contains more than one <model>".into(),
                        );
                        None
                    }
                }
            }
            other => {
                self.error(
                    root,
                    "root element",
                    format!("expected <sdf> or <model> root element, found <{other}>"),
                );
                None
            }
        }
    }

    fn read_model(&mut self, node: Node) -> Option<RobotModel> {
        let name = self.required_attr(node, "name", "model");
        let mut links = Vec::new();
        let mut joints = Vec::new();
        let mut fixed_base = true;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "link" => {
                    if let Some(link) = self.read_link(child) {
                        links.push(link);
                    }
                }
                "joint" => {
                    if let Some(joint) = self.read_joint(child) {
                        joints.push(joint);
                    }
                }
                "static" => {
                    if let Some(v) = self.bool_text(child) {
                        fixed_base = v;
                    }
                }
                _ => self.ignore(child, "model"),
            }
        }
        let name = name?;
        let loc = self.loc(node);
        self.positions.insert(Entity::Model(name.clone()), loc);
        let children: HashSet<&str> = joints.iter().map(|j: &Joint| j.child.as_str()).collect();
        let base_link = links
            .iter()
            .find(|l| !children.contains(l.name.as_str()))
            .or(links.first())
            .map(|l| l.name.clone())
            .unwrap_or_default();
        Some(RobotModel {
            name,
            links,
            joints,
            base_link,
            fixed_base,
        })
    }

    fn read_link(&mut self, node: Node) -> Option<Link> {
        let name = self.required_attr(node, "name", "link")?;
        let loc = self.loc(node);
        self.positions.entry(Entity::Link(name.clone())).or_insert(loc);
        let mut inertial = None;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "inertial" => inertial = Some(child),
                _ => self.ignore(child, "link"),
            }
        }
        let Some(inertial) = inertial else {
            self.error(
                node,
                "inertial required",
                format!("link '{name}' is missing <inertial> (mass and inertia)"),
            );
            return None;
        };

        let mut mass = None;
        let mut inertia = None;
        let mut com_offset = 0.0;
        for child in inertial.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "mass" => mass = self.number_text(child),
                "inertia" => inertia = self.read_inertia(child, &name),
                "pose" => {
                    if let Some(z) = self.read_com_pose(child, &name) {
                        com_offset = z;
                    }
                }
                _ => self.ignore(child, "inertial"),
            }
        }
        if !has_child(inertial, "mass") {
            self.error(
                inertial,
                "mass required",
                format!("link '{name}' is missing <mass>"),
            );
        }
        if !has_child(inertial, "inertia") {
            self.error(
                inertial,
                "inertia required",
                format!("link '{name}' is missing <inertia>"),
            );
        }
        Some(Link {
            name,
            mass: mass?,
            inertia_diag: inertia?,
            com_offset,
        })
    }

    fn read_inertia(&mut self, node: Node, link: &str) -> Option<[f64; 3]> {
        let mut diag = [None; 3];
        for child in node.children().filter(Node::is_element) {
            let tag = child.tag_name().name();
            match tag {
                "ixx" => diag[0] = self.number_text(child),
                "iyy" => diag[1] = self.number_text(child),
                "izz" => diag[2] = self.number_text(child),
                "ixy" | "ixz" | "iyz" => {
                    if let Some(v) = self.number_text(child) {
                        if v != 0.0 {
                            self.error(
                                child,
                                "diagonal inertia",
                                format!(
                                    "link '{link}': off-diagonal inertia <{tag}> must be 0, got {v}"
                                ),
                            );
                        }
                    }
                }
                _ => self.ignore(child, "inertia"),
            }
        }
        for (tag, value) in ["ixx", "iyy", "izz"].iter().zip(&diag) {
            if value.is_none() && !has_child(node, tag) {
                self.error(
                    node,
                    "inertia required",
                    format!("link '{link}' is missing <{tag}>"),
                );
            }
        }
        Some([diag[0]?, diag[1]?, diag[2]?])
    }

    fn read_com_pose(&mut self, node: Node, link: &str) -> Option<f64> {
        let values = self.numbers_text(node, 6)?;
        let off_axis = values
            .iter()
            .enumerate()
            .any(|(i, &v)| i != 2 && v != 0.0);
        if off_axis {
            self.error(
                node,
                "z-only com offset",
                format!(
                    "link '{link}': only a z translation is supported in <inertial><pose>"
                ),
            );
            return None;
        }
        Some(values[2])
    }

    fn read_joint(&mut self, node: Node) -> Option<Joint> {
        let name = self.required_attr(node, "name", "joint");
        let kind_text = self.required_attr(node, "type", "joint");
        let name = name?;
        let loc = self.loc(node);
        self.positions.entry(Entity::Joint(name.clone())).or_insert(loc);
        let kind_text = kind_text?;
        let kind = JointKind::from_sdf(&kind_text);
        if kind.is_none() {
            self.error(
                node,
                "supported joint type",
                format!("unsupported joint type \"{kind_text}\" for joint '{name}'"),
            );
        }

        let mut parent = None;
        let mut child_link = None;
        let mut axis = None;
        let mut limits = JointLimits::UNBOUNDED;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "parent" => parent = Some(text_of(child)),
                "child" => child_link = Some(text_of(child)),
                "axis" => {
                    let (xyz, lim) = self.read_axis(child);
                    axis = Some(xyz.unwrap_or([0.0, 0.0, 1.0]));
                    limits = lim;
                }
                _ => self.ignore(child, "joint"),
            }
        }
        if parent.is_none() {
            self.error(
                node,
                "parent required",
                format!("joint '{name}' is missing <parent>"),
            );
        }
        if child_link.is_none() {
            self.error(
                node,
                "child required",
                format!("joint '{name}' is missing <child>"),
            );
        }
        let kind = kind?;
        if kind != JointKind::Fixed && axis.is_none() {
            // SDF default axis.
            axis = Some([0.0, 0.0, 1.0]);
        }
        Some(Joint {
            name,
            kind,
            parent: parent?,
            child: child_link?,
            axis,
            limits,
        })
    }

    fn read_axis(&mut self, node: Node) -> (Option<[f64; 3]>, JointLimits) {
        let mut xyz = None;
        let mut limits = JointLimits::UNBOUNDED;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "xyz" => {
                    xyz = self.numbers_text(child, 3).map(|v| [v[0], v[1], v[2]]);
                }
                "limit" => {
                    for l in child.children().filter(Node::is_element) {
                        let slot = match l.tag_name().name() {
                            "lower" => &mut limits.lower,
                            "upper" => &mut limits.upper,
                            "effort" => &mut limits.effort,
                            "velocity" => &mut limits.velocity,
                            _ => {
                                self.ignore(l, "limit");
                                continue;
                            }
                        };
                        if let Some(v) = self.number_text(l) {
                            *slot = v;
                        }
                    }
                }
                _ => self.ignore(child, "axis"),
            }
        }
        (xyz, limits)
    }

    fn required_attr(&mut self, node: Node, attr: &str, element: &str) -> Option<String> {
        match node.attribute(attr) {
            Some(v) => Some(v.to_string()),
            None => {
                self.error(
                    node,
                    "required attribute",
                    format!("<{element}> is missing the '{attr}' attribute"),
                );
                None
            }
        }
    }

    fn number_text(&mut self, node: Node) -> Option<f64> {
        let text = text_of(node);
        match text.parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(
                    node,
                    "number",
                    format!(
                        "<{}> expects a number, got {text:?}",
                        node.tag_name().name()
                    ),
                );
                None
            }
        }
    }

    fn numbers_text(&mut self, node: Node, count: usize) -> Option<Vec<f64>> {
        let text = text_of(node);
        let values: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
        match values {
            Ok(v) if v.len() == count => Some(v),
            _ => {
                self.error(
                    node,
                    "number list",
                    format!(
                        "<{}> expects {count} numbers, got {text:?}",
                        node.tag_name().name()
                    ),
                );
                None
            }
        }
    }

    fn bool_text(&mut self, node: Node) -> Option<bool> {
        match text_of(node).as_str() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            other => {
                self.error(
                    node,
                    "boolean",
                    format!("<static> expects true or false, got {other:?}"),
                );
                None
            }
        }
    }
}

/// Deepest element nesting accepted. The XML backend recurses per level, so
/// pathological inputs are rejected before they reach it.
pub const MAX_NESTING: usize = 256;

/// Conservative scan for element nesting deeper than [`MAX_NESTING`].
/// Comments, CDATA, processing instructions and quoted attribute values are
/// skipped; it never undercounts well-formed input.
fn nesting_overflow(text: &str) -> Option<Diagnostic> {
    let bytes = text.as_bytes();
    let skip_to = |from: usize, end: &[u8]| {
        bytes[from..]
            .windows(end.len())
            .position(|w| w == end)
            .map_or(bytes.len(), |p| from + p + end.len())
    };
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let rest = &bytes[i..];
        if rest.starts_with(b"<!--") {
            i = skip_to(i + 4, b"-->");
        } else if rest.starts_with(b"<![CDATA[") {
            i = skip_to(i + 9, b"]]>");
        } else if rest.starts_with(b"<?") {
            i = skip_to(i + 2, b"?>");
        } else if rest.starts_with(b"<!") || rest.starts_with(b"</") {
            depth = depth.saturating_sub(usize::from(rest[1] == b'/'));
            i = skip_to(i + 2, b">");
        } else {
            // Start tag: find its end outside quotes.
            let mut j = i + 1;
            let mut quote = None;
            while j < bytes.len() {
                match (quote, bytes[j]) {
                    (None, q @ (b'"' | b'\'')) => quote = Some(q),
                    (Some(q), c) if c == q => quote = None,
                    (None, b'>') => break,
                    _ => {}
                }
                j += 1;
            }
            if !(j < bytes.len() && bytes[j - 1] == b'/') {
                depth += 1;
                if depth > MAX_NESTING {
                    let prefix = &text[..i];
                    let line = prefix.matches('\n').count() as u32 + 1;
                    let col = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
                    return Some(
                        Diagnostic::error(
                            "nesting depth",
                            format!("syntax error: elements nested deeper than {MAX_NESTING} levels"),
                        )
                        .at(Location { line, col }),
                    );
                }
            }
            i = j + 1;
        }
    }
    None
}

fn text_of(node: Node) -> String {
    node.text().unwrap_or("").trim().to_string()
}

fn has_child(node: Node, tag: &str) -> bool {
    node.children()
        .any(|c| c.is_element() && c.tag_name().name() == tag)
}
