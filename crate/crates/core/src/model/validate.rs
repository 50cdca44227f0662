use std::collections::{HashMap, HashSet};

use super::{Diagnostic, Entity, JointKind, RobotModel};

const AXIS_NORM_TOLERANCE: f64 = 1e-9;

/// Checks every model invariant. Returns an empty list iff the model is
/// valid; each diagnostic names the offending entity and the violated rule.
pub fn validate(model: &RobotModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |entity: Entity, rule: &str, message: String| {
        out.push(Diagnostic::error(rule, format!("{entity}: {message}")).on(entity));
    };

    if model.links.is_empty() {
        push(
            Entity::Model(model.name.clone()),
            "at least one link",
            "model has no links".into(),
        );
    }

    let mut link_names = HashSet::new();
    for link in &model.links {
        let entity = || Entity::Link(link.name.clone());
        if !link_names.insert(link.name.as_str()) {
            push(entity(), "unique link name", "duplicate link name".into());
        }
        if !(link.mass > 0.0 && link.mass.is_finite()) {
            push(
                entity(),
                "mass > 0",
                format!("mass > 0 violated (mass = {})", link.mass),
            );
        }
        if !link.inertia_diag.iter().all(|&i| i > 0.0 && i.is_finite()) {
            push(
                entity(),
                "inertia > 0",
                format!(
                    "inertia > 0 violated (diagonal = {:?})",
                    link.inertia_diag
                ),
            );
        }
        if !link.com_offset.is_finite() {
            push(
                entity(),
                "finite com offset",
                format!("centre-of-mass offset must be finite, got {}", link.com_offset),
            );
        }
    }

    let mut joint_names = HashSet::new();
    for joint in &model.joints {
        let entity = || Entity::Joint(joint.name.clone());
        if !joint_names.insert(joint.name.as_str()) {
            push(entity(), "unique joint name", "duplicate joint name".into());
        }
        for (role, link) in [("parent", &joint.parent), ("child", &joint.child)] {
            if !link_names.contains(link.as_str()) {
                push(
                    entity(),
                    "unresolved link reference",
                    format!("unresolved link reference: {role} '{link}' does not exist"),
                );
            }
        }
        if joint.parent == joint.child {
            push(
                entity(),
                "parent != child",
                format!("parent and child are the same link '{}'", joint.parent),
            );
        }
        let lim = &joint.limits;
        if joint.kind == JointKind::Fixed {
            if joint.axis.is_some() || !lim.is_unbounded() {
                push(
                    entity(),
                    "fixed joint has no axis/limits",
                    "fixed joints must not declare an axis or limits".into(),
                );
            }
            continue;
        }
        match joint.axis {
            None => push(entity(), "axis required", "non-fixed joint has no axis".into()),
            Some(axis) => {
                let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= AXIS_NORM_TOLERANCE) {
                    push(
                        entity(),
                        "unit axis",
                        format!("axis {axis:?} is not unit length (norm {norm})"),
                    );
                }
            }
        }
        if !(lim.lower <= lim.upper) {
            push(
                entity(),
                "lower <= upper",
                format!(
                    "limit lower <= upper violated ({} > {})",
                    lim.lower, lim.upper
                ),
            );
        }
        if !(lim.effort > 0.0) {
            push(
                entity(),
                "effort_limit > 0",
                format!("effort limit must be positive, got {}", lim.effort),
            );
        }
        if !(lim.velocity > 0.0) {
            push(
                entity(),
                "velocity_limit > 0",
                format!("velocity limit must be positive, got {}", lim.velocity),
            );
        }
    }

    check_topology(model, &mut out);
    out
}

fn check_topology(model: &RobotModel, out: &mut Vec<Diagnostic>) {
    let links: HashSet<&str> = model.links.iter().map(|l| l.name.as_str()).collect();
    if model.links.is_empty() {
        return;
    }
    if !links.contains(model.base_link.as_str()) {
        let entity = Entity::Model(model.name.clone());
        out.push(
            Diagnostic::error(
                "tree topology",
                format!(
                    "{entity}: topology error: base link '{}' does not exist",
                    model.base_link
                ),
            )
            .on(entity),
        );
        return;
    }

    // Parent joint of each link, for resolved references only.
    let mut parent_of: HashMap<&str, &str> = HashMap::new();
    for joint in &model.joints {
        if !links.contains(joint.parent.as_str()) || !links.contains(joint.child.as_str()) {
            continue;
        }
        if parent_of
            .insert(joint.child.as_str(), joint.parent.as_str())
            .is_some()
        {
            let entity = Entity::Link(joint.child.clone());
            out.push(
                Diagnostic::error(
                    "tree topology",
                    format!("{entity}: topology error: link has more than one parent joint"),
                )
                .on(entity),
            );
        }
    }

    // Verdict per link, shared by every link on the same path to the root.
    let mut memo: HashMap<&str, Option<&'static str>> = HashMap::new();
    for link in &model.links {
        let name = link.name.as_str();
        // Walk towards the root; a tree reaches the base link.
        let mut path = Vec::new();
        let mut on_path = HashSet::new();
        let mut cursor = name;
        let verdict = loop {
            if cursor == model.base_link {
                break if name == model.base_link && parent_of.contains_key(name) {
                    Some("cyclic topology: the base link has a parent joint")
                } else {
                    None
                };
            }
            if let Some(v) = memo.get(cursor) {
                break *v;
            }
            if !on_path.insert(cursor) {
                break Some("cyclic topology");
            }
            path.push(cursor);
            match parent_of.get(cursor) {
                Some(p) => cursor = p,
                None => break Some("disconnected: link is not attached to the base link"),
            }
        };
        for p in path {
            memo.insert(p, verdict);
        }
        if let Some(reason) = verdict {
            let entity = Entity::Link(link.name.clone());
            out.push(
                Diagnostic::error("tree topology", format!("{entity}: topology error: {reason}"))
                    .on(entity),
            );
        }
    }
}
