use std::fmt::Write;

use super::{JointKind, RobotModel};

/// Canonical SDF text for a model. Reals use shortest round-trip formatting,
/// so `parse_sdf(&serialize_sdf(m))` reproduces `m` exactly. Unbounded limits
/// and fixed-joint axes are omitted.
pub fn serialize_sdf(model: &RobotModel) -> String {
    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = write_model(&mut s, model);
    s
}

fn write_model(s: &mut String, model: &RobotModel) -> std::fmt::Result {
    writeln!(s, "<?xml version=\"1.0\"?>")?;
    writeln!(s, "<sdf version=\"1.7\">")?;
    writeln!(s, "  <model name=\"{}\">", escape(&model.name))?;
    writeln!(s, "    <static>{}</static>", model.fixed_base)?;
    for link in &model.links {
        let [ixx, iyy, izz] = link.inertia_diag;
        writeln!(s, "    <link name=\"{}\">", escape(&link.name))?;
        writeln!(s, "      <inertial>")?;
        writeln!(s, "        <mass>{}</mass>", link.mass)?;
        if link.com_offset != 0.0 {
            writeln!(s, "        <pose>0 0 {} 0 0 0</pose>", link.com_offset)?;
        }
        writeln!(s, "        <inertia>")?;
        writeln!(s, "          <ixx>{ixx}</ixx>")?;
        writeln!(s, "          <iyy>{iyy}</iyy>")?;
        writeln!(s, "          <izz>{izz}</izz>")?;
        writeln!(s, "        </inertia>")?;
        writeln!(s, "      </inertial>")?;
        writeln!(s, "    </link>")?;
    }
    for joint in &model.joints {
        writeln!(
            s,
            "    <joint name=\"{}\" type=\"{}\">",
            escape(&joint.name),
            joint.kind.as_str()
        )?;
        writeln!(s, "      <parent>{}</parent>", escape(&joint.parent))?;
        writeln!(s, "      <child>{}</child>", escape(&joint.child))?;
        if let (Some([x, y, z]), false) = (joint.axis, joint.kind == JointKind::Fixed) {
            writeln!(s, "      <axis>")?;
            writeln!(s, "        <xyz>{x} {y} {z}</xyz>")?;
            let lim = joint.limits;
            let entries = [
                ("lower", lim.lower),
                ("upper", lim.upper),
                ("effort", lim.effort),
                ("velocity", lim.velocity),
            ];
            let bounded: Vec<_> = entries.iter().filter(|(_, v)| v.is_finite()).collect();
            if !bounded.is_empty() {
                writeln!(s, "        <limit>")?;
                for (tag, v) in bounded {
                    writeln!(s, "          <{tag}>{v}</{tag}>")?;
                }
                writeln!(s, "        </limit>")?;
            }
            writeln!(s, "      </axis>")?;
        }
        writeln!(s, "    </joint>")?;
    }
    writeln!(s, "  </model>")?;
    writeln!(s, "</sdf>")
}

fn escape(text: &str) -> String {
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
