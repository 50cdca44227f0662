use std::time::{Duration, Instant};

use proptest::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robogym::model::{
    parse_sdf, parse_sdf_bytes, serialize_sdf, validate, Joint, JointKind, JointLimits, Link,
    RobotModel, CARTPOLE_SDF, PENDULUM_SDF,
};

#[test]
fn shipped_models_parse_without_diagnostics() {
    for text in [CARTPOLE_SDF, PENDULUM_SDF] {
        let parsed = parse_sdf(text).unwrap();
        assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
        assert!(validate(&parsed.model).is_empty());
    }
}

#[test]
fn shipped_cartpole_shape() {
    let m = parse_sdf(CARTPOLE_SDF).unwrap().model;
    assert_eq!(m.base_link, "rail");
    assert!(m.fixed_base);
    assert_eq!(m.dof(), 2);
    assert_eq!(m.link("pole").unwrap().com_offset, 0.5);
    let pole = m.joint("pole_joint").unwrap();
    assert!(pole.limits.is_unbounded());
    assert_eq!(pole.axis, Some([0.0, 1.0, 0.0]));
}

fn name() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_&<>'\"-]{0,8}"
}

fn real(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_filter("nonzero", |v: &f64| *v != 0.0)
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    prop_oneof![
        Just([1.0, 0.0, 0.0]),
        Just([0.0, 1.0, 0.0]),
        Just([0.0, 0.0, -1.0]),
        (real(-1.0, 1.0), real(-1.0, 1.0), real(-1.0, 1.0)).prop_map(|(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            [x / n, y / n, z / n]
        }),
    ]
}

fn limits() -> impl Strategy<Value = JointLimits> {
    let bound = prop_oneof![Just(f64::INFINITY), real(0.01, 500.0)];
    (
        prop_oneof![Just(None), (real(-3.0, 0.0), real(0.0, 3.0)).prop_map(Some)],
        bound.clone(),
        bound,
    )
        .prop_map(|(range, effort, velocity)| {
            let (lower, upper) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            JointLimits {
                lower,
                upper,
                effort,
                velocity,
            }
        })
}

/// A valid tree-shaped model with link 0 as base.
fn model() -> impl Strategy<Value = RobotModel> {
    (1usize..7).prop_flat_map(|n| {
        let links = prop::collection::vec(
            (name(), real(0.001, 50.0), [real(1e-6, 5.0), real(1e-6, 5.0), real(1e-6, 5.0)], prop_oneof![Just(0.0), real(-2.0, 2.0)]),
            n,
        );
        let joints = prop::collection::vec(
            (
                name(),
                prop_oneof![
                    Just(JointKind::Revolute),
                    Just(JointKind::Prismatic),
                    Just(JointKind::Fixed)
                ],
                any::<prop::sample::Index>(),
                axis(),
                limits(),
            ),
            n - 1,
        );
        (name(), links, joints, any::<bool>())
    })
    .prop_map(|(model_name, links, joints, fixed_base)| {
        let links: Vec<Link> = links
            .into_iter()
            .enumerate()
            .map(|(i, (n, mass, inertia_diag, com_offset))| Link {
                name: format!("{n}{i}"),
                mass,
                inertia_diag,
                com_offset,
            })
            .collect();
        let joints = joints
            .into_iter()
            .enumerate()
            .map(|(i, (n, kind, parent, axis, limits))| {
                let child = i + 1;
                let fixed = kind == JointKind::Fixed;
                Joint {
                    name: format!("{n}{i}"),
                    kind,
                    parent: links[parent.index(child)].name.clone(),
                    child: links[child].name.clone(),
                    axis: (!fixed).then_some(axis),
                    limits: if fixed { JointLimits::UNBOUNDED } else { limits },
                }
            })
            .collect();
        RobotModel {
            name: model_name,
            base_link: links[0].name.clone(),
            links,
            joints,
            fixed_base,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_parse_round_trip(m in model()) {
        prop_assert!(validate(&m).is_empty(), "{:?}", validate(&m));
        let text = serialize_sdf(&m);
        let parsed = parse_sdf(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(parsed.warnings.is_empty());
        prop_assert_eq!(&parsed.model, &m);
        prop_assert_eq!(serialize_sdf(&parsed.model), text);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let _ = parse_sdf_bytes(&bytes);
    }

    #[test]
    fn mutated_models_never_panic(m in model(), cut in any::<prop::sample::Index>(), byte in any::<u8>()) {
        let mut text = serialize_sdf(&m).into_bytes();
        let at = cut.index(text.len());
        text[at] = byte;
        let _ = parse_sdf_bytes(&text);
        text.truncate(at);
        let _ = parse_sdf_bytes(&text);
    }
}

#[test]
fn zero_mass_is_reported_with_location() {
    let text = CARTPOLE_SDF.replace("<mass>1.0</mass>", "<mass>0</mass>");
    let err = parse_sdf(&text).unwrap_err();
    let d = &err.diagnostics()[0];
    assert_eq!(d.rule, "mass > 0");
    assert!(d.location.is_some());
    assert!(d.render("cartpole.sdf").starts_with("cartpole.sdf:"));
}

/// Fuzz corpus: mutations of the shipped models plus large and deeply nested
/// inputs up to 1 MiB. Every input must return promptly.
#[test]
fn fuzz_corpus_is_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut corpus: Vec<Vec<u8>> = Vec::new();
    for base in [CARTPOLE_SDF, PENDULUM_SDF] {
        for _ in 0..300 {
            let mut b = base.as_bytes().to_vec();
            for _ in 0..rng.random_range(1..8) {
                let i = rng.random_range(0..b.len());
                match rng.random_range(0..3) {
                    0 => b[i] = rng.random(),
                    1 => {
                        b.remove(i);
                    }
                    _ => {
                        let j = rng.random_range(0..b.len());
                        let chunk: Vec<u8> = b[i.min(j)..i.max(j)].to_vec();
                        b.splice(i..i, chunk);
                    }
                }
            }
            corpus.push(b);
        }
    }
    let mut noise = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut noise);
    corpus.push(noise);
    corpus.push(format!("<sdf>{}</sdf>", "<a>".repeat(200_000)).into_bytes());
    let mut many = String::from("<sdf version=\"1.7\"><model name=\"m\">");
    while many.len() < (1 << 20) - 200 {
        let i = many.len();
        many.push_str(&format!("<link name=\"l{i}\"><inertial><mass>1</mass></inertial></link>"));
    }
    many.push_str("</model></sdf>");
    corpus.push(many.into_bytes());
    let mut chain = String::from("<sdf version=\"1.7\"><model name=\"m\">");
    let mut i = 0;
    while chain.len() < (1 << 20) - 400 {
        chain.push_str(&format!(
            "<link name=\"l{i}\"><inertial><mass>1</mass><inertia><ixx>1</ixx><iyy>1</iyy><izz>1</izz></inertia></inertial></link>"
        ));
        if i > 0 {
            chain.push_str(&format!(
                "<joint name=\"j{i}\" type=\"revolute\"><parent>l{}</parent><child>l{i}</child></joint>",
                i - 1
            ));
        }
        i += 1;
    }
    chain.push_str("</model></sdf>");
    corpus.push(chain.into_bytes());

    for input in &corpus {
        assert!(input.len() <= 1 << 20);
        let t = Instant::now();
        let _ = parse_sdf_bytes(input);
        assert!(t.elapsed() < Duration::from_secs(5), "slow input of {} bytes", input.len());
    }
}
