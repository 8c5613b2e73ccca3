use dlo_core::geometry::Roi;
use dlo_core::metrics::iou;
use dlo_core::sim::*;
use dlo_core::{Point, PolylineCurve};
use proptest::prelude::*;

fn world(contact: Option<(f64, f64)>) -> WorldState {
    let curve = PolylineCurve::new(vec![Point::new(-0.2, 0.12), Point::new(0.2, 0.12)]).unwrap();
    let rope = Rope::from_curve(&curve, 64, 0.01).unwrap();
    let contacts = contact.map(|(x, y)| Contact::new(x, y, 0.04)).into_iter().collect();
    WorldState::new(rope, contacts, Workspace::default_pair(), SimConfig::default()).unwrap()
}

fn penetration(w: &WorldState) -> f64 {
    w.rope
        .nodes
        .iter()
        .flat_map(|p| {
            w.contacts
                .iter()
                .map(move |c| c.radius + w.rope.half_thickness - (p - c.center).norm())
        })
        .fold(0.0, f64::max)
}

fn drag(node: usize, arm: Arm, to: Point, heading: f64) -> ActionPlan {
    let moving = ArmPlan::pick_place(node, vec![Pose::at(to, heading)]);
    match arm {
        Arm::Left => ActionPlan::new(moving, ArmPlan::idle()),
        Arm::Right => ActionPlan::new(ArmPlan::idle(), moving),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn drags_conserve_length_and_respect_contacts(
        node in 0usize..64,
        tx in -0.25..0.25f64,
        ty in 0.05..0.4f64,
        heading in -3.1..3.1f64,
        cx in -0.1..0.1f64,
    ) {
        let w = world(Some((cx, 0.25)));
        let arm = if w.rope.nodes[node].x < 0.0 { Arm::Left } else { Arm::Right };
        let Ok(exec) = execute(&w, &drag(node, arm, Point::new(tx, ty), heading)) else {
            return Ok(());
        };
        prop_assert!(exec.world.rope.length_drift() < 0.01);
        prop_assert!(exec.max_drift < 0.01);
        prop_assert!(penetration(&exec.world) < 1e-4);
        if !exec.taut_stop {
            prop_assert!((exec.world.rope.nodes[node] - Point::new(tx, ty)).norm() < 1e-3);
        }
    }

    #[test]
    fn relax_is_a_fixpoint_on_settled_rope(dx in -0.05..0.05f64, dy in -0.05..0.05f64) {
        let mut w = world(Some((0.0, 0.2)));
        for p in w.rope.nodes.iter_mut() {
            p.x += dx;
            p.y += dy;
        }
        let once = relax(&w);
        let twice = relax(&once);
        prop_assert!(penetration(&once) < 1e-4);
        for (a, b) in once.rope.nodes.iter().zip(&twice.rope.nodes) {
            prop_assert!((a - b).norm() < 1e-4);
        }
    }
}

#[test]
fn stepping_is_bit_identical() {
    let w = world(Some((0.0, 0.2)));
    let plan = ActionPlan::new(
        ArmPlan::pick_place(0, vec![Pose::new(-0.15, 0.25, 0.0), Pose::new(-0.1, 0.3, 0.3)]),
        ArmPlan::pick_place(63, vec![Pose::new(0.15, 0.25, 0.0)]),
    );
    let a = execute(&w, &plan).unwrap();
    let b = execute(&w, &plan).unwrap();
    assert_eq!(a, b);
    let bits = |w: &WorldState| {
        w.rope
            .nodes
            .iter()
            .flat_map(|p| [p.x.to_bits(), p.y.to_bits()])
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a.world), bits(&b.world));
}

#[test]
fn dragged_past_a_contact_the_rope_wraps_outside() {
    let w = world(Some((0.0, 0.2)));
    let plan = ActionPlan::new(
        ArmPlan::pick_place(0, vec![Pose::new(-0.12, 0.3, 0.0)]),
        ArmPlan::pick_place(63, vec![Pose::new(0.12, 0.3, 0.0)]),
    );
    let after = apply_action(&w, &plan).unwrap();
    assert!(penetration(&after) < 1e-4);
    let top = after.rope.nodes.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    assert!(top < 0.31, "rope stays below its grasps: {top}");
    let hugging = after
        .rope
        .nodes
        .iter()
        .filter(|p| ((*p - after.contacts[0].center).norm() - 0.05).abs() < 2e-3)
        .count();
    assert!(hugging >= 3, "rope lies on the contact at {hugging} nodes");
}

#[test]
fn observation_of_a_copy_matches() {
    let w = world(None);
    let roi = Roi::new(-0.35, -0.05, 0.35, 0.55);
    let a = observe(&w, roi, 140, 120).unwrap();
    let b = observe(&w.clone(), roi, 140, 120).unwrap();
    assert_eq!(iou(&a, &b).unwrap(), 1.0);
    assert_eq!(observe(&relax(&w), roi, 140, 120).unwrap(), a);
}

#[test]
fn unreachable_and_colliding_moves_are_rejected() {
    let w = world(Some((0.0, 0.25)));
    let far = drag(0, Arm::Left, Point::new(-0.9, 0.1), 0.0);
    assert!(matches!(execute(&w, &far), Err(dlo_core::Error::Reachability { .. })));
    let into = drag(0, Arm::Left, Point::new(0.0, 0.25), 0.0);
    assert!(matches!(execute(&w, &into), Err(dlo_core::Error::Collision { .. })));
}
