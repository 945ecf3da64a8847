use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robohead_core::imitation::vote_to_intensity;
use robohead_core::kinematics::{
    decode_set_target, decode_stream, encode_set_target, to_servo_commands, DofId, DofSet, ExpressionTemplate,
    Pose, ServoCalibration, TemplateSet, DOF_COUNT, MAX_TARGET,
};
use robohead_core::{Expression, Mode};

fn random_template(rng: &mut ChaCha8Rng) -> ExpressionTemplate {
    let neutral: [f64; DOF_COUNT] = std::array::from_fn(|_| rng.random_range(0.0..=1.0));
    let mut active = DofSet::EMPTY;
    let mut max = neutral;
    for dof in DofId::ALL {
        if rng.random_bool(0.6) {
            active.insert(dof);
            max[dof.slot()] = rng.random_range(0.0..=1.0);
        }
    }
    let expression = Expression::BASIC[rng.random_range(0..6)];
    ExpressionTemplate::new(expression, Mode::AuBased, Pose::new(neutral).unwrap(), Pose::new(max).unwrap(), active, false)
        .unwrap()
}

#[test]
fn pose_is_a_per_dof_lerp() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let t = random_template(&mut rng);
        let mu = rng.random_range(0.0..=1.0);
        let pose = t.pose_for(mu);
        assert!(pose.is_clean());
        for dof in DofId::ALL {
            let (f0, fmax) = (t.neutral_pose.get(dof), t.max_pose.get(dof));
            let expected = f0 + mu * (fmax - f0);
            assert!((pose.value.get(dof) - expected).abs() < 1e-12);
        }
        assert_eq!(t.pose_for(0.0).value, t.neutral_pose);
        assert_eq!(t.pose_for(1.0).value, t.max_pose);
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn shipped_templates_hit_their_endpoints() {
    let set = TemplateSet::default();
    for t in set.iter() {
        assert_eq!(t.pose_for(0.0).value, set.neutral_pose());
        assert_eq!(t.pose_for(1.0).value, t.max_pose);
    }
}

#[test]
fn out_of_range_intensity_is_clamped_and_reported() {
    let t = TemplateSet::default().get(Expression::Joy, Mode::AuAnimalBased).clone();
    let high = t.pose_for(1.5);
    assert_eq!(high.value, t.max_pose);
    assert!(!high.is_clean());
    let low = t.pose_for(-0.2);
    assert_eq!(low.value, t.neutral_pose);
    assert!(!low.is_clean());
}

#[test]
fn seven_class_vote_table() {
    let expected = [(3, 0.0), (4, 1.0 / 3.0), (5, 2.0 / 3.0), (6, 1.0)];
    for (votes, mu) in expected {
        let got = vote_to_intensity(votes, 7).unwrap();
        assert_eq!(got.value, (2.0 * votes as f64 - 6.0) / 6.0);
        assert!((got.value - mu).abs() < 1e-15);
        assert!(got.is_clean());
    }
    let mut last = -1.0;
    for votes in 0..=6 {
        let mu = vote_to_intensity(votes, 7).unwrap().value;
        assert!(mu >= last);
        assert!((0.0..=1.0).contains(&mu));
        last = mu;
    }
    assert_eq!(vote_to_intensity(0, 7).unwrap().value, 0.0);
    let over = vote_to_intensity(9, 7).unwrap();
    assert_eq!(over.value, 1.0);
    assert!(!over.is_clean());
}

#[test]
fn every_target_round_trips() {
    for channel in [0u8, 5, 11, 127] {
        for target in 0..=MAX_TARGET {
            let bytes = encode_set_target(channel, target).unwrap();
            assert!(bytes[1..].iter().all(|&b| b < 0x80));
            assert_eq!(decode_set_target(&bytes).unwrap(), (channel, target));
        }
    }
    assert!(encode_set_target(0, MAX_TARGET + 1).is_err());
    assert!(encode_set_target(128, 0).is_err());
}

#[test]
fn worked_example() {
    assert_eq!(encode_set_target(0, 6000).unwrap(), [0x84, 0x00, 0x70, 0x2E]);
}

#[test]
fn neutral_pose_streams_to_neutral_pulses() {
    let cal = ServoCalibration::default();
    let stream = to_servo_commands(&Pose::uniform(0.5).unwrap(), &cal);
    assert_eq!(stream.len(), 4 * DOF_COUNT);
    for (slot, (channel, target)) in decode_stream(&stream).unwrap().into_iter().enumerate() {
        let dof = DofId::ALL[slot];
        assert_eq!(channel, cal.channel(dof).channel);
        assert_eq!(target, cal.target(dof, 0.5));
    }
}

proptest! {
    #[test]
    fn servo_targets_are_monotone_and_in_range(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let cal = ServoCalibration::default();
        for dof in DofId::ALL {
            let c = cal.channel(dof);
            let (ta, tb) = (cal.target(dof, a), cal.target(dof, b));
            prop_assert!((c.min.min(c.max)..=c.min.max(c.max)).contains(&ta));
            if a <= b && c.min <= c.max {
                prop_assert!(ta <= tb);
            }
        }
    }
}
