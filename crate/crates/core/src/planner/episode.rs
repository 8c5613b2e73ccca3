//! The replanning loop: observe, detect, pick a primitive, execute, repeat
//! until the observation matches the goal or the step budget runs out.

use serde::Serialize;

use super::benchmarks::{compute_benchmarks, contact_search, order_contacts_along, BenchmarkSet};
use super::primitives::{contact_primitive_step, shape_error, shape_primitive_step, PlanContext, PrimitivePlan};
use super::PlannerConfig;
use crate::geometry::{sample_keypoints, Frame, WorldImageMap, DEFAULT_TAU_U};
use crate::metrics::iou;
use crate::perception::{finetune_keypoints, GeometricDetector, KeypointDetector};
use crate::scenario::{Scenario, GOAL_SPACING};
use crate::sim::{execute, observe, WorldState};
use crate::{BinaryImage, KeypointSequence, Point, PolylineCurve, Result};

/// One primitive execution. IoU and shape error are measured on the
/// observation after the execution; shape error in pixels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub primitive: &'static str,
    /// One-based contact index in goal order, for contact primitives.
    pub contact: Option<usize>,
    pub iou: f64,
    pub delta_p: f64,
    pub plan: String,
    pub substeps: usize,
    pub taut_stop: bool,
    pub max_drift: f64,
}

/// State before a step, with what the planner saw and decided.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeFrame {
    pub world: WorldState,
    /// Detected keypoints, world frame, aligned with the goal keypoints.
    pub keypoints: Vec<Point>,
    pub plan: Option<PrimitivePlan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub scenario: String,
    pub seed: u64,
    pub config: PlannerConfig,
    pub iou_start: f64,
    pub delta_p_start: f64,
    pub iou_final: f64,
    pub delta_p_final: f64,
    pub success: bool,
    pub failure: Option<String>,
    pub steps: Vec<StepRecord>,
    /// Goal keypoints, world frame.
    pub goal_keypoints: Vec<Point>,
    /// Benchmarks for the contacts in goal order.
    pub benchmarks: Option<BenchmarkSet>,
    /// World, detection and plan before each step; the last frame holds the
    /// final world with no keypoints. Frame worlds list contacts in goal
    /// order.
    pub frames: Vec<EpisodeFrame>,
    pub max_drift: f64,
    pub min_clearance: f64,
}

#[derive(Serialize)]
struct Header<'a> {
    record: &'static str,
    scenario: &'a str,
    seed: u64,
    config: &'a PlannerConfig,
    iou: f64,
    delta_p: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    record: &'static str,
    success: bool,
    steps: usize,
    iou: f64,
    delta_p: f64,
    failure: &'a Option<String>,
}

#[derive(Serialize)]
struct StepLine<'a> {
    record: &'static str,
    #[serde(flatten)]
    step: &'a StepRecord,
}

impl EpisodeLog {
    /// One JSON object per line: a header, one line per step, a summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |v: String| {
            out.push_str(&v);
            out.push('\n');
        };
        push(
            serde_json::to_string(&Header {
                record: "start",
                scenario: &self.scenario,
                seed: self.seed,
                config: &self.config,
                iou: self.iou_start,
                delta_p: self.delta_p_start,
            })
            .expect("serializable"),
        );
        for s in &self.steps {
            push(
                serde_json::to_string(&StepLine {
                    record: "step",
                    step: s,
                })
                .expect("serializable"),
            );
        }
        push(
            serde_json::to_string(&Summary {
                record: "end",
                success: self.success,
                steps: self.steps.len(),
                iou: self.iou_final,
                delta_p: self.delta_p_final,
                failure: &self.failure,
            })
            .expect("serializable"),
        );
        out
    }
}

struct Perceived {
    iou: f64,
    /// Image-frame keypoints aligned with the goal's.
    image_kps: Vec<Point>,
    delta_p: f64,
}

fn detect(image: &BinaryImage, m: usize) -> Result<KeypointSequence> {
    let raw = GeometricDetector.detect(image, m)?;
    Ok(finetune_keypoints(&raw, image)?.left_first())
}

fn perceive(world: &WorldState, scenario: &Scenario, goal_image_kps: &[Point]) -> Result<Perceived> {
    let obs = &scenario.observation;
    let image = observe(world, obs.roi(), obs.width, obs.height)?;
    let iou = iou(&image, &scenario.goal.image)?;
    let kps = detect(&image, scenario.m)?.into_points();
    let forward = shape_error(&kps, goal_image_kps)?;
    let rev: Vec<Point> = kps.iter().rev().copied().collect();
    let backward = shape_error(&rev, goal_image_kps)?;
    let (image_kps, delta_p) = if backward < forward {
        (rev, backward)
    } else {
        (kps, forward)
    };
    Ok(Perceived {
        iou,
        image_kps,
        delta_p,
    })
}

/// Run one episode.
///
/// Goal keypoints come from the goal image through the same detector used
/// on observations; if that fails they are sampled from the goal curve.
/// Benchmarks are computed on the goal curve, or on the goal keypoint
/// polyline for image goals. Stops with success as soon as the observation
/// IoU exceeds the threshold.
pub fn run_episode(scenario: &Scenario, config: &PlannerConfig) -> Result<EpisodeLog> {
    let obs = &scenario.observation;
    let map = WorldImageMap::new(obs.roi(), obs.width, obs.height)?;
    let goal_kps = match (detect(&scenario.goal.image, scenario.m), &scenario.goal.curve) {
        (Ok(k), _) => k.to_world(&map),
        (Err(_), Some(curve)) => sample_keypoints(curve, scenario.m, DEFAULT_TAU_U)?.left_first(),
        (Err(e), None) => return Err(e),
    };
    let goal_image_kps = goal_kps.to_image(&map).into_points();
    let goal_kps = goal_kps.into_points();
    let goal_curve: Vec<Point> = match &scenario.goal.curve {
        Some(c) => c.points().to_vec(),
        None => PolylineCurve::from_points_dedup(goal_kps.clone())?.densify(GOAL_SPACING),
    };

    let mut world = scenario.world.clone();
    let order = order_contacts_along(&goal_curve, &world.contacts);
    world.contacts = order.iter().map(|&k| world.contacts[k]).collect();

    let mut log = EpisodeLog {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        config: *config,
        iou_start: 0.0,
        delta_p_start: 0.0,
        iou_final: 0.0,
        delta_p_final: 0.0,
        success: false,
        failure: None,
        steps: Vec::new(),
        goal_keypoints: goal_kps.clone(),
        benchmarks: None,
        frames: Vec::new(),
        max_drift: world.rope.length_drift(),
        min_clearance: world.min_clearance(),
    };
    let benchmarks = match compute_benchmarks(&goal_curve, &goal_kps, &world.contacts, config) {
        Ok(b) => b,
        Err(e) => {
            log.failure = Some(e.to_string());
            return Ok(log);
        }
    };
    log.benchmarks = Some(benchmarks.clone());

    for t in 0..=config.max_steps {
        let seen = match perceive(&world, scenario, &goal_image_kps) {
            Ok(p) => p,
            Err(e) => {
                log.failure = Some(format!("perception failed: {e}"));
                break;
            }
        };
        if t == 0 {
            log.iou_start = seen.iou;
            log.delta_p_start = seen.delta_p;
        }
        if let Some(last) = log.steps.last_mut() {
            last.iou = seen.iou;
            last.delta_p = seen.delta_p;
        }
        log.iou_final = seen.iou;
        log.delta_p_final = seen.delta_p;
        if seen.iou > config.iou_threshold {
            log.success = true;
            break;
        }
        if t == config.max_steps {
            log.failure = Some(format!("IoU {:.3} after {} steps", seen.iou, t));
            break;
        }

        let current: Vec<Point> = KeypointSequence::new(seen.image_kps, Frame::Image)
            .to_world(&map)
            .into_points();
        let state_curve = PolylineCurve::from_points_dedup(current.clone())
            .map(|c| c.densify(GOAL_SPACING))
            .unwrap_or_else(|_| current.clone());
        let ctx = PlanContext {
            world: &world,
            current: &current,
            goal_keypoints: &goal_kps,
            goal_curve: &goal_curve,
            benchmarks: &benchmarks,
            config,
        };
        let planned = match contact_search(&state_curve, &world.contacts, &benchmarks, config) {
            Some(k) => contact_primitive_step(&ctx, k),
            None => shape_primitive_step(&ctx),
        };
        let planned = match planned {
            Ok(p) => p,
            Err(e) => {
                log.frames.push(EpisodeFrame {
                    world: world.clone(),
                    keypoints: current,
                    plan: None,
                });
                log.failure = Some(e.to_string());
                break;
            }
        };
        let exec = match execute(&world, &planned.plan) {
            Ok(x) => x,
            Err(e) => {
                log.failure = Some(format!("execution failed: {e}"));
                break;
            }
        };
        log.steps.push(StepRecord {
            step: t + 1,
            primitive: planned.primitive.name(),
            contact: match planned.primitive {
                super::Primitive::Contact(k) => Some(k + 1),
                super::Primitive::Shape => None,
            },
            iou: seen.iou,
            delta_p: seen.delta_p,
            plan: planned.plan.to_string(),
            substeps: exec.substeps,
            taut_stop: exec.taut_stop,
            max_drift: exec.max_drift,
        });
        log.frames.push(EpisodeFrame {
            world: world.clone(),
            keypoints: current,
            plan: Some(planned),
        });
        log.max_drift = log.max_drift.max(exec.max_drift);
        world = exec.world;
        log.min_clearance = log.min_clearance.min(world.min_clearance());
    }
    log.frames.push(EpisodeFrame {
        world,
        keypoints: Vec::new(),
        plan: None,
    });
    Ok(log)
}
