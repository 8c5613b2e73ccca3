//! Scenario files: contacts, arm workspaces, the goal shape, the initial
//! rope and planner overrides, in TOML with unknown keys rejected.
//!
//! ```toml
//! name = "arch"
//! seed = 1
//!
//! [[contacts]]
//! center = [0.0, 0.25]
//!
//! [goal]
//! kind = "wrap"
//! start = [-0.2, 0.12]
//! end = [0.2, 0.12]
//! wraps = [{ contact = 1, turn = "cw" }]
//!
//! [rope]
//! kind = "random"
//! region = [-0.1, 0.04, 0.1, 0.08]
//! ```

mod wrap;

pub use wrap::{wrap_path, Turn};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{concatenate_segments, fourier_segment, rasterize, transform_curve, FourierSegment, Roi};
use crate::planner::PlannerConfig;
use crate::sim::{Contact, Rope, SimConfig, Workspace, WorldState, DEFAULT_CONTACT_RADIUS};
use crate::{BinaryImage, Error, Point, PolylineCurve, Result, Vec2};

/// Spacing of densely sampled goal curves (m).
pub const GOAL_SPACING: f64 = 0.002;
const PLACEMENT_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Number of keypoints.
    #[serde(default = "default_m")]
    pub keypoints: usize,
    #[serde(default)]
    pub observation: ObservationSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub planner: PlannerOverrides,
    #[serde(default)]
    pub contacts: Vec<ContactSpec>,
    /// Left then right; the default pair when omitted.
    #[serde(default)]
    pub workspaces: Option<[WorkspaceSpec; 2]>,
    pub goal: GoalSpec,
    pub rope: RopeSpec,
}

fn default_m() -> usize {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    /// `[x_min, y_min, x_max, y_max]` in meters.
    pub roi: [f64; 4],
    pub width: usize,
    pub height: usize,
}

impl Default for ObservationSpec {
    fn default() -> Self {
        Self {
            roi: [-0.35, -0.05, 0.35, 0.55],
            width: 140,
            height: 120,
        }
    }
}

impl ObservationSpec {
    pub fn roi(&self) -> Roi {
        let [a, b, c, d] = self.roi;
        Roi::new(a, b, c, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerOverrides {
    pub tau_i: Option<f64>,
    pub tau_e: Option<f64>,
    pub tau_c: Option<f64>,
    pub tau_a: Option<f64>,
    pub tau_b: Option<f64>,
    pub iou_threshold: Option<f64>,
    pub max_steps: Option<usize>,
    pub follow_goal_winding: Option<bool>,
}

impl PlannerOverrides {
    pub fn apply(&self, base: PlannerConfig) -> PlannerConfig {
        PlannerConfig {
            tau_i: self.tau_i.unwrap_or(base.tau_i),
            tau_e: self.tau_e.unwrap_or(base.tau_e),
            tau_c: self.tau_c.unwrap_or(base.tau_c),
            tau_a: self.tau_a.unwrap_or(base.tau_a),
            tau_b: self.tau_b.unwrap_or(base.tau_b),
            iou_threshold: self.iou_threshold.unwrap_or(base.iou_threshold),
            max_steps: self.max_steps.unwrap_or(base.max_steps),
            follow_goal_winding: self.follow_goal_winding.unwrap_or(base.follow_goal_winding),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    pub center: [f64; 2],
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    DEFAULT_CONTACT_RADIUS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapSpec {
    /// One-based contact index.
    pub contact: usize,
    pub turn: Turn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub a0: f64,
    /// `[a_n, b_n]` per harmonic.
    pub harmonics: Vec<[f64; 2]>,
    pub omega: f64,
    pub x_span: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GoalSpec {
    /// Taut rope from `start` around the listed contacts to `end`.
    Wrap {
        start: [f64; 2],
        end: [f64; 2],
        wraps: Vec<WrapSpec>,
    },
    /// Polyline through the given points.
    Points { points: Vec<[f64; 2]> },
    /// Concatenated Fourier segments, rotated then translated.
    Fourier {
        segments: Vec<FourierSpec>,
        #[serde(default)]
        rotation: f64,
        #[serde(default)]
        origin: [f64; 2],
    },
    /// Goal observation as a PBM file, relative to the scenario file.
    Image { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RopeSpec {
    Points {
        points: Vec<[f64; 2]>,
    },
    /// Start on the goal curve itself.
    Goal,
    /// A gently curved rope with its midpoint uniform in `region`, direction
    /// within `max_angle` of the x axis and curvature within `max_bend`
    /// (1/m), drawn from the scenario seed and kept clear of the contacts.
    Random {
        region: [f64; 4],
        #[serde(default = "default_max_angle")]
        max_angle: f64,
        #[serde(default = "default_max_bend")]
        max_bend: f64,
        /// Defaults to the goal curve length.
        #[serde(default)]
        length: Option<f64>,
    },
}

fn default_max_angle() -> f64 {
    0.3
}

fn default_max_bend() -> f64 {
    2.0
}

/// Goal as the planner sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    /// Dense world-frame goal curve, when the scenario states one.
    pub curve: Option<PolylineCurve>,
    pub image: BinaryImage,
}

/// A resolved scenario, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub m: usize,
    pub world: WorldState,
    pub goal: Goal,
    pub observation: ObservationSpec,
    pub planner: PlannerConfig,
}

fn pt(a: [f64; 2]) -> Point {
    Point::new(a[0], a[1])
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config(format!("scenario: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    fn contacts(&self) -> Vec<Contact> {
        self.contacts
            .iter()
            .map(|c| Contact::new(c.center[0], c.center[1], c.radius))
            .collect()
    }

    fn workspaces(&self) -> Result<[Workspace; 2]> {
        match &self.workspaces {
            None => Ok(Workspace::default_pair()),
            Some([l, r]) => Ok([
                Workspace::new(l.center[0], l.center[1], l.r_inner, l.r_outer)?,
                Workspace::new(r.center[0], r.center[1], r.r_inner, r.r_outer)?,
            ]),
        }
    }

    fn goal(&self, contacts: &[Contact], base_dir: &Path) -> Result<Goal> {
        let obs = &self.observation;
        let curve = match &self.goal {
            GoalSpec::Wrap { start, end, wraps } => {
                let wraps = wraps
                    .iter()
                    .map(|w| {
                        w.contact
                            .checked_sub(1)
                            .and_then(|k| contacts.get(k))
                            .map(|c| (*c, w.turn))
                            .ok_or_else(|| config(format!("goal.wraps: no contact {}", w.contact)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(wrap_path(
                    pt(*start),
                    pt(*end),
                    &wraps,
                    self.sim.half_thickness,
                    GOAL_SPACING,
                )?)
            }
            GoalSpec::Points { points } => {
                let c = PolylineCurve::from_points_dedup(points.iter().map(|p| pt(*p)).collect())
                    .map_err(|e| config(format!("goal.points: {e}")))?;
                Some(PolylineCurve::new(c.densify(GOAL_SPACING))?)
            }
            GoalSpec::Fourier {
                segments,
                rotation,
                origin,
            } => {
                let parts = segments
                    .iter()
                    .map(|s| {
                        fourier_segment(&FourierSegment {
                            a0: s.a0,
                            harmonics: s.harmonics.iter().map(|h| (h[0], h[1])).collect(),
                            omega: s.omega,
                            x_span: (s.x_span[0], s.x_span[1]),
                            sample_count: s.samples,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| config(format!("goal.segments: {e}")))?;
                let joined = concatenate_segments(&parts).map_err(|e| config(format!("goal.segments: {e}")))?;
                let placed = transform_curve(&joined, Vec2::new(origin[0], origin[1]), *rotation);
                Some(PolylineCurve::new(placed.densify(GOAL_SPACING))?)
            }
            GoalSpec::Image { .. } => None,
        };
        let image = match (&self.goal, &curve) {
            (GoalSpec::Image { path }, _) => {
                let full = base_dir.join(path);
                let img = crate::pbm::read_pbm(&full)?;
                if img.dims() != (obs.width, obs.height) {
                    return Err(config(format!(
                        "goal image {} is {}x{}, observation is {}x{}",
                        full.display(),
                        img.width(),
                        img.height(),
                        obs.width,
                        obs.height
                    )));
                }
                img
            }
            (_, Some(c)) => rasterize(c, self.sim.half_thickness, obs.width, obs.height, obs.roi())?,
            (_, None) => unreachable!("only image goals lack a curve"),
        };
        Ok(Goal { curve, image })
    }

    fn rope(&self, seed: u64, goal: &Goal, contacts: &[Contact]) -> Result<Rope> {
        let n = self.sim.nodes;
        let h = self.sim.half_thickness;
        match &self.rope {
            RopeSpec::Points { points } => {
                let c = PolylineCurve::from_points_dedup(points.iter().map(|p| pt(*p)).collect())
                    .map_err(|e| config(format!("rope.points: {e}")))?;
                Rope::from_curve(&c, n, h)
            }
            RopeSpec::Goal => match &goal.curve {
                Some(c) => Rope::from_curve(c, n, h),
                None => Err(config("rope kind \"goal\" needs a curve goal, not an image")),
            },
            RopeSpec::Random {
                region,
                max_angle,
                max_bend,
                length,
            } => {
                let length = match (length, &goal.curve) {
                    (Some(l), _) => *l,
                    (None, Some(c)) => c.length(),
                    (None, None) => return Err(config("rope.length is required with an image goal")),
                };
                let roi = self.observation.roi();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..PLACEMENT_ATTEMPTS {
                    let mid = Point::new(
                        rng.gen_range(region[0]..=region[2]),
                        rng.gen_range(region[1]..=region[3]),
                    );
                    let angle = rng.gen_range(-max_angle..=*max_angle);
                    let bend = rng.gen_range(-max_bend..=*max_bend);
                    let curve = bent_segment(mid, angle, bend, length)?;
                    let rope = Rope::from_curve(&curve, n, h)?;
                    let clear = rope.nodes.iter().all(|p| {
                        roi.contains(p) && contacts.iter().all(|c| (p - c.center).norm() > c.radius + h + 0.005)
                    });
                    if clear {
                        return Ok(rope);
                    }
                }
                Err(config(format!(
                    "rope: no clear placement in region after {PLACEMENT_ATTEMPTS} attempts"
                )))
            }
        }
    }

    /// Resolve with the file's own seed.
    pub fn build(&self, base_dir: &Path) -> Result<Scenario> {
        self.build_with_seed(base_dir, self.seed)
    }

    /// Resolve, drawing any random placement from `seed`.
    pub fn build_with_seed(&self, base_dir: &Path, seed: u64) -> Result<Scenario> {
        self.sim.validate()?;
        if self.keypoints < 3 {
            return Err(config("keypoints must be at least 3"));
        }
        let roi = self.observation.roi();
        let contacts = self.contacts();
        for (k, c) in contacts.iter().enumerate() {
            if !roi.contains(&c.center) {
                return Err(config(format!("contact {} lies outside the observation roi", k + 1)));
            }
        }
        let goal = self.goal(&contacts, base_dir)?;
        let rope = self.rope(seed, &goal, &contacts)?;
        let world = WorldState::new(rope, contacts.clone(), self.workspaces()?, self.sim)?;
        let radius = contacts.iter().map(|c| c.radius).fold(DEFAULT_CONTACT_RADIUS, f64::max);
        let planner = self
            .planner
            .apply(PlannerConfig::for_geometry(radius, self.sim.half_thickness));
        planner.validate(radius)?;
        Ok(Scenario {
            name: self.name.clone(),
            seed,
            m: self.keypoints,
            world,
            goal,
            observation: self.observation,
            planner,
        })
    }
}

/// Circular arc (or straight segment when `bend` is ~0) of `length`
/// centered on `mid` with chord direction `angle`.
fn bent_segment(mid: Point, angle: f64, bend: f64, length: f64) -> Result<PolylineCurve> {
    let samples = 200;
    let pts = (0..=samples)
        .map(|i| {
            let s = length * (i as f64 / samples as f64 - 0.5);
            let local = if bend.abs() < 1e-9 {
                Vec2::new(s, 0.0)
            } else {
                let a = s * bend;
                Vec2::new(a.sin() / bend, (1.0 - a.cos()) / bend)
            };
            let (sn, cs) = angle.sin_cos();
            mid + Vec2::new(cs * local.x - sn * local.y, sn * local.x + cs * local.y)
        })
        .collect();
    PolylineCurve::new(pts)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let file = ScenarioFile::read(path)?;
        file.build(path.parent().unwrap_or(Path::new(".")))
    }
}

/// Names of the bundled scenario families.
pub const FAMILIES: [&str; 4] = ["arch", "hook", "snake", "weave"];

/// A bundled scenario family by name.
pub fn family(name: &str) -> Option<ScenarioFile> {
    let text = match name {
        "arch" => include_str!("../../scenarios/arch.toml"),
        "hook" => include_str!("../../scenarios/hook.toml"),
        "snake" => include_str!("../../scenarios/snake.toml"),
        "weave" => include_str!("../../scenarios/weave.toml"),
        _ => return None,
    };
    Some(ScenarioFile::from_toml(text).expect("bundled scenarios parse"))
}

/// `count` placements of a family with seeds `seed, seed + 1, ...`.
pub fn family_placements(name: &str, count: usize) -> Result<Vec<Scenario>> {
    let file = family(name).ok_or_else(|| config(format!("unknown scenario family {name:?}")))?;
    (0..count as u64)
        .map(|i| file.build_with_seed(Path::new("."), file.seed + i))
        .collect()
}
