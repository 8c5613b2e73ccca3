use std::fmt;

use super::{Arm, Pose};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Grasp(usize),
    MoveTo(Vec<Pose>),
    Release,
}

/// Steps of one arm: empty, or one grasp, any number of moves, one release.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmPlan {
    pub steps: Vec<Step>,
}

impl ArmPlan {
    pub fn idle() -> Self {
        Self::default()
    }

    /// Grasp `node`, follow `path`, release.
    pub fn pick_place(node: usize, path: Vec<Pose>) -> Self {
        let mut steps = vec![Step::Grasp(node)];
        if !path.is_empty() {
            steps.push(Step::MoveTo(path));
        }
        steps.push(Step::Release);
        Self { steps }
    }

    /// Grasp `node`, then follow each path in turn, release. Moves are
    /// synchronized across arms by position: the k-th moves of both arms
    /// run together, and an empty move holds still.
    pub fn phased(node: usize, phases: Vec<Vec<Pose>>) -> Self {
        let mut steps = vec![Step::Grasp(node)];
        steps.extend(phases.into_iter().map(Step::MoveTo));
        steps.push(Step::Release);
        Self { steps }
    }

    /// Paths of the moves, in order.
    pub fn moves(&self) -> Vec<&[Pose]> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::MoveTo(p) => Some(p.as_slice()),
                _ => None,
            })
            .collect()
    }

    pub fn is_idle(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn grasp_node(&self) -> Option<usize> {
        match self.steps.first() {
            Some(Step::Grasp(i)) => Some(*i),
            _ => None,
        }
    }

    /// All poses of all moves, in order.
    pub fn path(&self) -> Vec<Pose> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::MoveTo(p) => Some(p.as_slice()),
                _ => None,
            })
            .flatten()
            .copied()
            .collect()
    }

    fn validate(&self, arm: Arm, nodes: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidPlan(format!("{} arm: {msg}", arm.name())));
        let Some((first, rest)) = self.steps.split_first() else {
            return Ok(());
        };
        match first {
            Step::Grasp(i) if *i < nodes => {}
            Step::Grasp(i) => return bad(&format!("grasp node {i} out of range")),
            _ => return bad("must start with a grasp"),
        }
        match rest.split_last() {
            Some((Step::Release, moves)) => {
                if moves.iter().all(|s| matches!(s, Step::MoveTo(_))) {
                    Ok(())
                } else {
                    bad("only moves may come between grasp and release")
                }
            }
            _ => bad("must end with a release"),
        }
    }
}

/// Bimanual plan executed as grasps, synchronized moves, releases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionPlan {
    pub arms: [ArmPlan; 2],
}

impl ActionPlan {
    pub fn new(left: ArmPlan, right: ArmPlan) -> Self {
        Self { arms: [left, right] }
    }

    pub fn arm(&self, arm: Arm) -> &ArmPlan {
        &self.arms[arm.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.arms.iter().all(ArmPlan::is_idle)
    }

    pub fn validate(&self, nodes: usize) -> Result<()> {
        for arm in Arm::BOTH {
            self.arm(arm).validate(arm, nodes)?;
        }
        if let (Some(a), Some(b)) = (self.arms[0].grasp_node(), self.arms[1].grasp_node()) {
            if a == b {
                return Err(Error::InvalidPlan(format!("both arms grasp node {a}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ActionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, arm) in Arm::BOTH.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}:", arm.name()[..1].to_uppercase())?;
            let plan = self.arm(*arm);
            if plan.is_idle() {
                f.write_str(" idle")?;
            }
            for s in &plan.steps {
                match s {
                    Step::Grasp(i) => write!(f, " grasp({i})")?,
                    Step::MoveTo(p) => match p.last() {
                        Some(end) => write!(f, " move({}->({:.3},{:.3}))", p.len(), end.position.x, end.position.y)?,
                        None => f.write_str(" move(0)")?,
                    },
                    Step::Release => f.write_str(" release")?,
                }
            }
        }
        Ok(())
    }
}
