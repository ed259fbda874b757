//! The three axis-aligned print orientations of a cuboid part.
//!
//! A part may stand on any of its three faces but is never rotated about the
//! vertical axis, so each orientation is fully described by which edge is
//! vertical. Height drives layer time; base area consumes plate capacity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{MachineSpec, Part};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrientationKind {
    /// Height edge vertical, resting on the length × width face.
    Flat,
    /// Length edge vertical, resting on the width × height face.
    BStand,
    /// Width edge vertical, resting on the height × length face.
    FStand,
}

impl OrientationKind {
    pub const ALL: [OrientationKind; 3] = [OrientationKind::Flat, OrientationKind::BStand, OrientationKind::FStand];

    /// The `(b, f)` binary pair of the model for this orientation.
    pub fn flags(self) -> (bool, bool) {
        match self {
            OrientationKind::Flat => (false, false),
            OrientationKind::BStand => (true, false),
            OrientationKind::FStand => (false, true),
        }
    }

    pub fn from_flags(b: bool, f: bool) -> Option<Self> {
        match (b, f) {
            (false, false) => Some(OrientationKind::Flat),
            (true, false) => Some(OrientationKind::BStand),
            (false, true) => Some(OrientationKind::FStand),
            (true, true) => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrientationKind::Flat => "flat",
            OrientationKind::BStand => "b-stand",
            OrientationKind::FStand => "f-stand",
        }
    }
}

impl fmt::Display for OrientationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub kind: OrientationKind,
    pub height_mm: f64,
    pub base_area_mm2: f64,
}

impl Orientation {
    pub fn of(part: &Part, kind: OrientationKind) -> Self {
        let (w, l, h) = (part.width_mm, part.length_mm, part.height_mm);
        let (height_mm, base_area_mm2) = match kind {
            OrientationKind::Flat => (h, l * w),
            OrientationKind::BStand => (l, w * h),
            OrientationKind::FStand => (w, h * l),
        };
        Self { kind, height_mm, base_area_mm2 }
    }

    pub fn fits(&self, machine: &MachineSpec) -> bool {
        self.height_mm <= machine.height_mm && self.base_area_mm2 <= machine.area_mm2()
    }
}

/// All three orientations in kind order Flat, BStand, FStand.
pub fn orientations(part: &Part) -> [Orientation; 3] {
    OrientationKind::ALL.map(|k| Orientation::of(part, k))
}

/// Orientations respecting the machine's height and plate area, order preserved.
pub fn feasible_orientations(part: &Part, machine: &MachineSpec) -> Vec<Orientation> {
    orientations(part).into_iter().filter(|o| o.fits(machine)).collect()
}

pub fn volume(part: &Part) -> f64 {
    part.width_mm * part.length_mm * part.height_mm
}

/// The largest-footprint orientation; ties go to the earlier kind.
pub fn max_footprint(part: &Part) -> Orientation {
    orientations(part)
        .into_iter()
        .reduce(|best, o| if o.base_area_mm2 > best.base_area_mm2 { o } else { best })
        .unwrap()
}

/// The lowest orientation; ties go to the earlier kind.
pub fn min_height(part: &Part) -> Orientation {
    orientations(part)
        .into_iter()
        .reduce(|best, o| if o.height_mm < best.height_mm { o } else { best })
        .unwrap()
}
