/// Number of electrodes (taxels) on one BioTac SP fingertip.
pub const TAXEL_COUNT: usize = 24;

/// Electrode centers in sensor coordinates, inches, electrode 1 first.
const TAXEL_POSITIONS: [[f64; 3]; TAXEL_COUNT] = [
    [0.386434851, -0.108966104, 0.156871012],
    [0.318945051, -0.205042252, 0.120706090],
    [0.087372680, -0.128562247, 0.281981384],
    [0.083895199, -0.235924865, 0.201566857],
    [-0.018624877, -0.300117050, 0.094918748],
    [-0.091886816, -0.120436080, 0.284956139],
    [-0.136659500, -0.237549685, 0.187122746],
    [-0.223451775, -0.270674659, 0.071536904],
    [-0.320752549, -0.199498368, 0.127771244],
    [-0.396931929, -0.100043884, 0.151565706],
    [0.386434851, -0.108966104, -0.156871012],
    [0.318945051, -0.205042252, -0.120706090],
    [0.087372680, -0.128562247, -0.281981384],
    [0.083895199, -0.235924865, -0.201566857],
    [-0.018624877, -0.300117050, -0.094918748],
    [-0.091886816, -0.120436080, -0.284956139],
    [-0.136659500, -0.237549685, -0.187122746],
    [-0.223451775, -0.270674659, -0.071536904],
    [-0.320752549, -0.199498368, -0.127771244],
    [-0.396931929, -0.100043884, -0.151565706],
    [0.258753050, -0.252337663, 0.000000000],
    [0.170153841, -0.274427927, 0.072909607],
    [0.170153841, -0.274427927, -0.072909607],
    [0.075325086, -0.298071391, 0.000000000],
];

/// Decimal strings of the coordinates exactly as tabulated, used where the
/// layout is exported as text so the output does not depend on float
/// formatting.
pub(crate) const TAXEL_POSITION_TEXT: [[&str; 3]; TAXEL_COUNT] = [
    ["0.386434851", "-0.108966104", "0.156871012"],
    ["0.318945051", "-0.205042252", "0.120706090"],
    ["0.087372680", "-0.128562247", "0.281981384"],
    ["0.083895199", "-0.235924865", "0.201566857"],
    ["-0.018624877", "-0.300117050", "0.094918748"],
    ["-0.091886816", "-0.120436080", "0.284956139"],
    ["-0.136659500", "-0.237549685", "0.187122746"],
    ["-0.223451775", "-0.270674659", "0.071536904"],
    ["-0.320752549", "-0.199498368", "0.127771244"],
    ["-0.396931929", "-0.100043884", "0.151565706"],
    ["0.386434851", "-0.108966104", "-0.156871012"],
    ["0.318945051", "-0.205042252", "-0.120706090"],
    ["0.087372680", "-0.128562247", "-0.281981384"],
    ["0.083895199", "-0.235924865", "-0.201566857"],
    ["-0.018624877", "-0.300117050", "-0.094918748"],
    ["-0.091886816", "-0.120436080", "-0.284956139"],
    ["-0.136659500", "-0.237549685", "-0.187122746"],
    ["-0.223451775", "-0.270674659", "-0.071536904"],
    ["-0.320752549", "-0.199498368", "-0.127771244"],
    ["-0.396931929", "-0.100043884", "-0.151565706"],
    ["0.258753050", "-0.252337663", "0.000000000"],
    ["0.170153841", "-0.274427927", "0.072909607"],
    ["0.170153841", "-0.274427927", "-0.072909607"],
    ["0.075325086", "-0.298071391", "0.000000000"],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn mirror_z(&self) -> Point3 {
        Point3 {
            z: -self.z,
            ..*self
        }
    }
}

/// The fixed 3D positions of the 24 taxels; index `i` is electrode `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxelLayout {
    positions: [Point3; TAXEL_COUNT],
}

impl TaxelLayout {
    pub fn positions(&self) -> &[Point3; TAXEL_COUNT] {
        &self.positions
    }

    pub fn position(&self, index: usize) -> Point3 {
        self.positions[index]
    }

    /// Relabels nodes: node `i` of the result sits where node `perm[i]` sat.
    pub fn permuted(&self, perm: &[usize; TAXEL_COUNT]) -> TaxelLayout {
        TaxelLayout {
            positions: std::array::from_fn(|i| self.positions[perm[i]]),
        }
    }
}

pub fn load_layout() -> TaxelLayout {
    TaxelLayout {
        positions: TAXEL_POSITIONS.map(|[x, y, z]| Point3 { x, y, z }),
    }
}

/// The node permutation induced by reflecting the sensor through z = 0:
/// electrodes 1–10 swap with 11–20, 22 swaps with 23, 21 and 24 stay put.
pub fn z_mirror_permutation() -> [usize; TAXEL_COUNT] {
    std::array::from_fn(|i| match i {
        0..=9 => i + 10,
        10..=19 => i - 10,
        21 => 22,
        22 => 21,
        _ => i,
    })
}
