use crate::error::{Error, Result};

pub const SH_BASIS_COUNT: usize = 9;

// Real, fully normalized SH constants: integral of Y_i * Y_j over the sphere
// is the identity.
const C0: f64 = 0.28209479177387814; // 1/2 sqrt(1/pi)
const C1: f64 = 0.4886025119029199; // sqrt(3/(4 pi))
const C2: f64 = 1.0925484305920792; // 1/2 sqrt(15/pi)
const C3: f64 = 0.31539156525252005; // 1/4 sqrt(5/pi)
const C4: f64 = 0.5462742152960396; // 1/4 sqrt(15/pi)

/// Evaluates the 9 real SH basis functions (l <= 2) at a unit direction, in
/// the fixed order (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1),
/// (2,2).
pub fn sh_basis(dir: [f64; 3]) -> Result<[f64; 9]> {
    let [x, y, z] = dir;
    let norm = (x * x + y * y + z * z).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnit { norm });
    }
    Ok([
        C0,
        C1 * y,
        C1 * z,
        C1 * x,
        C2 * x * y,
        C2 * y * z,
        C3 * (3.0 * z * z - 1.0),
        C2 * x * z,
        C4 * (x * x - y * y),
    ])
}
