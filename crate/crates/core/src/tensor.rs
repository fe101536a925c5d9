//! Fixed-size Cartesian tensors in three dimensions.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

pub const ZERO3: Vec3 = [0.0; 3];
pub const ZERO33: Mat3 = [[0.0; 3]; 3];
pub const ZERO333: Tensor3 = [[[0.0; 3]; 3]; 3];
pub const ZERO3333: Tensor4 = [[[[0.0; 3]; 3]; 3]; 3];

/// Alternating symbol ε_ijk.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

pub fn identity3() -> Mat3 {
    let mut m = ZERO33;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn scaled_identity(s: f64) -> Mat3 {
    let mut m = identity3();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] *= s;
    }
    m
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = ZERO3;
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Quadratic form v·M·w.
pub fn bilinear(m: &Mat3, v: &Vec3, w: &Vec3) -> f64 {
    dot(v, &mat_vec(m, w))
}

pub fn norm_sq(v: &Vec3) -> f64 {
    dot(v, v)
}

/// Unfolds a fourth-order tensor into a 9×9 matrix with row (i,j) and column (k,l).
pub fn unfold4(t: &Tensor4) -> [[f64; 9]; 9] {
    let mut out = [[0.0; 9]; 9];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[3 * i + j][3 * k + l] = t[i][j][k][l];
                }
            }
        }
    }
    out
}

pub fn fold4(m: &[[f64; 9]; 9]) -> Tensor4 {
    let mut out = ZERO3333;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[i][j][k][l] = m[3 * i + j][3 * k + l];
                }
            }
        }
    }
    out
}

pub fn flatten3(t: &Tensor3) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

pub fn flatten4(t: &Tensor4) -> Vec<f64> {
    t.iter().flatten().flatten().flatten().copied().collect()
}

pub fn flatten2(t: &Mat3) -> Vec<f64> {
    t.iter().flatten().copied().collect()
}

/// Row-major rebuild; the caller guarantees the slice length.
pub fn mat3_from(v: &[f64]) -> Mat3 {
    let mut out = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = v[3 * i + j];
        }
    }
    out
}

pub fn tensor3_from(v: &[f64]) -> Tensor3 {
    let mut out = ZERO333;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j][k] = v[9 * i + 3 * j + k];
            }
        }
    }
    out
}

pub fn tensor4_from(v: &[f64]) -> Tensor4 {
    let mut out = ZERO3333;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[i][j][k][l] = v[27 * i + 9 * j + 3 * k + l];
                }
            }
        }
    }
    out
}
