use super::{NoisePath, TimeGrid};
use std::io::{self, Write};

/// `N_i = k_{i1} W + k_{i2} B^H` on the grid of the source path.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedNoise {
    pub grid: TimeGrid,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    /// Row `i` holds `(k_{i1}, k_{i2})`.
    pub k: [[f64; 2]; 2],
}

pub fn mixed_noise(path: &NoisePath, k: [[f64; 2]; 2]) -> MixedNoise {
    let combine = |a: f64, b: f64| -> Vec<f64> {
        path.w
            .iter()
            .zip(&path.bh)
            .map(|(w, bh)| a * w + b * bh)
            .collect()
    };
    MixedNoise {
        grid: path.grid,
        n1: combine(k[0][0], k[0][1]),
        n2: combine(k[1][0], k[1][1]),
        k,
    }
}

/// Writes `t,W,BH,N1,N2` rows with 17 significant digits.
pub fn write_noise_csv<W: Write>(
    path: &NoisePath,
    mixed: &MixedNoise,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "t,W,BH,N1,N2")?;
    for k in 0..path.w.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            path.grid.t(k),
            path.w[k],
            path.bh[k],
            mixed.n1[k],
            mixed.n2[k]
        )?;
    }
    Ok(())
}
