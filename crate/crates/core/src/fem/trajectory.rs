use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuenchComponent {
    First,
    Second,
    Both,
}

impl QuenchComponent {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuenchComponent::First => "1",
            QuenchComponent::Second => "2",
            QuenchComponent::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchEvent {
    /// Step index at which `max_x u_i ≥ 1 - eps` first holds.
    pub step: usize,
    pub time: f64,
    pub component: QuenchComponent,
    /// Per component, the time at which `min_x z_i` reaches `eps` when
    /// `(min_x z_i)³` is interpolated linearly over the crossing step. Near
    /// quenching `z³` decays linearly, so for the component that has not yet
    /// crossed this is an extrapolation, not continued integration. `None`
    /// if `z_i` was not decreasing over the step.
    pub crossing: [Option<f64>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub step: usize,
    pub t: f64,
    pub u: [Vec<f64>; 2],
}

/// Per-step record of one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub eps_quench: f64,
    pub nodes: Vec<f64>,
    /// `max_x |u_i|` at steps `0..=last`.
    pub sup_u: [Vec<f64>; 2],
    /// `min_x (1 - u_i)` at steps `0..=last`.
    pub min_z: [Vec<f64>; 2],
    pub dumps: Vec<FieldDump>,
    /// Nodal values at the last step taken.
    pub final_u: [Vec<f64>; 2],
    pub quench: Option<QuenchEvent>,
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn steps_taken(&self) -> usize {
        self.sup_u[0].len() - 1
    }

    pub fn t(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn quench_time(&self) -> Option<f64> {
        self.quench.as_ref().map(|q| q.time)
    }

    /// First step time at which `min_x min_i z_i ≤ eps`, for any
    /// `eps ≥ eps_quench`.
    pub fn first_crossing(&self, eps: f64) -> Option<f64> {
        (0..self.min_z[0].len())
            .find(|&k| self.min_z[0][k].min(self.min_z[1][k]) <= eps)
            .map(|k| self.t(k))
    }

    /// Writes `step,t,sup_u1,sup_u2,min_z1,min_z2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,t,sup_u1,sup_u2,min_z1,min_z2")?;
        for k in 0..self.sup_u[0].len() {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                k,
                self.t(k),
                self.sup_u[0][k],
                self.sup_u[1][k],
                self.min_z[0][k],
                self.min_z[1][k]
            )?;
        }
        Ok(())
    }

    /// Writes `t,x,u1,u2` for every dumped step.
    pub fn write_fields_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,u1,u2")?;
        for d in &self.dumps {
            for (j, x) in self.nodes.iter().enumerate() {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    d.t, x, d.u[0][j], d.u[1][j]
                )?;
            }
        }
        Ok(())
    }
}
