//! Synthetic scenes shared by `simulate` and `bench`.

use clap::ValueEnum;
use phz_core::datagen::{
    add_speckle, gen_sample_b, gen_sample_c, gen_sample_d, straight_ray_phase, Ellipsoid, EllipseSpec, PhantomSpec,
    RandomSurfaceSpec, SurfaceDistribution,
};
use phz_core::phase::wrap_grid;
use phz_core::Grid2D;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    SampleB,
    SampleC,
    SampleD,
    SampleE,
    Phantom,
    PhasenetData,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::SampleB => "sample-b",
            GeneratorKind::SampleC => "sample-c",
            GeneratorKind::SampleD => "sample-d",
            GeneratorKind::SampleE => "sample-e",
            GeneratorKind::Phantom => "phantom",
            GeneratorKind::PhasenetData => "phasenet-data",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s.trim(), true).map_err(|_| {
            CliError::Usage(format!(
                "unknown generator {s:?}; expected sample-b, sample-c, sample-d, sample-e, phantom or phasenet-data"
            ))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Uniform,
    Gaussian,
}

/// Generator parameters. Unset radii are 80/110 scaled by `size / 256`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneParams {
    pub size: usize,
    pub angle: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub radius_y: Option<f64>,
    pub radius_x: Option<f64>,
    pub max_value: f64,
    pub matrix_size: usize,
    pub distribution: Distribution,
    pub scale: f64,
    pub snr_db: f64,
    /// Sphere radius of the phantom in µm.
    pub radius_um: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            size: 256,
            angle: 0.0,
            sigma: 0.45,
            amplitude: 15.0,
            radius_y: None,
            radius_x: None,
            max_value: 42.0,
            matrix_size: 5,
            distribution: Distribution::Uniform,
            scale: 6.0 * std::f64::consts::PI,
            snr_db: 15.7,
            radius_um: 4.0,
        }
    }
}

impl SceneParams {
    /// Sets one parameter from its scenario-file or flag name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{key}: expected a number, got {value:?}")))
        };
        let int = || {
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{key}: expected a non-negative integer, got {value:?}")))
        };
        match key {
            "size" => self.size = int()?,
            "angle" => self.angle = num()?,
            "sigma" => self.sigma = num()?,
            "amplitude" => self.amplitude = num()?,
            "radius_y" | "radius-y" => self.radius_y = Some(num()?),
            "radius_x" | "radius-x" => self.radius_x = Some(num()?),
            "max" => self.max_value = num()?,
            "matrix_size" | "matrix-size" => self.matrix_size = int()?,
            "distribution" => {
                self.distribution = <Distribution as ValueEnum>::from_str(value.trim(), true)
                    .map_err(|_| CliError::Usage(format!("distribution must be uniform or gaussian, got {value:?}")))?
            }
            "scale" => self.scale = num()?,
            "snr_db" | "snr-db" => self.snr_db = num()?,
            "radius_um" | "radius-um" => self.radius_um = num()?,
            _ => return Err(CliError::Usage(format!("unknown parameter {key:?}"))),
        }
        Ok(())
    }

    fn ellipse(&self, angle: f64) -> EllipseSpec {
        let base = EllipseSpec::sample_b(self.sigma, angle).scaled(self.size as f64 / 256.0);
        EllipseSpec {
            radius_y: self.radius_y.unwrap_or(base.radius_y),
            radius_x: self.radius_x.unwrap_or(base.radius_x),
            amplitude: self.amplitude,
            ..base
        }
    }

    /// A sphere of refractive index 1.37 with a 0.5 µm shell at 1.35 in
    /// water, imaged at 532 nm over a field of 16 µm.
    pub fn phantom(&self) -> PhantomSpec {
        PhantomSpec {
            ellipsoids: vec![Ellipsoid {
                center: [0.0; 3],
                semi_axes: [self.radius_um; 3],
                n_core: 1.37,
            }],
            n_shell: 1.35,
            shell_thickness: 0.5,
            n_medium: 1.333,
            wavelength: 0.532,
            pixel_pitch: 16.0 / self.size as f64,
        }
    }
}

/// `(truth, wrapped)` for the single-scene generators.
pub fn generate(kind: GeneratorKind, p: &SceneParams, seed: u64) -> Result<(Grid2D, Grid2D)> {
    if p.size == 0 {
        return Err(CliError::Usage("size must be positive".into()));
    }
    let truth = match kind {
        GeneratorKind::SampleB => gen_sample_b(&p.ellipse(p.angle), p.size, p.size)?,
        GeneratorKind::SampleC => gen_sample_c(p.max_value, p.sigma, p.size, p.size)?,
        GeneratorKind::SampleD => {
            let spec = RandomSurfaceSpec {
                matrix_size: p.matrix_size,
                distribution: match p.distribution {
                    Distribution::Uniform => SurfaceDistribution::Uniform01,
                    Distribution::Gaussian => SurfaceDistribution::GaussianShifted,
                },
                scale: p.scale,
                target_size: p.size,
            };
            return Ok(gen_sample_d(&spec, seed)?);
        }
        GeneratorKind::SampleE => {
            let clean = gen_sample_b(&p.ellipse(135.0), p.size, p.size)?;
            add_speckle(&clean, p.snr_db, seed)?
        }
        GeneratorKind::Phantom => straight_ray_phase(&p.phantom(), p.size, p.size)?,
        GeneratorKind::PhasenetData => {
            return Err(CliError::Usage("phasenet-data produces a dataset, not a single scene".into()))
        }
    };
    let wrapped = wrap_grid(&truth)?;
    Ok((truth, wrapped))
}
