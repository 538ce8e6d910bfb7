//! Geometric Rician channel generation.
//!
//! Each realization produces, per user, the effective horizontal cascaded
//! channel vector `f_k` (so that the noiseless received amplitude under
//! IRS coefficients `v_x` is `f_k^H v_x`), together with the ground-truth
//! line-of-sight cascaded direction and its nearest codebook index. The
//! AP-side transmit beamforming and the aligned vertical IRS dimension
//! are folded into a scalar amplitude, leaving the horizontal dimension
//! as the only one swept during training.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array_math::{steering_vector, wrap_direction, SpatialDirection};
use crate::codebook::center_direction;
use crate::error::{Error, Result};

/// Scenario parameters: array sizes, geometry, path loss, fading and
/// noise. Defaults reproduce the evaluation scenario (30 GHz, 160-element
/// horizontal IRS, AP 16 m away, users on a 2 m semicircle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Horizontal IRS elements swept during training.
    pub n_x: usize,
    /// Vertical IRS elements, assumed aligned (enters as a scalar gain).
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    /// AP antennas; transmit beamforming toward the IRS is fixed, so this
    /// enters the amplitude as sqrt(n_a).
    pub n_a: usize,
    /// IRS element spacing over wavelength.
    #[serde(default = "default_spacing")]
    pub d_i_over_lambda: f64,
    pub k_users: usize,
    pub ap_position: [f64; 3],
    pub irs_position: [f64; 3],
    /// Distance of the user semicircle from the IRS, meters.
    pub user_ring_radius: f64,
    /// Reference channel power gain at 1 m, dB.
    pub xi0_db: f64,
    pub gamma_ai: f64,
    pub gamma_iu: f64,
    pub kappa_ai_db: f64,
    pub kappa_iu_db: f64,
    pub noise_power_dbm: f64,
    /// SNR gap of practical modulation and coding, dB.
    pub gamma_gap_db: f64,
    pub seed: u64,
}

fn default_n_z() -> usize {
    1
}

fn default_spacing() -> f64 {
    0.25
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_x: 160,
            n_z: 1,
            n_a: 64,
            d_i_over_lambda: 0.25,
            k_users: 5,
            ap_position: [0.0, 16.0, 0.0],
            irs_position: [0.0, 0.0, 0.0],
            user_ring_radius: 2.0,
            xi0_db: -62.0,
            gamma_ai: 2.3,
            gamma_iu: 2.0,
            kappa_ai_db: 5.0,
            kappa_iu_db: 10.0,
            noise_power_dbm: -109.0,
            gamma_gap_db: 9.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_x must be at least 2, got {}",
                self.n_x
            )));
        }
        if self.n_z == 0 || self.n_a == 0 || self.k_users == 0 {
            return Err(Error::InvalidConfig(
                "n_z, n_a and k_users must be positive".into(),
            ));
        }
        if !(self.d_i_over_lambda > 0.0 && self.d_i_over_lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "d_i_over_lambda must be in (0, 1], got {}",
                self.d_i_over_lambda
            )));
        }
        if !(self.gamma_ai > 0.0) || !(self.gamma_iu > 0.0) {
            return Err(Error::InvalidConfig(
                "path loss exponents must be positive".into(),
            ));
        }
        if self.ap_irs_distance() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "AP-IRS distance must be at least 1 m, got {}",
                self.ap_irs_distance()
            )));
        }
        if !(self.user_ring_radius >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "user ring radius must be at least 1 m, got {}",
                self.user_ring_radius
            )));
        }
        for v in [self.xi0_db, self.noise_power_dbm, self.gamma_gap_db] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(
                    "xi0_db, noise_power_dbm and gamma_gap_db must be finite".into(),
                ));
            }
        }
        if self.kappa_ai_db.is_nan() || self.kappa_iu_db.is_nan() {
            return Err(Error::InvalidConfig("Rician factors must not be NaN".into()));
        }
        Ok(())
    }

    pub fn ap_irs_distance(&self) -> f64 {
        let d: f64 = self
            .ap_position
            .iter()
            .zip(&self.irs_position)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d.sqrt()
    }

    /// AP-side arrival spatial direction at the IRS, from the directional
    /// cosine of the AP along the horizontal array axis (x).
    pub fn ap_arrival_direction(&self) -> f64 {
        let dx = self.ap_position[0] - self.irs_position[0];
        2.0 * self.d_i_over_lambda * dx / self.ap_irs_distance()
    }

    /// Noise power in Watts.
    pub fn noise_power_w(&self) -> f64 {
        10f64.powf((self.noise_power_dbm - 30.0) / 10.0)
    }

    /// Real amplitude common to every user's effective channel: both
    /// large-scale link gains, the fixed AP beamforming gain sqrt(n_a)
    /// and the aligned vertical array factor n_z.
    pub fn amplitude_scale(&self) -> Result<f64> {
        let ai = path_gain(self.xi0_db, self.ap_irs_distance(), self.gamma_ai)?;
        let iu = path_gain(self.xi0_db, self.user_ring_radius, self.gamma_iu)?;
        Ok(ai.sqrt() * iu.sqrt() * (self.n_a as f64).sqrt() * self.n_z as f64)
    }
}

/// One user's effective horizontal channel and its ground truth.
#[derive(Debug, Clone)]
pub struct UserChannel {
    /// Effective cascaded vector `f_k`; the noiseless received amplitude
    /// under IRS coefficients `v_x` is `f_k^H v_x`.
    pub effective_channel: Vec<Complex64>,
    /// True cascaded LoS direction, wrapped into [-1, 1).
    pub los_direction: SpatialDirection,
    /// Codebook index nearest to `los_direction`.
    pub optimal_index: usize,
    /// Scalar gain of the pure-LoS factorization
    /// `f_k^H v_x = zeta_k * u^H(los, n_x) v_x`.
    pub effective_scalar_gain: Complex64,
}

/// Per-user effective channels for a single fading realization.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    users: Vec<UserChannel>,
    n_x: usize,
    noise_power_w: f64,
}

impl ChannelRealization {
    pub fn users(&self) -> &[UserChannel] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn noise_power_w(&self) -> f64 {
        self.noise_power_w
    }
}

/// Effective cascaded direction for a user at azimuth `theta` (radians,
/// measured from the array axis) on the horizontal ring.
pub fn los_direction_for_user(theta: f64, cfg: &ScenarioConfig) -> Result<SpatialDirection> {
    if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "user azimuth must lie in [0, pi], got {theta}"
        )));
    }
    let departure = 2.0 * cfg.d_i_over_lambda * theta.cos();
    wrap_direction(departure - cfg.ap_arrival_direction())
}

/// Linear power gain `10^(xi0_db/10) * distance^(-gamma)`.
pub fn path_gain(xi0_db: f64, distance_m: f64, gamma: f64) -> Result<f64> {
    if !(distance_m >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "path gain is referenced to 1 m; distance {distance_m} is below that"
        )));
    }
    Ok(10f64.powf(xi0_db / 10.0) * distance_m.powf(-gamma))
}

/// Rician mixture around a unit-modulus LoS vector:
/// `sqrt(k/(1+k)) los + sqrt(1/(1+k)) w` with `w` i.i.d. circularly
/// symmetric complex Gaussian of unit element power.
pub fn draw_rician_vector<R: Rng + ?Sized>(
    los: &[Complex64],
    kappa_db: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let (los_coeff, scatter_coeff) = rician_coefficients(kappa_db);
    los.iter()
        .map(|&l| {
            if scatter_coeff == 0.0 {
                return l;
            }
            let w = complex_gaussian(rng);
            los_coeff * l + scatter_coeff * w
        })
        .collect()
}

fn rician_coefficients(kappa_db: f64) -> (f64, f64) {
    if kappa_db == f64::INFINITY {
        return (1.0, 0.0);
    }
    if kappa_db == f64::NEG_INFINITY {
        return (0.0, 1.0);
    }
    let kappa = 10f64.powf(kappa_db / 10.0);
    ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
}

/// Circularly symmetric complex Gaussian with unit power.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Nearest codebook index to a direction; exact midpoints resolve to the
/// smaller index.
pub fn optimal_index(los_direction: SpatialDirection, n_x: usize) -> usize {
    let phi = los_direction.value();
    let mut best = 1;
    let mut best_dist = f64::INFINITY;
    for j in 1..=n_x {
        let alpha = center_direction(j, n_x).expect("index in range").value();
        let d = (phi - alpha).abs();
        if d < best_dist {
            best = j;
            best_dist = d;
        }
    }
    best
}

/// Draw the per-user effective channels for users at the given ring
/// azimuths.
pub fn realize_channels<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    user_azimuths: &[f64],
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    if user_azimuths.len() != cfg.k_users {
        return Err(Error::InvalidArgument(format!(
            "expected {} user azimuths, got {}",
            cfg.k_users,
            user_azimuths.len()
        )));
    }
    let departures = user_azimuths
        .iter()
        .map(|&theta| {
            los_direction_for_user(theta, cfg)?;
            Ok(2.0 * cfg.d_i_over_lambda * theta.cos())
        })
        .collect::<Result<Vec<f64>>>()?;
    realize_from_departures(cfg, &departures, rng)
}

/// Draw effective channels for users whose cascaded LoS directions are
/// given directly, bypassing ring geometry. Useful for placing users
/// exactly on codebook grid directions.
pub fn realize_channels_from_directions<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    los_directions: &[SpatialDirection],
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    let phi_r = cfg.ap_arrival_direction();
    let departures: Vec<f64> = los_directions.iter().map(|d| d.value() + phi_r).collect();
    realize_from_departures(cfg, &departures, rng)
}

fn realize_from_departures<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    departures: &[f64],
    rng: &mut R,
) -> Result<ChannelRealization> {
    let phi_r = cfg.ap_arrival_direction();
    let amp = cfg.amplitude_scale()?;
    let tau = std::f64::consts::TAU;

    let ap_los = steering_vector(phi_r, cfg.n_x)?;
    let ap_phase: f64 = rng.gen_range(0.0..tau);
    let h_vec = draw_rician_vector(&ap_los, cfg.kappa_ai_db, rng);

    let mut users = Vec::with_capacity(departures.len());
    for &phi_t in departures {
        let user_los = steering_vector(phi_t, cfg.n_x)?;
        let user_phase: f64 = rng.gen_range(0.0..tau);
        let g_vec = draw_rician_vector(&user_los, cfg.kappa_iu_db, rng);

        let los_direction = wrap_direction(phi_t - phi_r)?;
        let zeta = Complex64::from_polar(amp, ap_phase + user_phase);
        // f_k[n] = conj(zeta) g[n] conj(h[n]) makes
        // f_k^H v = zeta * sum_n conj(g[n]) h[n] v[n], the cascaded
        // receive amplitude; under pure LoS it collapses to
        // zeta * u^H(los, n_x) v.
        let effective_channel: Vec<Complex64> = g_vec
            .iter()
            .zip(&h_vec)
            .map(|(&g, &h)| zeta.conj() * g * h.conj())
            .collect();
        users.push(UserChannel {
            effective_channel,
            los_direction,
            optimal_index: optimal_index(los_direction, cfg.n_x),
            effective_scalar_gain: zeta,
        });
    }
    Ok(ChannelRealization {
        users,
        n_x: cfg.n_x,
        noise_power_w: cfg.noise_power_w(),
    })
}

/// `k` azimuths at the midpoints of equal sectors of the semicircle.
pub fn equally_spaced_azimuths(k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| (2 * i + 1) as f64 * std::f64::consts::PI / (2 * k) as f64)
        .collect()
}

/// `k` azimuths drawn uniformly over the semicircle.
pub fn draw_random_azimuths<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k)
        .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
        .collect()
}
