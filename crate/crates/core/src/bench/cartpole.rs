use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::seeded;

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
/// Half the pole length.
pub const POLE_HALF_LENGTH: f64 = 0.5;
pub const FORCE: f64 = 10.0;
pub const DT: f64 = 0.02;
pub const ANGLE_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;
pub const POSITION_LIMIT: f64 = 2.4;
/// Each initial state variable is drawn from `[-INIT_SPREAD, INIT_SPREAD]`.
pub const INIT_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn initial(seed: u64) -> CartPoleState {
        let mut rng = seeded(seed);
        let mut draw = || rng.gen_range(-INIT_SPREAD..=INIT_SPREAD);
        CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        }
    }

    pub fn observation(&self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    /// Push direction from a controller output: `+FORCE` when `output >= 0`.
    pub fn force_for(output: f64) -> f64 {
        if output >= 0.0 {
            FORCE
        } else {
            -FORCE
        }
    }

    /// One explicit Euler step under `force`.
    pub fn step(&mut self, force: f64) {
        let total_mass = CART_MASS + POLE_MASS;
        let pole_moment = POLE_MASS * POLE_HALF_LENGTH;
        let (sin, cos) = self.theta.sin_cos();
        let temp = (force + pole_moment * self.theta_dot * self.theta_dot * sin) / total_mass;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total_mass));
        let x_acc = temp - pole_moment * theta_acc * cos / total_mass;
        self.x += DT * self.x_dot;
        self.x_dot += DT * x_acc;
        self.theta += DT * self.theta_dot;
        self.theta_dot += DT * theta_acc;
    }

    pub fn failed(&self) -> bool {
        self.theta.abs() > ANGLE_LIMIT || self.x.abs() > POSITION_LIMIT
    }
}

/// Runs one episode and returns the number of steps survived. `policy`
/// maps an observation to a controller output.
pub fn episode<F>(start: CartPoleState, episode_len: usize, mut policy: F) -> crate::Result<usize>
where
    F: FnMut(&[f64; 4]) -> crate::Result<f64>,
{
    let mut state = start;
    for t in 0..episode_len {
        let out = policy(&state.observation())?;
        state.step(CartPoleState::force_for(out));
        if state.failed() {
            return Ok(t);
        }
    }
    Ok(episode_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_is_seeded_and_small() {
        assert_eq!(CartPoleState::initial(3), CartPoleState::initial(3));
        assert_ne!(CartPoleState::initial(3), CartPoleState::initial(4));
        for seed in 0..100 {
            let s = CartPoleState::initial(seed);
            assert!(s.observation().iter().all(|v| v.abs() <= INIT_SPREAD));
            assert!(!s.failed());
        }
    }

    #[test]
    fn upright_at_rest_stays_balanced_without_force() {
        let mut s = CartPoleState::default();
        for _ in 0..1000 {
            s.step(0.0);
        }
        assert_eq!(s, CartPoleState::default());
    }

    #[test]
    fn push_right_accelerates_cart_right_and_tilts_pole_left() {
        let mut s = CartPoleState::default();
        s.step(FORCE);
        s.step(FORCE);
        assert!(s.x > 0.0 && s.x_dot > 0.0);
        assert!(s.theta < 0.0);
    }

    #[test]
    fn constant_push_fails_quickly() {
        let survived = episode(CartPoleState::initial(0), 500, |_| Ok(0.0)).unwrap();
        assert!(survived < 50, "{survived}");
    }

    #[test]
    fn bang_bang_angle_controller_balances() {
        // push toward the side the pole leans to
        let survived = episode(CartPoleState::initial(1), 500, |o| Ok(o[2] + 0.5 * o[3])).unwrap();
        assert_eq!(survived, 500);
    }
}
