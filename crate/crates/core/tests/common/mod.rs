#![allow(dead_code)]

use std::sync::OnceLock;

use rovib::models::sr2_like;
use rovib::radial::Engine;

/// Shared engine for the Sr2-like model; level solves are cached inside.
pub fn sr2() -> &'static Engine {
    static ENGINE: OnceLock<Engine> = OnceLock::new();
    ENGINE.get_or_init(|| Engine::new(sr2_like().unwrap()).unwrap())
}

/// Closed-form Morse spectrum, independent of the solver.
#[derive(Debug, Clone, Copy)]
pub struct MorseOracle {
    pub mu: f64,
    pub depth: f64,
    pub a: f64,
    pub r_e: f64,
}

impl MorseOracle {
    pub fn we(&self) -> f64 {
        self.a * (2.0 * self.depth / self.mu).sqrt()
    }

    pub fn wexe(&self) -> f64 {
        self.a * self.a / (2.0 * self.mu)
    }

    /// Energy relative to the asymptote.
    pub fn energy(&self, v: u32) -> f64 {
        let x = v as f64 + 0.5;
        -self.depth + self.we() * x - self.wexe() * x * x
    }

    pub fn lambda(&self) -> f64 {
        (2.0 * self.mu * self.depth).sqrt() / self.a
    }

    /// Number of bound levels on the full line.
    pub fn count(&self) -> u32 {
        (self.lambda() - 0.5).floor() as u32 + 1
    }

    /// dE/dlnμ from ω_e ∝ μ^-1/2 and ω_e x_e ∝ μ^-1.
    pub fn de_dlnmu(&self, v: u32) -> f64 {
        let x = v as f64 + 0.5;
        -0.5 * self.we() * x + self.wexe() * x * x
    }
}

pub const MORSE: MorseOracle = MorseOracle { mu: 5000.0, depth: 0.1, a: 1.0, r_e: 3.0 };

pub fn morse_engine(m: MorseOracle) -> Engine {
    Engine::new(rovib::models::morse_system(m.mu, m.depth, m.a, m.r_e).unwrap()).unwrap()
}
