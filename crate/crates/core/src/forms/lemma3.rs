use serde::Serialize;

/// Coefficients of `F(a,c) = αa² + βc² + 2γac + 2δa + 2εc + η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma3Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub eta: f64,
}

impl Lemma3Coefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, epsilon: f64, eta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            eta,
        }
    }

    pub fn value(&self, a: f64, c: f64) -> f64 {
        self.alpha * a * a
            + self.beta * c * c
            + 2.0 * self.gamma * a * c
            + 2.0 * self.delta * a
            + 2.0 * self.epsilon * c
            + self.eta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma3Verdict {
    /// `D = αβ − γ²`
    pub d: f64,
    /// `E = η − (δ² + (αε − γδ)²/D)/α`; `None` unless `α > 0` and `D > 0`.
    pub e: Option<f64>,
    /// Whether `F(a,c) >= 0` for all real `a, c`.
    pub psd: bool,
}

/// Decides whether `F` is non-negative everywhere.
///
/// For `α > 0, D > 0` this is `E >= 0`, from
/// `F = [(αa + γc + δ)² + (Dc + αε − γδ)²/D]/α + E`. The boundary cases
/// are decided directly:
/// - `α < 0` or `D < 0`: not psd;
/// - `α > 0, D = 0`: psd iff `αε = γδ` and `αη >= δ²`;
/// - `α = 0`: psd iff `γ = δ = 0`, `β >= 0`, `ε² <= βη`, and `η >= 0`.
pub fn lemma3_criterion(k: &Lemma3Coefficients) -> Lemma3Verdict {
    let Lemma3Coefficients {
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
        eta,
    } = *k;
    let d = alpha * beta - gamma * gamma;

    if alpha == 0.0 {
        let psd = gamma == 0.0
            && delta == 0.0
            && beta >= 0.0
            && epsilon * epsilon <= beta * eta
            && eta >= 0.0;
        return Lemma3Verdict { d, e: None, psd };
    }
    if alpha < 0.0 || d < 0.0 {
        return Lemma3Verdict {
            d,
            e: None,
            psd: false,
        };
    }
    if d == 0.0 {
        let psd = alpha * epsilon == gamma * delta && alpha * eta >= delta * delta;
        return Lemma3Verdict { d, e: None, psd };
    }
    let cross = alpha * epsilon - gamma * delta;
    let e = eta - (delta * delta + cross * cross / d) / alpha;
    Lemma3Verdict {
        d,
        e: Some(e),
        psd: e >= 0.0,
    }
}
