//! WebAssembly bindings for the browser demo in `www/`.

use qbatt_core::dynamics::ModelParams;
use qbatt_core::protocols::{self, ProtocolKind, ProtocolSpec, TauGrid};
use qbatt_core::states::{thermalized_fock_weights, CavityStateSpec};
use qbatt_core::{tavis2, C64};
use wasm_bindgen::prelude::*;

fn cavity(kind: &str, n: f64, extra: f64) -> Result<CavityStateSpec, String> {
    let count = || {
        if n >= 0.0 && n.fract() == 0.0 {
            Ok(n as usize)
        } else {
            Err(format!("{kind} needs a whole photon number, got {n}"))
        }
    };
    Ok(match kind {
        "fock" => CavityStateSpec::Fock { n: count()? },
        "coherent" => CavityStateSpec::Coherent {
            alpha: C64::new(n.max(0.0).sqrt(), 0.0),
        },
        "thermal" => CavityStateSpec::ThermalizedFock {
            n: count()?,
            n_th: extra,
        },
        "attenuated" => CavityStateSpec::AttenuatedFock {
            n: count()?,
            p: extra,
        },
        other => return Err(format!("unknown cavity state {other}")),
    })
}

/// One qubit charged by a single cavity window. Returns a flat array of
/// `[g·τ, mean, snr, fidelity]` rows; a divergent SNR is `Infinity`.
///
/// `extra` is `n_th` for `thermal` and `p` for `attenuated`; it is ignored
/// otherwise.
#[wasm_bindgen]
pub fn charge_curve(
    kind: &str,
    mean_photons: f64,
    extra: f64,
    g_tau_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let state = cavity(kind, mean_photons, extra).map_err(|e| JsError::new(&e))?;
    let mut spec = ProtocolSpec::new(
        ProtocolKind::Sequential,
        1,
        state,
        ModelParams::resonant(0.01),
    );
    spec.tau_grid = TauGrid {
        points: points.clamp(100, 4000),
        g_tau_max: Some(g_tau_max),
    };
    let report = protocols::run(&spec).map_err(|e| JsError::new(&e.to_string()))?;
    let w = &report.windows[0];
    let mut out = Vec::with_capacity(4 * w.g_tau.len());
    for (s, f) in w.stats.iter().zip(&w.fidelity) {
        out.extend([s.g_tau, s.mean, s.snr.value(), *f]);
    }
    Ok(out)
}

/// SNR of qubit 1 when two qubits in `|gg⟩` share a Fock field `|n⟩`.
#[wasm_bindgen]
pub fn pair_snr(n: usize, g_tau: f64) -> f64 {
    tavis2::oracle_snr(n, g_tau)
}

/// Photon distribution of `|n⟩` after thermal noise of mean occupation `n_th`.
#[wasm_bindgen]
pub fn thermal_distribution(n: usize, n_th: f64, count: usize) -> Result<Vec<f64>, JsError> {
    thermalized_fock_weights(n, n_th, count).map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_curve_shape() {
        let v = cavity("fock", 2.0, 0.0).unwrap();
        assert_eq!(v, CavityStateSpec::Fock { n: 2 });
        assert!(cavity("fock", 1.5, 0.0).is_err());
        assert!(cavity("vacuum", 1.0, 0.0).is_err());
    }

    #[test]
    fn pair_snr_starts_at_zero() {
        assert_eq!(pair_snr(3, 0.0), 0.0);
        assert!(pair_snr(3, 0.4) > 0.0);
    }
}
