use extremal_laws::extreme_laws::ExtremeLaws;
use extremal_laws::hitting_densities::{skew_hitting_density, BesselHitting, MeanderTerminal, MeanderWeights, ProcessFamily};
use extremal_laws::special_functions::ZeroTable;
use wasm_bindgen::prelude::*;

/// Meander order used by the page.
const MEANDER_NU: f64 = 0.5;

fn err(e: extremal_laws::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `name` is `bessel` (parameter `nu`), `skew` (`beta`) or `meander` (`k`).
pub fn family(name: &str, param: f64) -> extremal_laws::Result<ProcessFamily> {
    match name {
        "bessel" => ProcessFamily::bessel_bridge(param),
        "skew" => ProcessFamily::skew_bridge(param),
        "meander" => ProcessFamily::meander(param, MEANDER_NU),
        _ => Err(extremal_laws::Error::Config(format!("unknown family `{name}`"))),
    }
}

/// Density of the maximum at each point of `zs`.
#[wasm_bindgen]
pub fn max_density(name: &str, param: f64, zs: &[f64]) -> Result<Vec<f64>, JsError> {
    let laws = ExtremeLaws::new(family(name, param).map_err(err)?).map_err(err)?;
    zs.iter().map(|&z| laws.max_density(z).map(|e| e.value.max(0.0)).map_err(err)).collect()
}

/// Density of the location of the maximum at each point of `us`.
#[wasm_bindgen]
pub fn argmax_density(name: &str, param: f64, us: &[f64]) -> Result<Vec<f64>, JsError> {
    let laws = ExtremeLaws::new(family(name, param).map_err(err)?).map_err(err)?;
    us.iter().map(|&u| laws.argmax_density(u).map(|e| e.value.max(0.0)).map_err(err)).collect()
}

/// Hitting-time density of the family (the terminal-time density for meanders).
#[wasm_bindgen]
pub fn hitting_density(name: &str, param: f64, ts: &[f64]) -> Result<Vec<f64>, JsError> {
    let fam = family(name, param).map_err(err)?;
    match fam {
        ProcessFamily::SkewBridge { beta } => ts.iter().map(|&t| skew_hitting_density(beta, t).map_err(err)).collect(),
        ProcessFamily::BesselBridge { order } => {
            let tab = ZeroTable::new(order, 2000).map_err(err)?;
            let f = BesselHitting::new(&tab);
            Ok(ts.iter().map(|&t| f.value(t)).collect())
        }
        ProcessFamily::GeneralizedMeander { k, order } => {
            let tab = ZeroTable::new(order, 2000).map_err(err)?;
            let phi = MeanderTerminal::new(&MeanderWeights::new(k, &tab).map_err(err)?);
            ts.iter().map(|&t| if t < phi.min_t() { Ok(0.0) } else { phi.value(t).map_err(err) }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_half_curves_match_closed_forms() {
        let f = family("skew", 0.5).unwrap();
        let laws = ExtremeLaws::new(f).unwrap();
        let z = 0.8;
        assert!((laws.max_density(z).unwrap().value - 4.0 * z * (-2.0 * z * z as f64).exp()).abs() < 1e-12);
        assert!((laws.argmax_density(0.3).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(family("levy", 1.0).is_err());
        assert!(family("meander", 10.0).is_err());
    }
}
