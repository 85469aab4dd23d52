use crate::lti::TransferFunction;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Identified precision-stage model `8695/(s² + 4.36 s + 7627.3)`.
pub fn stage_plant() -> TransferFunction {
    TransferFunction::new(vec![8695.0], vec![1.0, 4.36, 7627.3]).expect("stage model is proper")
}

/// Built-in plants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantPreset {
    /// `1/(m s²)` with m = 1 kg
    Mass,
    /// [`stage_plant`]
    StageEq10,
}

impl PlantPreset {
    pub fn transfer_function(self) -> TransferFunction {
        match self {
            PlantPreset::Mass => TransferFunction::mass(1.0).expect("unit mass"),
            PlantPreset::StageEq10 => stage_plant(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlantPreset::Mass => "mass",
            PlantPreset::StageEq10 => "stage-eq10",
        }
    }
}

impl FromStr for PlantPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mass" => Ok(PlantPreset::Mass),
            "stage-eq10" => Ok(PlantPreset::StageEq10),
            _ => Err(Error::InvalidArgument(format!(
                "unknown plant preset '{s}' (expected mass or stage-eq10)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_evaluate() {
        assert_eq!("mass".parse::<PlantPreset>().unwrap(), PlantPreset::Mass);
        assert_eq!(
            PlantPreset::StageEq10.name().parse::<PlantPreset>().unwrap(),
            PlantPreset::StageEq10
        );
        assert!("beam".parse::<PlantPreset>().is_err());
        let g = PlantPreset::Mass.transfer_function().freq_response(10.0).unwrap();
        assert!((g.re + 0.01).abs() < 1e-15 && g.im.abs() < 1e-15);
        let dc = stage_plant().freq_response(1e-6).unwrap();
        assert!((dc.re - 8695.0 / 7627.3).abs() < 1e-9);
    }
}
