//! Sweep presets that regenerate the data behind the published figures.
//!
//! Every preset starts from the baseline [`ModelParams`]; overrides are listed
//! in [`Panel::overrides`] and copied into the CSV header.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::{Key, ModelParams};
use crate::sweep::{Axis, SweepSpec};

/// Weak tether used where the figures show stream-dominated behaviour.
pub const WEAK_KAPPA: f64 = 10.0;
/// The three representative couplings, `g/2π` in MHz.
pub const G_VALUES_MHZ: [f64; 3] = [0.25, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig7,
    ];
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig7 => "fig7",
        };
        f.write_str(s)
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.to_string() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown figure `{s}` (known: fig1, fig2, fig3, fig4, fig5, fig7)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// Empty for single-panel figures.
    pub name: &'static str,
    pub description: &'static str,
    pub overrides: Vec<(Key, f64)>,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: FigureId,
    pub panels: Vec<Panel>,
}

fn panel(
    name: &'static str,
    description: &'static str,
    base: &ModelParams,
    overrides: &[(Key, f64)],
    axes: Vec<Axis>,
) -> Result<Panel> {
    let mut p = *base;
    for &(k, v) in overrides {
        p.set(k, v)?;
    }
    let mut spec = SweepSpec::new(axes, p)?;
    spec.notes.push(format!("preset panel: {name}: {description}"));
    let defaults = ModelParams::default();
    for (k, v) in overrides {
        spec.notes.push(format!(
            "preset override: {} = {v} (baseline {})",
            k.name(),
            defaults.get(*k)
        ));
    }
    if base.t_bath != defaults.t_bath {
        spec.notes.push(format!(
            "user override: {} = {} (baseline {})",
            Key::TBath.name(),
            base.t_bath,
            defaults.t_bath
        ));
    }
    Ok(Panel {
        name,
        description,
        overrides: overrides.to_vec(),
        spec,
    })
}

/// Builds a preset on top of `base`, which carries any user-level overrides
/// (bath temperature, variant, frozen atomic frequency).
pub fn figure_preset(id: FigureId, base: &ModelParams) -> Result<FigurePreset> {
    let g_axis = || Axis::list(Key::G, G_VALUES_MHZ.to_vec());
    let weak = [(Key::Kappa, WEAK_KAPPA)];
    let panels = match id {
        FigureId::Fig1 => vec![panel(
            "",
            "detuning scan at three couplings, weak tether (qualitative reproduction)",
            base,
            &weak,
            vec![Axis::linear(Key::Delta, -200.0, 200.0, 201)?, g_axis()?],
        )?],
        FigureId::Fig2 => vec![
            panel(
                "kappa",
                "tether strength scan toward the ideal-cavity saturation",
                base,
                &[],
                vec![Axis::log(Key::Kappa, 1e-2, 1e6, 81)?],
            )?,
            panel(
                "g",
                "coupling scan on resonance, weak tether",
                base,
                &weak,
                vec![Axis::linear(Key::G, 0.05, 1.0, 39)?],
            )?,
        ],
        FigureId::Fig3 => vec![
            panel(
                "lambda",
                "exchange scan on resonance, weak tether",
                base,
                &weak,
                vec![Axis::linear(Key::FLambda, 0.0, 10.0, 101)?],
            )?,
            panel(
                "map",
                "detuning by coupling map, weak tether (qualitative reproduction)",
                base,
                &weak,
                vec![
                    Axis::linear(Key::Delta, -50.0, 50.0, 101)?,
                    Axis::linear(Key::G, 0.1, 1.0, 10)?,
                ],
            )?,
        ],
        FigureId::Fig4 => vec![panel(
            "",
            "detuning scan at several tether strengths",
            base,
            &[],
            vec![
                Axis::linear(Key::Delta, -200.0, 200.0, 201)?,
                Axis::list(Key::Kappa, vec![1e2, 1e3, 1e4, 1e5])?,
            ],
        )?],
        FigureId::Fig5 => vec![panel(
            "",
            "ideal cavity, detuning scan with the atomic frequency following the detuning",
            base,
            &[(Key::Kappa, 0.0)],
            vec![Axis::linear(Key::Delta, -50.0, 50.0, 101)?],
        )?],
        FigureId::Fig7 => vec![panel(
            "",
            "tether strength scan at four bath temperatures",
            base,
            &[],
            vec![
                Axis::log(Key::Kappa, 1.0, 1e6, 61)?,
                Axis::list(Key::TBath, vec![0.1, 0.5, 1.0, 4.0])?,
            ],
        )?],
    };
    let mut preset = FigurePreset { id, panels };
    for p in &mut preset.panels {
        p.spec.notes.insert(0, format!("preset: {id}"));
    }
    Ok(preset)
}
