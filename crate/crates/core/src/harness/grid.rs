use super::{ExperimentConfig, Variant};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    /// Directory-safe label such as `gradvar_jt50_sp25` or `full_share`.
    pub name: String,
    pub config: ExperimentConfig,
}

fn percent(sp: f64) -> String {
    format!("{}", (sp * 100.0).round() as i64)
}

/// Expand `base` into the jt × sp gradvar grid plus the four baselines.
/// The random-split baseline takes the middle jt and sp of the axes so it
/// reuses the same joint checkpoint as the matching gradvar cell.
/// Each cell writes under `base.output_dir/<name>`.
pub fn make_grid(base: &ExperimentConfig) -> Result<Vec<GridCell>> {
    let axes = base.grid.clone().unwrap_or_default();
    let mut cells = Vec::with_capacity(axes.jt.len() * axes.sp.len() + 4);
    let mut cell = |name: String, variant: Variant, jt: usize, sp: f64| {
        let mut config = base.clone();
        config.variant = variant;
        config.jt_iterations = jt;
        config.sp_fraction = sp;
        config.grid = None;
        config.output_dir = base.output_dir.join(&name);
        cells.push(GridCell { name, config });
    };
    for &jt in &axes.jt {
        for &sp in &axes.sp {
            cell(
                format!("gradvar_jt{jt}_sp{}", percent(sp)),
                Variant::Gradvar,
                jt,
                sp,
            );
        }
    }
    cell("full_share".into(), Variant::FullShare, 0, 0.0);
    cell("no_share".into(), Variant::NoShare, 0, 1.0);
    if let (Some(&jt), Some(&sp)) = (
        axes.jt.get(axes.jt.len() / 2),
        axes.sp.get(axes.sp.len() / 2),
    ) {
        cell("random_split".into(), Variant::RandomSplit, jt, sp);
    }
    cell("append_onehot".into(), Variant::AppendOnehot, 0, 0.0);
    for c in &cells {
        c.config.validate()?;
    }
    Ok(cells)
}
