use std::fs;
use std::path::{Path, PathBuf};

use super::run::{Prepared, RunRecord};
use super::HarnessError;
use crate::spsa::write_trajectory_csv;

/// Points of the uniform `s` grid used for exported schedule tables.
pub const SCHEDULE_GRID: usize = 101;

/// Writes `bytes` next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

/// Layout under `dir`:
///
/// ```text
/// record.json            full run record (no trajectories)
/// config.toml            the resolved config
/// report.json            PerformanceReport
/// report.csv             one-row summary
/// realizations.csv       seed, D, P_E0, delta_min per realization
/// trajectories/rNNN.csv  SPSA trajectory of realization NNN
/// schedules/rNNN.csv     selected physical controls x_1..x_L on the s grid
/// schedules/linear.csv   the linear starting schedule on the same grid
/// ```
pub fn write_run(prepared: &Prepared, record: &RunRecord, dir: &Path) -> Result<(), HarnessError> {
    write_atomic(
        &dir.join("record.json"),
        serde_json::to_string_pretty(record)?.as_bytes(),
    )?;
    write_atomic(&dir.join("config.toml"), record.config.to_toml().as_bytes())?;
    write_atomic(
        &dir.join("report.json"),
        record.report.to_json()?.as_bytes(),
    )?;
    let mut summary = Vec::new();
    record.report.write_summary_csv(&mut summary)?;
    write_atomic(&dir.join("report.csv"), &summary)?;
    let mut rows = Vec::new();
    record.report.write_realizations_csv(&mut rows)?;
    write_atomic(&dir.join("realizations.csv"), &rows)?;
    for r in &record.realizations {
        let mut traj = Vec::new();
        write_trajectory_csv(&r.trajectory, &mut traj)?;
        write_atomic(
            &dir.join("trajectories")
                .join(format!("r{:03}.csv", r.index)),
            &traj,
        )?;
        let schedule = prepared.schedule_of(r)?;
        write_table(
            prepared,
            &schedule,
            &dir.join("schedules").join(format!("r{:03}.csv", r.index)),
        )?;
    }
    write_table(
        prepared,
        &prepared.context.linear_schedule(),
        &dir.join("schedules").join("linear.csv"),
    )
}

fn write_table(
    prepared: &Prepared,
    schedule: &crate::schedules::ControlSchedule,
    path: &Path,
) -> Result<(), HarnessError> {
    let mut bytes = Vec::new();
    prepared
        .context
        .physical_table(schedule, SCHEDULE_GRID)
        .write_csv(&mut bytes)?;
    write_atomic(path, &bytes)
}

pub fn load_record(path: &Path) -> Result<RunRecord, HarnessError> {
    let file = if path.is_dir() {
        path.join("record.json")
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(|e| HarnessError::io(&file, e))?;
    Ok(serde_json::from_str(&text)?)
}
