//! Trajectory CSV: header `tick,vehicle_id,x_m,y_m`, one row per vehicle
//! per tick, ticks `0..T` contiguous and non-decreasing, vehicle ids
//! `0..N` with the same `N` at every tick.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use crate::kinematics::{normalize_angle, FleetTrajectory, VehiclePose};
use crate::sensing::angle_diff;
use crate::{Error, Point, Result};

pub const HEADER: [&str; 4] = ["tick", "vehicle_id", "x_m", "y_m"];

pub fn write_trajectories(trajectory: &FleetTrajectory, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", HEADER.join(",")).map_err(io)?;
    for k in 0..trajectory.ticks() {
        for (i, p) in trajectory.tick(k).iter().enumerate() {
            writeln!(out, "{k},{i},{},{}", p.x, p.y).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

struct TickRows {
    tick: u64,
    first_line: u64,
    rows: Vec<Option<Point>>,
    seen: BTreeSet<usize>,
}

/// Reads a trajectory file. Heading and speed are reconstructed from
/// consecutive positions `dt` seconds apart, yaw rate from consecutive
/// headings.
pub fn load_trajectories(path: &Path, dt: f64) -> Result<FleetTrajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));

    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => parse_err(line, e.to_string()),
        }
    };

    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(parse_err(1, format!("expected header {:?}, found {:?}", HEADER.join(","), header)));
    }

    let mut ticks: Vec<Vec<Point>> = Vec::new();
    let mut vehicles: Option<usize> = None;
    let mut current: Option<TickRows> = None;

    let finish = |t: TickRows, vehicles: &mut Option<usize>, ticks: &mut Vec<Vec<Point>>, line: u64| -> Result<()> {
        let n = *vehicles.get_or_insert(t.seen.len());
        if t.seen.len() != n || t.seen.iter().next_back().is_some_and(|&m| m >= n) {
            return Err(parse_err(
                line,
                format!(
                    "tick {} has vehicle ids {:?}, expected 0..{n}",
                    t.tick,
                    t.seen.iter().collect::<Vec<_>>()
                ),
            ));
        }
        ticks.push(t.rows.into_iter().take(n).map(|p| p.expect("every id seen")).collect());
        Ok(())
    };

    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let tick: u64 = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad tick {:?}", &record[0])))?;
        let id: usize = record[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad vehicle_id {:?}", &record[1])))?;
        let coord = |k: usize| -> Result<f64> {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad coordinate {:?}", &record[k])))
        };
        let p = Point::new(coord(2)?, coord(3)?);

        let expected_next = current.as_ref().map_or(0, |c| c.tick + 1);
        match &current {
            Some(c) if tick == c.tick => {}
            Some(c) if tick < c.tick => {
                return Err(parse_err(line, format!("tick {tick} after tick {}: ticks must not decrease", c.tick)));
            }
            _ => {
                if tick != expected_next {
                    return Err(parse_err(line, format!("missing tick {expected_next} (jumped to {tick})")));
                }
                if let Some(done) = current.take() {
                    finish(done, &mut vehicles, &mut ticks, line)?;
                }
                current = Some(TickRows {
                    tick,
                    first_line: line,
                    rows: Vec::new(),
                    seen: BTreeSet::new(),
                });
            }
        }
        let c = current.as_mut().expect("set above");
        if let Some(n) = vehicles {
            if id >= n {
                return Err(parse_err(line, format!("vehicle_id {id} out of range: earlier ticks have {n} vehicles")));
            }
        }
        if !c.seen.insert(id) {
            return Err(parse_err(line, format!("duplicate vehicle_id {id} in tick {tick}")));
        }
        if c.rows.len() <= id {
            c.rows.resize(id + 1, None);
        }
        c.rows[id] = Some(p);
    }
    match current.take() {
        Some(done) => {
            let line = done.first_line;
            finish(done, &mut vehicles, &mut ticks, line)?;
        }
        None => return Err(parse_err(1, "no data rows".into())),
    }

    let n = vehicles.expect("at least one tick");
    let t = ticks.len();
    let mut poses = Vec::with_capacity(n * t);
    let mut heading = vec![0.0; n * t];
    let mut speed = vec![0.0; n * t];
    for i in 0..n {
        for k in 0..t {
            let (a, b) = if k + 1 < t { (k, k + 1) } else if k > 0 { (k - 1, k) } else { (k, k) };
            let dx = ticks[b][i].x - ticks[a][i].x;
            let dy = ticks[b][i].y - ticks[a][i].y;
            speed[k * n + i] = dx.hypot(dy) / dt;
            heading[k * n + i] = if dx == 0.0 && dy == 0.0 {
                if k > 0 { heading[(k - 1) * n + i] } else { 0.0 }
            } else {
                normalize_angle(dy.atan2(dx))
            };
        }
    }
    for k in 0..t {
        for i in 0..n {
            let yaw = if k + 1 < t {
                angle_diff(heading[(k + 1) * n + i], heading[k * n + i]) / dt
            } else {
                0.0
            };
            let p = ticks[k][i];
            poses.push(VehiclePose::new(p.x, p.y, heading[k * n + i], speed[k * n + i], yaw));
        }
    }
    FleetTrajectory::new(n, t, dt, poses)
}
