//! Plain-text replay logs: enough to rebuild a trial's world bit for bit,
//! re-apply every operation, and prove the run reproduced by comparing
//! state digests step by step.
//!
//! The format is line-oriented and tab-separated. Numbers use shortest
//! round-trip decimals, digests 16 hex digits. Per-step state is stored as
//! digests only; the full particle snapshot appears once, at trial end.

use crate::geom::channel::{make_channel, ChannelKind, PlacedChannel};
use crate::geom::gasket::GasketSpec;
use crate::geom::pose::Pose2D;
use crate::geom::{vec2, Vec2, Vec3};
use crate::plan::Strategy;
use crate::sim::ops::Op;
use crate::sim::params::SimParams;
use crate::sim::state::{Particle, World};

const MAGIC: &str = "# gasket replay v1";
const RNG_LINE: &str = "# rng splitmix64";

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("config cannot rebuild the trial: {0}")]
    UnreproducibleConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub pre: u64,
    pub post: u64,
    pub op: Op,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayLog {
    pub seed: u64,
    pub kind: ChannelKind,
    pub strategy: Strategy,
    pub pose: Pose2D,
    pub params: SimParams,
    pub gasket: GasketSpec,
    /// Initial rope centers, flat on the table.
    pub rope: Vec<Vec2>,
    pub init_digest: u64,
    pub records: Vec<Record>,
    /// Full particle state at trial end, written by `finish`.
    pub snapshot: Vec<Particle>,
    pub final_digest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Pass {
        records: usize,
    },
    /// The rebuilt initial world already disagrees.
    InitMismatch {
        expected: u64,
        got: u64,
    },
    Diverged {
        index: usize,
        expected: u64,
        got: u64,
    },
}

impl ReplayLog {
    /// Open a log on a freshly built world, before any operation ran.
    pub fn start(seed: u64, strategy: Strategy, w: &World) -> ReplayLog {
        assert_eq!(w.action_count, 0, "log must start before the first op");
        ReplayLog {
            seed,
            kind: w.channel.spec.kind,
            strategy,
            pose: w.channel.pose,
            params: w.params.clone(),
            gasket: w.gasket,
            rope: w.particles.iter().map(|p| p.pos.xy()).collect(),
            init_digest: w.digest(),
            records: Vec::new(),
            snapshot: Vec::new(),
            final_digest: w.digest(),
        }
    }

    /// Record one applied operation; `pre` must be the digest taken just
    /// before `w.apply(&op)` ran.
    pub fn append(&mut self, op: Op, pre: u64, w: &World) {
        debug_assert_eq!(self.records.len() + 1, w.action_count as usize);
        let post = w.digest();
        self.records.push(Record { pre, post, op });
        self.final_digest = post;
    }

    /// Capture the end-of-trial snapshot.
    pub fn finish(&mut self, w: &World) {
        self.snapshot = w.particles.clone();
        self.final_digest = w.digest();
    }

    /// Rebuild the initial world this log describes.
    pub fn build_world(&self) -> Result<World, ReplayError> {
        let spec = make_channel(self.kind);
        let placed = PlacedChannel::new(spec, self.pose)
            .map_err(|e| ReplayError::UnreproducibleConfig(e.to_string()))?;
        if self.rope.len() != self.gasket.particle_count() {
            return Err(ReplayError::UnreproducibleConfig(format!(
                "rope has {} points, gasket wants {}",
                self.rope.len(),
                self.gasket.particle_count()
            )));
        }
        Ok(World::new(
            placed,
            self.gasket,
            self.params.clone(),
            &self.rope,
        ))
    }

    /// Re-execute every record and compare digests.
    pub fn verify(&self) -> Result<VerifyOutcome, ReplayError> {
        let mut w = self.build_world()?;
        if w.digest() != self.init_digest {
            return Ok(VerifyOutcome::InitMismatch {
                expected: self.init_digest,
                got: w.digest(),
            });
        }
        for (i, rec) in self.records.iter().enumerate() {
            w.apply(&rec.op);
            if w.digest() != rec.post {
                return Ok(VerifyOutcome::Diverged {
                    index: i,
                    expected: rec.post,
                    got: w.digest(),
                });
            }
        }
        Ok(VerifyOutcome::Pass {
            records: self.records.len(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(MAGIC);
        s.push('\n');
        s.push_str(RNG_LINE);
        s.push('\n');
        s.push_str(&format!("seed\t{}\n", self.seed));
        s.push_str(&format!("channel\t{}\n", self.kind.name()));
        s.push_str(&format!("strategy\t{}\n", self.strategy.name()));
        s.push_str(&format!("config\t{:016x}\n", self.params.config_hash()));
        s.push_str(&format!(
            "pose\t{}\t{}\t{}\n",
            self.pose.x, self.pose.y, self.pose.theta
        ));
        s.push_str(&format!(
            "gasket\t{}\t{}\t{}\t{}\n",
            self.gasket.length,
            self.gasket.diameter,
            self.gasket.compress_delta,
            self.gasket.rest_spacing
        ));
        for (k, v) in self.params.entries() {
            s.push_str(&format!("param\t{k}\t{v}\n"));
        }
        s.push_str("rope");
        for p in &self.rope {
            s.push_str(&format!("\t{}\t{}", p.x, p.y));
        }
        s.push('\n');
        s.push_str(&format!("init\t{:016x}\n", self.init_digest));
        for (i, r) in self.records.iter().enumerate() {
            s.push_str(&format!(
                "rec\t{i}\t{:016x}\t{:016x}\t{}\n",
                r.pre,
                r.post,
                op_fields(&r.op)
            ));
        }
        s.push_str(&format!(
            "end\t{}\t{:016x}\n",
            self.records.len(),
            self.final_digest
        ));
        for p in &self.snapshot {
            s.push_str(&format!(
                "snap\t{}\t{}\t{}\t{}\t{}\t{}\n",
                p.pos.x, p.pos.y, p.pos.z, p.seated as u8, p.arc, p.press_count
            ));
        }
        s
    }

    pub fn parse(text: &str) -> Result<ReplayLog, ReplayError> {
        let mut lines = text.lines().enumerate();
        let fail = |n: usize, why: &str| ReplayError::Parse(n + 1, why.to_string());

        let mut expect = |want: &str| -> Result<(), ReplayError> {
            match lines.next() {
                Some((_, l)) if l == want => Ok(()),
                Some((n, l)) => Err(fail(n, &format!("expected {want:?}, got {l:?}"))),
                None => Err(fail(0, "truncated header")),
            }
        };
        expect(MAGIC)?;
        expect(RNG_LINE)?;

        let mut tagged = |tag: &str| -> Result<(usize, Vec<String>), ReplayError> {
            let (n, l) = lines.next().ok_or_else(|| fail(0, "truncated log"))?;
            let mut f = l.split('\t');
            if f.next() != Some(tag) {
                return Err(fail(n, &format!("expected a {tag} line")));
            }
            Ok((n, f.map(str::to_string).collect()))
        };

        let one = |n: usize, f: &[String]| -> Result<String, ReplayError> {
            f.first().cloned().ok_or_else(|| fail(n, "missing field"))
        };
        let nums = |n: usize, f: &[String], want: usize| -> Result<Vec<f64>, ReplayError> {
            if f.len() != want {
                return Err(fail(n, "wrong field count"));
            }
            f.iter()
                .map(|s| s.parse::<f64>().map_err(|_| fail(n, "bad number")))
                .collect()
        };

        let (n, f) = tagged("seed")?;
        let seed = one(n, &f)?.parse().map_err(|_| fail(n, "bad seed"))?;
        let (n, f) = tagged("channel")?;
        let kind = ChannelKind::parse(&one(n, &f)?).ok_or_else(|| fail(n, "unknown channel"))?;
        let (n, f) = tagged("strategy")?;
        let strategy = Strategy::parse(&one(n, &f)?).ok_or_else(|| fail(n, "unknown strategy"))?;
        let (n, f) = tagged("config")?;
        let config_hash =
            u64::from_str_radix(&one(n, &f)?, 16).map_err(|_| fail(n, "bad config hash"))?;
        let (n, f) = tagged("pose")?;
        let v = nums(n, &f, 3)?;
        let pose = Pose2D::new(v[0], v[1], v[2]);
        let (n, f) = tagged("gasket")?;
        let v = nums(n, &f, 4)?;
        let gasket = GasketSpec {
            length: v[0],
            diameter: v[1],
            compress_delta: v[2],
            rest_spacing: v[3],
        };

        let mut params = SimParams::default();
        let expected_keys = SimParams::default().entries().len();
        let mut rope = Vec::new();
        let init_digest;
        let mut seen_params = 0usize;
        loop {
            let (n, l) = lines.next().ok_or_else(|| fail(0, "truncated log"))?;
            let mut f = l.split('\t');
            match f.next() {
                Some("param") => {
                    let k = f.next().ok_or_else(|| fail(n, "param key missing"))?;
                    let v: f64 = f
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| fail(n, "param value missing"))?;
                    if !params.set(k, v) {
                        return Err(ReplayError::UnreproducibleConfig(format!(
                            "unknown parameter {k:?}"
                        )));
                    }
                    seen_params += 1;
                }
                Some("rope") => {
                    let vals: Vec<f64> = f
                        .map(|v| v.parse().map_err(|_| fail(n, "bad rope number")))
                        .collect::<Result<_, _>>()?;
                    rope = vals.chunks(2).map(|c| vec2(c[0], c[1])).collect();
                }
                Some("init") => {
                    init_digest = u64::from_str_radix(f.next().unwrap_or(""), 16)
                        .map_err(|_| fail(n, "bad init digest"))?;
                    break;
                }
                _ => return Err(fail(n, "expected param, rope, or init")),
            }
        }
        if seen_params != expected_keys {
            return Err(ReplayError::UnreproducibleConfig(format!(
                "{seen_params} of {expected_keys} parameters present"
            )));
        }
        if params.config_hash() != config_hash {
            return Err(ReplayError::UnreproducibleConfig(
                "config hash does not match the parameter listing".to_string(),
            ));
        }

        let mut records = Vec::new();
        let mut snapshot = Vec::new();
        let mut final_digest = init_digest;
        let mut ended = false;
        for (n, l) in lines {
            let mut f = l.split('\t');
            match f.next() {
                Some("rec") if !ended => {
                    let rest: Vec<&str> = f.collect();
                    if rest.len() < 4 {
                        return Err(fail(n, "short record"));
                    }
                    let idx: usize = rest[0].parse().map_err(|_| fail(n, "bad index"))?;
                    if idx != records.len() {
                        return Err(fail(n, "record index out of order"));
                    }
                    let pre =
                        u64::from_str_radix(rest[1], 16).map_err(|_| fail(n, "bad pre digest"))?;
                    let post =
                        u64::from_str_radix(rest[2], 16).map_err(|_| fail(n, "bad post digest"))?;
                    let op = parse_op(&rest[3..]).ok_or_else(|| fail(n, "bad op"))?;
                    records.push(Record { pre, post, op });
                }
                Some("end") if !ended => {
                    let rest: Vec<&str> = f.collect();
                    let count: usize = rest[0].parse().map_err(|_| fail(n, "bad count"))?;
                    if count != records.len() {
                        return Err(fail(n, "record count mismatch"));
                    }
                    final_digest = u64::from_str_radix(rest[1], 16)
                        .map_err(|_| fail(n, "bad final digest"))?;
                    ended = true;
                }
                Some("snap") if ended => {
                    let vals: Vec<&str> = f.collect();
                    if vals.len() != 6 {
                        return Err(fail(n, "short snapshot row"));
                    }
                    let num = |s: &str| s.parse::<f64>().map_err(|_| fail(n, "bad number"));
                    snapshot.push(Particle {
                        pos: Vec3 {
                            x: num(vals[0])?,
                            y: num(vals[1])?,
                            z: num(vals[2])?,
                        },
                        seated: vals[3] == "1",
                        arc: num(vals[4])?,
                        press_count: vals[5].parse().map_err(|_| fail(n, "bad count"))?,
                    });
                }
                _ => return Err(fail(n, "unexpected line")),
            }
        }
        if !ended {
            return Err(ReplayError::Parse(0, "missing end line".to_string()));
        }
        Ok(ReplayLog {
            seed,
            kind,
            strategy,
            pose,
            params,
            gasket,
            rope,
            init_digest,
            records,
            snapshot,
            final_digest,
        })
    }
}

fn op_fields(op: &Op) -> String {
    match op {
        Op::Grasp { x, y } => format!("grasp\t{x}\t{y}"),
        Op::Move { path, release } => {
            let mut s = format!("move\t{}\t{}", *release as u8, path.len());
            for p in path {
                s.push_str(&format!("\t{}\t{}\t{}", p.x, p.y, p.z));
            }
            s
        }
        Op::Press { x, y } => format!("press\t{x}\t{y}"),
        Op::Slide { f0, f1 } => format!("slide\t{f0}\t{f1}"),
    }
}

fn parse_op(fields: &[&str]) -> Option<Op> {
    let num = |s: &str| s.parse::<f64>().ok();
    match *fields.first()? {
        "grasp" => Some(Op::Grasp {
            x: num(fields.get(1)?)?,
            y: num(fields.get(2)?)?,
        }),
        "press" => Some(Op::Press {
            x: num(fields.get(1)?)?,
            y: num(fields.get(2)?)?,
        }),
        "slide" => Some(Op::Slide {
            f0: num(fields.get(1)?)?,
            f1: num(fields.get(2)?)?,
        }),
        "move" => {
            let release = match *fields.get(1)? {
                "0" => false,
                "1" => true,
                _ => return None,
            };
            let n: usize = fields.get(2)?.parse().ok()?;
            if fields.len() != 3 + 3 * n {
                return None;
            }
            let path = fields[3..]
                .chunks(3)
                .map(|c| {
                    Some(Vec3 {
                        x: num(c[0])?,
                        y: num(c[1])?,
                        z: num(c[2])?,
                    })
                })
                .collect::<Option<Vec<_>>>()?;
            Some(Op::Move { path, release })
        }
        _ => None,
    }
}
