#![allow(dead_code)]

use std::fmt;

use ebdevs::{ClassicAtomic, SimTime};

pub fn t(v: f64) -> SimTime {
    SimTime::from_f64(v)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Job(u32),
    Done(u32),
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Job::Job(k) => write!(f, "job{k}"),
            Job::Done(k) => write!(f, "done{k}"),
        }
    }
}

/// Emits job1, job2, ... every `period`, first one at `period`.
pub struct Generator {
    pub period: f64,
    pub next: u32,
}

impl ClassicAtomic for Generator {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        t(self.period)
    }
    fn internal(&mut self) {
        self.next += 1;
    }
    fn external(&mut self, _e: SimTime, _x: &Job) {}
    fn output(&self) -> Option<Job> {
        Some(Job::Job(self.next))
    }
    fn describe(&self) -> String {
        format!("next={}", self.next)
    }
}

/// Single-slot server; jobs arriving while busy are dropped.
pub struct Server {
    pub service: f64,
    pub busy: Option<u32>,
    pub sigma: SimTime,
    pub dropped: u32,
}

impl Server {
    pub fn new(service: f64) -> Self {
        Server { service, busy: None, sigma: SimTime::INFINITY, dropped: 0 }
    }
}

impl ClassicAtomic for Server {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        self.sigma
    }
    fn internal(&mut self) {
        self.busy = None;
        self.sigma = SimTime::INFINITY;
    }
    fn external(&mut self, e: SimTime, x: &Job) {
        if let Job::Job(k) = x {
            match self.busy {
                None => {
                    self.busy = Some(*k);
                    self.sigma = t(self.service);
                }
                Some(_) => {
                    self.dropped += 1;
                    self.sigma = self.sigma - e;
                }
            }
        }
    }
    fn output(&self) -> Option<Job> {
        self.busy.map(Job::Done)
    }
    fn describe(&self) -> String {
        match self.busy {
            Some(k) => format!("busy({k}) dropped={}", self.dropped),
            None => format!("idle dropped={}", self.dropped),
        }
    }
}

/// Passive counter of completed jobs.
#[derive(Default)]
pub struct Sink {
    pub count: u32,
    pub last: Option<u32>,
}

impl ClassicAtomic for Sink {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        SimTime::INFINITY
    }
    fn internal(&mut self) {}
    fn external(&mut self, _e: SimTime, x: &Job) {
        if let Job::Done(k) = x {
            self.count += 1;
            self.last = Some(*k);
        }
    }
    fn output(&self) -> Option<Job> {
        None
    }
    fn describe(&self) -> String {
        match self.last {
            Some(k) => format!("count={} last={k}", self.count),
            None => format!("count={}", self.count),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball;

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ball")
    }
}

/// Holds the ball for zero time and passes it on.
pub struct Player {
    pub has_ball: bool,
}

impl ClassicAtomic for Player {
    type Message = Ball;
    fn time_advance(&self) -> SimTime {
        if self.has_ball {
            SimTime::ZERO
        } else {
            SimTime::INFINITY
        }
    }
    fn internal(&mut self) {
        self.has_ball = false;
    }
    fn external(&mut self, _e: SimTime, _x: &Ball) {
        self.has_ball = true;
    }
    fn output(&self) -> Option<Ball> {
        self.has_ball.then_some(Ball)
    }
    fn describe(&self) -> String {
        if self.has_ball { "ball" } else { "empty" }.to_string()
    }
}

// ---- fixtures with micro-macro channels ----

use ebdevs::{Atomic, GlobalState, ModelError, ModelId};

#[derive(Clone, Debug, PartialEq)]
pub struct Msg(pub u32);

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

/// Fires every `period` (forever, or `shots` times), emitting `Msg(k)` and
/// sending up `label:k`. Remembers the views it saw.
pub struct Source {
    pub label: &'static str,
    pub period: f64,
    pub shots: Option<u32>,
    pub fired: u32,
    pub views: Vec<u64>,
    pub send_up: bool,
}

impl Source {
    pub fn new(label: &'static str, period: f64) -> Self {
        Source { label, period, shots: None, fired: 0, views: Vec::new(), send_up: true }
    }
}

impl Atomic for Source {
    type Message = Msg;
    type Up = String;
    type View = u64;

    fn time_advance(&self) -> SimTime {
        match self.shots {
            Some(n) if self.fired >= n => SimTime::INFINITY,
            _ => t(self.period),
        }
    }
    fn internal(&mut self, view: Option<&u64>) -> Result<Option<String>, ModelError> {
        self.views.push(view.copied().unwrap_or(u64::MAX));
        self.fired += 1;
        Ok(self.send_up.then(|| format!("{}:{}", self.label, self.fired)))
    }
    fn external(&mut self, _e: SimTime, _x: &Msg, _v: Option<&u64>) -> Result<Option<String>, ModelError> {
        Ok(None)
    }
    fn output(&self) -> Option<Msg> {
        Some(Msg(self.fired + 1))
    }
    fn describe(&self) -> String {
        format!("fired={} views={:?}", self.fired, self.views)
    }
}

/// Passive; on input records the message and the view, and sends up `got:k`.
#[derive(Default)]
pub struct Recorder {
    pub seen: Vec<(u32, u64, f64)>,
}

impl Atomic for Recorder {
    type Message = Msg;
    type Up = String;
    type View = u64;

    fn time_advance(&self) -> SimTime {
        SimTime::INFINITY
    }
    fn internal(&mut self, _v: Option<&u64>) -> Result<Option<String>, ModelError> {
        Ok(None)
    }
    fn external(&mut self, e: SimTime, x: &Msg, v: Option<&u64>) -> Result<Option<String>, ModelError> {
        self.seen.push((x.0, v.copied().unwrap_or(u64::MAX), e.value()));
        Ok(Some(format!("got:{}", x.0)))
    }
    fn output(&self) -> Option<Msg> {
        None
    }
    fn describe(&self) -> String {
        format!("{:?}", self.seen)
    }
}

/// Global state that logs every invocation. The view is the total number of
/// up-messages received so far, which is insensitive to how bags are split.
#[derive(Clone, Default)]
pub struct Ledger {
    pub received: u64,
    pub log: Vec<(f64, String)>,
    pub emit_up: bool,
}

impl GlobalState for Ledger {
    type Up = String;
    type View = u64;
    type GlobalUp = String;
    type ParentView = u64;

    fn view(&self, _child: ModelId) -> Option<u64> {
        Some(self.received)
    }
    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, String)],
        _parent: Option<&u64>,
    ) -> Result<Option<String>, ModelError> {
        self.received += bag.len() as u64;
        let items: Vec<String> = bag.iter().map(|(id, u)| format!("{id}={u}")).collect();
        self.log.push((elapsed.value(), items.join(",")));
        Ok(self.emit_up.then(|| format!("n{}", bag.len())))
    }
    fn describe(&self) -> String {
        format!("received={} log={:?}", self.received, self.log)
    }
}

/// Root-level variant of [`Ledger`] (no parent channels).
#[derive(Clone, Default)]
pub struct RootLedger {
    pub received: u64,
    pub log: Vec<(f64, String)>,
}

impl GlobalState for RootLedger {
    type Up = String;
    type View = u64;
    type GlobalUp = ebdevs::Null;
    type ParentView = ebdevs::Null;

    fn view(&self, _child: ModelId) -> Option<u64> {
        Some(self.received)
    }
    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, String)],
        _parent: Option<&ebdevs::Null>,
    ) -> Result<Option<ebdevs::Null>, ModelError> {
        self.received += bag.len() as u64;
        let items: Vec<String> = bag.iter().map(|(id, u)| format!("{id}={u}")).collect();
        self.log.push((elapsed.value(), items.join(",")));
        Ok(None)
    }
    fn describe(&self) -> String {
        format!("received={} log={:?}", self.received, self.log)
    }
}
