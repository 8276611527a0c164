//! Contact traces: data model, the normalized CSV format, validation and a
//! synthetic generator with Zipf-distributed AP popularity.
//!
//! The CSV format has one event per line:
//!
//! ```text
//! time,device_a,device_b,KIND[,ap1[;ap2;...]]
//! ```
//!
//! `KIND` is `D` (direct link, exactly four fields) or `I` (infrastructure
//! link, fifth field holds a non-empty `;`-separated AP path). Lines starting
//! with `#` are comments, and a first data line whose leading field is not
//! numeric is treated as a header. A comment of the form
//! `# devices=N aps=M` declares the roster size; with it present the ids in
//! the file are taken verbatim and must lie below the declared counts, which
//! keeps devices and APs that never appear in an event.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApId(pub u32);

impl DeviceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ApId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for ApId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinkKind {
    Direct,
    /// Ordered AP path. May repeat an AP; blocking and tallies treat the
    /// path as a set.
    Infrastructure(Vec<ApId>),
}

impl LinkKind {
    pub fn is_direct(&self) -> bool {
        matches!(self, LinkKind::Direct)
    }

    /// Distinct APs on the path, in first-occurrence order. Empty for direct
    /// links.
    pub fn distinct_aps(&self) -> impl Iterator<Item = ApId> + '_ {
        let path: &[ApId] = match self {
            LinkKind::Direct => &[],
            LinkKind::Infrastructure(path) => path,
        };
        path.iter()
            .enumerate()
            .filter(move |(i, ap)| !path[..*i].contains(ap))
            .map(|(_, ap)| *ap)
    }
}

/// One undirected contact between two devices.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactEvent {
    pub time: f64,
    pub a: DeviceId,
    pub b: DeviceId,
    pub kind: LinkKind,
}

impl ContactEvent {
    pub fn direct(time: f64, a: u32, b: u32) -> Self {
        Self {
            time,
            a: DeviceId(a),
            b: DeviceId(b),
            kind: LinkKind::Direct,
        }
    }

    pub fn infrastructure(time: f64, a: u32, b: u32, path: &[u32]) -> Self {
        Self {
            time,
            a: DeviceId(a),
            b: DeviceId(b),
            kind: LinkKind::Infrastructure(path.iter().copied().map(ApId).collect()),
        }
    }
}

/// An immutable, time-ordered contact log with its device and AP rosters.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    devices: usize,
    aps: usize,
    events: Vec<ContactEvent>,
    device_labels: Vec<u64>,
    ap_labels: Vec<u64>,
}

impl Trace {
    /// Builds a trace from dense ids, stably sorting events by time.
    pub fn new(devices: usize, aps: usize, events: Vec<ContactEvent>) -> Result<Self> {
        let mut trace = Self::from_raw(devices, aps, events);
        trace.events.sort_by(|x, y| x.time.total_cmp(&y.time));
        if let Some(v) = validate(&trace).into_iter().next() {
            return Err(Error::InvalidParams(format!("invalid trace: {v}")));
        }
        Ok(trace)
    }

    /// Wraps events as given, without sorting or checking. Intended for
    /// adapters and for exercising [`validate`].
    pub fn from_raw(devices: usize, aps: usize, events: Vec<ContactEvent>) -> Self {
        Self {
            devices,
            aps,
            events,
            device_labels: (0..devices as u64).collect(),
            ap_labels: (0..aps as u64).collect(),
        }
    }

    pub fn devices(&self) -> usize {
        self.devices
    }

    pub fn aps(&self) -> usize {
        self.aps
    }

    pub fn events(&self) -> &[ContactEvent] {
        &self.events
    }

    /// Time of the last event, or 0 for an empty trace.
    pub fn duration(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    /// Original file id of each dense device id.
    pub fn device_labels(&self) -> &[u64] {
        &self.device_labels
    }

    /// Original file id of each dense AP id.
    pub fn ap_labels(&self) -> &[u64] {
        &self.ap_labels
    }

    pub fn infrastructure_events(&self) -> usize {
        self.events.iter().filter(|e| !e.kind.is_direct()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Unsorted,
    NegativeTime,
    SelfContact,
    DeviceOutOfRange,
    ApOutOfRange,
    EmptyPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Unsorted => "event earlier than its predecessor",
            ViolationKind::NegativeTime => "negative or non-finite time",
            ViolationKind::SelfContact => "self-contact",
            ViolationKind::DeviceOutOfRange => "device id out of range",
            ViolationKind::ApOutOfRange => "AP id out of range",
            ViolationKind::EmptyPath => "empty infrastructure path",
        };
        write!(f, "event {}: {what}", self.index)
    }
}

/// Lists every invariant violation in `trace`. Ordering is reported once, at
/// the first inversion.
pub fn validate(trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |index, kind| out.push(Violation { index, kind });
    let mut inversion_seen = false;
    for (index, event) in trace.events.iter().enumerate() {
        if !inversion_seen && index > 0 && event.time < trace.events[index - 1].time {
            inversion_seen = true;
            push(index, ViolationKind::Unsorted);
        }
        if !(event.time >= 0.0 && event.time.is_finite()) {
            push(index, ViolationKind::NegativeTime);
        }
        if event.a == event.b {
            push(index, ViolationKind::SelfContact);
        }
        if event.a.index() >= trace.devices || event.b.index() >= trace.devices {
            push(index, ViolationKind::DeviceOutOfRange);
        }
        if let LinkKind::Infrastructure(path) = &event.kind {
            if path.is_empty() {
                push(index, ViolationKind::EmptyPath);
            }
            if path.iter().any(|ap| ap.index() >= trace.aps) {
                push(index, ViolationKind::ApOutOfRange);
            }
        }
    }
    out
}

/// How file ids become dense ids when no roster comment is present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IdMapping {
    /// Order-preserving remap of the observed ids onto `0..n`.
    #[default]
    Dense,
    /// Keep ids verbatim; the roster spans `0..=max_id`.
    Verbatim,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub ids: IdMapping,
}

struct RawEvent {
    time: f64,
    a: u64,
    b: u64,
    path: Option<Vec<u64>>,
    line: usize,
}

pub fn parse_trace<R: BufRead>(input: R) -> Result<Trace> {
    parse_trace_with(input, ParseOptions::default())
}

pub fn parse_trace_str(input: &str) -> Result<Trace> {
    parse_trace(input.as_bytes())
}

pub fn parse_trace_with<R: BufRead>(input: R, options: ParseOptions) -> Result<Trace> {
    let mut raw = Vec::new();
    let mut roster: Option<(usize, usize)> = None;
    let mut seen_data = false;

    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(r) = parse_roster(comment) {
                roster = Some(r);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_data {
            seen_data = true;
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
        }
        raw.push(parse_line(&fields, line_no)?);
    }

    if raw.is_empty() && roster.is_none() {
        return Err(Error::EmptyFile);
    }

    let (device_labels, ap_labels) = match roster {
        Some((devices, aps)) => {
            for ev in &raw {
                let bad_device = [ev.a, ev.b].into_iter().find(|&id| id >= devices as u64);
                if let Some(id) = bad_device {
                    return Err(parse_err(ev.line, format!("device {id} exceeds declared roster of {devices}")));
                }
                if let Some(id) = ev.path.iter().flatten().find(|&&id| id >= aps as u64) {
                    return Err(parse_err(ev.line, format!("AP {id} exceeds declared roster of {aps}")));
                }
            }
            ((0..devices as u64).collect(), (0..aps as u64).collect())
        }
        None => {
            let device_ids = raw.iter().flat_map(|e| [e.a, e.b]);
            let ap_ids = raw.iter().flat_map(|e| e.path.iter().flatten().copied());
            match options.ids {
                IdMapping::Dense => (sorted_unique(device_ids), sorted_unique(ap_ids)),
                IdMapping::Verbatim => (
                    (0..device_ids.max().map_or(0, |m| m + 1)).collect(),
                    (0..ap_ids.max().map_or(0, |m| m + 1)).collect(),
                ),
            }
        }
    };

    let device_index = index_of(&device_labels);
    let ap_index = index_of(&ap_labels);
    let mut events: Vec<ContactEvent> = raw
        .into_iter()
        .map(|ev| ContactEvent {
            time: ev.time,
            a: DeviceId(device_index[&ev.a]),
            b: DeviceId(device_index[&ev.b]),
            kind: match ev.path {
                None => LinkKind::Direct,
                Some(path) => LinkKind::Infrastructure(path.iter().map(|id| ApId(ap_index[id])).collect()),
            },
        })
        .collect();
    events.sort_by(|x, y| x.time.total_cmp(&y.time));

    Ok(Trace {
        devices: device_labels.len(),
        aps: ap_labels.len(),
        events,
        device_labels,
        ap_labels,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_roster(comment: &str) -> Option<(usize, usize)> {
    let mut devices = None;
    let mut aps = None;
    for token in comment.split_whitespace() {
        let (key, value) = token.split_once('=')?;
        match key {
            "devices" => devices = Some(value.parse().ok()?),
            "aps" => aps = Some(value.parse().ok()?),
            _ => return None,
        }
    }
    Some((devices?, aps?))
}

fn parse_line(fields: &[&str], line: usize) -> Result<RawEvent> {
    if fields.len() < 4 {
        return Err(parse_err(line, format!("expected at least 4 fields, found {}", fields.len())));
    }
    let time: f64 = fields[0]
        .parse()
        .map_err(|_| parse_err(line, format!("invalid time {:?}", fields[0])))?;
    if !time.is_finite() {
        return Err(parse_err(line, "non-finite time"));
    }
    if time < 0.0 {
        return Err(parse_err(line, format!("negative time {time}")));
    }
    let id = |s: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| parse_err(line, format!("invalid device id {s:?}")))
    };
    let a = id(fields[1])?;
    let b = id(fields[2])?;
    if a == b {
        return Err(parse_err(line, format!("self-contact of device {a}")));
    }
    let path = match fields[3] {
        "D" => {
            if fields.len() != 4 {
                return Err(parse_err(line, "direct contact must have exactly 4 fields"));
            }
            None
        }
        "I" => {
            if fields.len() != 5 {
                return Err(parse_err(line, "infrastructure contact must have exactly 5 fields"));
            }
            if fields[4].is_empty() {
                return Err(parse_err(line, "empty infrastructure path"));
            }
            let path = fields[4]
                .split(';')
                .map(|s| {
                    let s = s.trim();
                    if s.is_empty() {
                        return Err(parse_err(line, "empty AP id in path"));
                    }
                    s.parse()
                        .map_err(|_| parse_err(line, format!("invalid AP id {s:?}")))
                })
                .collect::<Result<Vec<u64>>>()?;
            Some(path)
        }
        other => return Err(parse_err(line, format!("unknown link kind {other:?}"))),
    };
    Ok(RawEvent {
        time,
        a,
        b,
        path,
        line,
    })
}

fn sorted_unique(ids: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut v: Vec<u64> = ids.collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn index_of(labels: &[u64]) -> BTreeMap<u64, u32> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| (label, i as u32))
        .collect()
}

/// Writes `trace` in the CSV format with a roster comment and dense ids.
/// Times use the shortest representation that parses back to the same `f64`.
pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> io::Result<()> {
    writeln!(out, "# devices={} aps={}", trace.devices, trace.aps)?;
    for e in &trace.events {
        match &e.kind {
            LinkKind::Direct => writeln!(out, "{},{},{},D", e.time, e.a, e.b)?,
            LinkKind::Infrastructure(path) => {
                write!(out, "{},{},{},I,", e.time, e.a, e.b)?;
                for (i, ap) in path.iter().enumerate() {
                    if i > 0 {
                        out.write_all(b";")?;
                    }
                    write!(out, "{ap}")?;
                }
                writeln!(out)?;
            }
        }
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub n_devices: usize,
    pub n_aps: usize,
    /// Seconds.
    pub duration: f64,
    /// Mean contacts initiated per device per second.
    pub contact_rate: f64,
    pub direct_fraction: f64,
    pub ap_zipf_alpha: f64,
    pub max_path_len: usize,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_devices: 50,
            n_aps: 200,
            duration: 10_000.0,
            contact_rate: 0.01,
            direct_fraction: 0.2,
            ap_zipf_alpha: 1.2,
            max_path_len: 2,
            seed: 1,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_devices == 0 {
            return bad("n_devices must be at least 1");
        }
        if self.n_aps == 0 {
            return bad("n_aps must be at least 1");
        }
        if self.n_devices > u32::MAX as usize || self.n_aps > u32::MAX as usize {
            return bad("roster exceeds 32-bit id space");
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return bad("duration must be finite and non-negative");
        }
        if !(self.contact_rate.is_finite() && self.contact_rate >= 0.0) {
            return bad("contact_rate must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.direct_fraction) {
            return bad("direct_fraction must lie in [0, 1]");
        }
        if !(self.ap_zipf_alpha.is_finite() && self.ap_zipf_alpha > 0.0) {
            return bad("ap_zipf_alpha must be positive");
        }
        if self.max_path_len == 0 {
            return bad("max_path_len must be at least 1");
        }
        Ok(())
    }
}

/// Draws a synthetic trace.
///
/// Each device initiates contacts as a Poisson process of rate
/// `contact_rate` over `[0, duration]`, picking its partner uniformly among
/// the other devices. A contact is direct with probability
/// `direct_fraction`; otherwise it routes through 1..=`max_path_len` APs,
/// each drawn from a Zipf law in which AP 0 is the most popular.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<Trace> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let zipf = Zipf::new(params.n_aps as f64, params.ap_zipf_alpha)
        .map_err(|e| Error::InvalidParams(format!("zipf: {e}")))?;
    let mut events = Vec::new();

    if params.contact_rate > 0.0 && params.n_devices >= 2 {
        let gap = Exp::new(params.contact_rate)
            .map_err(|e| Error::InvalidParams(format!("contact_rate: {e}")))?;
        for a in 0..params.n_devices as u32 {
            let mut t = 0.0;
            loop {
                t += gap.sample(&mut rng);
                if t > params.duration {
                    break;
                }
                let mut b = rng.random_range(0..params.n_devices as u32 - 1);
                if b >= a {
                    b += 1;
                }
                let kind = if rng.random_bool(params.direct_fraction) {
                    LinkKind::Direct
                } else {
                    let len = rng.random_range(1..=params.max_path_len);
                    LinkKind::Infrastructure(
                        (0..len)
                            .map(|_| ApId(zipf.sample(&mut rng) as u32 - 1))
                            .collect(),
                    )
                };
                events.push(ContactEvent {
                    time: t,
                    a: DeviceId(a),
                    b: DeviceId(b),
                    kind,
                });
            }
        }
    }

    Trace::new(params.n_devices, params.n_aps, events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_of(text: &str) -> Trace {
        parse_trace_str(text).unwrap()
    }

    #[test]
    fn parses_direct_and_infrastructure_lines() {
        let t = parse_trace_with(
            "0.0,3,7,D\n1.5,3,9,I,2".as_bytes(),
            ParseOptions {
                ids: IdMapping::Verbatim,
            },
        )
        .unwrap();
        assert!(t.devices() >= 10);
        assert!(t.aps() >= 3);
        assert_eq!(t.events().len(), 2);
        assert_eq!(t.events()[1].kind, LinkKind::Infrastructure(vec![ApId(2)]));
    }

    #[test]
    fn dense_mapping_records_labels() {
        let t = trace_of("0.0,3,7,D\n1.5,3,9,I,2");
        assert_eq!(t.devices(), 3);
        assert_eq!(t.aps(), 1);
        assert_eq!(t.device_labels(), &[3, 7, 9]);
        assert_eq!(t.ap_labels(), &[2]);
        assert_eq!(t.events()[1].b, DeviceId(2));
        assert_eq!(t.events()[1].kind, LinkKind::Infrastructure(vec![ApId(0)]));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse_trace_str(""), Err(Error::EmptyFile)));
        assert!(matches!(parse_trace_str("# only a comment\n"), Err(Error::EmptyFile)));
    }

    #[test]
    fn equal_times_keep_file_order() {
        let t = trace_of("5.0,0,1,D\n1.0,1,2,D\n1.0,2,3,D\n");
        let times: Vec<f64> = t.events().iter().map(|e| e.time).collect();
        assert_eq!(times, vec![1.0, 1.0, 5.0]);
        assert_eq!(t.events()[0].a, DeviceId(1));
        assert_eq!(t.events()[1].a, DeviceId(2));
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let t = trace_of("# produced by hand\ntime,a,b,kind,path\n0.5,0,1,I,0;1\n");
        assert_eq!(t.events().len(), 1);
        assert_eq!(t.aps(), 2);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cases = [
            ("0,1,2,D\n1,4,4,D\n", 2, "self-contact"),
            ("0,1,2,D\n# c\n-1,1,2,D\n", 3, "negative"),
            ("0,1,2,I,\n", 1, "empty infrastructure path"),
            ("0,1,2,I\n", 1, "5 fields"),
            ("0,1,2,D,4\n", 1, "4 fields"),
            ("0,1,2,X\n", 1, "unknown link kind"),
            ("0,1\n", 1, "at least 4"),
            ("0,1,x,D\n", 1, "device id"),
            ("0,1,2,D\nabc,1,2,D\n", 2, "invalid time"),
        ];
        for (text, line, needle) in cases {
            match parse_trace_str(text) {
                Err(Error::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}");
                    assert!(message.contains(needle), "{message} lacks {needle}");
                }
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn roster_comment_keeps_isolated_ids() {
        let t = trace_of("# devices=5 aps=4\n1,0,1,I,3\n");
        assert_eq!((t.devices(), t.aps()), (5, 4));
        assert!(parse_trace_str("# devices=2 aps=4\n1,0,2,D\n").is_err());
    }

    #[test]
    fn validate_reports_each_violation() {
        let good = trace_of("0,0,1,D\n1,1,2,I,0\n");
        assert!(validate(&good).is_empty());

        let mut events: Vec<ContactEvent> = (0..6).map(|i| ContactEvent::direct(i as f64, 0, 1)).collect();
        events[4].b = DeviceId(0);
        let t = Trace::from_raw(2, 1, events);
        assert_eq!(
            validate(&t),
            vec![Violation {
                index: 4,
                kind: ViolationKind::SelfContact
            }]
        );

        let t = Trace::from_raw(
            3,
            1,
            vec![
                ContactEvent::direct(2.0, 0, 1),
                ContactEvent::direct(1.0, 0, 1),
                ContactEvent::direct(0.5, 0, 1),
            ],
        );
        assert_eq!(
            validate(&t),
            vec![Violation {
                index: 1,
                kind: ViolationKind::Unsorted
            }]
        );

        let t = Trace::from_raw(
            2,
            1,
            vec![
                ContactEvent::infrastructure(0.0, 0, 1, &[]),
                ContactEvent::infrastructure(1.0, 0, 5, &[3]),
            ],
        );
        let kinds: Vec<_> = validate(&t).into_iter().map(|v| (v.index, v.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, ViolationKind::EmptyPath),
                (1, ViolationKind::DeviceOutOfRange),
                (1, ViolationKind::ApOutOfRange),
            ]
        );
    }

    #[test]
    fn distinct_aps_collapse_repeats() {
        let kind = LinkKind::Infrastructure(vec![ApId(0), ApId(0), ApId(1), ApId(0)]);
        assert_eq!(kind.distinct_aps().collect::<Vec<_>>(), vec![ApId(0), ApId(1)]);
        assert_eq!(LinkKind::Direct.distinct_aps().count(), 0);
    }

    #[test]
    fn zero_rate_generates_no_events() {
        let t = generate_synthetic(&SyntheticParams {
            n_devices: 2,
            contact_rate: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(t.events().is_empty());
        assert_eq!(t.devices(), 2);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = SyntheticParams {
            duration: 500.0,
            ..Default::default()
        };
        assert_eq!(generate_synthetic(&p).unwrap(), generate_synthetic(&p).unwrap());
        let other = SyntheticParams { seed: 2, ..p.clone() };
        assert_ne!(generate_synthetic(&p).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn invalid_synthetic_params_are_rejected() {
        let base = SyntheticParams::default();
        let bad = [
            SyntheticParams { n_devices: 0, ..base.clone() },
            SyntheticParams { n_aps: 0, ..base.clone() },
            SyntheticParams { contact_rate: -1.0, ..base.clone() },
            SyntheticParams { direct_fraction: 1.5, ..base.clone() },
            SyntheticParams { ap_zipf_alpha: 0.0, ..base.clone() },
            SyntheticParams { max_path_len: 0, ..base.clone() },
            SyntheticParams { duration: f64::NAN, ..base.clone() },
        ];
        for p in bad {
            assert!(matches!(generate_synthetic(&p), Err(Error::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn zipf_skew_favours_low_ids() {
        let t = generate_synthetic(&SyntheticParams {
            n_devices: 50,
            n_aps: 200,
            ap_zipf_alpha: 1.2,
            duration: 10_000.0,
            contact_rate: 0.01,
            direct_fraction: 0.2,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let mut counts = vec![0usize; t.aps()];
        for e in t.events() {
            for ap in e.kind.distinct_aps() {
                counts[ap.index()] += 1;
            }
        }
        let top = *counts.iter().max().unwrap();
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        let median = sorted[sorted.len() / 2];
        assert!(top > median, "top {top} median {median}");
    }

    #[test]
    fn write_then_parse_is_identity() {
        let t = generate_synthetic(&SyntheticParams {
            duration: 300.0,
            max_path_len: 3,
            ..Default::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        assert_eq!(parse_trace(buf.as_slice()).unwrap(), t);
    }
}
