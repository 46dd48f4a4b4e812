//! Line-oriented text formats for instances and matchings.
//!
//! Instance files state their units up front and keep gains in dB:
//!
//! ```text
//! # relaymatch instance
//! units gain=dB noise=dBm
//! log_base natural
//! noise_dbm -105
//! size 1 2
//! pu 0 direct_gain_db -130 coop_time 1 tx 10 20 rx 990 20
//! su 0 power_sensitivity 1 band_gain_db -102 tx 500 500 rx 900 500
//! su 1 power_sensitivity 1 band_gain_db -101.5
//! link 0 0 g1_db -104 g2_db -103
//! link 0 1 g1_db -108 g2_db -99
//! ```
//!
//! Matching files hold one record per matched pair:
//! `m <idx> n <idx> p <float> t <float> delta <float>`.
//! Blank lines and lines starting with `#` are ignored in both formats.

use std::fmt::Write;

use crate::channel::{
    Gain, LinkGains, LogBase, NetworkInstance, Point, PuParams, ResourceExchange, SuParams,
};
use crate::equilibrium::{Assignment, Matching};
use crate::error::{Error, Result};

const UNITS: &str = "units gain=dB noise=dBm";

fn positions(out: &mut String, tx: Option<Point>, rx: Option<Point>) {
    if let Some(p) = tx {
        write!(out, " tx {} {}", p.x, p.y).unwrap();
    }
    if let Some(p) = rx {
        write!(out, " rx {} {}", p.x, p.y).unwrap();
    }
}

pub fn write_instance(instance: &NetworkInstance) -> String {
    let mut out = String::new();
    out.push_str("# relaymatch instance\n");
    out.push_str(UNITS);
    out.push('\n');
    writeln!(out, "log_base {}", instance.log_base().name()).unwrap();
    writeln!(out, "noise_dbm {}", instance.noise().db()).unwrap();
    writeln!(out, "size {} {}", instance.num_pus(), instance.num_sus()).unwrap();
    for (m, pu) in instance.pus().iter().enumerate() {
        write!(
            out,
            "pu {m} direct_gain_db {} coop_time {}",
            pu.direct_gain.db(),
            pu.coop_time
        )
        .unwrap();
        positions(&mut out, pu.tx, pu.rx);
        out.push('\n');
    }
    for (n, su) in instance.sus().iter().enumerate() {
        write!(
            out,
            "su {n} power_sensitivity {} band_gain_db",
            su.power_sensitivity
        )
        .unwrap();
        for g in &su.band_gains {
            write!(out, " {}", g.db()).unwrap();
        }
        positions(&mut out, su.tx, su.rx);
        out.push('\n');
    }
    for m in 0..instance.num_pus() {
        for n in 0..instance.num_sus() {
            let l = instance.link(m, n);
            writeln!(
                out,
                "link {m} {n} g1_db {} g2_db {}",
                l.to_relay.db(),
                l.to_receiver.db()
            )
            .unwrap();
        }
    }
    out
}

/// Tokens of one line with a cursor and line-numbered errors.
struct Tokens<'a> {
    line: usize,
    items: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Tokens {
            line,
            items: text.split_whitespace().collect(),
            pos: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.items.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).copied()
    }

    fn word(&mut self, what: &str) -> Result<&'a str> {
        self.next()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn expect(&mut self, key: &str) -> Result<()> {
        match self.next() {
            Some(k) if k == key => Ok(()),
            Some(k) => Err(self.err(format!("expected `{key}`, found `{k}`"))),
            None => Err(self.err(format!("expected `{key}`"))),
        }
    }

    fn float(&mut self, what: &str) -> Result<f64> {
        let w = self.word(what)?;
        let v: f64 = w
            .parse()
            .map_err(|_| self.err(format!("{what}: `{w}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(format!("{what} must be finite")));
        }
        Ok(v)
    }

    fn index(&mut self, what: &str) -> Result<usize> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| self.err(format!("{what}: `{w}` is not an index")))
    }

    fn keyed_float(&mut self, key: &str) -> Result<f64> {
        self.expect(key)?;
        self.float(key)
    }

    fn positions(&mut self) -> Result<(Option<Point>, Option<Point>)> {
        let (mut tx, mut rx) = (None, None);
        while let Some(k) = self.next() {
            let p = Point::new(self.float(k)?, self.float(k)?);
            match k {
                "tx" => tx = Some(p),
                "rx" => rx = Some(p),
                other => return Err(self.err(format!("unexpected `{other}`"))),
            }
        }
        Ok((tx, rx))
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.err(format!("trailing `{t}`"))),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_instance(text: &str) -> Result<NetworkInstance> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(UNITS.split_whitespace()) => {}
        Some((i, l)) => {
            return Err(Error::Parse {
                line: i,
                msg: format!("expected `{UNITS}` header, found `{l}`"),
            })
        }
        None => return Err(Error::EmptyInput),
    }

    let mut log_base = None;
    let mut noise = None;
    let mut size: Option<(usize, usize)> = None;
    let mut pus: Vec<Option<PuParams>> = Vec::new();
    let mut sus: Vec<Option<SuParams>> = Vec::new();
    let mut links: Vec<Option<LinkGains>> = Vec::new();
    let mut last_line = 0;

    for (i, l) in lines {
        last_line = i;
        let mut t = Tokens::new(i, l);
        let key = t.word("record type")?;
        let need_size = |t: &Tokens| size.ok_or_else(|| t.err("`size` must precede records"));
        match key {
            "log_base" => {
                let w = t.word("log base")?;
                log_base = Some(w.parse::<LogBase>().map_err(|e| t.err(e.to_string()))?);
            }
            "noise_dbm" => noise = Some(Gain::from_db(t.float("noise_dbm")?)),
            "size" => {
                let (m, n) = (t.index("PU count")?, t.index("SU count")?);
                size = Some((m, n));
                pus = vec![None; m];
                sus = vec![None; n];
                links = vec![None; m * n];
            }
            "pu" => {
                let (mm, _) = need_size(&t)?;
                let m = t.index("PU index")?;
                if m >= mm || pus[m].is_some() {
                    return Err(t.err(format!("PU {m} out of range or repeated")));
                }
                let direct_gain = Gain::from_db(t.keyed_float("direct_gain_db")?);
                let coop_time = t.keyed_float("coop_time")?;
                let (tx, rx) = t.positions()?;
                pus[m] = Some(PuParams {
                    id: m,
                    direct_gain,
                    coop_time,
                    tx,
                    rx,
                });
            }
            "su" => {
                let (mm, nn) = need_size(&t)?;
                let n = t.index("SU index")?;
                if n >= nn || sus[n].is_some() {
                    return Err(t.err(format!("SU {n} out of range or repeated")));
                }
                let power_sensitivity = t.keyed_float("power_sensitivity")?;
                t.expect("band_gain_db")?;
                let band_gains = (0..mm)
                    .map(|_| t.float("band_gain_db").map(Gain::from_db))
                    .collect::<Result<Vec<_>>>()?;
                let (tx, rx) = t.positions()?;
                sus[n] = Some(SuParams {
                    id: n,
                    power_sensitivity,
                    band_gains,
                    tx,
                    rx,
                });
            }
            "link" => {
                let (mm, nn) = need_size(&t)?;
                let (m, n) = (t.index("PU index")?, t.index("SU index")?);
                if m >= mm || n >= nn || links[m * nn + n].is_some() {
                    return Err(t.err(format!("link ({m}, {n}) out of range or repeated")));
                }
                links[m * nn + n] = Some(LinkGains {
                    to_relay: Gain::from_db(t.keyed_float("g1_db")?),
                    to_receiver: Gain::from_db(t.keyed_float("g2_db")?),
                });
            }
            other => return Err(t.err(format!("unknown record `{other}`"))),
        }
        t.finish()?;
    }

    let missing = |what: &str| Error::Parse {
        line: last_line,
        msg: format!("missing {what}"),
    };
    let noise = noise.ok_or_else(|| missing("noise_dbm"))?;
    size.ok_or_else(|| missing("size"))?;
    let pus = pus
        .into_iter()
        .enumerate()
        .map(|(m, p)| p.ok_or_else(|| missing(&format!("pu {m}"))))
        .collect::<Result<Vec<_>>>()?;
    let sus = sus
        .into_iter()
        .enumerate()
        .map(|(n, s)| s.ok_or_else(|| missing(&format!("su {n}"))))
        .collect::<Result<Vec<_>>>()?;
    let links = links
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| missing(&format!("link record #{i}"))))
        .collect::<Result<Vec<_>>>()?;
    NetworkInstance::new(pus, sus, links, noise, log_base.unwrap_or_default())
}

pub fn write_matching(matching: &Matching) -> String {
    let mut out = format!(
        "# matching of {} PUs and {} SUs\n",
        matching.num_pus(),
        matching.num_sus()
    );
    for (m, n) in matching.assignment.pairs() {
        let ex = matching.exchanges[n].unwrap_or_default();
        writeln!(
            out,
            "m {m} n {n} p {} t {} delta {}",
            ex.relay_power, ex.access_time, matching.su_utilities[n]
        )
        .unwrap();
    }
    out
}

/// Parses a matching for a market of `pus` PUs and `sus` SUs.
pub fn parse_matching(text: &str, pus: usize, sus: usize) -> Result<Matching> {
    let mut pairs = Vec::new();
    let mut deltas = vec![0.0; sus];
    let mut exchanges = vec![None; sus];
    for (i, l) in content_lines(text) {
        let mut t = Tokens::new(i, l);
        t.expect("m")?;
        let m = t.index("PU index")?;
        t.expect("n")?;
        let n = t.index("SU index")?;
        let p = t.keyed_float("p")?;
        let time = t.keyed_float("t")?;
        let delta = t.keyed_float("delta")?;
        t.finish()?;
        if n >= sus {
            return Err(t.err(format!("SU {n} outside a market of {sus} SUs")));
        }
        if p < 0.0 || time < 0.0 {
            return Err(t.err("relay power and access time must be nonnegative"));
        }
        pairs.push((m, n));
        deltas[n] = delta;
        exchanges[n] = Some(ResourceExchange::new(p, time));
    }
    let assignment = Assignment::from_pairs(pus, sus, &pairs)?;
    Matching::new(assignment, deltas, exchanges)
}
