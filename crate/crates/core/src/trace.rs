//! Per-event trajectory CSV.

use std::io::{self, Write};

use crate::dynamics::EventRecord;
use crate::numfmt::sig17;
use crate::scalar::Scalar;
use crate::space::NormSpec;

pub const TRACE_HEADER: &str = "event,time,vertex,x_center,max_pair_dist";

/// Streams one CSV row per event; numbers use 17 significant digits.
pub struct TraceWriter<W: Write, T> {
    out: W,
    center: Vec<T>,
    norm: NormSpec,
    error: Option<io::Error>,
}

impl<W: Write, T: Scalar> TraceWriter<W, T> {
    pub fn new(mut out: W, center: &[T], norm: NormSpec) -> io::Result<Self> {
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(TraceWriter { out, center: center.to_vec(), norm, error: None })
    }

    /// Records an event. The first I/O error is kept and later rows dropped.
    pub fn record(&mut self, ev: &EventRecord<'_, T>) {
        if self.error.is_some() {
            return;
        }
        let x = crate::analysis::total_disagreement_slice(ev.config, &self.center, self.norm);
        let spread = ev.config.max_pair_distance(self.norm);
        let row = writeln!(
            self.out,
            "{},{},{},{},{}",
            ev.event,
            sig17(ev.time),
            ev.vertex,
            sig17(x.to_f64_lossy()),
            sig17(spread.to_f64_lossy())
        );
        if let Err(e) = row {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}
