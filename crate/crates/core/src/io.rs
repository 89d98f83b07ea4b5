//! File-format helpers: fixed-width float formatting and a small JSON writer.
//!
//! Artifacts pin floats to 17 significant digits so that identical runs are
//! byte-identical and values round-trip exactly through f64.

use std::fmt::Write as _;

/// 17 significant digits, scientific notation. Round-trips any finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_complex(re: f64, im: f64) -> String {
    format!("{},{}", fmt_f64(re), fmt_f64(im))
}

/// Streaming JSON writer with the crate's float convention. Only what the
/// file formats need: objects, arrays, strings, numbers.
pub struct JsonWriter {
    out: String,
    need_comma: Vec<bool>,
}

impl JsonWriter {
    pub fn new() -> Self {
        JsonWriter {
            out: String::new(),
            need_comma: vec![false],
        }
    }

    fn pre_value(&mut self) {
        if let Some(last) = self.need_comma.last_mut() {
            if *last {
                self.out.push(',');
            }
            *last = true;
        }
    }

    pub fn begin_object(&mut self) {
        self.pre_value();
        self.out.push('{');
        self.need_comma.push(false);
    }

    pub fn end_object(&mut self) {
        self.need_comma.pop();
        self.out.push('}');
    }

    pub fn begin_array(&mut self) {
        self.pre_value();
        self.out.push('[');
        self.need_comma.push(false);
    }

    pub fn end_array(&mut self) {
        self.need_comma.pop();
        self.out.push(']');
    }

    /// Object key; the next emitted value is its payload.
    pub fn field(&mut self, name: &str) {
        if let Some(last) = self.need_comma.last_mut() {
            if *last {
                self.out.push(',');
            }
            *last = false;
        }
        self.push_escaped(name);
        self.out.push(':');
    }

    pub fn string(&mut self, s: &str) {
        self.pre_value();
        self.push_escaped(s);
    }

    pub fn number_f64(&mut self, x: f64) {
        self.pre_value();
        let _ = write!(self.out, "{x:.16e}");
    }

    pub fn number_usize(&mut self, x: usize) {
        self.pre_value();
        let _ = write!(self.out, "{x}");
    }

    fn push_escaped(&mut self, s: &str) {
        self.out.push('"');
        for ch in s.chars() {
            match ch {
                '"' => self.out.push_str("\\\""),
                '\\' => self.out.push_str("\\\\"),
                '\n' => self.out.push_str("\\n"),
                '\t' => self.out.push_str("\\t"),
                '\r' => self.out.push_str("\\r"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(self.out, "\\u{:04x}", c as u32);
                }
                c => self.out.push(c),
            }
        }
        self.out.push('"');
    }

    pub fn finish(mut self) -> String {
        self.out.push('\n');
        self.out
    }
}

impl Default for JsonWriter {
    fn default() -> Self {
        Self::new()
    }
}
