//! Plain-text demand-bit fixtures and transmission-log serialization.
//!
//! A fixture pins down one delivery instance: the user count, the file size,
//! and every demand bit with its cover set. The format is line oriented;
//! `#` starts a comment and blank lines are skipped:
//!
//! ```text
//! users 5
//! file_bits 4
//! # label  file  bit  intended_user  cover_set
//! a_1      1     1    1              2,4
//! b_1      2     1    2              1,3,5
//! ```
//!
//! All indices are 1-based on disk. The label is `<file stem>_<bit>` where
//! files 1..26 use the stems `a`..`z`; it must agree with the file and bit
//! columns. An empty cover set is written `-`.

use crate::model::{BitRecord, Transmission, TransmissionLog, UserSet, MAX_USERS};
use crate::Error;

/// A parsed delivery instance.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub n_users: usize,
    pub file_size_bits: usize,
    pub bits: Vec<BitRecord>,
}

/// Display label for a bit, e.g. file 0 bit 0 becomes `a_1`.
pub fn bit_label(file: usize, bit_index: usize) -> String {
    if file < 26 {
        format!("{}_{}", (b'a' + file as u8) as char, bit_index + 1)
    } else {
        format!("f{}_{}", file + 1, bit_index + 1)
    }
}

/// Renders a log one slot per line, `+`-joining payload labels and padded
/// zeros, followed by a total line:
///
/// ```text
/// 1: a_1+b_2+0
/// 2: c_1
/// total slots: 2
/// ```
pub fn format_log(log: &TransmissionLog) -> String {
    let mut out = String::new();
    for (i, t) in log.transmissions.iter().enumerate() {
        out.push_str(&format!("{}: ", i + 1));
        let mut parts: Vec<String> = t
            .payload
            .iter()
            .map(|b| bit_label(b.file, b.bit_index))
            .collect();
        parts.extend(std::iter::repeat_n("0".to_string(), t.padded_zero_count));
        out.push_str(&parts.join("+"));
        out.push('\n');
    }
    out.push_str(&format!("total slots: {}\n", log.transmissions.len()));
    out
}

/// Convenience wrapper building the log serialized by [`format_log`].
pub fn log_from_transmissions(
    transmissions: Vec<Transmission>,
    file_size_bits: usize,
) -> TransmissionLog {
    TransmissionLog {
        transmissions,
        file_size_bits,
    }
}

fn parse_index(field: &str, what: &str, line_no: usize) -> Result<usize, Error> {
    field
        .parse::<usize>()
        .ok()
        .filter(|&v| v >= 1)
        .ok_or_else(|| {
            Error::Fixture(format!("line {}: bad {} '{}'", line_no, what, field))
        })
}

/// Parses the fixture format described in the module docs.
pub fn parse_fixture(text: &str) -> Result<Fixture, Error> {
    let mut n_users: Option<usize> = None;
    let mut file_size_bits: Option<usize> = None;
    let mut bits = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["users", v] => {
                let k = parse_index(v, "user count", line_no)?;
                if k > MAX_USERS {
                    return Err(Error::Fixture(format!(
                        "line {}: user count {} exceeds {}",
                        line_no, k, MAX_USERS
                    )));
                }
                n_users = Some(k);
            }
            ["file_bits", v] => {
                file_size_bits = Some(parse_index(v, "file size", line_no)?);
            }
            [label, file, bit, user, cover] => {
                let k = n_users.ok_or_else(|| {
                    Error::Fixture(format!("line {}: record before 'users' directive", line_no))
                })?;
                let f_bits = file_size_bits.ok_or_else(|| {
                    Error::Fixture(format!(
                        "line {}: record before 'file_bits' directive",
                        line_no
                    ))
                })?;
                let file = parse_index(file, "file index", line_no)? - 1;
                let bit_index = parse_index(bit, "bit index", line_no)? - 1;
                if bit_index >= f_bits {
                    return Err(Error::Fixture(format!(
                        "line {}: bit index exceeds file_bits",
                        line_no
                    )));
                }
                let intended_user = parse_index(user, "intended user", line_no)? - 1;
                if intended_user >= k {
                    return Err(Error::Fixture(format!(
                        "line {}: intended user exceeds user count",
                        line_no
                    )));
                }
                let mut cover_set = UserSet::EMPTY;
                if *cover != "-" {
                    for part in cover.split(',') {
                        let u = parse_index(part, "cover user", line_no)? - 1;
                        if u >= k {
                            return Err(Error::Fixture(format!(
                                "line {}: cover user exceeds user count",
                                line_no
                            )));
                        }
                        cover_set = cover_set.with(u);
                    }
                }
                if cover_set.contains(intended_user) {
                    return Err(Error::Fixture(format!(
                        "line {}: intended user inside its own cover set",
                        line_no
                    )));
                }
                if *label != bit_label(file, bit_index) {
                    return Err(Error::Fixture(format!(
                        "line {}: label '{}' does not match file {} bit {}",
                        line_no,
                        label,
                        file + 1,
                        bit_index + 1
                    )));
                }
                bits.push(BitRecord {
                    file,
                    bit_index,
                    intended_user,
                    cover_set,
                });
            }
            _ => {
                return Err(Error::Fixture(format!(
                    "line {}: expected 5 fields or a directive, got '{}'",
                    line_no, line
                )));
            }
        }
    }

    match (n_users, file_size_bits) {
        (Some(n_users), Some(file_size_bits)) => Ok(Fixture {
            n_users,
            file_size_bits,
            bits,
        }),
        _ => Err(Error::Fixture(
            "missing 'users' or 'file_bits' directive".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_walk_the_alphabet() {
        assert_eq!(bit_label(0, 0), "a_1");
        assert_eq!(bit_label(4, 1), "e_2");
        assert_eq!(bit_label(25, 3), "z_4");
        assert_eq!(bit_label(26, 0), "f27_1");
    }

    #[test]
    fn parse_round_trips_a_small_fixture() {
        let text = "\
# demo
users 3
file_bits 2

a_1 1 1 1 2,3
b_2 2 2 2 -
";
        let fx = parse_fixture(text).unwrap();
        assert_eq!(fx.n_users, 3);
        assert_eq!(fx.file_size_bits, 2);
        assert_eq!(fx.bits.len(), 2);
        assert_eq!(fx.bits[0].cover_set.iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(fx.bits[1].cover_set.is_empty());
    }

    #[test]
    fn parse_rejects_bad_records() {
        let ok_header = "users 3\nfile_bits 2\n";
        for bad in [
            "a_1 1 1 1 1,2",     // intended user inside cover
            "a_1 1 1 4 2",       // user out of range
            "a_9 1 9 1 2",       // bit out of range
            "b_1 1 1 1 2",       // label mismatch
            "a_1 1 1 1",         // missing field
            "a_1 1 1 1 2 extra", // trailing field
        ] {
            let text = format!("{}{}\n", ok_header, bad);
            assert!(parse_fixture(&text).is_err(), "accepted: {}", bad);
        }
        assert!(parse_fixture("a_1 1 1 1 2\n").is_err());
        assert!(parse_fixture("users 2\n").is_err());
    }

    #[test]
    fn format_log_prints_slots_and_padding() {
        let log = TransmissionLog {
            transmissions: vec![
                Transmission {
                    payload: vec![BitRecord {
                        file: 1,
                        bit_index: 0,
                        intended_user: 1,
                        cover_set: UserSet::EMPTY.with(0),
                    }],
                    padded_zero_count: 2,
                },
                Transmission {
                    payload: vec![BitRecord {
                        file: 0,
                        bit_index: 1,
                        intended_user: 0,
                        cover_set: UserSet::EMPTY,
                    }],
                    padded_zero_count: 0,
                },
            ],
            file_size_bits: 2,
        };
        assert_eq!(format_log(&log), "1: b_1+0+0\n2: a_2\ntotal slots: 2\n");
    }
}
