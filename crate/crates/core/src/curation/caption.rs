use super::CurationError;

/// Prefix of the motion phrase appended to every caption.
pub const FLOW_PHRASE: &str = "The optical flow is";

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Lowercase English cardinal for `0..=999`, e.g. `"one hundred twenty-one"`.
pub fn number_to_words(n: u32) -> Result<String, CurationError> {
    if n > 999 {
        return Err(CurationError::NumberOutOfRange(n as u64));
    }
    let below_hundred = |n: u32| -> String {
        match n {
            0..=19 => ONES[n as usize].to_string(),
            _ if n.is_multiple_of(10) => TENS[(n / 10) as usize].to_string(),
            _ => format!("{}-{}", TENS[(n / 10) as usize], ONES[(n % 10) as usize]),
        }
    };
    Ok(match (n / 100, n % 100) {
        (0, rest) => below_hundred(rest),
        (h, 0) => format!("{} hundred", ONES[h as usize]),
        (h, rest) => format!("{} hundred {}", ONES[h as usize], below_hundred(rest)),
    })
}

/// Appends `"The optical flow is <words>."` with the magnitude rounded to
/// the nearest integer, ties to even.
pub fn augment_caption(caption: &str, magnitude: f64) -> Result<String, CurationError> {
    if caption.is_empty() {
        return Err(CurationError::EmptyCaption);
    }
    let rounded = magnitude.round_ties_even();
    if !(0.0..=999.0).contains(&rounded) {
        return Err(CurationError::NumberOutOfRange(rounded.max(0.0) as u64));
    }
    let words = number_to_words(rounded as u32)?;
    Ok(format!("{caption} {FLOW_PHRASE} {words}."))
}
