//! Porter suffix stripper for English.
//!
//! Follows the reference implementation of the 1980 algorithm, including the
//! two corrections its author folded into the distributed code: step 2 maps
//! "bli" to "ble" (the original text had "abli" to "able") and additionally
//! maps "logi" to "log". Words of length two or less are returned unchanged,
//! as in the reference code.
//!
//! The stemmer is the last stage of [`crate::text::clean_text`]; by the time a
//! token reaches it the token is lowercase ASCII letters only.

use alloc::string::String;
use alloc::vec::Vec;

/// Stems one lowercase ASCII word.
///
/// Non-ASCII input is returned unchanged rather than mangled.
pub fn stem(word: &str) -> String {
    if !word.bytes().all(|b| b.is_ascii()) {
        return String::from(word);
    }
    let mut buf: Vec<u8> = word.bytes().collect();
    let len = stem_in_place(&mut buf);
    buf.truncate(len);
    debug_assert!(buf.is_ascii());
    String::from_utf8(buf).unwrap_or_else(|_| String::from(word))
}

/// Stems the word in `b` and returns the length of the stemmed prefix.
fn stem_in_place(b: &mut [u8]) -> usize {
    let n = b.len();
    if n <= 2 {
        return n;
    }
    let mut p = Stemmer { b, k: (n - 1) as i32, j: 0 };
    p.step1ab();
    p.step1c();
    p.step2();
    p.step3();
    p.step4();
    p.step5();
    (p.k + 1) as usize
}

struct Stemmer<'a> {
    b: &'a mut [u8],
    /// Index of the last letter of the current word.
    k: i32,
    /// End of the stem, set by `ends`.
    j: i32,
}

impl Stemmer<'_> {
    fn at(&self, i: i32) -> u8 {
        self.b[i as usize]
    }

    fn cons(&self, i: i32) -> bool {
        match self.at(i) {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => {
                if i == 0 {
                    true
                } else {
                    !self.cons(i - 1)
                }
            }
            _ => true,
        }
    }

    /// Number of consonant-vowel sequences in `b[0..=j]`.
    fn m(&self) -> i32 {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn doublec(&self, j: i32) -> bool {
        j >= 1 && self.at(j) == self.at(j - 1) && self.cons(j)
    }

    /// consonant - vowel - consonant ending at `i`, where the final consonant
    /// is not w, x or y. Signals a short stem like "hop" or "crime" (minus e).
    fn cvc(&self, i: i32) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.at(i), b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &[u8]) -> bool {
        let l = s.len() as i32;
        if l > self.k + 1 {
            return false;
        }
        if s[(l - 1) as usize] != self.at(self.k) {
            return false;
        }
        let start = (self.k - l + 1) as usize;
        if &self.b[start..=self.k as usize] != s {
            return false;
        }
        self.j = self.k - l;
        true
    }

    fn set_to(&mut self, s: &[u8]) {
        for (i, &c) in s.iter().enumerate() {
            self.b[(self.j + 1) as usize + i] = c;
        }
        self.k = self.j + s.len() as i32;
    }

    fn r(&mut self, s: &[u8]) {
        if self.m() > 0 {
            self.set_to(s);
        }
    }

    /// Plurals and -ed / -ing.
    fn step1ab(&mut self) {
        if self.at(self.k) == b's' {
            if self.ends(b"sses") {
                self.k -= 2;
            } else if self.ends(b"ies") {
                self.set_to(b"i");
            } else if self.at(self.k - 1) != b's' {
                self.k -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.m() > 0 {
                self.k -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing")) && self.vowel_in_stem() {
            self.k = self.j;
            if self.ends(b"at") {
                self.set_to(b"ate");
            } else if self.ends(b"bl") {
                self.set_to(b"ble");
            } else if self.ends(b"iz") {
                self.set_to(b"ize");
            } else if self.doublec(self.k) {
                self.k -= 1;
                if matches!(self.at(self.k), b'l' | b's' | b'z') {
                    self.k += 1;
                }
            } else if self.m() == 1 && self.cvc(self.k) {
                self.set_to(b"e");
            }
        }
    }

    /// Terminal y to i when there is another vowel in the stem.
    fn step1c(&mut self) {
        if self.ends(b"y") && self.vowel_in_stem() {
            self.b[self.k as usize] = b'i';
        }
    }

    /// Double suffixes: -ization, -ational and friends map to single ones.
    fn step2(&mut self) {
        if self.k < 1 {
            return;
        }
        match self.at(self.k - 1) {
            b'a' => {
                if self.ends(b"ational") {
                    self.r(b"ate");
                } else if self.ends(b"tional") {
                    self.r(b"tion");
                }
            }
            b'c' => {
                if self.ends(b"enci") {
                    self.r(b"ence");
                } else if self.ends(b"anci") {
                    self.r(b"ance");
                }
            }
            b'e' => {
                if self.ends(b"izer") {
                    self.r(b"ize");
                }
            }
            b'l' => {
                if self.ends(b"bli") {
                    self.r(b"ble");
                } else if self.ends(b"alli") {
                    self.r(b"al");
                } else if self.ends(b"entli") {
                    self.r(b"ent");
                } else if self.ends(b"eli") {
                    self.r(b"e");
                } else if self.ends(b"ousli") {
                    self.r(b"ous");
                }
            }
            b'o' => {
                if self.ends(b"ization") {
                    self.r(b"ize");
                } else if self.ends(b"ation") {
                    self.r(b"ate");
                } else if self.ends(b"ator") {
                    self.r(b"ate");
                }
            }
            b's' => {
                if self.ends(b"alism") {
                    self.r(b"al");
                } else if self.ends(b"iveness") {
                    self.r(b"ive");
                } else if self.ends(b"fulness") {
                    self.r(b"ful");
                } else if self.ends(b"ousness") {
                    self.r(b"ous");
                }
            }
            b't' => {
                if self.ends(b"aliti") {
                    self.r(b"al");
                } else if self.ends(b"iviti") {
                    self.r(b"ive");
                } else if self.ends(b"biliti") {
                    self.r(b"ble");
                }
            }
            b'g' => {
                if self.ends(b"logi") {
                    self.r(b"log");
                }
            }
            _ => {}
        }
    }

    /// -ic-, -full, -ness and similar.
    fn step3(&mut self) {
        match self.at(self.k) {
            b'e' => {
                if self.ends(b"icate") {
                    self.r(b"ic");
                } else if self.ends(b"ative") {
                    self.r(b"");
                } else if self.ends(b"alize") {
                    self.r(b"al");
                }
            }
            b'i' => {
                if self.ends(b"iciti") {
                    self.r(b"ic");
                }
            }
            b'l' => {
                if self.ends(b"ical") {
                    self.r(b"ic");
                } else if self.ends(b"ful") {
                    self.r(b"");
                }
            }
            b's' => {
                if self.ends(b"ness") {
                    self.r(b"");
                }
            }
            _ => {}
        }
    }

    /// -ant, -ence and the other suffixes dropped when the stem is long.
    fn step4(&mut self) {
        if self.k < 1 {
            return;
        }
        match self.at(self.k - 1) {
            b'a' => {
                if !self.ends(b"al") {
                    return;
                }
            }
            b'c' => {
                if !self.ends(b"ance") && !self.ends(b"ence") {
                    return;
                }
            }
            b'e' => {
                if !self.ends(b"er") {
                    return;
                }
            }
            b'i' => {
                if !self.ends(b"ic") {
                    return;
                }
            }
            b'l' => {
                if !self.ends(b"able") && !self.ends(b"ible") {
                    return;
                }
            }
            b'n' => {
                if !self.ends(b"ant")
                    && !self.ends(b"ement")
                    && !self.ends(b"ment")
                    && !self.ends(b"ent")
                {
                    return;
                }
            }
            b'o' => {
                let ion = self.ends(b"ion") && self.j >= 0 && matches!(self.at(self.j), b's' | b't');
                if !ion && !self.ends(b"ou") {
                    return;
                }
            }
            b's' => {
                if !self.ends(b"ism") {
                    return;
                }
            }
            b't' => {
                if !self.ends(b"ate") && !self.ends(b"iti") {
                    return;
                }
            }
            b'u' => {
                if !self.ends(b"ous") {
                    return;
                }
            }
            b'v' => {
                if !self.ends(b"ive") {
                    return;
                }
            }
            b'z' => {
                if !self.ends(b"ize") {
                    return;
                }
            }
            _ => return,
        }
        if self.m() > 1 {
            self.k = self.j;
        }
    }

    /// Final -e removal and -ll reduction.
    fn step5(&mut self) {
        self.j = self.k;
        if self.at(self.k) == b'e' {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.at(self.k) == b'l' && self.doublec(self.k) && self.m() > 1 {
            self.k -= 1;
        }
    }
}
