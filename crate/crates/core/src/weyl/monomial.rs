use std::fmt;

/// Largest supported base dimension.
pub const MAX_DIM: usize = 4;

/// `x^a y^b θ^s ℏ^h t^τ`. Bit `i` of `forms` is the odd generator `θ^{i+1}`;
/// the subset is read in ascending order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    pub base: [i16; MAX_DIM],
    pub fiber: [u8; MAX_DIM],
    pub forms: u8,
    pub hbar: u8,
    pub t: u8,
}

impl Monomial {
    pub const fn one() -> Self {
        Monomial {
            base: [0; MAX_DIM],
            fiber: [0; MAX_DIM],
            forms: 0,
            hbar: 0,
            t: 0,
        }
    }

    pub fn base_var(i: usize, exp: i16) -> Self {
        let mut m = Self::one();
        m.base[i] = exp;
        m
    }

    pub fn fiber_var(i: usize) -> Self {
        let mut m = Self::one();
        m.fiber[i] = 1;
        m
    }

    pub fn theta(i: usize) -> Self {
        let mut m = Self::one();
        m.forms = 1 << i;
        m
    }

    pub fn hbar(k: u8) -> Self {
        let mut m = Self::one();
        m.hbar = k;
        m
    }

    pub fn fiber_degree(&self) -> u32 {
        self.fiber.iter().map(|&b| b as u32).sum()
    }

    pub fn form_degree(&self) -> u32 {
        self.forms.count_ones()
    }

    /// Filtration weight `2h + |b|`.
    pub fn weight(&self) -> u32 {
        2 * self.hbar as u32 + self.fiber_degree()
    }

    pub fn has_fiber(&self) -> bool {
        self.fiber.iter().any(|&b| b != 0)
    }

    pub fn is_base_only(&self) -> bool {
        !self.has_fiber() && self.forms == 0
    }

    /// Product of two monomials with the Koszul sign of merging the odd parts.
    /// Returns `None` when a θ repeats. The sign is `true` for negative.
    #[inline]
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        if self.forms & other.forms != 0 {
            return None;
        }
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.base[i] = self.base[i] + other.base[i];
            out.fiber[i] = self.fiber[i] + other.fiber[i];
        }
        out.forms = self.forms | other.forms;
        out.hbar = self.hbar + other.hbar;
        out.t = self.t + other.t;
        Some((out, merge_sign(self.forms, other.forms)))
    }

    /// The non-odd part of the monomial (drops θ's).
    pub fn even_part(&self) -> Monomial {
        let mut m = *self;
        m.forms = 0;
        m
    }
}

/// Parity of the permutation sorting the concatenation of two disjoint
/// ascending subsets: the number of pairs `(i in left, j in right)` with `i > j`.
#[inline]
pub fn merge_sign(left: u8, right: u8) -> bool {
    let mut parity = 0u32;
    let mut r = right;
    while r != 0 {
        let j = r.trailing_zeros();
        // elements of `left` above j
        parity += (left >> (j + 1)).count_ones();
        r &= r - 1;
    }
    parity % 2 == 1
}

/// Number of generators in `forms` strictly below index `i`.
#[inline]
pub fn count_below(forms: u8, i: usize) -> u32 {
    (forms & ((1u8 << i) - 1)).count_ones()
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &a) in self.base.iter().enumerate() {
            if a != 0 {
                parts.push(power(&format!("x{}", i + 1), a as i64));
            }
        }
        for (i, &b) in self.fiber.iter().enumerate() {
            if b != 0 {
                parts.push(power(&format!("y{}", i + 1), b as i64));
            }
        }
        for i in 0..MAX_DIM {
            if self.forms & (1 << i) != 0 {
                parts.push(format!("th{}", i + 1));
            }
        }
        if self.hbar != 0 {
            parts.push(power("h", self.hbar as i64));
        }
        if self.t != 0 {
            parts.push(power("t", self.t as i64));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

fn power(name: &str, e: i64) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{e}")
    }
}
