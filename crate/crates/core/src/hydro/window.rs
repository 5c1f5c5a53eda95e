use serde::Serialize;

/// A finite stretch of lattice points `first, first + 1, ...` closed into
/// a ring; lattice point `z` sits at macroscopic position `z / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MacroWindow {
    pub first: i64,
    pub sites: usize,
    pub scale: usize,
}

impl MacroWindow {
    /// Smallest window whose lattice points cover `[a, b]` at this scale.
    pub fn covering(a: f64, b: f64, scale: usize) -> Self {
        let n = scale as f64;
        let first = (a * n).floor() as i64;
        let last = (b * n).ceil() as i64;
        MacroWindow {
            first,
            sites: (last - first + 1).max(1) as usize,
            scale,
        }
    }

    #[inline]
    pub fn x(&self, site: usize) -> f64 {
        (self.first + site as i64) as f64 / self.scale as f64
    }

    /// Site indices whose position lies in `[a, b]`.
    pub fn sites_in(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let n = self.scale as f64;
        let lo = ((a * n).ceil() as i64 - self.first).clamp(0, self.sites as i64) as usize;
        let hi = ((b * n).floor() as i64 - self.first + 1).clamp(0, self.sites as i64) as usize;
        lo..hi.max(lo)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x(0), self.x(self.sites - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_window() {
        let w = MacroWindow::covering(-1.0, 1.0, 10);
        assert_eq!(w.first, -10);
        assert_eq!(w.sites, 21);
        assert_eq!(w.x(10), 0.0);
        assert_eq!(w.sites_in(0.0, 0.5), 10..16);
        assert_eq!(w.sites_in(-5.0, 5.0), 0..21);
        assert_eq!(w.span(), (-1.0, 1.0));
    }
}
