use rand::Rng;

/// Zipf distribution over ranks `1..=n` with `P(k) ∝ k^-alpha`, sampled by
/// inverting a precomputed CDF.
#[derive(Debug, Clone)]
pub struct ZipfTable {
    cdf: Vec<f64>,
}

impl ZipfTable {
    pub fn new(n: usize, alpha: f64) -> Self {
        assert!(n >= 1, "zipf support must be non-empty");
        assert!(alpha >= 0.0, "zipf exponent must be non-negative");
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).powf(-alpha);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        ZipfTable { cdf }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn pmf(&self, rank: usize) -> f64 {
        match rank {
            0 => 0.0,
            1 => self.cdf[0],
            k if k <= self.cdf.len() => self.cdf[k - 1] - self.cdf[k - 2],
            _ => 0.0,
        }
    }

    /// A rank in `1..=n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1) + 1
    }
}

/// One draw from Zipf(`n`, `alpha`). Builds the table each call; keep a
/// [`ZipfTable`] around for repeated sampling.
pub fn zipf_sample<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> usize {
    ZipfTable::new(n, alpha).sample(rng)
}
