//! Harmonic spectra from dipole-acceleration records and the even-to-odd
//! ratio `eta`.

use std::io::Write;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::tdse::DipoleSignal;
use crate::{Complex, Real};

/// Half-width (in harmonic orders) of the band integrated per harmonic.
pub const HARMONIC_HALF_WIDTH: f64 = 0.25;
/// Zero-padding factor applied on top of the next power of two.
pub const PADDING_FACTOR: usize = 4;

/// Time window applied before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window<T> {
    /// Hann window over the flat top of the probe envelope.
    #[default]
    HannFlatTop,
    /// Hann window over the whole record.
    HannFull,
    /// Hann window over an explicit `[start, end]`.
    HannInterval(T, T),
    /// No taper.
    Rectangular,
}

/// The window as actually applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpan<T> {
    pub kind: Window<T>,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> WindowSpan<T> {
    pub fn weight(&self, t: T) -> T {
        if t < self.t_start || t > self.t_end {
            return T::zero();
        }
        match self.kind {
            Window::Rectangular => T::one(),
            _ => {
                let phase = T::TAU() * (t - self.t_start) / (self.t_end - self.t_start);
                T::lit(0.5) * (T::one() - phase.cos())
            }
        }
    }
}

/// One-sided spectrum of a windowed acceleration record.
///
/// `intensity` is normalized so that `sum(intensity) * d_omega` equals
/// `sum(|w a|^2) * dt` (Parseval).
#[derive(Debug, Clone, PartialEq)]
pub struct HhgSpectrum<T> {
    /// Frequency axis in harmonic orders, `omega / w0`.
    pub orders: Vec<T>,
    pub amplitudes: Vec<Complex<T>>,
    pub intensity: Vec<T>,
    /// Angular-frequency spacing (a.u.).
    pub d_omega: T,
    pub carrier_frequency: T,
    pub window: WindowSpan<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicIntensity<T> {
    pub order: u32,
    pub intensity: T,
    pub half_width: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFlag {
    Ok,
    /// Both odd neighbours vanish; `eta` is reported as infinity.
    PureEven,
    /// All three harmonics vanish; `eta` is reported as zero.
    NoSignal,
}

impl std::fmt::Display for RatioFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RatioFlag::Ok => "ok",
            RatioFlag::PureEven => "pure_even",
            RatioFlag::NoSignal => "no_signal",
        })
    }
}

/// Even harmonic over the mean of its two odd neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvenOddPoint<T> {
    pub order: u32,
    pub eta: T,
    pub even_intensity: T,
    pub odd_average: T,
    pub flag: RatioFlag,
}

impl<T: Real> HhgSpectrum<T> {
    pub fn max_order(&self) -> T {
        *self.orders.last().unwrap_or(&T::zero())
    }

    pub fn d_order(&self) -> T {
        self.d_omega / self.carrier_frequency
    }

    /// `sum(intensity) * d_omega`.
    pub fn total_energy(&self) -> T {
        self.intensity.iter().copied().sum::<T>() * self.d_omega
    }

    /// Trapezoidal integral of the intensity over `[lo, hi]` in order units.
    pub fn integrate(&self, lo: T, hi: T) -> T {
        let h = self.d_order();
        let value_at = |order: T| -> T {
            let pos = order / h;
            let k = pos.floor().to_usize().unwrap_or(0).min(self.intensity.len() - 2);
            let frac = pos - T::from_usize_lossy(k);
            self.intensity[k] * (T::one() - frac) + self.intensity[k + 1] * frac
        };
        let first = (lo / h).ceil().to_usize().unwrap_or(0);
        let last = (hi / h).floor().to_usize().unwrap_or(0).min(self.intensity.len() - 1);
        if first > last {
            return (value_at(lo) + value_at(hi)) / T::lit(2.0) * (hi - lo);
        }
        let mut sum = T::zero();
        let mut prev_x = lo;
        let mut prev_y = value_at(lo);
        for k in first..=last {
            let x = T::from_usize_lossy(k) * h;
            let y = self.intensity[k];
            sum = sum + (prev_y + y) / T::lit(2.0) * (x - prev_x);
            prev_x = x;
            prev_y = y;
        }
        let y_hi = value_at(hi);
        sum + (prev_y + y_hi) / T::lit(2.0) * (hi - prev_x)
    }

    /// `order,intensity` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "order,intensity")?;
        for (o, i) in self.orders.iter().zip(&self.intensity) {
            writeln!(w, "{:.6},{:.10e}", o, i)?;
        }
        Ok(())
    }
}

fn resolve_window<T: Real>(signal: &DipoleSignal<T>, window: Window<T>) -> Result<WindowSpan<T>> {
    let (t_start, t_end) = match window {
        Window::HannFlatTop => signal
            .meta
            .flat_top
            .ok_or_else(|| domain("signal carries no flat-top interval"))?,
        Window::HannFull | Window::Rectangular => (signal.t0, signal.end_time()),
        Window::HannInterval(a, b) => (a, b),
    };
    if !(t_end > t_start) {
        return Err(domain("window interval is empty"));
    }
    Ok(WindowSpan {
        kind: window,
        t_start,
        t_end,
    })
}

/// Windowed, zero-padded FFT of the acceleration with the frequency axis in
/// harmonic orders.
pub fn compute_spectrum<T: Real>(signal: &DipoleSignal<T>, window: Window<T>) -> Result<HhgSpectrum<T>> {
    if signal.is_empty() {
        return Err(domain("empty signal"));
    }
    let w0 = signal.meta.carrier_frequency;
    if !(w0 > T::zero()) {
        return Err(domain("signal has no positive carrier frequency"));
    }
    let period = T::TAU() / w0;
    if signal.end_time() - signal.t0 < T::lit(2.0) * period {
        return Err(domain("signal shorter than two optical cycles"));
    }
    let span = resolve_window(signal, window)?;

    let m = signal.len().next_power_of_two() * PADDING_FACTOR;
    let zero = Complex::new(T::zero(), T::zero());
    let mut buf = vec![zero; m];
    for (n, (&a, slot)) in signal.acceleration.iter().zip(buf.iter_mut()).enumerate() {
        *slot = Complex::new(a * span.weight(signal.time(n)), T::zero());
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let dt = signal.dt;
    let d_omega = T::TAU() / (T::from_usize_lossy(m) * dt);
    let half = m / 2;
    let mut orders = Vec::with_capacity(half + 1);
    let mut amplitudes = Vec::with_capacity(half + 1);
    let mut intensity = Vec::with_capacity(half + 1);
    let norm = T::TAU().recip();
    for (k, &x) in buf.iter().take(half + 1).enumerate() {
        let amp = x * dt;
        let fold = if k == 0 || k == half { T::one() } else { T::lit(2.0) };
        orders.push(T::from_usize_lossy(k) * d_omega / w0);
        amplitudes.push(amp);
        intensity.push(fold * amp.norm_sqr() * norm);
    }
    Ok(HhgSpectrum {
        orders,
        amplitudes,
        intensity,
        d_omega,
        carrier_frequency: w0,
        window: span,
    })
}

/// `sum(|w a|^2) * dt`, the time-domain side of the Parseval identity.
pub fn windowed_energy<T: Real>(signal: &DipoleSignal<T>, window: Window<T>) -> Result<T> {
    let span = resolve_window(signal, window)?;
    Ok(signal
        .acceleration
        .iter()
        .enumerate()
        .map(|(n, &a)| (a * span.weight(signal.time(n))).powi(2))
        .sum::<T>()
        * signal.dt)
}

/// Intensity integrated over `order +- 0.25`.
pub fn harmonic_intensity<T: Real>(spec: &HhgSpectrum<T>, order: u32) -> Result<HarmonicIntensity<T>> {
    harmonic_intensity_with(spec, order, T::lit(HARMONIC_HALF_WIDTH))
}

pub fn harmonic_intensity_with<T: Real>(
    spec: &HhgSpectrum<T>,
    order: u32,
    half_width: T,
) -> Result<HarmonicIntensity<T>> {
    let n = T::from_u32(order).unwrap();
    let (lo, hi) = (n - half_width, n + half_width);
    if lo < T::zero() || hi > spec.max_order() || spec.intensity.len() < 2 {
        return Err(domain(format!(
            "harmonic {order} outside spectral range [0, {}]",
            spec.max_order()
        )));
    }
    Ok(HarmonicIntensity {
        order,
        intensity: spec.integrate(lo, hi),
        half_width,
    })
}

/// `eta = I(N) / ((I(N-1) + I(N+1)) / 2)` for even `N`.
pub fn even_to_odd_ratio<T: Real>(spec: &HhgSpectrum<T>, even_order: u32) -> Result<EvenOddPoint<T>> {
    if even_order % 2 != 0 || even_order < 2 {
        return Err(domain(format!("{even_order} is not an even order >= 2")));
    }
    let even = harmonic_intensity(spec, even_order)?.intensity;
    let below = harmonic_intensity(spec, even_order - 1)?.intensity;
    let above = harmonic_intensity(spec, even_order + 1)?.intensity;
    Ok(ratio_point(even_order, even, (below + above) / T::lit(2.0)))
}

pub(crate) fn ratio_point<T: Real>(order: u32, even: T, odd_average: T) -> EvenOddPoint<T> {
    let (eta, flag) = if odd_average > T::zero() {
        (even / odd_average, RatioFlag::Ok)
    } else if even > T::zero() {
        (T::infinity(), RatioFlag::PureEven)
    } else {
        (T::zero(), RatioFlag::NoSignal)
    };
    EvenOddPoint {
        order,
        eta,
        even_intensity: even,
        odd_average,
        flag,
    }
}

/// Semiclassical cutoff `(Ip + 3.17 Up) / w0` in harmonic orders.
pub fn cutoff_order<T: Real>(peak_field: T, omega: T, ip: T) -> T {
    let up = crate::units::ponderomotive_energy(peak_field, omega);
    (ip + T::lit(3.17) * up) / omega
}

/// Largest even integer not above `order`.
pub fn largest_even_at_most<T: Real>(order: T) -> u32 {
    let floor = order.floor().to_u32().unwrap_or(0);
    floor - floor % 2
}

/// Default monitoring point: the largest even order at or below the cutoff.
pub fn monitored_even_order<T: Real>(peak_field: T, omega: T, ip: T) -> u32 {
    largest_even_at_most(cutoff_order(peak_field, omega, ip))
}

/// Per-order intensities `I(N)` for `N` in `first..=last`.
pub fn harmonic_comb<T: Real>(spec: &HhgSpectrum<T>, first: u32, last: u32) -> Result<Vec<HarmonicIntensity<T>>> {
    (first..=last).map(|n| harmonic_intensity(spec, n)).collect()
}

/// Plateau cutoff located from the odd-harmonic comb above `start_order`.
///
/// Each odd order is represented by the largest of itself and its two
/// neighbours. The comb ends where it falls for good `depth_decades` below
/// the median of the orders before it. A two-segment (plateau, exponential
/// fall) line is fitted to the top 30% of orders below that end; the cutoff
/// is the strongest odd harmonic in the last 5% of orders before the knee,
/// i.e. the caustic where the short and long orbits merge.
pub fn plateau_cutoff<T: Real>(spec: &HhgSpectrum<T>, start_order: u32, depth_decades: T) -> Result<T> {
    let max = (spec.max_order() - T::lit(1.0)).floor().to_u32().unwrap_or(0);
    let first = start_order | 1;
    if max <= first + 8 {
        return Err(domain("spectrum too short for a cutoff estimate"));
    }
    let raw: Vec<T> = (first - 1..=max + 1)
        .map(|n| harmonic_intensity(spec, n).map(|h| h.intensity).unwrap_or(T::zero()))
        .collect();
    // envelope over neighbouring orders smooths interference dips
    let comb: Vec<(T, T)> = (1..raw.len() - 1)
        .step_by(2)
        .map(|k| {
            let i = raw[k - 1].max(raw[k]).max(raw[k + 1]);
            (T::from_usize_lossy(k) + T::from_u32(first - 1).unwrap(), i.max(T::min_positive_value()).log10())
        })
        .collect();
    let mut suffix_max = vec![T::neg_infinity(); comb.len() + 1];
    for idx in (0..comb.len()).rev() {
        suffix_max[idx] = suffix_max[idx + 1].max(comb[idx].1);
    }
    let mut sorted: Vec<T> = Vec::with_capacity(comb.len());
    let mut end = comb.len();
    for (idx, &(_, l)) in comb.iter().enumerate() {
        if idx >= 4 {
            let median = sorted[sorted.len() / 2];
            if suffix_max[idx] < median - depth_decades {
                end = idx + 1;
                break;
            }
        }
        let at = sorted.partition_point(|&v| v < l);
        sorted.insert(at, l);
    }
    let end_order = comb[end - 1].0;
    let fit_start = comb.partition_point(|&(n, _)| n < end_order * T::lit(0.7));
    let fit = &comb[fit_start..end];
    if fit.len() < 6 {
        return Err(domain("no plateau before the spectral fall-off"));
    }
    let knee = (2..fit.len() - 2)
        .map(|k| (k, hinge_residual(fit, k)))
        .fold((2, T::infinity()), |best, (k, r)| if r < best.1 { (k, r) } else { best })
        .0;
    let knee_order = fit[knee].0;
    let reach = (knee_order / T::lit(20.0)).max(T::lit(4.0));
    let cutoff = fit[..=knee]
        .iter()
        .filter(|&&(n, _)| n + reach >= knee_order)
        .fold((knee_order, T::neg_infinity()), |best, &(n, l)| if l > best.1 { (n, l) } else { best })
        .0;
    Ok(cutoff)
}

/// Squared residual of the continuous two-segment line through `pts` with
/// its corner at `pts[k].0`.
fn hinge_residual<T: Real>(pts: &[(T, T)], k: usize) -> T {
    let c = pts[k].0;
    // basis: 1, n, max(n - c, 0); normal equations by hand
    let mut m = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    for &(n, l) in pts {
        let b = [T::one(), n - c, (n - c).max(T::zero())];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + b[i] * b[j];
            }
            rhs[i] = rhs[i] + b[i] * l;
        }
    }
    let Some(coef) = solve3(m, rhs) else {
        return T::infinity();
    };
    pts.iter()
        .map(|&(n, l)| {
            let f = coef[0] + coef[1] * (n - c) + coef[2] * (n - c).max(T::zero());
            (f - l) * (f - l)
        })
        .sum()
}

fn solve3<T: Real>(mut m: [[T; 3]; 3], mut r: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() <= T::epsilon() {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for j in col..3 {
                m[row][j] = m[row][j] - f * m[col][j];
            }
            r[row] = r[row] - f * r[col];
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let s = (i + 1..3).fold(r[i], |acc, j| acc - m[i][j] * x[j]);
        x[i] = s / m[i][i];
    }
    Some(x)
}
