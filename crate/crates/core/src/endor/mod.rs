//! Mixed-state ENDOR: closed-form line positions, spectrum synthesis and
//! coupling extraction.

mod extract;
mod lines;
mod spectrum;
mod table;

pub use extract::{extract_anisotropic, extract_couplings, fit_peaks, ExtractionOptions, PeakFit};
pub use lines::{
    doublet_endor_frequencies, effective_interaction, endor_frequency_aniso, endor_frequency_iso, endor_lines,
    exact_endor_frequency, resonances, resonant_fields, ENDORLine, Resonance,
};
pub use spectrum::{
    comb_centre, comb_width, default_grid, gaussian, parse_transition, synthesize_spectrum, MeasuredSpectrum, Spectrum,
    DEFAULT_LINEWIDTH,
};
pub use table::{CouplingEntry, CouplingTable};
